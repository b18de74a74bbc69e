"""
Instantiating and sharing MSIs
==============================

Build a catalog of MaaS models, map the CaaS supplies into a virtual pool,
then watch the orchestrator reuse, create, share and decommission MSIs.
"""

from slicing4meta.catalog import Catalog, MaaSModel
from slicing4meta.orchestrator import Orchestrator, ServiceRequest
from slicing4meta.resources import ResourceVector as RV, build_pool

catalog = Catalog([
    MaaSModel("rendering-server", "CaaS", supply=RV(0, 0, 0, 4000)),
    MaaSModel("radio", "CaaS", supply=RV(10_000, 100, 500, 0)),
    MaaSModel("rendering-taas", "TaaS", consumption=RV(0, 0, 0, 400)),
    MaaSModel("transport-taas", "TaaS", consumption=RV(1000, 0, 0, 0)),
    MaaSModel("twin-sync", "TaaS", consumption=RV(500, 40, 200, 0)),
])
pool = build_pool(catalog)
print("pool capacity:", pool.capacity.as_dict())

orch = Orchestrator(catalog, pool, {
    "ARVR": ["rendering-taas", "transport-taas"],
    "DT": ["twin-sync"],
})

# Two AR travellers with the same requirements land on one MSI
for user in ("alice", "bob"):
    d = orch.admit(ServiceRequest(user, "ARVR"))
    print(f"{user}: {d.action} {d.msi_id}")

# A digital-twin user needs a different cluster
carol = orch.admit(ServiceRequest("carol", "DT"))
print(f"carol: {carol.action} {carol.msi_id}")

# The twin borrows the AR MSI's rendering model; no new reservation is made
before = pool.remaining
shared = orch.attach_shared_model("msi-1", carol.msi_id, "rendering-taas")
print("shared rendering-taas:", shared, "| remaining unchanged:", pool.remaining == before)

# When the AR MSI empties, the twin inherits the rendering reservation
orch.depart("alice")
orch.depart("bob")
print("msi-1 state:", orch.msis["msi-1"].state.name)
print("msi-2 owns:", sorted(orch.msis[carol.msi_id].owned))
print("ledger gap:", pool.conservation_error())
