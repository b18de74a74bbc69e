"""
A dynamic virtual-travel run
============================

Poisson arrivals of AR/VR and digital-twin users flow through the full
pipeline: requirement translation, bundle conversion, MSI decisions,
local allocation, monitoring and scaling, and epoch-level prediction.
"""

from pathlib import Path

from slicing4meta.scenario import load_scenario
from slicing4meta.simkernel import run

scenario = load_scenario(Path(__file__).resolve().parents[1] / "scenarios" / "virtual_travel.json")
report = run(scenario)

for key, value in report.summary.items():
    print(f"{key:>15}: {value}")

# Reservation history of each MSI as monitoring scales it
for msi_id, history in report.msi_history.items():
    peak = max(h["reserved"]["rendering"] for h in history)
    print(f"{msi_id}: {len(history)} ledger snapshots, peak rendering {peak:g} K")

scales = [e for e in report.trace if e.get("event") == "scale"]
print(f"{len(scales)} scaling events, first at t={scales[0]['time']} ms" if scales else "no scaling")
