"""
MSI instantiation and management.

The three management functions run in sequence for every service request:

1. ``msmf_translate`` turns a request into service requirements using the
   cluster template;
2. ``vmof_convert`` maps the requirements to the cluster's TaaS bundle and
   its resource demand;
3. ``mmf_decide`` chooses between reusing, modifying or creating an MSI.

``Orchestrator`` owns the live MSIs and applies decisions against a
``Pool``. Every model an MSI holds is backed by one reservation, so a model
shared between MSIs is reserved exactly once.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .catalog import Catalog
from .errors import (
    InsufficientResources,
    InvalidTransition,
    MissingBundle,
    ModelNotAttached,
    UnknownServiceKind,
)
from .resources import IsolationDegree, Pool, ResourceVector, may_share

__all__ = [
    "ServiceKind",
    "LifecycleState",
    "ServiceRequest",
    "ServiceRequirements",
    "SubInstanceRequirements",
    "MSI",
    "Decision",
    "DEFAULT_TEMPLATES",
    "msmf_translate",
    "vmof_convert",
    "requirements_distance",
    "mmf_decide",
    "check_transition",
    "Orchestrator",
]

log = logging.getLogger(__name__)

EPS = 1e-12


class ServiceKind(str, enum.Enum):
    ARVR = "ARVR"
    DT = "DT"


class LifecycleState(enum.IntEnum):
    PREPARATION = 0
    PLANNING = 1
    RUNTIME = 2
    DECOMMISSIONED = 3


@dataclass(frozen=True)
class ServiceRequirements:
    service_kind: ServiceKind
    peak_rate: float  # Mb/s
    reliability: float
    max_latency: float  # ms
    rendering_per_object: float  # K
    isolation: IsolationDegree = IsolationDegree.NONE

    def __post_init__(self):
        if not 0 <= self.reliability <= 1:
            raise ValueError(f"reliability must be in [0, 1], got {self.reliability}")
        for name in ("peak_rate", "max_latency", "rendering_per_object"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        object.__setattr__(self, "service_kind", ServiceKind(self.service_kind))
        object.__setattr__(self, "isolation", IsolationDegree.parse(self.isolation))


# AR/VR figures: 1 Tb/s peak rate, seven-nines reliability, sub-millisecond
# interaction, 20 K per rendered object. The DT template is configuration.
DEFAULT_TEMPLATES: Dict[ServiceKind, ServiceRequirements] = {
    ServiceKind.ARVR: ServiceRequirements(
        ServiceKind.ARVR,
        peak_rate=1e6,
        reliability=0.9999999,
        max_latency=1.0,
        rendering_per_object=20.0,
        isolation=IsolationDegree.NONE,
    ),
    ServiceKind.DT: ServiceRequirements(
        ServiceKind.DT,
        peak_rate=1e3,
        reliability=0.99999,
        max_latency=10.0,
        rendering_per_object=20.0,
        isolation=IsolationDegree.SCHEDULING,
    ),
}


@dataclass(frozen=True)
class ServiceRequest:
    user_id: str
    service_kind: str
    overrides: Mapping[str, object] = field(default_factory=dict)
    request_id: Optional[str] = None


@dataclass(frozen=True)
class SubInstanceRequirements:
    model_ids: Tuple[str, ...]
    demand: ResourceVector
    qoe: ServiceRequirements


@dataclass
class MSI:
    id: str
    cluster: ServiceKind
    requirements: ServiceRequirements
    isolation: IsolationDegree
    state: LifecycleState = LifecycleState.PREPARATION
    # model id -> reservation id held by this MSI
    owned: Dict[str, int] = field(default_factory=dict)
    # model id -> reservation id held by another MSI
    shared: Dict[str, int] = field(default_factory=dict)
    elastic: Optional[int] = None
    members: List[str] = field(default_factory=list)
    monitoring: bool = False

    @property
    def attached(self) -> List[str]:
        return sorted(set(self.owned) | set(self.shared))

    @property
    def live(self) -> bool:
        return self.state is not LifecycleState.DECOMMISSIONED

    @property
    def reservation_ids(self) -> List[int]:
        ids = list(self.owned.values())
        if self.elastic is not None:
            ids.append(self.elastic)
        return ids


@dataclass(frozen=True)
class Decision:
    action: str  # "reuse" | "modify" | "create"
    msi_id: Optional[str] = None
    distance: Optional[float] = None


def msmf_translate(
    request: ServiceRequest,
    templates: Mapping[ServiceKind, ServiceRequirements] = DEFAULT_TEMPLATES,
) -> ServiceRequirements:
    try:
        kind = ServiceKind(request.service_kind)
        template = templates[kind]
    except (ValueError, KeyError):
        raise UnknownServiceKind(request.service_kind) from None
    overrides = dict(request.overrides)
    overrides.pop("service_kind", None)
    return replace(template, **overrides)


def vmof_convert(
    req: ServiceRequirements,
    catalog: Catalog,
    bundles: Mapping[ServiceKind, Sequence[str]],
) -> SubInstanceRequirements:
    # a model appears at most once per MSI
    bundle = tuple(dict.fromkeys(bundles.get(ServiceKind(req.service_kind), ())))
    if not bundle:
        raise MissingBundle(f"no model bundle configured for {req.service_kind.value}")
    demand = ResourceVector.total(catalog.effective_footprint(m) for m in bundle)
    return SubInstanceRequirements(bundle, demand, req)


_DISTANCE_FIELDS = ("peak_rate", "reliability", "max_latency", "rendering_per_object")


def requirements_distance(a: ServiceRequirements, b: ServiceRequirements) -> float:
    """Largest relative difference over the QoE fields."""
    return max(
        abs(x - y) / max(abs(x), abs(y), EPS)
        for x, y in ((getattr(a, f), getattr(b, f)) for f in _DISTANCE_FIELDS)
    )


def _shareable(msi: MSI, isolation: IsolationDegree, catalog: Catalog) -> bool:
    return all(may_share(catalog.get(m), msi.isolation, isolation) for m in msi.attached)


def _reserved(msi: MSI, pool: Pool) -> ResourceVector:
    return ResourceVector.total(pool.reservations[r].amount for r in msi.reservation_ids)


def mmf_decide(
    sub: SubInstanceRequirements,
    msis: Iterable[MSI],
    pool: Pool,
    catalog: Catalog,
    tau: float = 0.1,
) -> Decision:
    """Pick reuse, modify or create for ``sub`` without mutating anything.

    Candidates are Planning/RunTime MSIs of the same cluster whose models
    may be shared at the request's isolation degree, ranked by requirement
    distance then by MSI id. Reuse needs distance <= tau; modify needs
    distance <= 2 * tau and room in the pool to grow the MSI to the
    element-wise max of its reservation and the new demand.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    isolation = sub.qoe.isolation
    ranked = sorted(
        (
            (requirements_distance(m.requirements, sub.qoe), _msi_order(m.id), m)
            for m in msis
            if m.cluster is sub.qoe.service_kind
            and m.state in (LifecycleState.PLANNING, LifecycleState.RUNTIME)
            and _shareable(m, isolation, catalog)
        ),
        key=lambda t: (t[0], t[1]),
    )
    if ranked:
        dist, _, nearest = ranked[0]
        if dist <= tau:
            return Decision("reuse", nearest.id, dist)
        if dist <= 2 * tau:
            current = _reserved(nearest, pool)
            grow = current.maximum(sub.demand) - current
            if grow.fits_in(pool.remaining):
                return Decision("modify", nearest.id, dist)
    if not sub.demand.fits_in(pool.remaining):
        raise InsufficientResources(
            f"cannot instantiate {sub.qoe.service_kind.value} MSI needing "
            f"{sub.demand.as_dict()}; remaining {pool.remaining.as_dict()}"
        )
    return Decision("create")


_FORWARD = {
    LifecycleState.PREPARATION: LifecycleState.PLANNING,
    LifecycleState.PLANNING: LifecycleState.RUNTIME,
    LifecycleState.RUNTIME: LifecycleState.DECOMMISSIONED,
}


def check_transition(current: LifecycleState, target: LifecycleState) -> None:
    if _FORWARD.get(LifecycleState(current)) is not LifecycleState(target):
        raise InvalidTransition(f"{LifecycleState(current).name} -> {LifecycleState(target).name}")


def _msi_order(msi_id: str) -> tuple:
    prefix, _, num = msi_id.rpartition("-")
    return (prefix, int(num)) if num.isdigit() else (msi_id, 0)


class Orchestrator:
    """Owns live MSIs and applies management decisions to a pool."""

    def __init__(
        self,
        catalog: Catalog,
        pool: Pool,
        bundles: Mapping[str, Sequence[str]],
        templates: Optional[Mapping[str, ServiceRequirements]] = None,
        tau: float = 0.1,
    ):
        self.catalog = catalog
        self.pool = pool
        self.bundles = {ServiceKind(k): tuple(v) for k, v in bundles.items()}
        self.templates = dict(DEFAULT_TEMPLATES)
        for k, v in (templates or {}).items():
            self.templates[ServiceKind(k)] = v
        self.tau = tau
        self.msis: Dict[str, MSI] = {}
        self.user_msi: Dict[str, str] = {}
        self.trace: List[dict] = []
        self.counts = {"reuse": 0, "modify": 0, "create": 0, "reject": 0}
        self._ids = itertools.count(1)
        self._requests = itertools.count(1)

    # queries -----------------------------------------------------------

    def live_msis(self) -> List[MSI]:
        return [m for m in self.msis.values() if m.live]

    def cluster(self, kind) -> List[MSI]:
        kind = ServiceKind(kind)
        return [m for m in self.live_msis() if m.cluster is kind]

    def reserved(self, msi_id: str) -> ResourceVector:
        return _reserved(self.msis[msi_id], self.pool)

    def footprint_consistent(self, msi_id: str) -> bool:
        """Reservations owned by the MSI match its owned models plus elastic share."""
        msi = self.msis[msi_id]
        expected = ResourceVector.total(
            self.catalog.effective_footprint(m) for m in msi.owned
        )
        if msi.elastic is not None:
            expected = expected + self.pool.reservations[msi.elastic].amount
        return self.pool.reserved_by(msi_id) == expected

    # management functions ----------------------------------------------

    def admit(self, request: ServiceRequest, time: float = 0.0) -> Decision:
        """Run the three management functions for ``request`` and apply the result.

        Raises ``InsufficientResources`` (after logging a reject event) when
        the request cannot be placed.
        """
        request_id = request.request_id or f"req-{next(self._requests)}"
        req = msmf_translate(request, self.templates)
        sub = vmof_convert(req, self.catalog, self.bundles)
        try:
            decision = mmf_decide(sub, self.live_msis(), self.pool, self.catalog, self.tau)
        except InsufficientResources:
            self.counts["reject"] += 1
            self._emit(time, request_id, "reject", None, request.user_id)
            raise

        if decision.action == "reuse":
            msi = self.msis[decision.msi_id]
        elif decision.action == "modify":
            msi = self.msis[decision.msi_id]
            self._grow_to(msi, self.reserved(msi.id).maximum(sub.demand))
        else:
            msi = self._create(sub)
            decision = Decision("create", msi.id)
        msi.members.append(request.user_id)
        self.user_msi[request.user_id] = msi.id
        self.counts[decision.action] += 1
        self._emit(time, request_id, decision.action, msi.id, request.user_id)
        return decision

    def depart(self, user_id: str, time: float = 0.0) -> Optional[str]:
        """Remove a member; an MSI left without members is decommissioned.

        Returns the id of the decommissioned MSI, if any.
        """
        msi = self.msis[self.user_msi.pop(user_id)]
        msi.members.remove(user_id)
        if msi.members:
            return None
        while msi.state is not LifecycleState.DECOMMISSIONED:
            self.advance_lifecycle(msi.id, LifecycleState(msi.state + 1))
        self._emit(time, None, "decommission", msi.id, user_id)
        return msi.id

    def _create(self, sub: SubInstanceRequirements) -> MSI:
        msi = MSI(
            id=f"msi-{next(self._ids)}",
            cluster=sub.qoe.service_kind,
            requirements=sub.qoe,
            isolation=sub.qoe.isolation,
        )
        reserved = []
        try:
            for model_id in sub.model_ids:
                res = self.pool.reserve(
                    msi.id, self.catalog.effective_footprint(model_id), msi.isolation
                )
                reserved.append(res.id)
                msi.owned[model_id] = res.id
        except InsufficientResources:
            for rid in reserved:
                self.pool.release(rid)
            raise
        self.msis[msi.id] = msi
        self.advance_lifecycle(msi.id, LifecycleState.PLANNING)
        self.advance_lifecycle(msi.id, LifecycleState.RUNTIME)
        return msi

    def _grow_to(self, msi: MSI, target: ResourceVector) -> None:
        extra = target - self.reserved(msi.id)
        if extra.is_zero():
            return
        if msi.elastic is None:
            msi.elastic = self.pool.reserve(msi.id, extra, msi.isolation).id
        else:
            res = self.pool.reservations[msi.elastic]
            self.pool.resize(msi.elastic, res.amount + extra)

    def set_elastic(self, msi_id: str, amount: ResourceVector) -> None:
        """Set the MSI's scaling reservation to ``amount`` (may raise InsufficientResources)."""
        msi = self.msis[msi_id]
        if msi.elastic is None:
            if amount.is_zero():
                return
            msi.elastic = self.pool.reserve(msi.id, amount, msi.isolation).id
        else:
            self.pool.resize(msi.elastic, amount)

    def elastic_amount(self, msi_id: str) -> ResourceVector:
        msi = self.msis[msi_id]
        if msi.elastic is None:
            return ResourceVector()
        return self.pool.reservations[msi.elastic].amount

    def advance_lifecycle(self, msi_id: str, target: LifecycleState) -> None:
        msi = self.msis[msi_id]
        target = LifecycleState(target)
        check_transition(msi.state, target)
        if target is LifecycleState.RUNTIME:
            msi.monitoring = True
        elif target is LifecycleState.DECOMMISSIONED:
            self._release_all(msi)
            msi.monitoring = False
        msi.state = target

    def _release_all(self, msi: MSI) -> None:
        for model_id, rid in sorted(msi.owned.items()):
            heirs = sorted(
                (
                    m
                    for m in self.live_msis()
                    if m.id != msi.id and m.shared.get(model_id) == rid
                ),
                key=lambda m: _msi_order(m.id),
            )
            if heirs:
                # a live sharer inherits the reservation instead of losing the model
                heir = heirs[0]
                self.pool.transfer(rid, heir.id)
                del heir.shared[model_id]
                heir.owned[model_id] = rid
            else:
                self.pool.release(rid)
        msi.owned.clear()
        msi.shared.clear()
        if msi.elastic is not None:
            self.pool.release(msi.elastic)
            msi.elastic = None

    def attach_shared_model(self, msi_a: str, msi_b: str, model_id: str) -> bool:
        """Let ``msi_b`` use ``msi_a``'s instance of ``model_id`` if isolation allows.

        A shared attachment reuses ``msi_a``'s reservation, so the model's
        footprint stays reserved once.
        """
        a, b = self.msis[msi_a], self.msis[msi_b]
        if not (a.live and b.live):
            raise InvalidTransition("both MSIs must be live to share a model")
        if model_id in a.owned:
            rid = a.owned[model_id]
        elif model_id in a.shared:
            rid = a.shared[model_id]
        else:
            raise ModelNotAttached(f"{model_id!r} is not attached to {msi_a}")
        if model_id in b.owned or model_id in b.shared:
            return b.owned.get(model_id, b.shared.get(model_id)) == rid
        if not may_share(self.catalog.get(model_id), a.isolation, b.isolation):
            return False
        b.shared[model_id] = rid
        return True

    def _emit(self, time, request_id, decision, msi_id, user_id) -> None:
        event = {
            "time": time,
            "request_id": request_id,
            "decision": decision,
            "msi_id": msi_id,
            "user_id": user_id,
        }
        self.trace.append(event)
        log.debug("orchestrator %s", event)
