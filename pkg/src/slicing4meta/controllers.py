"""
Two-tier control loop.

The global controller works once per epoch: it smooths per-cluster
arrival counts into a demand prediction and turns that into a designed
cluster capacity, which it feeds back to the local controllers. Local
controllers act on every event: they split a rendering budget over users
and watch per-MSI utilization to scale reservations. Each local decision
is reported to the global controller.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from .errors import DomainError, EmptyHistory, InsufficientResources
from .qoe import DEFAULT_PARAMS, QoEParams, UserSession, even_allocation, mi_max_allocation
from .resources import DIMENSIONS, ResourceVector

__all__ = [
    "Prediction",
    "ScalingPolicy",
    "AllocationPolicy",
    "ScalingAction",
    "predict_demand",
    "design_cluster_capacity",
    "local_allocate",
    "decide_scaling",
    "monitor_and_scale",
    "GlobalController",
    "LocalController",
]

log = logging.getLogger(__name__)


class AllocationPolicy(str, enum.Enum):
    EVEN = "even"
    MIMAX = "mimax"


class ScalingAction(str, enum.Enum):
    SCALE_UP = "ScaleUp"
    SCALE_DOWN = "ScaleDown"
    NONE = "None"


@dataclass(frozen=True)
class Prediction:
    expected: Mapping[str, float]

    def __getitem__(self, kind: str) -> float:
        return self.expected.get(kind, 0.0)


@dataclass(frozen=True)
class ScalingPolicy:
    u_lo: float = 0.2
    u_hi: float = 0.9
    step: ResourceVector = field(default_factory=lambda: ResourceVector(0, 0, 0, 200))

    def __post_init__(self):
        if not 0 < self.u_hi <= 1:
            raise ValueError(f"u_hi must be in (0, 1], got {self.u_hi}")
        if not 0 <= self.u_lo < self.u_hi:
            raise ValueError(f"u_lo must be in [0, u_hi), got {self.u_lo}")


def _ema(series: Sequence[float], alpha: float) -> float:
    estimate = series[0]
    for x in series[1:]:
        estimate = alpha * x + (1 - alpha) * estimate
    return estimate


def predict_demand(history: Mapping[str, Sequence[float]], alpha: float = 0.3) -> Prediction:
    """Exponential moving average of per-epoch arrival counts, one per service kind."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if not history or any(len(v) == 0 for v in history.values()):
        raise EmptyHistory("prediction needs at least one epoch per service kind")
    return Prediction({kind: _ema(list(series), alpha) for kind, series in history.items()})


def design_cluster_capacity(
    prediction: float, per_request_demand: ResourceVector, headroom: float = 1.2
) -> ResourceVector:
    if headroom < 1:
        raise ValueError(f"headroom must be >= 1, got {headroom}")
    return per_request_demand.scale(prediction * headroom)


def local_allocate(
    users: Sequence[UserSession],
    budget: float,
    policy: AllocationPolicy = AllocationPolicy.EVEN,
    params: QoEParams = DEFAULT_PARAMS,
) -> List[float]:
    if budget < 0:
        raise DomainError(f"budget must be >= 0, got {budget}")
    policy = AllocationPolicy(policy)
    if policy is AllocationPolicy.EVEN:
        return even_allocation(budget, users)
    return mi_max_allocation(budget, users, params)


def decide_scaling(utilization: Sequence[float], policy: ScalingPolicy) -> ScalingAction:
    """Threshold rule: any dimension at or above u_hi scales up, all at or below u_lo scale down."""
    if any(not 0 <= u <= 1 for u in utilization):
        raise DomainError(f"utilization must lie in [0, 1], got {list(utilization)}")
    if any(u >= policy.u_hi for u in utilization):
        return ScalingAction.SCALE_UP
    if all(u <= policy.u_lo for u in utilization):
        return ScalingAction.SCALE_DOWN
    return ScalingAction.NONE


def monitor_and_scale(
    orchestrator,
    msi_id: str,
    utilization: Sequence[float],
    policy: ScalingPolicy,
    usage: Optional[ResourceVector] = None,
) -> ScalingAction:
    """Apply the threshold rule to one MSI's scaling reservation.

    Scale-up grows the reservation by ``policy.step``; if the pool cannot
    cover it the action is downgraded to ``NONE``. Scale-down shrinks it
    by the step but never below what ``usage`` still needs.
    """
    action = decide_scaling(utilization, policy)
    elastic = orchestrator.elastic_amount(msi_id)
    if action is ScalingAction.SCALE_UP:
        try:
            orchestrator.set_elastic(msi_id, elastic + policy.step)
        except InsufficientResources:
            log.debug("scale-up of %s downgraded: pool exhausted", msi_id)
            return ScalingAction.NONE
    elif action is ScalingAction.SCALE_DOWN:
        base = orchestrator.reserved(msi_id) - elastic
        usage = usage or ResourceVector()
        floor = [max(u - b, 0) for u, b in zip(usage, base)]
        shrunk = ResourceVector(
            *(max(e - s, f, 0) for e, s, f in zip(elastic, policy.step, floor))
        )
        if shrunk == elastic:
            return ScalingAction.NONE
        orchestrator.set_elastic(msi_id, shrunk)
    return action


def utilization_of(usage: ResourceVector, reserved: ResourceVector) -> List[float]:
    """Per-dimension usage / reserved, clipped to [0, 1]; unreserved dimensions read 0."""
    return [min(u / r, 1.0) if r > 0 else 0.0 for u, r in zip(usage, reserved)]


class GlobalController:
    """Epoch-level predictor and capacity designer; collects local reports."""

    def __init__(
        self,
        kinds: Sequence[str],
        per_request_demand: Mapping[str, ResourceVector],
        alpha: float = 0.3,
        headroom: float = 1.2,
    ):
        self.kinds = list(kinds)
        self.per_request_demand = dict(per_request_demand)
        self.alpha = alpha
        self.headroom = headroom
        self.history: Dict[str, List[float]] = {k: [] for k in self.kinds}
        self.pending: Dict[str, int] = {k: 0 for k in self.kinds}
        self.event_log: List[dict] = []
        self.designs: Dict[str, ResourceVector] = {}

    def record_arrival(self, kind: str) -> None:
        self.pending[kind] = self.pending.get(kind, 0) + 1

    def report(self, event: dict) -> None:
        self.event_log.append(event)

    def end_epoch(self) -> Dict[str, ResourceVector]:
        """Close the epoch: update history, predict, and return per-cluster designs."""
        for kind in self.kinds:
            self.history[kind].append(float(self.pending.get(kind, 0)))
            self.pending[kind] = 0
        prediction = predict_demand(self.history, self.alpha)
        self.designs = {
            kind: design_cluster_capacity(
                prediction[kind],
                self.per_request_demand.get(kind, ResourceVector()),
                self.headroom,
            )
            for kind in self.kinds
        }
        return self.designs


class LocalController:
    """Per-cluster controller. Every monitoring decision is reported upward."""

    def __init__(
        self,
        kind: str,
        report: Callable[[dict], None],
        policy: AllocationPolicy = AllocationPolicy.EVEN,
        scaling: Optional[ScalingPolicy] = None,
        params: QoEParams = DEFAULT_PARAMS,
    ):
        self.kind = kind
        self.policy = AllocationPolicy(policy)
        self.scaling = scaling or ScalingPolicy()
        self.params = params
        self._report = report
        self.action_count = 0
        self.budget_hint: Optional[ResourceVector] = None

    def allocate(self, users: Sequence[UserSession], budget: float) -> List[float]:
        return local_allocate(users, budget, self.policy, self.params)

    def receive_feedback(self, design: ResourceVector) -> None:
        self.budget_hint = design

    def monitor(self, orchestrator, msi_id: str, usage: ResourceVector, time: float) -> ScalingAction:
        reserved = orchestrator.reserved(msi_id)
        util = utilization_of(usage, reserved)
        wanted = decide_scaling(util, self.scaling)
        action = monitor_and_scale(orchestrator, msi_id, util, self.scaling, usage)
        self.action_count += 1
        event = {
            "time": time,
            "cluster": self.kind,
            "msi_id": msi_id,
            "action": action.value,
            "utilization": dict(zip(DIMENSIONS, util)),
        }
        if wanted is ScalingAction.SCALE_UP and action is ScalingAction.NONE:
            event["warning"] = "scale-up downgraded: pool exhausted"
        self._report(event)
        return action
