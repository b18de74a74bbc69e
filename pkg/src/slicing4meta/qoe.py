"""
Meta-Immersion (MI) QoE model.

MI couples two stimuli multiplicatively:

* rendering perception, a Weber-Fechner response
  ``k * ln(c_eff / c0)`` with ``c_eff = max(c0, min(allocated, demand))``;
* objective quality, a normalized channel term
  ``(1 - exp(-rate / r_ref)) * (1 - bep)``.

Two rendering-capacity allocators are provided: an even split and an
MI-maximizing water-filling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, EmptyUserSet, InvalidParams, NonConvergence

__all__ = [
    "QoEParams",
    "UserSession",
    "MIResult",
    "rendering_perception",
    "objective_quality",
    "meta_immersion",
    "even_allocation",
    "mi_max_allocation",
    "total_mi",
    "needs_readjustment",
]

MAX_BISECTION_ITERATIONS = 200


@dataclass(frozen=True)
class QoEParams:
    k: float = 1.0
    c0: float = 1.0
    r_ref: float = 100.0
    per_object_capacity: float = 20.0
    readjust_fraction: float = 0.1

    def validate(self) -> "QoEParams":
        if not self.k > 0:
            raise InvalidParams(f"k must be > 0, got {self.k}")
        if not self.c0 > 0:
            raise InvalidParams(f"c0 must be > 0, got {self.c0}")
        if not self.r_ref > 0:
            raise InvalidParams(f"r_ref must be > 0, got {self.r_ref}")
        if not self.per_object_capacity > 0:
            raise InvalidParams(
                f"per_object_capacity must be > 0, got {self.per_object_capacity}"
            )
        if not 0 < self.readjust_fraction < 1:
            raise InvalidParams(
                f"readjust_fraction must be in (0, 1), got {self.readjust_fraction}"
            )
        return self


DEFAULT_PARAMS = QoEParams()


@dataclass(frozen=True)
class UserSession:
    id: str
    rate: float
    bep: float
    n_objects: int
    demand: float

    @classmethod
    def create(
        cls,
        id: str,
        rate: float,
        bep: float,
        n_objects: int,
        params: QoEParams = DEFAULT_PARAMS,
    ) -> "UserSession":
        """Build a session whose demand is ``n_objects * per_object_capacity``."""
        return cls(id, rate, bep, n_objects, n_objects * params.per_object_capacity)

    def __post_init__(self):
        if self.rate < 0:
            raise DomainError(f"rate must be >= 0, got {self.rate}")
        if not 0 <= self.bep <= 1:
            raise DomainError(f"bep must be in [0, 1], got {self.bep}")
        if self.n_objects < 1:
            raise DomainError(f"n_objects must be >= 1, got {self.n_objects}")
        if self.demand < 0:
            raise DomainError(f"demand must be >= 0, got {self.demand}")


@dataclass(frozen=True)
class MIResult:
    user_id: str
    perception: float
    objective_quality: float
    mi: float


def rendering_perception(
    allocated: float, demand: float, params: QoEParams = DEFAULT_PARAMS
) -> float:
    if not (params.k > 0 and params.c0 > 0):
        raise InvalidParams(f"k and c0 must be > 0, got k={params.k}, c0={params.c0}")
    if allocated < 0 or demand < 0:
        raise DomainError("allocated and demand must be >= 0")
    c_eff = max(params.c0, min(allocated, demand))
    return params.k * math.log(c_eff / params.c0)


def objective_quality(rate: float, bep: float, params: QoEParams = DEFAULT_PARAMS) -> float:
    if not params.r_ref > 0:
        raise InvalidParams(f"r_ref must be > 0, got {params.r_ref}")
    if rate < 0:
        raise DomainError(f"rate must be >= 0, got {rate}")
    if not 0 <= bep <= 1:
        raise DomainError(f"bep must be in [0, 1], got {bep}")
    return -math.expm1(-rate / params.r_ref) * (1.0 - bep)


def meta_immersion(
    user: UserSession, allocated: float, params: QoEParams = DEFAULT_PARAMS
) -> MIResult:
    perception = rendering_perception(allocated, user.demand, params)
    quality = objective_quality(user.rate, user.bep, params)
    return MIResult(user.id, perception, quality, perception * quality)


def total_mi(
    users: Sequence[UserSession],
    allocation: Sequence[float],
    params: QoEParams = DEFAULT_PARAMS,
) -> float:
    """Sum of MI over users for a given allocation (the allocator objective)."""
    return math.fsum(meta_immersion(u, c, params).mi for u, c in zip(users, allocation))


def even_allocation(total: float, users: Sequence) -> List[float]:
    if not users:
        raise EmptyUserSet("even_allocation needs at least one user")
    if total < 0:
        raise DomainError(f"total must be >= 0, got {total}")
    share = total / len(users)
    return [share] * len(users)


def _waterfill(weights: np.ndarray, caps: np.ndarray, budget: float, c0: float) -> np.ndarray:
    """Maximize sum(w_i * ln(c_i / c0)) s.t. sum(c_i) = budget, c0 <= c_i <= caps.

    Requires ``len(w) * c0 <= budget <= caps.sum()`` and ``caps > c0``. The
    dual multiplier is bracketed by bisection on a log scale, then the
    clamp pattern at the final multiplier is solved in closed form.
    """
    if budget >= caps.sum():
        return caps.copy()

    def fill(lam: float) -> np.ndarray:
        return np.clip(weights / lam, c0, caps)

    lo = float(np.min(weights / caps))  # every user at cap: sum >= budget
    hi = float(np.max(weights) / c0)  # every user at c0: sum <= budget
    tol = 1e-6 * budget
    for _ in range(MAX_BISECTION_ITERATIONS):
        mid = math.sqrt(lo * hi)
        excess = fill(mid).sum() - budget
        if abs(excess) <= tol:
            break
        if excess > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise NonConvergence(
            f"water-filling bisection exceeded {MAX_BISECTION_ITERATIONS} iterations"
        )

    # closed-form polish: with the clamp pattern fixed, the free users share
    # the residual budget in proportion to their weights
    lam = mid
    alloc = fill(lam)
    for _ in range(len(weights) + 1):
        raw = weights / lam
        at_floor = raw <= c0
        at_cap = raw >= caps
        free = ~(at_floor | at_cap)
        if not free.any():
            break
        residual = budget - c0 * at_floor.sum() - caps[at_cap].sum()
        lam_new = weights[free].sum() / residual if residual > 0 else math.inf
        alloc = np.where(at_floor, c0, np.where(at_cap, caps, weights / lam_new))
        if lam_new == lam:
            break
        raw_new = weights / lam_new
        if np.array_equal(raw_new <= c0, at_floor) and np.array_equal(raw_new >= caps, at_cap):
            break
        lam = lam_new
    alloc = np.clip(alloc, c0, caps)
    if alloc.sum() > budget * (1 + 1e-12):
        # hi always keeps the filled sum at or below the budget
        alloc = fill(hi)
    return alloc


def _objective(weights: np.ndarray, alloc: np.ndarray, c0: float) -> float:
    return math.fsum(weights * np.log(np.maximum(alloc, c0) / c0))


def mi_max_allocation(
    total: float, users: Sequence[UserSession], params: QoEParams = DEFAULT_PARAMS
) -> List[float]:
    """Rendering allocation maximizing the summed MI of ``users``.

    Each user's utility is ``G_i * k * ln(c_i / c0)`` on ``[c0, demand_i]``
    and zero below ``c0``, where ``G_i`` is the user's objective quality.
    Users with ``G_i == 0`` or ``demand_i <= c0`` gain nothing and get 0.
    Because utility is flat below ``c0``, a user left near the threshold
    can cost more budget than it returns; such users are dropped greedily
    while that improves the objective.
    """
    if not users:
        raise EmptyUserSet("mi_max_allocation needs at least one user")
    if total < 0:
        raise DomainError(f"total must be >= 0, got {total}")
    params.validate()
    c0 = params.c0

    weights = np.array(
        [objective_quality(u.rate, u.bep, params) * params.k for u in users], dtype=float
    )
    caps = np.array([u.demand for u in users], dtype=float)
    candidates = [i for i in range(len(users)) if weights[i] > 0 and caps[i] > c0]

    # users that cannot all sit at c0 within budget: drop the least valuable
    best_value = weights * np.log(np.where(caps > c0, caps, c0) / c0)
    candidates.sort(key=lambda i: (best_value[i], -i), reverse=True)
    while candidates and len(candidates) * c0 > total:
        candidates.pop()

    def solve(active: List[int]) -> Optional[np.ndarray]:
        alloc = np.zeros(len(users))
        if active:
            idx = np.array(active)
            budget = min(total, caps[idx].sum())
            alloc[idx] = _waterfill(weights[idx], caps[idx], budget, c0)
        return alloc

    alloc = solve(candidates)
    value = _objective(weights, alloc, c0)
    threshold = math.e * c0
    improved = True
    while improved and candidates:
        improved = False
        marginal = [i for i in candidates if alloc[i] < threshold]
        for i in sorted(marginal, key=lambda j: (weights[j], j)):
            trial_active = [j for j in candidates if j != i]
            trial = solve(trial_active)
            trial_value = _objective(weights, trial, c0)
            if trial_value > value:
                candidates, alloc, value = trial_active, trial, trial_value
                improved = True
                break
    return [float(c) for c in alloc]


def needs_readjustment(
    old_stimulus: float, new_stimulus: float, params: QoEParams = DEFAULT_PARAMS
) -> bool:
    """True when a stimulus moved by at least ``readjust_fraction`` of its old value."""
    if old_stimulus <= 0:
        raise DomainError(f"old stimulus must be > 0, got {old_stimulus}")
    return abs(new_stimulus - old_stimulus) / old_stimulus >= params.readjust_fraction
