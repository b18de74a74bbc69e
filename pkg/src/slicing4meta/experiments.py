"""
Virtual-travel MI sweep.

A rendering server of fixed capacity is split across N users, each
needing ``per_object_capacity`` K for every one of its virtual objects;
the object count is drawn uniformly from ``{1, ..., n_objects_max}``.
For each (N, rate) cell the mean, min and max MI over users are reported.

One seeded population of ``max(n_users)`` users is drawn up front; the
cell for N uses its first N users, and every rate condition sees the same
users, so differences between rows come from N and rate alone.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Sequence

from .controllers import AllocationPolicy, local_allocate
from .errors import ConfigInvalid
from .qoe import DEFAULT_PARAMS, QoEParams, UserSession, meta_immersion
from .rng import Rng

__all__ = ["Fig5Config", "FIG5_COLUMNS", "fig5_population", "run_fig5", "fig5_csv"]

FIG5_COLUMNS = ("n_users", "rate_mbps", "mean_mi", "min_mi", "max_mi")

POPULATION_STREAM = 5


@dataclass(frozen=True)
class Fig5Config:
    total_rendering: float = 4000.0
    n_users: Sequence[int] = tuple(range(10, 101, 10))
    rate_conditions: Sequence[float] = (50.0, 100.0, 200.0, 400.0)
    bep: float = 0.001
    seed: int = 2023
    policy: AllocationPolicy = AllocationPolicy.EVEN
    n_objects_max: int = 56
    params: QoEParams = field(default_factory=lambda: DEFAULT_PARAMS)

    def validate(self) -> "Fig5Config":
        if self.total_rendering < 0:
            raise ConfigInvalid(f"total_rendering must be >= 0, got {self.total_rendering}")
        if not self.n_users or any(int(n) != n or n < 1 for n in self.n_users):
            raise ConfigInvalid(f"n_users values must be integers >= 1, got {list(self.n_users)}")
        if not self.rate_conditions or any(not r > 0 for r in self.rate_conditions):
            raise ConfigInvalid(f"rates must be > 0, got {list(self.rate_conditions)}")
        if not 0 <= self.bep <= 1:
            raise ConfigInvalid(f"bep must be in [0, 1], got {self.bep}")
        if self.n_objects_max < 1:
            raise ConfigInvalid("n_objects_max must be >= 1")
        try:
            AllocationPolicy(self.policy)
        except ValueError:
            raise ConfigInvalid(f"unknown policy {self.policy!r}") from None
        return self


def fig5_population(seed: int, size: int, n_objects_max: int = 56) -> List[int]:
    """Object counts for the shared user population."""
    rng = Rng(seed).child(POPULATION_STREAM)
    return [rng.randint(1, n_objects_max) for _ in range(size)]


def run_fig5(config: Fig5Config = Fig5Config()) -> List[dict]:
    config.validate()
    params = config.params
    objects = fig5_population(config.seed, max(config.n_users), config.n_objects_max)
    rows = []
    for n in config.n_users:
        for rate in config.rate_conditions:
            users = [
                UserSession.create(f"u{i + 1}", rate, config.bep, objects[i], params)
                for i in range(n)
            ]
            alloc = local_allocate(users, config.total_rendering, config.policy, params)
            mi = [meta_immersion(u, c, params).mi for u, c in zip(users, alloc)]
            rows.append(
                {
                    "n_users": n,
                    "rate_mbps": rate,
                    "mean_mi": math.fsum(mi) / n,
                    "min_mi": min(mi),
                    "max_mi": max(mi),
                }
            )
    return rows


def fig5_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIG5_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
