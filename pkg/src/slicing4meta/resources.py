"""
Multi-dimensional virtual resource pool.

The pool capacity is the sum of the supplies of the CaaS models in a
catalog. Every commitment against it goes through a reservation ledger so
that ``sum(open reservations) + remaining == capacity`` can be checked at
any point.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, Iterator, Optional

from .errors import DoubleRelease, InsufficientResources, UnknownReservation

if TYPE_CHECKING:
    from .catalog import Catalog, MaaSModel

__all__ = [
    "DIMENSIONS",
    "ResourceVector",
    "IsolationDegree",
    "Reservation",
    "Pool",
    "build_pool",
    "may_share",
]

DIMENSIONS = ("comm_rate", "compute", "storage", "rendering")


@dataclass(frozen=True)
class ResourceVector:
    """Quantities on the four resource dimensions.

    Units: ``comm_rate`` in Mb/s, ``compute`` in abstract units, ``storage``
    in GB and ``rendering`` in K (1 K = 960 x 480 pixels).
    """

    comm_rate: float = 0
    compute: float = 0
    storage: float = 0
    rendering: float = 0

    def __post_init__(self):
        for name in DIMENSIONS:
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")

    @classmethod
    def zero(cls) -> "ResourceVector":
        return cls()

    @classmethod
    def from_seq(cls, values: Iterable[float]) -> "ResourceVector":
        values = list(values)
        if len(values) != len(DIMENSIONS):
            raise ValueError(f"expected {len(DIMENSIONS)} values, got {len(values)}")
        return cls(*values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.as_tuple())

    def as_tuple(self) -> tuple:
        return (self.comm_rate, self.compute, self.storage, self.rendering)

    def as_dict(self) -> dict:
        return dict(zip(DIMENSIONS, self.as_tuple()))

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(*(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "ResourceVector") -> "ResourceVector":
        # raises ValueError if any component would go negative
        return ResourceVector(*(a - b for a, b in zip(self, other)))

    def scale(self, factor: float) -> "ResourceVector":
        return ResourceVector(*(a * factor for a in self))

    def maximum(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(*(max(a, b) for a, b in zip(self, other)))

    def fits_in(self, other: "ResourceVector") -> bool:
        """Element-wise ``self <= other``."""
        return all(a <= b for a, b in zip(self, other))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self)

    @staticmethod
    def total(vectors: Iterable["ResourceVector"]) -> "ResourceVector":
        acc = ResourceVector()
        for v in vectors:
            acc = acc + v
        return acc


class IsolationDegree(enum.IntEnum):
    """Ordered isolation strength between MSIs. Lower degrees share more easily."""

    NONE = 0
    SCHEDULING = 1
    LOGICAL = 2
    PHYSICAL = 3

    @classmethod
    def parse(cls, value) -> "IsolationDegree":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        return cls[str(value).upper()]


def may_share(model: "MaaSModel", a: IsolationDegree, b: IsolationDegree) -> bool:
    """Whether two parties with isolation degrees ``a`` and ``b`` may share ``model``.

    Physical isolation never shares; otherwise the stricter of the two
    degrees must not exceed the model's sharing threshold.
    """
    strictest = max(IsolationDegree(a), IsolationDegree(b))
    return (
        strictest <= model.max_isolation_degree_for_sharing
        and strictest < IsolationDegree.PHYSICAL
    )


@dataclass
class Reservation:
    id: int
    owner: str
    amount: ResourceVector
    isolation: IsolationDegree = IsolationDegree.NONE
    open: bool = True

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "owner": self.owner,
            "amount": self.amount.as_dict(),
            "isolation": self.isolation.name,
        }


@dataclass
class Pool:
    """Virtual resource pool with a reservation ledger.

    Only ``reserve``, ``resize``, ``transfer`` and ``release`` mutate the
    ledger.
    """

    capacity: ResourceVector
    remaining: ResourceVector = None
    reservations: Dict[int, Reservation] = field(default_factory=dict)
    _ids: Iterator[int] = field(default_factory=lambda: itertools.count(1), repr=False)

    def __post_init__(self):
        if self.remaining is None:
            self.remaining = self.capacity

    def reserve(
        self,
        owner: str,
        amount: ResourceVector,
        isolation: IsolationDegree = IsolationDegree.NONE,
    ) -> Reservation:
        if not amount.fits_in(self.remaining):
            raise InsufficientResources(
                f"cannot reserve {amount.as_dict()} for {owner}; "
                f"remaining {self.remaining.as_dict()}"
            )
        self.remaining = self.remaining - amount
        res = Reservation(next(self._ids), owner, amount, IsolationDegree(isolation))
        self.reservations[res.id] = res
        return res

    def _get_open(self, reservation_id: int) -> Reservation:
        try:
            res = self.reservations[reservation_id]
        except KeyError:
            raise UnknownReservation(reservation_id) from None
        if not res.open:
            raise DoubleRelease(f"reservation {reservation_id} already released")
        return res

    def release(self, reservation_id: int) -> None:
        res = self._get_open(reservation_id)
        self.remaining = self.remaining + res.amount
        res.open = False

    def resize(self, reservation_id: int, new_amount: ResourceVector) -> None:
        """Change an open reservation in place. Growth must fit in ``remaining``."""
        res = self._get_open(reservation_id)
        grow = ResourceVector(*(max(n - o, 0) for n, o in zip(new_amount, res.amount)))
        shrink = ResourceVector(*(max(o - n, 0) for n, o in zip(new_amount, res.amount)))
        if not grow.fits_in(self.remaining):
            raise InsufficientResources(
                f"cannot grow reservation {reservation_id} by {grow.as_dict()}; "
                f"remaining {self.remaining.as_dict()}"
            )
        self.remaining = self.remaining - grow + shrink
        res.amount = new_amount

    def transfer(self, reservation_id: int, new_owner: str) -> None:
        self._get_open(reservation_id).owner = new_owner

    def open_reservations(self, owner: Optional[str] = None) -> list:
        return [
            r
            for r in self.reservations.values()
            if r.open and (owner is None or r.owner == owner)
        ]

    def reserved_by(self, owner: str) -> ResourceVector:
        return ResourceVector.total(r.amount for r in self.open_reservations(owner))

    def conservation_error(self) -> float:
        """Largest per-dimension gap between ``reserved + remaining`` and capacity."""
        reserved = [0] * len(DIMENSIONS)
        for r in self.open_reservations():
            for i, v in enumerate(r.amount):
                reserved[i] += v
        return max(
            abs(res + rem - cap)
            for res, rem, cap in zip(reserved, self.remaining, self.capacity)
        )

    def snapshot(self) -> dict:
        return {
            "capacity": self.capacity.as_dict(),
            "remaining": self.remaining.as_dict(),
            "open_reservations": [r.as_dict() for r in self.open_reservations()],
        }


def build_pool(catalog: "Catalog") -> Pool:
    """Map the CaaS supplies of ``catalog`` into one virtual pool.

    Only root CaaS models (those that are not a child of a registered
    composite) contribute, so a composite and its children are not counted
    twice.
    """
    capacity = ResourceVector.total(
        catalog.effective_footprint(m.id) for m in catalog.root_models(kind="CaaS")
    )
    return Pool(capacity)
