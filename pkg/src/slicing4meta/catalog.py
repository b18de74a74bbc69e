"""
Registry of MaaS delivery models.

CaaS models supply resources to the virtual pool, TaaS models consume
them. A model with children is a composite; its footprint is the
element-wise sum of its (recursively flattened) children.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .errors import CycleDetected, DuplicateId, KindMismatch, UnknownChild, UnknownModel
from .resources import IsolationDegree, ResourceVector

__all__ = ["ModelKind", "MaaSModel", "Catalog"]


class ModelKind(str, enum.Enum):
    CAAS = "CaaS"
    TAAS = "TaaS"


@dataclass(frozen=True)
class MaaSModel:
    id: str
    kind: ModelKind
    label: str = ""
    supply: ResourceVector = field(default_factory=ResourceVector)
    consumption: ResourceVector = field(default_factory=ResourceVector)
    children: Tuple[str, ...] = ()
    max_isolation_degree_for_sharing: IsolationDegree = IsolationDegree.LOGICAL

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(
            self,
            "max_isolation_degree_for_sharing",
            IsolationDegree.parse(self.max_isolation_degree_for_sharing),
        )
        if self.kind is ModelKind.CAAS and not self.consumption.is_zero():
            raise KindMismatch(f"CaaS model {self.id!r} declares a consumption")
        if self.kind is ModelKind.TAAS and not self.supply.is_zero():
            raise KindMismatch(f"TaaS model {self.id!r} declares a supply")

    @property
    def is_composite(self) -> bool:
        return bool(self.children)

    @property
    def own_footprint(self) -> ResourceVector:
        return self.supply if self.kind is ModelKind.CAAS else self.consumption


class Catalog:
    """MaaS model registry. Treated as read-only once a run starts."""

    def __init__(self, models: Optional[List[MaaSModel]] = None):
        self._models: Dict[str, MaaSModel] = {}
        self._footprints: Dict[str, ResourceVector] = {}
        for model in models or ():
            self.register_model(model)

    def __len__(self) -> int:
        return len(self._models)

    def __contains__(self, model_id: str) -> bool:
        return model_id in self._models

    def __iter__(self) -> Iterator[MaaSModel]:
        return iter(self._models.values())

    def get(self, model_id: str) -> MaaSModel:
        try:
            return self._models[model_id]
        except KeyError:
            raise UnknownModel(model_id) from None

    def register_model(self, model: MaaSModel) -> str:
        if model.id in self._models:
            raise DuplicateId(model.id)
        # children must already be registered, so the only possible cycle
        # is a model naming itself
        if model.id in model.children:
            raise CycleDetected(f"model {model.id!r} lists itself as a child")
        for child_id in model.children:
            if child_id not in self._models:
                raise UnknownChild(f"{model.id!r} references unregistered child {child_id!r}")
            child = self._models[child_id]
            if child.kind is not model.kind:
                raise KindMismatch(
                    f"{child.kind.value} child {child_id!r} under "
                    f"{model.kind.value} composite {model.id!r}"
                )
        self._models[model.id] = model
        if model.is_composite:
            self._footprints[model.id] = ResourceVector.total(
                self._footprints[c] for c in model.children
            )
        else:
            self._footprints[model.id] = model.own_footprint
        return model.id

    def effective_footprint(self, model_id: str) -> ResourceVector:
        if model_id not in self._footprints:
            raise UnknownModel(model_id)
        return self._footprints[model_id]

    def root_models(self, kind: Optional[str] = None) -> List[MaaSModel]:
        """Models that are not the child of any registered composite."""
        children = {c for m in self._models.values() for c in m.children}
        return [
            m
            for m in self._models.values()
            if m.id not in children and (kind is None or m.kind is ModelKind(kind))
        ]
