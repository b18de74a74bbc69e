"""
Deterministic discrete-event engine.

Events are ordered by ``(time, sequence)``; the sequence number is assigned
at scheduling time, so simultaneous events run in the order they were
scheduled. Time is in milliseconds. All randomness comes from one
``Rng`` seeded by the scenario, split into independent child streams for
arrivals and user sampling. After every event the pool ledger is checked
for conservation.
"""

from __future__ import annotations

import csv
import enum
import heapq
import io
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .controllers import GlobalController, LocalController
from .errors import InsufficientResources
from .orchestrator import Orchestrator, ServiceKind, ServiceRequest, vmof_convert
from .qoe import QoEParams, UserSession, meta_immersion, needs_readjustment
from .resources import ResourceVector, build_pool
from .rng import Rng
from .scenario import ArrivalSpec, Scenario

__all__ = ["EventKind", "Event", "MetricsReport", "Simulation", "run", "sample_user", "CSV_COLUMNS"]

log = logging.getLogger(__name__)

# child-stream tags
ARRIVAL_STREAM = 1
USER_STREAM = 2

CONSERVATION_TOLERANCE = 1e-9


class EventKind(str, enum.Enum):
    ARRIVAL = "Arrival"
    DEPARTURE = "Departure"
    EPOCH_TICK = "EpochTick"
    MONITOR_TICK = "MonitorTick"


@dataclass(order=True, frozen=True)
class Event:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)


def sample_user(
    rng: Rng,
    user_id: str,
    rate: float,
    bep: float,
    params: QoEParams,
    n_min: int = 1,
    n_max: int = 56,
) -> UserSession:
    """Draw a user's object count uniformly from ``{n_min, ..., n_max}``."""
    n = rng.randint(n_min, n_max)
    return UserSession.create(user_id, rate, bep, n, params)


CSV_COLUMNS = (
    "user_id",
    "kind",
    "admitted",
    "msi_id",
    "arrival_ms",
    "departure_ms",
    "rate_mbps",
    "bep",
    "n_objects",
    "demand_k",
    "allocated_k",
    "perception",
    "objective_quality",
    "mi",
)


@dataclass
class MetricsReport:
    users: List[dict]
    msi_history: Dict[str, List[dict]]
    trace: List[dict]
    summary: dict
    pool: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.users:
            writer.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})
        return buf.getvalue()

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.trace)

    def to_json(self) -> str:
        return json.dumps(
            {"summary": self.summary, "msi_history": self.msi_history, "pool": self.pool},
            sort_keys=True,
            indent=2,
        )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class Simulation:
    """One run of a scenario. Build, then call ``run()`` once."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.params = scenario.qoe
        self.pool = build_pool(scenario.catalog)
        self.orchestrator = Orchestrator(
            scenario.catalog,
            self.pool,
            scenario.bundles,
            scenario.templates,
            scenario.tau,
        )
        rng = Rng(scenario.seed)
        self.arrival_rng = rng.child(ARRIVAL_STREAM)
        self.user_rng = rng.child(USER_STREAM)

        kinds = [k.value for k in ServiceKind]
        per_request = {}
        for kind in kinds:
            if scenario.bundles.get(kind):
                req = scenario.templates[ServiceKind(kind)]
                per_request[kind] = vmof_convert(
                    req, scenario.catalog, {ServiceKind(kind): scenario.bundles[kind]}
                ).demand
        self.global_controller = GlobalController(
            kinds, per_request, scenario.alpha, scenario.headroom
        )
        self.local_controllers = {
            kind: LocalController(
                kind,
                self._report,
                scenario.policy,
                scenario.scaling,
                scenario.qoe,
            )
            for kind in kinds
        }

        self.trace: List[dict] = []
        self.users: Dict[str, dict] = {}
        self.sessions: Dict[str, UserSession] = {}
        self.msi_history: Dict[str, List[dict]] = {}
        self._queue: List[Event] = []
        self._seq = itertools.count()
        self._last: Tuple[float, int] = (-math.inf, -1)
        self.now = 0.0
        self.events_processed = 0

    # scheduling ---------------------------------------------------------

    def schedule(self, time: float, kind: EventKind, payload=None) -> Event:
        if time < self.now:
            raise ValueError(f"cannot schedule in the past ({time} < {self.now})")
        event = Event(time, next(self._seq), kind, payload)
        heapq.heappush(self._queue, event)
        return event

    def _arrivals(self) -> List[ArrivalSpec]:
        arrivals = list(self.scenario.explicit)
        spec = self.scenario.poisson
        if spec:
            kinds = spec.get("kinds", ["ARVR"])
            rates = spec.get("rates", [100.0])
            t = 0.0
            for _ in range(spec["count"]):
                t += self.arrival_rng.exponential(spec["mean_interarrival_ms"])
                holding = spec.get("mean_holding_ms")
                arrivals.append(
                    ArrivalSpec(
                        time=t,
                        kind=self.arrival_rng.choice(kinds),
                        rate=float(self.arrival_rng.choice(rates)),
                        bep=spec.get("bep", 0.001),
                        holding_ms=(
                            self.arrival_rng.exponential(holding) if holding else None
                        ),
                    )
                )
        # stable sort keeps file order for simultaneous explicit arrivals
        return sorted(arrivals, key=lambda a: a.time)

    def _prime(self) -> None:
        arrivals = self._arrivals()
        end = self.scenario.duration_ms
        if end is None:
            times = [a.time for a in arrivals]
            times += [a.time + a.holding_ms for a in arrivals if a.holding_ms is not None]
            end = max(times, default=0.0)
        self.end_time = end
        for i, spec in enumerate(arrivals, start=1):
            if spec.time <= end:
                self.schedule(spec.time, EventKind.ARRIVAL, (spec.user_id or f"u{i}", spec))
        if arrivals:
            for kind, period in (
                (EventKind.EPOCH_TICK, self.scenario.epoch_ms),
                (EventKind.MONITOR_TICK, self.scenario.monitor_ms),
            ):
                t = period
                while t <= end:
                    self.schedule(t, kind)
                    t += period

    # main loop ----------------------------------------------------------

    def run(self) -> MetricsReport:
        self._prime()
        handlers = {
            EventKind.ARRIVAL: self._on_arrival,
            EventKind.DEPARTURE: self._on_departure,
            EventKind.EPOCH_TICK: self._on_epoch,
            EventKind.MONITOR_TICK: self._on_monitor,
        }
        while self._queue:
            event = heapq.heappop(self._queue)
            key = (event.time, event.sequence)
            assert key > self._last, f"event {key} dequeued after {self._last}"
            self._last = key
            self.now = event.time
            handlers[event.kind](event)
            self.events_processed += 1
            self._check_ledger()
        return self._report_metrics()

    def _check_ledger(self) -> None:
        scale = max(max(self.pool.capacity), 1.0)
        err = self.pool.conservation_error()
        if err > CONSERVATION_TOLERANCE * scale:
            raise AssertionError(f"ledger conservation violated by {err} at t={self.now}")
        assert all(v >= 0 for v in self.pool.remaining)

    # handlers -----------------------------------------------------------

    def _on_arrival(self, event: Event) -> None:
        user_id, spec = event.payload
        params = self.params
        if spec.n_objects is not None:
            session = UserSession.create(user_id, spec.rate, spec.bep, spec.n_objects, params)
        else:
            session = sample_user(
                self.user_rng,
                user_id,
                spec.rate,
                spec.bep,
                params,
                self.scenario.n_objects_min,
                self.scenario.n_objects_max,
            )
        row = {
            "user_id": user_id,
            "kind": spec.kind,
            "admitted": False,
            "msi_id": None,
            "arrival_ms": event.time,
            "departure_ms": None,
            "rate_mbps": session.rate,
            "bep": session.bep,
            "n_objects": session.n_objects,
            "demand_k": session.demand,
            "allocated_k": 0.0,
            "perception": 0.0,
            "objective_quality": 0.0,
            "mi": 0.0,
        }
        self.users[user_id] = row
        self.global_controller.record_arrival(spec.kind)
        request = ServiceRequest(user_id, spec.kind, spec.overrides, request_id=f"req-{user_id}")
        try:
            decision = self.orchestrator.admit(request, time=event.time)
        except InsufficientResources:
            self.trace.append(self.orchestrator.trace[-1])
            return
        self.trace.append(self.orchestrator.trace[-1])
        row["admitted"] = True
        row["msi_id"] = decision.msi_id
        self.sessions[user_id] = session
        self._record_msi(decision.msi_id)
        self._reallocate(decision.msi_id)
        if spec.holding_ms is not None:
            self.schedule(event.time + spec.holding_ms, EventKind.DEPARTURE, user_id)

    def _on_departure(self, event: Event) -> None:
        user_id = event.payload
        msi_id = self.orchestrator.user_msi[user_id]
        self.users[user_id]["departure_ms"] = event.time
        del self.sessions[user_id]
        gone = self.orchestrator.depart(user_id, time=event.time)
        self.trace.append(
            {"time": event.time, "event": "departure", "user_id": user_id, "msi_id": msi_id}
        )
        if gone:
            self.trace.append(self.orchestrator.trace[-1])
        self._record_msi(msi_id)
        if not gone:
            self._reallocate(msi_id)

    def _on_epoch(self, event: Event) -> None:
        designs = self.global_controller.end_epoch()
        for kind, design in designs.items():
            self.local_controllers[kind].receive_feedback(design)
        self.trace.append(
            {
                "time": event.time,
                "event": "epoch",
                "designs": {k: v.as_dict() for k, v in designs.items()},
                "reports": len(self.global_controller.event_log),
            }
        )

    def _on_monitor(self, event: Event) -> None:
        for msi in sorted(self.orchestrator.live_msis(), key=lambda m: m.id):
            if not msi.monitoring:
                continue
            members = [self.sessions[u] for u in msi.members]
            usage = ResourceVector(
                sum(s.rate for s in members), 0, 0, sum(s.demand for s in members)
            )
            local = self.local_controllers[msi.cluster.value]
            before = self.orchestrator.reserved(msi.id)
            action = local.monitor(self.orchestrator, msi.id, usage, event.time)
            if self.orchestrator.reserved(msi.id) != before:
                self.trace.append(
                    {"time": event.time, "event": "scale", "msi_id": msi.id, "action": action.value}
                )
                self._record_msi(msi.id)
                self._reallocate(msi.id)

    def _report(self, event: dict) -> None:
        self.global_controller.report(event)

    # bookkeeping --------------------------------------------------------

    def _record_msi(self, msi_id: str) -> None:
        msi = self.orchestrator.msis[msi_id]
        self.msi_history.setdefault(msi_id, []).append(
            {
                "time": self.now,
                "state": msi.state.name,
                "members": len(msi.members),
                "reserved": self.orchestrator.reserved(msi_id).as_dict(),
            }
        )

    def _reallocate(self, msi_id: str) -> None:
        msi = self.orchestrator.msis[msi_id]
        members = [self.sessions[u] for u in msi.members]
        if not members:
            return
        budget = self.orchestrator.reserved(msi_id).rendering
        local = self.local_controllers[msi.cluster.value]
        allocation = local.allocate(members, budget)
        for session, alloc in zip(members, allocation):
            row = self.users[session.id]
            old = row["allocated_k"]
            if old > 0 and needs_readjustment(old, alloc, self.params):
                self.trace.append(
                    {
                        "time": self.now,
                        "event": "readjust",
                        "user_id": session.id,
                        "msi_id": msi_id,
                        "from_k": old,
                        "to_k": alloc,
                    }
                )
            result = meta_immersion(session, alloc, self.params)
            row.update(
                allocated_k=alloc,
                perception=result.perception,
                objective_quality=result.objective_quality,
                mi=result.mi,
            )

    def _report_metrics(self) -> MetricsReport:
        rows = [self.users[k] for k in sorted(self.users, key=_natural_key)]
        admitted = [r for r in rows if r["admitted"]]
        counts = self.orchestrator.counts
        summary = {
            "scenario": self.scenario.name,
            "seed": self.scenario.seed,
            "events": self.events_processed,
            "users": len(rows),
            "admitted": len(admitted),
            "rejected": counts["reject"],
            "msis_created": counts["create"],
            "msis_reused": counts["reuse"],
            "msis_modified": counts["modify"],
            "live_msis": len(self.orchestrator.live_msis()),
            "mean_mi": (math.fsum(r["mi"] for r in admitted) / len(admitted)) if admitted else 0.0,
            "local_reports": sum(c.action_count for c in self.local_controllers.values()),
            "global_reports": len(self.global_controller.event_log),
        }
        return MetricsReport(rows, self.msi_history, self.trace, summary, self.pool.snapshot())


def _natural_key(user_id: str):
    head = user_id.rstrip("0123456789")
    tail = user_id[len(head):]
    return (head, int(tail) if tail else -1, user_id)


def run(scenario: Scenario) -> MetricsReport:
    """Run ``scenario`` to completion. Output is a pure function of the scenario."""
    return Simulation(scenario).run()
