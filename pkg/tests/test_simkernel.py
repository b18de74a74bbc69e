import copy

import pytest

from slicing4meta.errors import ScenarioInvalid
from slicing4meta.qoe import QoEParams
from slicing4meta.rng import Rng
from slicing4meta.scenario import parse_scenario
from slicing4meta.simkernel import EventKind, Simulation, run, sample_user


def test_empty_arrivals(scenario_doc):
    report = run(parse_scenario(scenario_doc("empty.json")))
    assert report.summary["users"] == 0
    assert report.users == []
    assert report.pool["remaining"] == report.pool["capacity"]


def test_duplicate_requests_share_msi(scenario_doc):
    report = run(parse_scenario(scenario_doc("duplicate_ar.json")))
    s = report.summary
    assert (s["msis_created"], s["msis_reused"]) == (1, 1)
    assert {r["msi_id"] for r in report.users} == {"msi-1"}


def test_sample_user_demand():
    params = QoEParams(per_object_capacity=20)
    rng = Rng(1)
    for _ in range(50):
        u = sample_user(rng, "u", 100, 0.001, params)
        assert 1 <= u.n_objects <= 56
        assert u.demand == 20 * u.n_objects
    assert sample_user(rng, "u", 100, 0, params, 5, 5).n_objects == 5
    fixed = sample_user(Rng(1), "u", 100, 0, params, 3, 3)
    assert fixed.demand == 60


def _dynamic(scenario_doc, **changes):
    doc = copy.deepcopy(scenario_doc("virtual_travel.json"))
    doc["arrivals"]["poisson"]["count"] = 40
    doc["duration_ms"] = 6000
    doc.update(changes)
    return parse_scenario(doc)


def test_objects_in_universe_and_ledger_checked(scenario_doc):
    sim = Simulation(_dynamic(scenario_doc))
    report = sim.run()
    assert report.users
    assert all(1 <= r["n_objects"] <= 56 for r in report.users)
    assert sim.events_processed > len(report.users)
    assert sim.pool.conservation_error() <= 1e-9 * max(sim.pool.capacity)


def test_report_and_feedback_counts(scenario_doc):
    report = run(_dynamic(scenario_doc))
    assert report.summary["global_reports"] == report.summary["local_reports"] > 0


def test_determinism(scenario_doc):
    a = run(_dynamic(scenario_doc))
    b = run(_dynamic(scenario_doc))
    assert a.to_csv() == b.to_csv()
    assert a.trace_jsonl() == b.trace_jsonl()
    assert a.to_json() == b.to_json()
    c = run(_dynamic(scenario_doc, seed=99))
    assert [r["n_objects"] for r in c.users] != [r["n_objects"] for r in a.users]


def test_events_in_order(scenario_doc):
    sim = Simulation(_dynamic(scenario_doc))
    seen = []
    original = sim._on_monitor

    def spy(event):
        seen.append((event.time, event.sequence))
        original(event)

    sim._on_monitor = spy
    sim.run()
    assert seen == sorted(seen)


def test_cannot_schedule_in_past(scenario_doc):
    sim = Simulation(parse_scenario(scenario_doc("empty.json")))
    sim.now = 10
    with pytest.raises(ValueError):
        sim.schedule(5, EventKind.ARRIVAL)


def test_departures_decommission(scenario_doc):
    doc = scenario_doc("duplicate_ar.json")
    for a in doc["arrivals"]["explicit"]:
        a["holding_ms"] = 100
    report = run(parse_scenario(doc))
    assert report.summary["live_msis"] == 0
    assert report.pool["open_reservations"] == []
    assert all(r["departure_ms"] is not None for r in report.users)


def test_invalid_scenario_has_path(scenario_doc):
    doc = scenario_doc("empty.json")
    doc["qoe"] = {"k": -1}
    with pytest.raises(ScenarioInvalid) as exc:
        parse_scenario(doc)
    assert exc.value.path == "qoe.k"
    doc = scenario_doc("empty.json")
    doc["bundles"]["ARVR"] = ["nope"]
    with pytest.raises(ScenarioInvalid) as exc:
        parse_scenario(doc)
    assert exc.value.path == "bundles.ARVR.0"


def test_rejection_when_pool_too_small(scenario_doc):
    doc = scenario_doc("duplicate_ar.json")
    doc["catalog"][0]["supply"] = [0, 0, 0, 500]
    doc["arrivals"]["explicit"][1]["overrides"] = {"isolation": "physical"}
    report = run(parse_scenario(doc))
    assert report.summary["rejected"] == 1
    assert report.summary["admitted"] == 1
