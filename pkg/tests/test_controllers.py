import pytest
from hypothesis import given, settings, strategies as st

from conftest import small_catalog
from slicing4meta.controllers import (
    AllocationPolicy,
    GlobalController,
    LocalController,
    ScalingAction as A,
    ScalingPolicy,
    decide_scaling,
    design_cluster_capacity,
    local_allocate,
    monitor_and_scale,
    predict_demand,
)
from slicing4meta.errors import EmptyHistory, EmptyUserSet
from slicing4meta.orchestrator import Orchestrator, ServiceRequest
from slicing4meta.qoe import QoEParams, UserSession, meta_immersion
from slicing4meta.resources import ResourceVector as RV, build_pool


def test_predict_examples():
    assert predict_demand({"ARVR": [5, 5, 5]})["ARVR"] == 5
    assert predict_demand({"ARVR": [3, 9]}, alpha=1)["ARVR"] == 9
    assert predict_demand({"ARVR": [4, 8]}, alpha=0.5)["ARVR"] == 6
    with pytest.raises(EmptyHistory):
        predict_demand({"ARVR": []})
    with pytest.raises(EmptyHistory):
        predict_demand({})


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=30), st.floats(0.01, 1))
def test_prediction_is_convex_combination(history, alpha):
    p = predict_demand({"k": history}, alpha)["k"]
    assert min(history) - 1e-9 <= p <= max(history) + 1e-9


def test_design_capacity():
    assert design_cluster_capacity(10, RV(100, 0, 0, 20), 1.2).as_tuple() == pytest.approx(
        (1200, 0, 0, 240)
    )
    assert design_cluster_capacity(0, RV(100, 0, 0, 20), 1.2) == RV()
    assert design_cluster_capacity(3, RV(100, 1, 2, 20), 1) == RV(300, 3, 6, 60)
    with pytest.raises(ValueError):
        design_cluster_capacity(1, RV(), 0.5)


def _users(n, rate=100):
    return [UserSession.create(f"u{i}", rate, 0, 1 + i % 56) for i in range(n)]


def test_local_allocate_even():
    assert local_allocate(_users(40), 4000, AllocationPolicy.EVEN) == [100.0] * 40
    with pytest.raises(EmptyUserSet):
        local_allocate([], 10, AllocationPolicy.EVEN)


@pytest.mark.parametrize("policy", list(AllocationPolicy))
def test_local_allocate_zero_budget(policy):
    users = _users(5)
    alloc = local_allocate(users, 0, policy)
    assert alloc == [0.0] * 5
    assert sum(meta_immersion(u, c).mi for u, c in zip(users, alloc)) == 0


user_sets = st.lists(
    st.tuples(st.sampled_from([50, 100, 200, 400]), st.floats(0, 0.1), st.integers(1, 56)),
    min_size=1,
    max_size=30,
)


@settings(max_examples=150, deadline=None)
@given(user_sets, st.floats(0, 5000))
def test_mimax_weakly_dominates_even(specs, budget):
    users = [UserSession.create(f"u{i}", r, b, n) for i, (r, b, n) in enumerate(specs)]
    def mean_mi(policy):
        alloc = local_allocate(users, budget, policy)
        assert sum(alloc) <= budget * (1 + 1e-9) + 1e-12
        return sum(meta_immersion(u, c).mi for u, c in zip(users, alloc)) / len(users)
    assert mean_mi(AllocationPolicy.MIMAX) >= mean_mi(AllocationPolicy.EVEN) - 1e-9


def test_mimax_equals_even_for_identical_users():
    users = [UserSession.create(f"u{i}", 100, 0, 30) for i in range(8)]
    even = local_allocate(users, 1000, AllocationPolicy.EVEN)
    best = local_allocate(users, 1000, AllocationPolicy.MIMAX)
    assert best == pytest.approx(even, rel=1e-12)


@pytest.mark.parametrize(
    "util, expected",
    [
        ((0.95, 0.1, 0.1, 0.1), A.SCALE_UP),
        ((0.1, 0.1, 0.1, 0.1), A.SCALE_DOWN),
        ((0.5, 0.5, 0.5, 0.5), A.NONE),
    ],
)
def test_scaling_rule(util, expected):
    assert decide_scaling(util, ScalingPolicy(0.2, 0.9)) is expected


@given(st.lists(st.lists(st.floats(0.2001, 0.8999), min_size=4, max_size=4), max_size=50))
def test_hysteresis_band_produces_no_action(trace):
    policy = ScalingPolicy(0.2, 0.9)
    assert all(decide_scaling(u, policy) is A.NONE for u in trace)


def _orch(render=1000):
    cat = small_catalog(render=render)
    orch = Orchestrator(cat, build_pool(cat), {"ARVR": ["rendering-taas", "transport-taas"]})
    return orch, orch.admit(ServiceRequest("a", "ARVR")).msi_id


def test_monitor_scale_up_and_down():
    orch, msi = _orch()
    policy = ScalingPolicy(0.2, 0.9, RV(0, 0, 0, 100))
    assert monitor_and_scale(orch, msi, (0, 0, 0, 1.0), policy) is A.SCALE_UP
    assert orch.reserved(msi).rendering == 120
    assert monitor_and_scale(orch, msi, (0, 0, 0, 0.1), policy, RV(0, 0, 0, 50)) is A.SCALE_DOWN
    # floor: 50 K still in use, base reservation covers 20 K
    assert orch.reserved(msi).rendering == 50
    assert monitor_and_scale(orch, msi, (0, 0, 0, 0.1), policy, RV(0, 0, 0, 50)) is A.NONE


def test_scale_up_beyond_pool_downgrades():
    orch, msi = _orch(render=50)
    policy = ScalingPolicy(0.2, 0.9, RV(0, 0, 0, 100))
    assert monitor_and_scale(orch, msi, (0, 0, 0, 1.0), policy) is A.NONE
    assert orch.pool.conservation_error() == 0


def test_local_reports_reach_global():
    orch, msi = _orch()
    glob = GlobalController(["ARVR", "DT"], {"ARVR": RV(100, 0, 0, 20)})
    local = LocalController("ARVR", glob.report, scaling=ScalingPolicy(0.2, 0.9, RV(0, 0, 0, 10_000)))
    local.monitor(orch, msi, RV(100, 0, 0, 20), 0)  # full -> scale up, downgraded
    local.monitor(orch, msi, RV(0, 0, 0, 0), 1)
    assert len(glob.event_log) == local.action_count == 2
    assert "warning" in glob.event_log[0]


def test_global_epoch_design():
    glob = GlobalController(["ARVR", "DT"], {"ARVR": RV(100, 0, 0, 20)}, alpha=0.5, headroom=1.0)
    for _ in range(4):
        glob.record_arrival("ARVR")
    designs = glob.end_epoch()
    assert designs["ARVR"] == RV(400, 0, 0, 80)
    assert designs["DT"] == RV()
    designs = glob.end_epoch()
    assert designs["ARVR"] == RV(200, 0, 0, 40)
