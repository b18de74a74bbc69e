import pytest

from slicing4meta.controllers import AllocationPolicy
from slicing4meta.errors import ConfigInvalid
from slicing4meta.experiments import Fig5Config, fig5_csv, fig5_population, run_fig5


def test_default_row_count():
    assert len(run_fig5()) == 40


def test_rows_follow_config_order():
    rows = run_fig5(Fig5Config(n_users=(20, 10), rate_conditions=(100, 50)))
    assert [(r["n_users"], r["rate_mbps"]) for r in rows] == [(20, 100), (20, 50), (10, 100), (10, 50)]


def test_rate_ordering_at_every_n():
    rows = run_fig5()
    for n in range(10, 101, 10):
        means = [r["mean_mi"] for r in rows if r["n_users"] == n]
        assert all(a < b for a, b in zip(means, means[1:]))


@pytest.mark.parametrize("seed", [0, 1, 7, 2023, 2**63])
def test_non_increasing_in_n(seed):
    rows = run_fig5(Fig5Config(seed=seed))
    for rate in (50, 100, 200, 400):
        means = [r["mean_mi"] for r in rows if r["rate_mbps"] == rate]
        assert all(b <= a for a, b in zip(means, means[1:]))


def test_min_mean_max_consistent():
    for r in run_fig5(Fig5Config(policy=AllocationPolicy.MIMAX)):
        assert r["min_mi"] <= r["mean_mi"] <= r["max_mi"]


def test_mimax_mean_at_least_even():
    even = run_fig5()
    best = run_fig5(Fig5Config(policy=AllocationPolicy.MIMAX))
    for e, b in zip(even, best):
        assert b["mean_mi"] >= e["mean_mi"] - 1e-9


def test_population_shared_and_in_range():
    pop = fig5_population(2023, 100)
    assert all(1 <= n <= 56 for n in pop)
    assert fig5_population(2023, 10) == pop[:10]


def test_csv_byte_deterministic():
    assert fig5_csv(run_fig5()) == fig5_csv(run_fig5())


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_users=(0,)), dict(rate_conditions=(-1,)), dict(total_rendering=-5), dict(n_users=())],
)
def test_invalid_config(kwargs):
    with pytest.raises(ConfigInvalid):
        run_fig5(Fig5Config(**kwargs))
