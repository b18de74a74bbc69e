import json
import sys
from pathlib import Path

import pytest

from slicing4meta.catalog import Catalog, MaaSModel
from slicing4meta.orchestrator import Orchestrator
from slicing4meta.resources import IsolationDegree, ResourceVector as RV, build_pool

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


@pytest.fixture
def scenario_doc():
    def load(name):
        return json.loads((SCENARIOS / name).read_text())

    return load


def small_catalog(render=4000, comm=1000, threshold=IsolationDegree.LOGICAL):
    cat = Catalog()
    cat.register_model(MaaSModel("render-server", "CaaS", supply=RV(0, 0, 0, render)))
    cat.register_model(MaaSModel("radio", "CaaS", supply=RV(comm, 10, 10, 0)))
    cat.register_model(
        MaaSModel(
            "rendering-taas",
            "TaaS",
            consumption=RV(0, 0, 0, 20),
            max_isolation_degree_for_sharing=threshold,
        )
    )
    cat.register_model(
        MaaSModel(
            "transport-taas",
            "TaaS",
            consumption=RV(100, 0, 0, 0),
            max_isolation_degree_for_sharing=threshold,
        )
    )
    cat.register_model(MaaSModel("twin-taas", "TaaS", consumption=RV(50, 5, 5, 0)))
    return cat


@pytest.fixture
def catalog():
    return small_catalog()


@pytest.fixture
def orchestrator(catalog):
    return Orchestrator(
        catalog,
        build_pool(catalog),
        {"ARVR": ["rendering-taas", "transport-taas"], "DT": ["twin-taas"]},
    )


def pytest_terminal_summary(terminalreporter):
    reports = [
        r
        for key in ("passed", "failed")
        for r in terminalreporter.stats.get(key, [])
        if r.when == "call" and "test_acceptance.py" in r.nodeid
    ]
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(reports, key=lambda r: r.nodeid):
        name = r.nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if r.passed else 'FAIL'}  {name}")
