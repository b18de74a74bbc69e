import json

import pytest

from slicing4meta.cli import main
from slicing4meta.experiments import FIG5_COLUMNS

from conftest import SCENARIOS


def test_validate_ok(capsys):
    assert main(["validate", str(SCENARIOS / "virtual_travel.json")]) == 0


def test_validate_missing_seed(tmp_path, capsys):
    doc = json.loads((SCENARIOS / "empty.json").read_text())
    del doc["seed"]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--scenario", str(path)]) == 2
    assert "seed" in capsys.readouterr().err


def test_validate_malformed(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["validate", str(path)]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_missing_file_is_runtime_error(tmp_path):
    assert main(["validate", str(tmp_path / "absent.json")]) == 3


def test_run_summaries(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["run", "--scenario", str(SCENARIOS / "empty.json"), "--out", str(out)]) == 0
    assert "users=0" in capsys.readouterr().out
    assert main(["run", "--scenario", str(SCENARIOS / "duplicate_ar.json"), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "msis_created=1" in text and "msis_reused=1" in text


def test_run_trace_and_pool_dump(tmp_path):
    out = tmp_path / "m.csv"
    pool = tmp_path / "pool.json"
    args = ["run", "--scenario", str(SCENARIOS / "ar_dt.json"), "--out", str(out), "--trace", "--dump-pool", str(pool)]
    assert main(args) == 0
    lines = (tmp_path / "m.trace.jsonl").read_text().splitlines()
    events = [json.loads(l) for l in lines]
    assert [e["decision"] for e in events] == ["create", "create"]
    assert set(events[0]) >= {"time", "request_id", "decision", "msi_id"}
    assert set(json.loads(pool.read_text())) == {"capacity", "remaining", "open_reservations"}


def test_run_seed_and_policy_flags(tmp_path):
    out = tmp_path / "m.csv"
    args = ["run", "--scenario", str(SCENARIOS / "virtual_travel.json"), "--out", str(out)]
    assert main(args + ["--seed", "5", "--policy", "even"]) == 0
    first = out.read_bytes()
    assert main(args + ["--seed", "5", "--policy", "even"]) == 0
    assert out.read_bytes() == first


def test_fig5_defaults(tmp_path):
    out = tmp_path / "fig5.csv"
    assert main(["fig5", "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").split("\n")
    assert lines[0] == ",".join(FIG5_COLUMNS)
    assert len([l for l in lines[1:] if l]) == 40
    assert "\r" not in out.read_text()


def test_fig5_flags(capsys):
    assert main(["fig5", "--rates", "10,20", "--n-users", "5,6,7", "--total-rendering", "1000", "--policy", "mimax"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")
    assert len(rows) == 1 + 6


def test_fig5_invalid_config(capsys):
    assert main(["fig5", "--rates", "0,10"]) == 2
