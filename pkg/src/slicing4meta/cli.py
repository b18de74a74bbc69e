"""Command-line entry point: ``slicing4meta {validate,run,fig5}``.

Exit codes: 0 success, 2 validation error, 3 runtime error. Set
``SLICING4META_LOG`` (e.g. ``DEBUG``) for log output on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .controllers import AllocationPolicy
from .errors import ConfigInvalid, ScenarioInvalid
from .experiments import Fig5Config, fig5_csv, run_fig5
from .scenario import load_scenario
from .simkernel import Simulation

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3

log = logging.getLogger("slicing4meta")


def _csv_list(cast):
    def parse(text: str):
        try:
            return [cast(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a comma-separated list: {text!r}") from None

    return parse


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slicing4meta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file against the schema")
    p.add_argument("path", nargs="?")
    p.add_argument("--scenario", dest="scenario")

    p = sub.add_parser("run", help="simulate a scenario")
    p.add_argument("path", nargs="?")
    p.add_argument("--scenario", dest="scenario")
    p.add_argument("--seed", type=_u64, help="override the scenario seed")
    p.add_argument("--out", default="metrics.csv", help="per-user metrics CSV path")
    p.add_argument("--trace", action="store_true", help="write a JSON-lines event trace")
    p.add_argument("--policy", choices=[x.value for x in AllocationPolicy])
    p.add_argument("--dump-pool", metavar="PATH", help="write the final pool snapshot as JSON")

    p = sub.add_parser("fig5", help="MI versus user count under several rate conditions")
    p.add_argument("--seed", type=_u64, default=Fig5Config.seed)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--policy", choices=[x.value for x in AllocationPolicy], default="even")
    p.add_argument("--rates", type=_csv_list(float))
    p.add_argument("--n-users", type=_csv_list(int))
    p.add_argument("--total-rendering", type=float)
    p.add_argument("--bep", type=float)
    return parser


def _scenario_path(args) -> str:
    path = args.scenario or args.path
    if not path:
        raise ScenarioInvalid("no scenario given (use --scenario PATH)")
    return path


def cmd_validate(args) -> int:
    load_scenario(_scenario_path(args))
    print("ok")
    return EXIT_OK


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def cmd_run(args) -> int:
    scenario = load_scenario(_scenario_path(args))
    if args.seed is not None:
        scenario.seed = args.seed
    if args.policy:
        scenario.policy = AllocationPolicy(args.policy)
    report = Simulation(scenario).run()

    out = Path(args.out)
    _write(out, report.to_csv())
    _write(out.with_suffix(".json"), report.to_json())
    if args.trace:
        _write(out.with_suffix(".trace.jsonl"), report.trace_jsonl())
    if args.dump_pool:
        _write(Path(args.dump_pool), json.dumps(report.pool, indent=2, sort_keys=True))

    s = report.summary
    print(
        f"users={s['users']} admitted={s['admitted']} rejected={s['rejected']} "
        f"msis_created={s['msis_created']} msis_reused={s['msis_reused']} "
        f"msis_modified={s['msis_modified']} mean_mi={s['mean_mi']:.6f}"
    )
    return EXIT_OK


def cmd_fig5(args) -> int:
    config = Fig5Config(seed=args.seed, policy=AllocationPolicy(args.policy))
    overrides = {}
    if args.rates is not None:
        overrides["rate_conditions"] = tuple(args.rates)
    if args.n_users is not None:
        overrides["n_users"] = tuple(args.n_users)
    if args.total_rendering is not None:
        overrides["total_rendering"] = args.total_rendering
    if args.bep is not None:
        overrides["bep"] = args.bep
    config = replace(config, **overrides)
    text = fig5_csv(run_fig5(config))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "fig5": cmd_fig5}


def main(argv: Optional[List[str]] = None) -> int:
    level = os.environ.get("SLICING4META_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ScenarioInvalid, ConfigInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.exception("run failed")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
