"""Command-line entry point.

Exit codes: 0 success, 1 fixture or requirement failure, 2 scenario parse
error, 3 internal invariant violation. The seed comes from ``--seed``,
falling back to the ``ETSIM_SEED`` environment variable, then 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from pathlib import Path

from .adversary import execute_redirection
from .model import Money
from .rng import derive_seed
from .runner import diff_fixture, run
from .scenario import ScenarioParseError, load_scenario
from .world import InternalInvariantError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE_ERROR = 2
EXIT_INVARIANT = 3


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("ETSIM_SEED")
    return int(env) if env else 0


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = run(scenario, seed=_resolve_seed(args.seed))
    if args.report:
        Path(args.report).write_text(result.report.text, encoding="utf-8")
    else:
        sys.stdout.write(result.report.text)
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = run(scenario, seed=_resolve_seed(args.seed))
    diff = diff_fixture(result.report, args.fixture)
    print(diff.describe())
    return EXIT_OK if diff.matches else EXIT_FAILURE


def _cmd_attack(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    base_seed = _resolve_seed(args.seed)
    outcomes: Counter[str] = Counter()
    deposits = 0
    successes = 0
    for trial in range(args.trials):
        result = run(scenario, seed=derive_seed(base_seed, f"trial-{trial}"))
        world = result.world
        observer_cmds = [c for c in scenario.commands
                         if c.verb == "declare-observer" and c.opt("hijacks")]
        if not observer_cmds:
            print("scenario declares no observer with a hijacked account",
                  file=sys.stderr)
            return EXIT_PARSE_ERROR
        cmd = observer_cmds[0]
        from .adversary import Observer
        observer = Observer.for_level(args.observer_level)
        trace = execute_redirection(world, observer, cmd.opt("hijacks"),
                                    min_amount=Money(args.min_amount))
        outcomes[trace.outcome.value] += 1
        deposits += len(trace.deposited_transfers)
        if trace.deposited_transfers:
            successes += 1
    print(f"trials\t{args.trials}")
    print(f"redirected-deposits\t{deposits}")
    for outcome in sorted(outcomes):
        print(f"outcome\t{outcome}\t{outcomes[outcome]}")
    print(f"success-rate\t{successes / args.trials:.4f}")
    return EXIT_OK


def _cmd_requirements(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = run(scenario, seed=_resolve_seed(args.seed))
    report = result.requirement_report
    if report is None:
        from .requirements import check_requirements
        report = check_requirements(result.world)
    sys.stdout.write(report.render())
    return EXIT_OK if report.all_pass else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etsim",
        description="Deterministic e-transfer ecosystem simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and emit its report")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--report", help="write the report here instead of stdout")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="run a scenario and diff against a fixture")
    p_check.add_argument("scenario")
    p_check.add_argument("--fixture", required=True)
    p_check.add_argument("--seed", type=int)
    p_check.set_defaults(func=_cmd_check)

    p_attack = sub.add_parser("attack",
                              help="replay the redirection playbook over seeded trials")
    p_attack.add_argument("scenario")
    p_attack.add_argument("--observer-level", type=int, default=3)
    p_attack.add_argument("--min-amount", type=int, default=1,
                          help="minimum target amount in cents")
    p_attack.add_argument("--trials", type=int, default=1)
    p_attack.add_argument("--seed", type=int)
    p_attack.set_defaults(func=_cmd_attack)

    p_req = sub.add_parser("requirements",
                           help="run a scenario and print its requirement report")
    p_req.add_argument("scenario")
    p_req.add_argument("--seed", type=int)
    p_req.set_defaults(func=_cmd_requirements)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except InternalInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
