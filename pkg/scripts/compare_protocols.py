#!/usr/bin/env python3
"""Legacy versus directed, side by side.

Runs the requirement checker over both baseline scenarios, then replays
the identical redirection playbook against each across seeded trials and
reports the outcome split.
"""

import argparse
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from etsim.adversary import Observer, execute_redirection
from etsim.model import Money
from etsim.rng import derive_seed
from etsim.runner import run
from etsim.scenario import Scenario, load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
WORLDS = {
    "legacy": ("legacy_requirements.scen", "mallory-maple"),
    "directed": ("directed_baseline.scen", "mallory-east"),
}


def without_embedded_attack(scenario: Scenario) -> Scenario:
    commands = [c for c in scenario.commands if c.verb != "run-attack"]
    return Scenario(scenario.name, scenario.seed, commands)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2019)
    parser.add_argument("--trials", type=int, default=200)
    args = parser.parse_args()

    for name, (scenario_file, hijacked) in WORLDS.items():
        scenario = load_scenario(SCENARIOS / scenario_file)
        result = run(scenario, seed=args.seed)
        print(f"=== {name} ({scenario_file})")
        print(result.requirement_report.render(), end="")

        # replay the playbook against worlds whose transfers are still
        # pending, so both protocols face the same live attack
        replayable = without_embedded_attack(scenario)
        outcomes = Counter()
        deposits = 0
        for trial in range(args.trials):
            world = run(replayable, seed=derive_seed(args.seed,
                                                     f"trial-{trial}")).world
            trace = execute_redirection(world, Observer.for_level(3),
                                        hijacked, min_amount=Money(1))
            outcomes[trace.outcome.value] += 1
            deposits += len(trace.deposited_transfers)
        print(f"redirection playbook over {args.trials} trials: "
              f"{dict(sorted(outcomes.items()))}, "
              f"{deposits} redirected deposits\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
