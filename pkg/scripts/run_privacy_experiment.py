#!/usr/bin/env python3
"""Run the 22-transfer privacy measurement and summarize what leaks.

Prints, per observer level, how many notifications are readable and the
tally of disclosed fields, then the per-combination field sets. Use
--all-plain to strip TLS from every email first (worst-case posture).
"""

import argparse
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from etsim.adversary import Observer, leaked_info_count, observe
from etsim.runner import run
from etsim.scenario import Scenario, load_scenario

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "privacy_experiment.scen"


def strip_tls(scenario: Scenario) -> Scenario:
    commands = [replace(c, opts={**c.opts, "tls": "off"})
                if c.verb == "declare-email" else c
                for c in scenario.commands]
    return Scenario(scenario.name + "-all-plain", scenario.seed, commands)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2019)
    parser.add_argument("--all-plain", action="store_true",
                        help="treat every email provider as TLS-free")
    args = parser.parse_args()

    scenario = load_scenario(SCENARIO)
    if args.all_plain:
        scenario = strip_tls(scenario)
    result = run(scenario, seed=args.seed)
    log = result.world.delivery_log
    print(f"scenario {scenario.name!r} seed {args.seed}: "
          f"{len(log)} notifications delivered\n")

    for level in range(2, 6):
        observations = observe(log, Observer.for_level(level))
        counts = leaked_info_count(observations)
        disclosed = {f.value: n for f, n in counts.items() if n}
        print(f"observer level {level}: reads {len(observations)}/{len(log)} "
              f"notifications")
        for name, n in sorted(disclosed.items()):
            print(f"    {name:<22} {n}")
        print()

    print("field sets by combination (kind/event/channel/first-or-subsequent):")
    shapes = Counter()
    for row in result.matrix_rows():
        shapes[(row[2], row[3], row[4], row[5], row[6])] += 1
    for (kind, event, channel, sub, fields), n in sorted(shapes.items()):
        print(f"  {n:>2}x {kind} {event} {channel} {sub}")
        print(f"      {fields}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
