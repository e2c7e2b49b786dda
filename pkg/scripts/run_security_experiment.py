#!/usr/bin/env python3
"""Replay the redirection attack run and print its outcome.

Shows each attack sweep (targets, attempts, deposits), the fate of every
transfer, and the final ledger, demonstrating that the sender-side
confirmations still name the originally specified recipients.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from etsim.notify import EventKind, Field
from etsim.runner import run
from etsim.scenario import load_scenario

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "security_experiment.scen"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2019)
    args = parser.parse_args()

    result = run(load_scenario(SCENARIO), seed=args.seed)
    world = result.world
    labels_by_id = {tid: label for label, tid in result.labels.items()}

    for i, (observer, trace) in enumerate(result.traces):
        deposited = [labels_by_id[t] for t in trace.deposited_transfers]
        print(f"attack sweep {i + 1} by {observer}: {trace.outcome.value}; "
              f"deposited {deposited}")
        for transfer_id, attempts in trace.attempts_by_transfer.items():
            print(f"    {labels_by_id[transfer_id]:<5} {attempts} attempt(s)")
    print()

    print("transfer outcomes:")
    for transfer_id, tx in world.transfers.items():
        label = labels_by_id.get(transfer_id, transfer_id)
        into = f" -> {tx.deposited_into}" if tx.deposited_into else ""
        print(f"  {label:<5} {tx.amount.cad:>12}  {tx.status.value}{into}")
    print()

    print("what each sender was told:")
    for record in world.delivery_log:
        note = record.notification
        if note.event is not EventKind.SENDER_CONFIRMATION:
            continue
        label = labels_by_id.get(note.transfer_ref, note.transfer_ref)
        name = note.fields.get(Field.RECIPIENT_NAME_CUSTOM, "-")
        print(f"  {label:<5} status={note.fields[Field.STATUS]:<10} "
              f"recipient shown as {name!r}")
    print()

    print("final ledger:")
    for account_id in sorted(world.ledger.accounts):
        print(f"  {account_id:<12} {world.ledger.accounts[account_id].balance.cad}")
    print(f"  total        {world.ledger.total_system_value().cad}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
