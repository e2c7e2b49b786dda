"""Observer levels, leakage analysis and the redirection attack.

Five reader profiles, ordered by strength:

1. the intended party — sees exactly the notifications addressed to it;
2. an unintended recipient or administrator — reads whatever crosses the
   wire in plaintext;
3. a criminal individual — plaintext in transit plus compromised
   endpoints, and holds a hijacked account to deposit into;
4. a criminal organization — the same reads at many-target scale;
5. an intelligence agency — additionally reads encrypted transit.

The redirection attack follows the playbook an eavesdropper would run
against the legacy protocol: harvest notices, pick standard transfers of
interesting amounts, open each deposit link from the hijacked session,
answer the security question, and deposit into the hijacked account until
its daily deposit ceiling is reached.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence

from .clock import fmt_minutes
from .legacy import (DepositOutcome, QuestionStrength, Session,
                     TransferStatus, answer_and_deposit, lookup_autodeposit,
                     open_deposit_link)
from .model import Money, SimulationError
from .notify import DeliveryRecord, Field, destination_text

if TYPE_CHECKING:  # pragma: no cover
    import random

    from .world import World


class NoCapability(SimulationError):
    pass


class Scale(Enum):
    SINGLE_TARGET = "single-target"
    MANY_TARGETS = "many-targets"


@dataclass(frozen=True)
class Observer:
    level: int
    read_plaintext_transit: bool = False
    read_endpoint_compromised: bool = False
    read_encrypted_transit: bool = False
    hijack_account: bool = False
    scale: Scale = Scale.SINGLE_TARGET
    party_addresses: frozenset[str] = frozenset()

    @classmethod
    def for_level(cls, level: int,
                  party_addresses: Sequence[str] = ()) -> "Observer":
        if level == 1:
            return cls(1, party_addresses=frozenset(party_addresses))
        if level == 2:
            return cls(2, read_plaintext_transit=True)
        if level == 3:
            return cls(3, read_plaintext_transit=True,
                       read_endpoint_compromised=True, hijack_account=True)
        if level == 4:
            return cls(4, read_plaintext_transit=True,
                       read_endpoint_compromised=True, hijack_account=True,
                       scale=Scale.MANY_TARGETS)
        if level == 5:
            return cls(5, read_plaintext_transit=True,
                       read_endpoint_compromised=True,
                       read_encrypted_transit=True, hijack_account=True,
                       scale=Scale.MANY_TARGETS)
        raise ValueError(f"observer level must be 1..5, got {level}")


@dataclass(frozen=True)
class Observation:
    delivery_seq: int
    fields_seen: dict[Field, str]
    observed_at: int
    link_token: Optional[str]
    destination: str

    def value(self, f: Field) -> Optional[str]:
        return self.fields_seen.get(f)


def observe(delivery_log: Sequence[DeliveryRecord],
            observer: Observer) -> list[Observation]:
    """Everything in the log this observer can read, full field maps only."""
    seen = []
    for record in delivery_log:
        note = record.notification
        if observer.level == 1:
            readable = destination_text(note.destination) in observer.party_addresses
        else:
            readable = (
                (record.plaintext_exposed_in_transit and observer.read_plaintext_transit)
                or (record.endpoint_exposed and observer.read_endpoint_compromised)
                or observer.read_encrypted_transit
            )
        if readable:
            seen.append(Observation(
                delivery_seq=record.seq,
                fields_seen=dict(note.fields),
                observed_at=record.delivered_at,
                link_token=note.link_token,
                destination=destination_text(note.destination),
            ))
    return seen


def leaked_info_count(observations: Sequence[Observation]) -> dict[Field, int]:
    """Occurrences of every field across the observations (all members
    present, zeros included)."""
    counts = {f: 0 for f in Field}
    for obs in observations:
        for f in obs.fields_seen:
            counts[f] += 1
    return counts


@dataclass(frozen=True)
class Target:
    link_token: str
    amount: Money
    observed_at: int
    question_text: Optional[str] = None


def select_targets(observations: Sequence[Observation],
                   min_amount: Money) -> list[Target]:
    """Standard-transfer notices worth redirecting: deposit link present,
    amount at least the threshold; biggest first, earliest-seen breaking
    ties. The question is not in the notice; it is learned by opening
    the link."""
    targets = []
    for obs in observations:
        if obs.value(Field.STATUS) != "sent":
            continue
        token = obs.value(Field.DEPOSIT_LINK)
        amount_text = obs.value(Field.AMOUNT)
        if not token or amount_text is None:
            continue
        amount = Money.parse_cad(amount_text)
        if amount < min_amount:
            continue
        targets.append(Target(token, amount, obs.observed_at))
    targets.sort(key=lambda t: (-t.amount.cents, t.observed_at))
    return targets


@dataclass(frozen=True)
class QuestionKnowledge:
    prior_knowledge_questions: frozenset[str]
    made_up_questions: frozenset[str]

    @property
    def all_questions(self) -> frozenset[str]:
        return self.prior_knowledge_questions | self.made_up_questions


def shareable_questions(sender: QuestionKnowledge,
                        recipient: QuestionKnowledge) -> frozenset[str]:
    """Questions two parties could actually share: the intersection of
    what each knows or would make up."""
    return sender.all_questions & recipient.all_questions


@dataclass(frozen=True)
class GuessModel:
    """Per-attempt success probability by question strength."""

    per_attempt: dict[QuestionStrength, float]

    def __post_init__(self) -> None:
        for strength, p in self.per_attempt.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for {strength.value} out of [0,1]: {p}")

    @classmethod
    def default(cls) -> "GuessModel":
        return cls({QuestionStrength.EXPOSED: 1.0,
                    QuestionStrength.WEAK: 0.5,
                    QuestionStrength.STRONG: 0.0})

    def p(self, strength: QuestionStrength) -> float:
        return self.per_attempt.get(strength, 0.0)


class AttackOutcome(Enum):
    REDIRECTED_DEPOSIT = "redirected-deposit"
    LOCKED_OUT = "locked-out"
    NO_TARGET_FOUND = "no-target-found"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class AttackStep:
    step_no: int
    description: str
    success: bool
    evidence: str


@dataclass
class AttackTrace:
    steps: list[AttackStep] = field(default_factory=list)
    outcome: AttackOutcome = AttackOutcome.NO_TARGET_FOUND
    deposited_transfers: list[str] = field(default_factory=list)
    attempts_by_transfer: dict[str, int] = field(default_factory=dict)

    def add(self, step_no: int, description: str, success: bool,
            evidence: str = "") -> None:
        self.steps.append(AttackStep(step_no, description, success, evidence))

    def render_lines(self) -> list[str]:
        lines = [f"outcome\t{self.outcome.value}"]
        for s in self.steps:
            lines.append(f"step\t{s.step_no}\t{s.description}\t"
                         f"{'ok' if s.success else 'fail'}\t{s.evidence}")
        return lines


_TOKEN_SPLIT = re.compile(r"[^A-Za-z0-9]+")


def _derive_exposed_answer(answer_text: str,
                           fields_seen: dict[Field, str]) -> Optional[str]:
    """An exposed answer can be read out of the notice itself; find it
    among the word tokens of the observed field values."""
    wanted = answer_text.strip().lower()
    for value in fields_seen.values():
        for token in _TOKEN_SPLIT.split(value):
            if token.lower() == wanted:
                return answer_text
    return None


def execute_redirection(world: "World", observer: Observer,
                        hijacked_account: str,
                        guess_model: Optional[GuessModel] = None,
                        rng: Optional["random.Random"] = None,
                        min_amount: Money = Money(1)) -> AttackTrace:
    """Run the full redirection playbook against one world.

    Exposed questions are answered from the observed notice; otherwise
    each of the up-to-four attempts succeeds with the guess model's
    per-attempt probability. Scripted answer sequences attached to a
    transfer (recorded attacker behaviour) take precedence over both.
    Deposits stop at the hijacked account's daily deposit ceiling.
    """
    if not observer.hijack_account:
        raise NoCapability(f"level-{observer.level} observer cannot hijack accounts")
    account = world.account(hijacked_account)
    fi = world.fis[account.fi]
    guess_model = guess_model or GuessModel.default()
    rng = rng or world.rng.stream("guesses")

    trace = AttackTrace()
    trace.add(1, "hijack account", True,
              f"acting from {hijacked_account} at {fi.fi_id}")

    observations = observe(world.delivery_log, observer)
    by_token = {o.link_token: o for o in observations if o.link_token}
    targets = select_targets(observations, min_amount)
    # delivery timestamps hint at the victims' banking hours; they inform
    # the attacker's timing but never gate the attack
    if observations:
        times = [o.observed_at for o in observations]
        window = f"; notices seen {fmt_minutes(min(times))}..{fmt_minutes(max(times))}"
    else:
        window = ""
    trace.add(2, "eavesdrop and select targets", bool(targets),
              f"{len(observations)} notifications observed, "
              f"{len(targets)} standard targets >= {min_amount.cad}{window}")

    if not targets:
        transfer_noticed = any(
            o.value(Field.STATUS) is not None
            and o.value(Field.DEPOSIT_LINK) is None
            for o in observations)
        trace.outcome = AttackOutcome.BLOCKED if transfer_noticed \
            else AttackOutcome.NO_TARGET_FOUND
        trace.add(6, "continue or stop", False,
                  "no actionable deposit link in any observed notification"
                  if transfer_noticed else "nothing observed worth redirecting")
        return trace

    session = Session(logged_in_fi=fi.fi_id, acting_account=hijacked_account)
    any_deposit = False
    any_lockout = False
    for target in targets:
        transfer_id = world.link_tokens.get(target.link_token)
        tx = world.transfers.get(transfer_id) if transfer_id else None
        if tx is None or tx.status is not TransferStatus.NOTIFICATION_SENT:
            trace.add(3, f"open deposit link {transfer_id or '?'}", False,
                      "transfer no longer pending")
            continue

        deposited_today = world.ledger.daily_totals(
            hijacked_account, world.clock.day).deposited
        if deposited_today + target.amount > fi.daily_deposit_limit:
            trace.add(6, f"daily deposit ceiling before {tx.transfer_id}", False,
                      f"{deposited_today.cad} + {target.amount.cad} would pass "
                      f"{fi.daily_deposit_limit.cad}; skipping")
            continue

        view = open_deposit_link(world, target.link_token, session)
        trace.add(3, f"open deposit link {tx.transfer_id}", True,
                  f"question: {view.question_text}")

        script = world.attack_scripts.get(tx.transfer_id)
        if script:
            answers = list(script)
        elif tx.question.strength_class is QuestionStrength.EXPOSED:
            obs = by_token.get(target.link_token)
            derived = _derive_exposed_answer(
                tx.question.answer_text, obs.fields_seen if obs else {})
            answers = [derived] if derived else []
        else:
            answers = None  # guess per attempt

        attempts = 0
        result = None
        while attempts < 4:
            if answers is not None:
                if attempts >= len(answers):
                    break
                answer = answers[attempts]
                guessed_right = None
            else:
                guessed_right = rng.random() < guess_model.p(
                    tx.question.strength_class)
                answer = tx.question.answer_text if guessed_right \
                    else f"wrong-guess-{attempts + 1}"
            attempts += 1
            result = answer_and_deposit(world, target.link_token, answer,
                                        hijacked_account)
            trace.add(4, f"answer attempt {result.attempts_used} on {tx.transfer_id}",
                      result.outcome is DepositOutcome.DEPOSITED,
                      result.outcome.value)
            if result.outcome is not DepositOutcome.WRONG_ANSWER:
                break
        if result is not None and result.outcome is DepositOutcome.DEPOSITED:
            any_deposit = True
            trace.deposited_transfers.append(tx.transfer_id)
            trace.attempts_by_transfer[tx.transfer_id] = result.attempts_used
            trace.add(5, f"deposit {tx.transfer_id}", True,
                      f"{target.amount.cad} into {hijacked_account}")
        else:
            any_lockout = True
            trace.attempts_by_transfer[tx.transfer_id] = tx.attempts_used

    deposited_today = world.ledger.daily_totals(
        hijacked_account, world.clock.day).deposited
    trace.add(6, "continue or stop", True,
              f"deposited {deposited_today.cad} of "
              f"{fi.daily_deposit_limit.cad} daily ceiling")
    if any_deposit:
        trace.outcome = AttackOutcome.REDIRECTED_DEPOSIT
    elif any_lockout:
        trace.outcome = AttackOutcome.LOCKED_OUT
    else:
        trace.outcome = AttackOutcome.NO_TARGET_FOUND
    return trace


def snoop_autodeposit_names(world: "World",
                            addresses: Sequence[str]) -> list[tuple[str, str]]:
    """Harvest (address, legal name) pairs via the unthrottled autodeposit
    lookup; any logged-in session suffices."""
    harvested = []
    for address in addresses:
        result = lookup_autodeposit(world, address)
        if result is not None:
            harvested.append((address, result.legal_name))
    return harvested
