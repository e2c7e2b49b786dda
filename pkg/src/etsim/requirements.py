"""Machine checks for the seven protocol security/privacy requirements.

Each check is a pass over the finished world and its trace:

R1 intrasystem security and privacy — no security flow may rest on
   channel secrecy or human-chosen secrets: no security questions exist,
   and no delivered notification carries a token that any fund-moving
   operation would accept.
R2 transfer directability — every deposit landed with the addressed
   party (a linked account of the targeted identifier, or the account of
   whoever owns the notified contact).
R3 identifier verification — every initiation used a verified sending
   identity.
R4 recipient-identifier verifiability — identifier checks leak nothing:
   no lookup revealed a legal name, and every identifier/code failure
   produced one indistinguishable error value.
R5 rejectability/returnability — every transfer in the trace could be
   rejected or returned by its recipient.
R6 individual authorization — every initiation, request fulfilment and
   device change consumed a one-time authorization, and no authorization
   was consumed twice.
R7 minimum disclosure — notifications over insecure channels carry at
   most a bare status word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

from .legacy import TransferKind
from .notify import Channel, Field

if TYPE_CHECKING:  # pragma: no cover
    from .world import TraceEvent, World

REQUIREMENT_TITLES = {
    "R1": "intrasystem security and privacy",
    "R2": "transfer directability",
    "R3": "sender identifier verification",
    "R4": "recipient identifier verifiability",
    "R5": "transfer rejectability/returnability",
    "R6": "individual operation authorization",
    "R7": "minimum information disclosure",
}

_INITIATION_OPS = {"initiate-standard", "initiate-autodeposit",
                   "initiate-request", "send-directed", "request-directed"}
_AUTH_NEEDING_OPS = _INITIATION_OPS | {"fulfil-request", "fulfil-directed",
                                       "change-device"}
_INSECURE_CHANNELS = {Channel.EMAIL, Channel.SMS}


@dataclass(frozen=True)
class RequirementResult:
    requirement: str
    passed: bool
    evidence: str


@dataclass
class RequirementReport:
    results: dict[str, RequirementResult]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.results.values())

    def render_lines(self) -> list[str]:
        return [f"{key}\t{'pass' if r.passed else 'fail'}\t{r.evidence}"
                for key, r in sorted(self.results.items())]

    def render(self) -> str:
        return "\n".join(self.render_lines()) + "\n"


def _ok(key: str, evidence: str) -> RequirementResult:
    return RequirementResult(key, True, evidence)


def _fail(key: str, evidence: str) -> RequirementResult:
    return RequirementResult(key, False, evidence)


def _check_r1(world: "World") -> RequirementResult:
    questioned = [t.transfer_id for t in world.transfers.values() if t.question]
    actionable = []
    for record in world.delivery_log:
        note = record.notification
        if note.channel is Channel.PORTAL_INBOX:
            continue
        if note.link_token and note.link_token in world.link_tokens:
            actionable.append(note.link_token)
    problems = []
    if questioned:
        problems.append(f"security questions present on {len(questioned)} "
                        f"transfer(s), e.g. {questioned[0]}")
    if actionable:
        problems.append(f"{len(actionable)} notification(s) carried actionable "
                        f"deposit/fulfil links")
    if problems:
        return _fail("R1", "; ".join(problems))
    return _ok("R1", "no security questions; no actionable links in notifications")


def _check_r2(world: "World", deposits: Sequence["TraceEvent"]) -> RequirementResult:
    if not deposits:
        return _ok("R2", "no deposits occurred")
    unbound = [e for e in deposits if e.detail("bound") != "yes"]
    if unbound:
        first = unbound[0]
        return _fail("R2", f"redirected deposit: {first.detail('transfer')} "
                           f"landed in account of {first.detail('owner')}, "
                           f"addressed party was {first.detail('intended')} "
                           f"({len(unbound)} of {len(deposits)} deposits)")
    return _ok("R2", f"all {len(deposits)} deposits landed with the addressed party")


def _check_r3(world: "World", initiations: Sequence["TraceEvent"]) -> RequirementResult:
    if not initiations:
        return _ok("R3", "no initiations occurred")
    unverified = [e for e in initiations if e.detail("sender-verified") != "yes"]
    if unverified:
        return _fail("R3", f"unverified sender identity (sender email taken "
                           f"as typed) on {len(unverified)} of "
                           f"{len(initiations)} initiations")
    return _ok("R3", f"all {len(initiations)} initiations used a verified identity")


def _check_r4(world: "World", trace: Sequence["TraceEvent"]) -> RequirementResult:
    lookups = [e for e in trace if e.op == "lookup-autodeposit"
               and e.detail("revealed") == "yes"]
    failures = [e for e in trace if e.outcome == "error:InvalidIdOrCode"
                and e.detail("serialized") is not None]
    serializations = {e.detail("serialized") for e in failures}
    problems = []
    if lookups:
        names = {e.detail("legal-name") for e in lookups}
        problems.append(f"identifier lookup revealed legal names "
                        f"({len(lookups)} lookup(s), {len(names)} name(s))")
    if len(serializations) > 1:
        problems.append("identifier/code failures were distinguishable")
    if problems:
        return _fail("R4", "; ".join(problems))
    if not lookups and not failures and not any(
            e.op == "lookup-autodeposit" for e in trace):
        return _ok("R4", "no identifier checks occurred")
    return _ok("R4", "no name-revealing lookups; all identifier/code failures "
                     "indistinguishable")


def _check_r5(world: "World") -> RequirementResult:
    stuck = [t.transfer_id for t in world.transfers.values()
             if t.kind is TransferKind.AUTODEPOSIT]
    total = len(world.transfers) + len(world.directed)
    if stuck:
        return _fail("R5", f"autodeposit transfers offer no reject or return "
                           f"path ({len(stuck)} of {total} transfers, "
                           f"e.g. {stuck[0]})")
    if total == 0:
        return _ok("R5", "no transfers occurred")
    return _ok("R5", f"all {total} transfers were rejectable or returnable")


def _check_r6(world: "World", trace: Sequence["TraceEvent"]) -> RequirementResult:
    governed = [e for e in trace if e.op in _AUTH_NEEDING_OPS
                and e.outcome == "ok"]
    if not governed:
        return _ok("R6", "no fund operations occurred")
    unauthorized = [e for e in governed if e.detail("auth") != "yes"]
    consumptions = [e.detail("token") for e in trace if e.op == "consume-auth"]
    double_spent = len(consumptions) != len(set(consumptions))
    problems = []
    if unauthorized:
        problems.append(f"{len(unauthorized)} of {len(governed)} fund "
                        f"operations ran without one-time authorization")
    if double_spent:
        problems.append("an authorization token was consumed twice")
    if problems:
        return _fail("R6", "; ".join(problems))
    return _ok("R6", f"all {len(governed)} fund operations consumed a "
                     f"one-time authorization")


def _check_r7(world: "World") -> RequirementResult:
    offenders = []
    for record in world.delivery_log:
        note = record.notification
        if note.channel not in _INSECURE_CHANNELS:
            continue
        extra = set(note.fields) - {Field.STATUS}
        if extra:
            offenders.append((note, extra))
    if offenders:
        note, extra = offenders[0]
        fields = ",".join(sorted(f.value for f in extra))
        return _fail("R7", f"rich notifications over insecure channels "
                           f"({len(offenders)} notifications; first disclosed "
                           f"{fields})")
    if not world.delivery_log:
        return _ok("R7", "no notifications were sent")
    return _ok("R7", "insecure-channel notifications carried at most a status word")


def check_requirements(world: "World",
                       trace: Optional[Sequence["TraceEvent"]] = None) -> RequirementReport:
    """Evaluate R1..R7 against a world after a scenario has run on it."""
    trace = list(world.trace if trace is None else trace)
    if not trace and not world.transfers and not world.directed \
            and not world.delivery_log:
        return RequirementReport({
            key: _ok(key, "no events") for key in REQUIREMENT_TITLES})
    deposits = [e for e in trace if e.op == "deposit"]
    initiations = [e for e in trace if e.op in _INITIATION_OPS
                   and e.outcome == "ok"]
    results = {
        "R1": _check_r1(world),
        "R2": _check_r2(world, deposits),
        "R3": _check_r3(world, initiations),
        "R4": _check_r4(world, trace),
        "R5": _check_r5(world),
        "R6": _check_r6(world, trace),
        "R7": _check_r7(world),
    }
    return RequirementReport(results)
