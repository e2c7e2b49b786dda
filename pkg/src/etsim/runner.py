"""Scenario interpreter and report generation.

``run`` executes a parsed scenario against a fresh world and produces a
plain-text report whose bytes are a pure function of (scenario text,
seed): sections for the command/event log, per-notification field sets,
the ledger, attack traces, leakage tallies and the requirement report.
Operation failures inside a scenario are recorded as events, not crashes;
only parse errors and internal invariant violations abort a run. Every
run ends with a conservation audit of the ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import adversary, directed, legacy
from .adversary import (AttackTrace, GuessModel, Observer, leaked_info_count,
                        observe, select_targets, shareable_questions,
                        snoop_autodeposit_names)
from .legacy import QuestionStrength, SecurityQuestion, Session
from .model import Money, NameFormat, SimulationError
from .notify import Field
from .requirements import RequirementReport, check_requirements
from .scenario import Scenario, ScenarioCommand
from .world import World

_STRENGTHS = {s.value: s for s in QuestionStrength}
_NAME_FORMATS = {f.value: f for f in NameFormat}


@dataclass
class Report:
    text: str


@dataclass
class RunResult:
    world: World
    report: Report
    seed: int
    labels: dict[str, str]
    traces: list[tuple[str, AttackTrace]]
    leakage: list[tuple[str, dict[Field, int]]]
    requirement_report: Optional[RequirementReport]

    def matrix_rows(self) -> list[tuple[str, ...]]:
        reverse = {tid: label for label, tid in self.labels.items()}
        return [tuple(line.split("\t"))
                for line in _matrix_lines(self.world, reverse)]


@dataclass
class _Context:
    world: World
    labels: dict[str, str] = field(default_factory=dict)   # label -> id
    reverse_labels: dict[str, str] = field(default_factory=dict)
    observers: dict[str, Observer] = field(default_factory=dict)
    hijacked: dict[str, str] = field(default_factory=dict)
    knowledge: dict[str, adversary.QuestionKnowledge] = field(default_factory=dict)
    verification_tokens: dict[str, str] = field(default_factory=dict)
    traces: list[tuple[str, AttackTrace]] = field(default_factory=list)
    leakage: list[tuple[str, dict[Field, int]]] = field(default_factory=list)
    requirement_report: Optional[RequirementReport] = None
    auto_label = 0

    def bind_label(self, cmd: ScenarioCommand, transfer_id: str) -> str:
        label = cmd.opt("label")
        if label is None:
            self.auto_label += 1
            label = f"t{self.auto_label}"
        self.labels[label] = transfer_id
        self.reverse_labels[transfer_id] = label
        return label

    def resolve(self, ref: str) -> str:
        return self.labels.get(ref, ref)


def _need(cmd: ScenarioCommand, count: int) -> None:
    if len(cmd.args) < count:
        raise SimulationError(
            f"{cmd.verb} needs {count} positional arguments, got {len(cmd.args)}")


def _money(text: str) -> Money:
    return Money(int(text))


def _flag(value: Optional[str], default: bool = False) -> bool:
    if value is None:
        return default
    return value in ("on", "yes", "true", "1")


# -- command handlers ------------------------------------------------------------


def _h_declare_fi(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    fi_id = cmd.args[0]
    kwargs = {}
    if cmd.opt("policy"):
        kwargs["name_format"] = _NAME_FORMATS[cmd.opt("policy")]
    if cmd.opt("min"):
        kwargs["min_transfer"] = _money(cmd.opt("min"))
    if cmd.opt("max"):
        kwargs["max_transfer"] = _money(cmd.opt("max"))
    if cmd.opt("send-limit"):
        kwargs["daily_send_limit"] = _money(cmd.opt("send-limit"))
    if cmd.opt("deposit-limit"):
        kwargs["daily_deposit_limit"] = _money(cmd.opt("deposit-limit"))
    if cmd.opt("confirmations") is not None:
        kwargs["supports_confirmation_message"] = _flag(cmd.opt("confirmations"))
    if cmd.opt("portal") is not None:
        kwargs["supports_portal_inbox"] = _flag(cmd.opt("portal"))
    ctx.world.add_fi(fi_id, cmd.opt("name", fi_id), **kwargs)
    ctx.world.record("declare-fi", fi=fi_id)


def _h_declare_customer(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    customer_id = cmd.args[0]
    ctx.world.add_customer(
        customer_id,
        legal_name=cmd.opt("legal", customer_id),
        profile_name=cmd.opt("profile"),
        preferred_language=cmd.opt("lang", "English"),
        realtime_status_relay=_flag(cmd.opt("relay")),
        signed_notices=_flag(cmd.opt("signed")),
    )
    ctx.world.record("declare-customer", customer=customer_id)


def _h_declare_email(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    ctx.world.add_email(cmd.args[0], cmd.args[1],
                        tls=_flag(cmd.opt("tls"), default=True),
                        compromised=_flag(cmd.opt("compromised")))
    ctx.world.record("declare-email", address=cmd.args[1])


def _h_declare_phone(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    ctx.world.add_phone(cmd.args[0], cmd.args[1],
                        compromised=_flag(cmd.opt("compromised")))
    ctx.world.record("declare-phone", number=cmd.args[1])


def _h_declare_account(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    ctx.world.add_account(cmd.args[0], cmd.opt("owner"), cmd.opt("fi"))
    ctx.world.record("declare-account", account=cmd.args[0])


def _h_mint(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    ctx.world.mint(cmd.args[0], _money(cmd.args[1]))
    ctx.world.record("mint", account=cmd.args[0], amount=cmd.args[1])


def _h_advance_clock(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    ctx.world.clock.advance(int(cmd.args[0]))
    ctx.world.record("advance-clock", minutes=cmd.args[0],
                     now=ctx.world.clock.now)


def _h_set_tls(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    email = ctx.world.emails[cmd.args[0]]
    email.provider_tls_incoming = _flag(cmd.args[1])
    ctx.world.record("set-tls", address=cmd.args[0], tls=cmd.args[1])


def _h_compromise(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    contact = ctx.world.contact(cmd.args[0])
    contact.endpoint_compromised = True
    ctx.world.record("compromise-endpoint", contact=cmd.args[0])


def _h_send_standard(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 4)
    account, name, contact, cents = cmd.args[:4]
    message = cmd.args[4] if len(cmd.args) > 4 else ""
    question = SecurityQuestion(
        question_text=cmd.opt("q", ""),
        answer_text=cmd.opt("a", ""),
        strength_class=_STRENGTHS[cmd.opt("class", "weak")],
    )
    attempts = cmd.opt("attempts")
    script = [a.strip() for a in attempts.split(",")] if attempts else None
    transfer_id = legacy.initiate_standard(
        ctx.world, account, name, contact, _money(cents), question, message,
        sender_email=cmd.opt("from-email"), attempts_script=script)
    ctx.bind_label(cmd, transfer_id)


def _h_open_deposit(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    tx = ctx.world.transfers[ctx.resolve(cmd.args[0])]
    legacy.open_deposit_link(ctx.world, tx.link_token,
                             Session(cmd.opt("fi"), cmd.opt("account")))


def _h_answer_deposit(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    tx = ctx.world.transfers[ctx.resolve(cmd.args[0])]
    legacy.answer_and_deposit(ctx.world, tx.link_token, cmd.opt("answer", ""),
                              cmd.opt("into"),
                              confirmation_message=cmd.opt("confirm"))


def _h_reject_standard(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    tx = ctx.world.transfers[ctx.resolve(cmd.args[0])]
    legacy.reject_standard(ctx.world, tx.link_token)


def _h_register_autodeposit(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 3)
    legacy.register_autodeposit(ctx.world, cmd.args[0], cmd.args[1], cmd.args[2])


def _h_lookup_autodeposit(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    legacy.lookup_autodeposit(ctx.world, cmd.args[0])


def _h_send_autodeposit(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 3)
    account, contact, cents = cmd.args[:3]
    message = cmd.args[3] if len(cmd.args) > 3 else ""
    transfer_id = legacy.initiate_autodeposit(
        ctx.world, account, contact, _money(cents), message,
        sender_email=cmd.opt("from-email"))
    ctx.bind_label(cmd, transfer_id)


def _h_request_money(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 4)
    account, name, contact, cents = cmd.args[:4]
    message = cmd.args[4] if len(cmd.args) > 4 else ""
    transfer_id = legacy.initiate_money_request(
        ctx.world, account, name, contact, _money(cents), message,
        sender_email=cmd.opt("from-email"))
    ctx.bind_label(cmd, transfer_id)


def _h_fulfil_request(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    tx = ctx.world.transfers[ctx.resolve(cmd.args[0])]
    legacy.fulfil_request(ctx.world, tx.link_token, cmd.opt("from"),
                          confirmation_message=cmd.opt("confirm"))


def _h_decline_request(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    tx = ctx.world.transfers[ctx.resolve(cmd.args[0])]
    legacy.decline_request(ctx.world, tx.link_token)


def _h_expire_sweep(ctx: _Context, cmd: ScenarioCommand) -> None:
    legacy.expire_sweep(ctx.world)


def _h_register_id(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    customer, id_string = cmd.args[:2]
    accounts = [a for a in (cmd.opt("accounts") or "").split(",") if a]
    _, token = directed.register_interac_id(
        ctx.world, customer, id_string, cmd.opt("notify"), accounts,
        autodeposit_only=_flag(cmd.opt("autodeposit")))
    ctx.verification_tokens[id_string] = token


def _h_verify_id(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    token = ctx.verification_tokens.get(cmd.args[0], cmd.args[0])
    directed.verify_identifier(ctx.world, token)


def _auth_for(ctx: _Context, cmd: ScenarioCommand, customer: str,
              purpose: directed.AuthPurpose):
    if cmd.opt("auth") == "none":
        return None
    return directed.issue_one_time_auth(ctx.world, customer, purpose)


def _code_for(ctx: _Context, cmd: ScenarioCommand, id_string: str) -> str:
    code = cmd.opt("code", "correct")
    if code == "correct":
        target = ctx.world.interac_ids.get(id_string)
        return target.security_code if target else "000"
    if code == "wrong":
        target = ctx.world.interac_ids.get(id_string)
        if target is None:
            return "000"
        return f"{(int(target.security_code) + 1) % 1000:03d}"
    return code


def _h_send_directed(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 3)
    account, id_string, cents = cmd.args[:3]
    message = cmd.args[3] if len(cmd.args) > 3 else ""
    customer = ctx.world.account(account).owner
    transfer_id = directed.send_directed(
        ctx.world, account, id_string, _code_for(ctx, cmd, id_string),
        _money(cents), message,
        auth=_auth_for(ctx, cmd, customer, directed.AuthPurpose.INITIATE_TRANSFER))
    ctx.bind_label(cmd, transfer_id)


def _h_select_account(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    directed.recipient_select_account(ctx.world, ctx.resolve(cmd.args[0]),
                                      cmd.args[1])


def _h_reject_directed(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    directed.recipient_reject(ctx.world, ctx.resolve(cmd.args[0]))


def _h_return_autodeposit(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    transfer_id = ctx.resolve(cmd.args[0])
    tx = ctx.world.directed[transfer_id]
    target = ctx.world.interac_ids[tx.target_id]
    directed.return_autodeposit(
        ctx.world, transfer_id,
        auth=_auth_for(ctx, cmd, target.owner,
                       directed.AuthPurpose.INITIATE_TRANSFER))


def _h_request_directed(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 3)
    account, id_string, cents = cmd.args[:3]
    message = cmd.args[3] if len(cmd.args) > 3 else ""
    customer = ctx.world.account(account).owner
    request_id = directed.request_money_directed(
        ctx.world, account, id_string, _code_for(ctx, cmd, id_string),
        _money(cents), message,
        auth=_auth_for(ctx, cmd, customer, directed.AuthPurpose.INITIATE_TRANSFER))
    ctx.bind_label(cmd, request_id)


def _h_fulfil_directed(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    payer_account = cmd.opt("from")
    customer = ctx.world.account(payer_account).owner
    directed.fulfil_directed_request(
        ctx.world, ctx.resolve(cmd.args[0]), payer_account,
        auth=_auth_for(ctx, cmd, customer, directed.AuthPurpose.FULFIL_REQUEST))


def _h_decline_directed(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    directed.decline_directed_request(ctx.world, ctx.resolve(cmd.args[0]))


def _h_change_device(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    directed.change_device(
        ctx.world, cmd.args[0],
        auth=_auth_for(ctx, cmd, cmd.args[0],
                       directed.AuthPurpose.DEVICE_CHANGE))


def _h_set_relay(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    ctx.world.customers[cmd.args[0]].realtime_status_relay = _flag(cmd.args[1])
    ctx.world.record("set-relay", customer=cmd.args[0], relay=cmd.args[1])


def _h_declare_observer(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    name = cmd.args[0]
    party = [a for a in (cmd.opt("party") or "").split(",") if a]
    ctx.observers[name] = Observer.for_level(int(cmd.opt("level", "3")), party)
    if cmd.opt("hijacks"):
        ctx.hijacked[name] = cmd.opt("hijacks")
    ctx.world.record("declare-observer", observer=name,
                     level=cmd.opt("level", "3"))


def _h_observe(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    observations = observe(ctx.world.delivery_log, ctx.observers[cmd.args[0]])
    ctx.world.record("observe", observer=cmd.args[0], seen=len(observations))


def _h_leakage(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    observations = observe(ctx.world.delivery_log, ctx.observers[cmd.args[0]])
    counts = leaked_info_count(observations)
    ctx.leakage.append((cmd.args[0], counts))
    ctx.world.record("leakage", observer=cmd.args[0],
                     observations=len(observations))


def _h_select_targets(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    observations = observe(ctx.world.delivery_log, ctx.observers[cmd.args[0]])
    targets = select_targets(observations, _money(cmd.opt("min", "1")))
    for t in targets:
        transfer_id = ctx.world.link_tokens.get(t.link_token, "?")
        ctx.world.record("target", observer=cmd.args[0],
                         transfer=ctx.reverse_labels.get(transfer_id, transfer_id),
                         amount=t.amount.cents)
    ctx.world.record("select-targets", observer=cmd.args[0], count=len(targets))


def _h_run_attack(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    name = cmd.args[0]
    observer = ctx.observers[name]
    account = cmd.opt("account") or ctx.hijacked.get(name)
    model = GuessModel.default()
    per_attempt = dict(model.per_attempt)
    for key, strength in (("pexposed", QuestionStrength.EXPOSED),
                          ("pweak", QuestionStrength.WEAK),
                          ("pstrong", QuestionStrength.STRONG)):
        if cmd.opt(key) is not None:
            per_attempt[strength] = float(cmd.opt(key))
    trace = adversary.execute_redirection(
        ctx.world, observer, account, GuessModel(per_attempt),
        min_amount=_money(cmd.opt("min", "1")))
    ctx.traces.append((name, trace))
    ctx.world.record("run-attack", observer=name, outcome=trace.outcome.value,
                     deposits=len(trace.deposited_transfers))


def _h_snoop_names(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    harvested = snoop_autodeposit_names(ctx.world, list(cmd.args))
    ctx.world.record("snoop-names", probed=len(cmd.args),
                     harvested=len(harvested))


def _h_declare_knowledge(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 1)
    prior = frozenset(q for q in (cmd.opt("prior") or "").split(";") if q)
    madeup = frozenset(q for q in (cmd.opt("madeup") or "").split(";") if q)
    ctx.knowledge[cmd.args[0]] = adversary.QuestionKnowledge(prior, madeup)
    ctx.world.record("declare-knowledge", customer=cmd.args[0],
                     prior=len(prior), madeup=len(madeup))


def _h_shareable_questions(ctx: _Context, cmd: ScenarioCommand) -> None:
    _need(cmd, 2)
    shared = shareable_questions(ctx.knowledge[cmd.args[0]],
                                 ctx.knowledge[cmd.args[1]])
    ctx.world.record("shareable-questions", parties=f"{cmd.args[0]}+{cmd.args[1]}",
                     count=len(shared), questions=";".join(sorted(shared)))


def _h_check_requirements(ctx: _Context, cmd: ScenarioCommand) -> None:
    ctx.requirement_report = check_requirements(ctx.world)
    ctx.world.record("check-requirements",
                     result="pass" if ctx.requirement_report.all_pass else "fail")


_HANDLERS: dict[str, Callable[[_Context, ScenarioCommand], None]] = {
    "declare-fi": _h_declare_fi,
    "declare-customer": _h_declare_customer,
    "declare-email": _h_declare_email,
    "declare-phone": _h_declare_phone,
    "declare-account": _h_declare_account,
    "mint": _h_mint,
    "advance-clock": _h_advance_clock,
    "set-tls": _h_set_tls,
    "compromise-endpoint": _h_compromise,
    "send-standard": _h_send_standard,
    "open-deposit": _h_open_deposit,
    "answer-deposit": _h_answer_deposit,
    "reject-standard": _h_reject_standard,
    "register-autodeposit": _h_register_autodeposit,
    "lookup-autodeposit": _h_lookup_autodeposit,
    "send-autodeposit": _h_send_autodeposit,
    "request-money": _h_request_money,
    "fulfil-request": _h_fulfil_request,
    "decline-request": _h_decline_request,
    "expire-sweep": _h_expire_sweep,
    "register-id": _h_register_id,
    "verify-id": _h_verify_id,
    "send-directed": _h_send_directed,
    "select-account": _h_select_account,
    "reject-directed": _h_reject_directed,
    "return-autodeposit": _h_return_autodeposit,
    "request-directed": _h_request_directed,
    "fulfil-directed": _h_fulfil_directed,
    "decline-directed": _h_decline_directed,
    "change-device": _h_change_device,
    "set-relay": _h_set_relay,
    "declare-observer": _h_declare_observer,
    "observe": _h_observe,
    "leakage": _h_leakage,
    "select-targets": _h_select_targets,
    "run-attack": _h_run_attack,
    "snoop-names": _h_snoop_names,
    "declare-knowledge": _h_declare_knowledge,
    "shareable-questions": _h_shareable_questions,
    "check-requirements": _h_check_requirements,
}


def _matrix_lines(world: World, reverse_labels: dict[str, str]) -> list[str]:
    lines = []
    for record in world.delivery_log:
        note = record.notification
        ref = reverse_labels.get(note.transfer_ref or "", note.transfer_ref or "-")
        fields = ",".join(note.field_names())
        line = (f"{record.seq}\t{ref}\t{note.kind_label}\t{note.event.value}\t"
                f"{note.channel.value}\t"
                f"{'subsequent' if note.subsequent else 'first'}\t{fields}")
        if note.non_authoritative:
            likely = ",".join(sorted(f.value for f in note.non_authoritative))
            line += f"\tlikely:{likely}"
        lines.append(line)
    return lines


def _build_report(ctx: _Context, name: str, seed: int) -> Report:
    world = ctx.world
    out: list[str] = []
    out.append("[meta]")
    out.append(f"scenario\t{name}")
    out.append(f"seed\t{seed}")
    out.append("[events]")
    out.extend(event.render() for event in world.trace)
    out.append("[matrix]")
    out.extend(_matrix_lines(world, ctx.reverse_labels))
    out.append("[ledger]")
    for account_id in sorted(world.ledger.accounts):
        out.append(f"account\t{account_id}\t"
                   f"{world.ledger.accounts[account_id].balance.cents}")
    for fi_id in sorted(world.ledger.suspense):
        out.append(f"suspense\t{fi_id}\t{world.ledger.suspense[fi_id].cents}")
    out.append(f"total\t{world.ledger.total_system_value().cents}")
    out.append(f"journal-entries\t{len(world.ledger.journal)}")
    if ctx.traces:
        out.append("[traces]")
        for i, (observer, trace) in enumerate(ctx.traces):
            out.append(f"trace\t{i}\tobserver\t{observer}")
            for line in trace.render_lines():
                out.append(f"trace\t{i}\t{line}")
    if ctx.leakage:
        out.append("[leakage]")
        for observer, counts in ctx.leakage:
            for f in sorted(counts, key=lambda f: f.value):
                out.append(f"leakage\t{observer}\t{f.value}\t{counts[f]}")
    if ctx.requirement_report is not None:
        out.append("[requirements]")
        out.extend(ctx.requirement_report.render_lines())
    return Report("\n".join(out) + "\n")


def run(scenario: Scenario, seed: Optional[int] = None) -> RunResult:
    """Execute a scenario deterministically on a fresh world."""
    effective_seed = scenario.seed if seed is None else seed
    world = World(effective_seed)
    ctx = _Context(world)
    for cmd in scenario.commands:
        handler = _HANDLERS[cmd.verb]
        try:
            handler(ctx, cmd)
        except SimulationError as exc:
            world.record("command-error", outcome=f"error:{type(exc).__name__}",
                         verb=cmd.verb, line=cmd.line_no, detail=str(exc))
        except (KeyError, ValueError, TypeError) as exc:
            # bad labels, malformed numbers and the like are scenario data
            # problems, recorded rather than fatal
            world.record("command-error", outcome=f"error:{type(exc).__name__}",
                         verb=cmd.verb, line=cmd.line_no, detail=str(exc))
    world.conservation_audit()
    report = _build_report(ctx, scenario.name, effective_seed)
    return RunResult(world=world, report=report, seed=effective_seed,
                     labels=ctx.labels, traces=ctx.traces,
                     leakage=ctx.leakage,
                     requirement_report=ctx.requirement_report)


@dataclass(frozen=True)
class DiffResult:
    matches: bool
    line_no: int = 0
    expected: str = ""
    actual: str = ""

    def describe(self) -> str:
        if self.matches:
            return "fixture matches"
        return (f"first divergence at line {self.line_no}:\n"
                f"  expected: {self.expected!r}\n"
                f"  actual:   {self.actual!r}")


def diff_fixture(report: Report, fixture_path) -> DiffResult:
    """Byte-level comparison of a report against a checked-in fixture."""
    expected_text = Path(fixture_path).read_text(encoding="utf-8")
    if report.text == expected_text:
        return DiffResult(True)
    expected_lines = expected_text.splitlines()
    actual_lines = report.text.splitlines()
    for i in range(max(len(expected_lines), len(actual_lines))):
        expected = expected_lines[i] if i < len(expected_lines) else "<missing>"
        actual = actual_lines[i] if i < len(actual_lines) else "<missing>"
        if expected != actual:
            return DiffResult(False, i + 1, expected, actual)
    return DiffResult(False, max(len(expected_lines), len(actual_lines)),
                      "<equal lines, differing bytes>", "")
