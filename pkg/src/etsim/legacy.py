"""State machines for the three legacy transfer types.

The flows are modeled exactly as the production system behaves, including
the properties that make redirection possible:

* a deposit link token plus the correct security answer is sufficient to
  deposit a standard transfer into ANY account at any participating
  institution — the depositor's identity is never checked against the
  name the sender specified;
* the sender's confirmation always names the recipient the sender
  originally specified, so a redirected deposit is invisible to the
  sender;
* autodeposit transfers cannot be rejected, and the autodeposit lookup
  hands out registered legal names without rate limiting;
* the sender's reply email address is stored unverified.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence

from .clock import MINUTES_PER_DAY
from .model import (EmailAddress, FraudHold, InsufficientFunds, Leg,
                    Money, NameFormat, SimulationError)
from .notify import (AUTODEPOSIT, REQUEST_MONEY, STANDARD, Channel,
                     EventKind, compose, deliver)

if TYPE_CHECKING:  # pragma: no cover
    from .world import Contact, World


class AmountOutOfRange(SimulationError):
    pass


class LimitExceeded(SimulationError):
    pass


class TransferNotPending(SimulationError):
    pass


class UnknownToken(SimulationError):
    pass


class AlreadyRegistered(SimulationError):
    pass


class NotRegistered(SimulationError):
    pass


class RequestNotPending(SimulationError):
    pass


class BelowRecipientFiMinimum(SimulationError):
    pass


DEFAULT_EXPIRY_DAYS = 30
MAX_ANSWER_ATTEMPTS = 4


class QuestionStrength(Enum):
    """How guessable a security answer is to an eavesdropper.

    EXPOSED answers can be read straight out of the transfer's own
    notification (e.g. the sender's first name). WEAK answers are the
    person-created kind that acquaintances or strangers guess about half
    the time. STRONG stands for password-grade answers exchanged out of
    band.
    """

    EXPOSED = "exposed"
    WEAK = "weak"
    STRONG = "strong"


@dataclass
class SecurityQuestion:
    question_text: str
    answer_text: str
    strength_class: QuestionStrength = QuestionStrength.WEAK

    def matches(self, answer: str) -> bool:
        return answer.strip() == self.answer_text.strip()


class TransferKind(Enum):
    STANDARD = STANDARD
    AUTODEPOSIT = AUTODEPOSIT
    REQUEST_MONEY = REQUEST_MONEY


class TransferStatus(Enum):
    INITIATED = "initiated"
    NOTIFICATION_SENT = "notification-sent"
    DEPOSITED = "deposited"
    REJECTED = "rejected"
    CANCELLED_ATTEMPTS_EXHAUSTED = "cancelled-attempts-exhausted"
    EXPIRED = "expired"
    REQUESTED = "requested"
    DECLINED = "declined"


# Legal transitions per transfer kind; anything else is a model bug.
_TRANSITIONS = {
    TransferKind.STANDARD: {
        TransferStatus.INITIATED: {TransferStatus.NOTIFICATION_SENT},
        TransferStatus.NOTIFICATION_SENT: {
            TransferStatus.DEPOSITED, TransferStatus.REJECTED,
            TransferStatus.CANCELLED_ATTEMPTS_EXHAUSTED, TransferStatus.EXPIRED},
    },
    TransferKind.AUTODEPOSIT: {
        TransferStatus.INITIATED: {TransferStatus.DEPOSITED},
    },
    TransferKind.REQUEST_MONEY: {
        TransferStatus.REQUESTED: {
            TransferStatus.DEPOSITED, TransferStatus.DECLINED,
            TransferStatus.EXPIRED},
    },
}


@dataclass
class Transfer:
    transfer_id: str
    reference_number: str
    kind: TransferKind
    sender_account: str
    sender_email: EmailAddress
    specified_recipient_name: str
    recipient_contact: "Contact"
    amount: Money
    custom_message: str = ""
    confirmation_message: Optional[str] = None
    question: Optional[SecurityQuestion] = None
    expires_at: int = 0
    attempts_used: int = 0
    status: TransferStatus = TransferStatus.INITIATED
    deposited_into: Optional[str] = None
    fulfilled_from: Optional[str] = None
    link_token: Optional[str] = None

    @property
    def kind_label(self) -> str:
        return self.kind.value

    def transition(self, to: TransferStatus) -> None:
        allowed = _TRANSITIONS[self.kind].get(self.status, set())
        if to not in allowed:
            raise SimulationError(
                f"{self.transfer_id}: illegal transition "
                f"{self.status.value} -> {to.value}")
        self.status = to


@dataclass
class AutodepositRecord:
    account_id: str
    legal_name: str
    profile_name: Optional[str]
    fi: str


class DepositOutcome(Enum):
    DEPOSITED = "deposited"
    WRONG_ANSWER = "wrong-answer"
    CANCELLED_ATTEMPTS_EXHAUSTED = "cancelled-attempts-exhausted"


@dataclass(frozen=True)
class DepositResult:
    outcome: DepositOutcome
    attempts_used: int
    remaining: int


@dataclass(frozen=True)
class Session:
    """A logged-in online-banking session. Deliberately carries no claim
    about who the session holder is relative to a transfer."""

    logged_in_fi: str
    acting_account: Optional[str] = None


@dataclass(frozen=True)
class QuestionView:
    question_text: str
    amount: Money
    sender_display_name: str
    expires_at: int


# -- internal helpers ---------------------------------------------------------


def _check_send_limits(world: "World", sender_account: str, amount: Money) -> None:
    acct = world.account(sender_account)
    fi = world.fis[acct.fi]
    if amount.is_zero or amount < fi.min_transfer or amount > fi.max_transfer:
        raise AmountOutOfRange(
            f"{amount.cad} outside {fi.fi_id} range "
            f"[{fi.min_transfer.cad}, {fi.max_transfer.cad}]")
    sent = world.ledger.daily_totals(sender_account, world.clock.day).sent
    if sent + amount > fi.daily_send_limit:
        raise LimitExceeded(
            f"daily send total {sent.cad} + {amount.cad} exceeds "
            f"{fi.daily_send_limit.cad}")
    if acct.balance < amount:
        raise InsufficientFunds(
            f"{sender_account} holds {acct.balance.cad}, needs {amount.cad}")


def _move_to_suspense(world: "World", tx: Transfer) -> None:
    fi = world.account(tx.sender_account).fi
    world.ledger.post(Leg.account(tx.sender_account), Leg.suspense(fi),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)


def _deposit_from_suspense(world: "World", tx: Transfer, source_fi: str,
                           target_account: str) -> None:
    target_fi = world.account(target_account).fi
    if target_fi != source_fi:
        world.ledger.post(Leg.suspense(source_fi), Leg.suspense(target_fi),
                          tx.amount, timestamp=world.clock.now,
                          transfer_id=tx.transfer_id)
    world.ledger.post(Leg.suspense(target_fi), Leg.account(target_account),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)


def _refund(world: "World", tx: Transfer) -> None:
    fi = world.account(tx.sender_account).fi
    world.ledger.post(Leg.suspense(fi), Leg.account(tx.sender_account),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)


def _sender_email(world: "World", sender_account: str,
                  sender_email: Optional[str]) -> EmailAddress:
    # Unverified by design: whatever the sender typed is used as-is.
    if sender_email is not None:
        return world.contact(sender_email)  # type: ignore[return-value]
    owner = world.account(sender_account).owner
    for address, holder in world.email_owner.items():
        if holder == owner:
            return world.emails[address]
    raise SimulationError(f"no email on file for owner of {sender_account}")


def _notice_channel(contact: "Contact") -> Channel:
    return Channel.EMAIL if isinstance(contact, EmailAddress) else Channel.SMS


def _record_deposit(world: "World", tx: Transfer, account_id: str,
                    bound: bool) -> None:
    owner = world.account(account_id).owner
    intended = world.owner_of_contact(tx.recipient_contact)
    world.record("deposit", transfer=tx.transfer_id, kind=tx.kind_label,
                 account=account_id, owner=owner,
                 intended=intended or "unknown",
                 bound="yes" if bound else "no")


# -- standard transfers ----------------------------------------------------------


def initiate_standard(world: "World", sender_account: str,
                      specified_recipient_name: str, contact: str,
                      amount: Money, question: SecurityQuestion,
                      message: str = "", *,
                      sender_email: Optional[str] = None,
                      attempts_script: Optional[Sequence[str]] = None) -> str:
    """Send a standard transfer; funds move to suspense and the recipient
    notice (with its deposit link) is delivered."""
    recipient = world.contact(contact)
    _check_send_limits(world, sender_account, amount)
    if not world.fraud_scorer(sender_account, contact, amount):
        raise FraudHold(f"risk scoring held the transfer to {contact}")
    tx = Transfer(
        transfer_id=world.next_transfer_id(),
        reference_number=world.next_reference(),
        kind=TransferKind.STANDARD,
        sender_account=sender_account,
        sender_email=_sender_email(world, sender_account, sender_email),
        specified_recipient_name=specified_recipient_name,
        recipient_contact=recipient,
        amount=amount,
        custom_message=message,
        question=question,
        expires_at=world.clock.now + DEFAULT_EXPIRY_DAYS * MINUTES_PER_DAY,
        link_token=world.new_token("deposit"),
    )
    world.transfers[tx.transfer_id] = tx
    world.link_tokens[tx.link_token] = tx.transfer_id
    if attempts_script:
        world.attack_scripts[tx.transfer_id] = tuple(attempts_script)
    _move_to_suspense(world, tx)
    notice = compose(world, tx, EventKind.RECIPIENT_NOTICE,
                     _notice_channel(recipient))
    tx.transition(TransferStatus.NOTIFICATION_SENT)
    deliver(world, notice)
    world.record("initiate-standard", transfer=tx.transfer_id,
                 amount=amount.cents, contact=contact,
                 auth="no", sender_verified="no")
    return tx.transfer_id


def _pending_standard(world: "World", link_token: str) -> Transfer:
    transfer_id = world.link_tokens.get(link_token)
    if transfer_id is None:
        raise UnknownToken(f"unknown link token {link_token}")
    tx = world.transfers[transfer_id]
    if tx.kind is not TransferKind.STANDARD \
            or tx.status is not TransferStatus.NOTIFICATION_SENT:
        raise TransferNotPending(f"{transfer_id} is {tx.status.value}")
    return tx


def open_deposit_link(world: "World", link_token: str,
                      session: Session) -> QuestionView:
    """Reveal the security question to whoever presents the link token.

    The session holder's identity is deliberately not checked against the
    specified recipient name; any login at any participating institution
    will do. Preferred-FI memory is not updated by a mere look.
    """
    tx = _pending_standard(world, link_token)
    if session.logged_in_fi not in world.fis:
        raise SimulationError(f"unknown institution {session.logged_in_fi}")
    sender = world.customers[world.account(tx.sender_account).owner]
    fmt = world.fis[world.account(tx.sender_account).fi].name_format
    display = sender.name(NameFormat.CUSTOM if fmt is NameFormat.CUSTOM
                          else NameFormat.LEGAL)
    world.record("open-deposit-link", transfer=tx.transfer_id,
                 session_fi=session.logged_in_fi)
    assert tx.question is not None
    return QuestionView(tx.question.question_text, tx.amount, display,
                        tx.expires_at)


def answer_and_deposit(world: "World", link_token: str, answer: str,
                       target_account: str, *,
                       confirmation_message: Optional[str] = None) -> DepositResult:
    """Submit a security answer; on a match the funds land in
    ``target_account`` — whoever it belongs to."""
    tx = _pending_standard(world, link_token)
    target = world.account(target_account)  # raises UnknownAccount
    tx.attempts_used += 1
    assert tx.question is not None
    if tx.question.matches(answer):
        source_fi = world.account(tx.sender_account).fi
        _deposit_from_suspense(world, tx, source_fi, target_account)
        tx.transition(TransferStatus.DEPOSITED)
        tx.deposited_into = target_account
        contact_text = world.contact_text(tx.recipient_contact)
        world.preferred_fi[contact_text] = target.fi
        if world.fis[target.fi].supports_confirmation_message:
            tx.confirmation_message = confirmation_message or ""
        _record_deposit(world, tx, target_account,
                        bound=target.owner == world.owner_of_contact(tx.recipient_contact))
        confirmation = compose(world, tx, EventKind.SENDER_CONFIRMATION,
                               Channel.EMAIL, status_value="accepted")
        deliver(world, confirmation)
        return DepositResult(DepositOutcome.DEPOSITED, tx.attempts_used, 0)
    world.record("wrong-answer", transfer=tx.transfer_id,
                 attempt=tx.attempts_used)
    if tx.attempts_used >= MAX_ANSWER_ATTEMPTS:
        tx.transition(TransferStatus.CANCELLED_ATTEMPTS_EXHAUSTED)
        _refund(world, tx)
        # The addressee is not told; only the sender learns of the
        # cancellation.
        notice = compose(world, tx, EventKind.SENDER_CONFIRMATION,
                         Channel.EMAIL, status_value="cancelled")
        deliver(world, notice)
        return DepositResult(DepositOutcome.CANCELLED_ATTEMPTS_EXHAUSTED,
                             tx.attempts_used, 0)
    return DepositResult(DepositOutcome.WRONG_ANSWER, tx.attempts_used,
                         MAX_ANSWER_ATTEMPTS - tx.attempts_used)


def reject_standard(world: "World", link_token: str) -> None:
    tx = _pending_standard(world, link_token)
    tx.transition(TransferStatus.REJECTED)
    _refund(world, tx)
    world.record("reject-standard", transfer=tx.transfer_id)
    notice = compose(world, tx, EventKind.SENDER_CONFIRMATION,
                     Channel.EMAIL, status_value="rejected")
    deliver(world, notice)


# -- autodeposit -------------------------------------------------------------------


def register_autodeposit(world: "World", customer_id: str, address: str,
                         account_id: str) -> None:
    """Bind an email address to a single deposit account."""
    if address in world.autodeposit:
        raise AlreadyRegistered(f"{address} already registered")
    account = world.account(account_id)
    customer = world.customers[customer_id]
    if account.owner != customer_id:
        raise SimulationError(f"{account_id} does not belong to {customer_id}")
    world.contact(address)  # must be a declared email
    world.autodeposit[address] = AutodepositRecord(
        account_id=account_id,
        legal_name=customer.legal_name,
        profile_name=customer.profile_name,
        fi=account.fi,
    )
    world.record("register-autodeposit", address=address, account=account_id)


@dataclass(frozen=True)
class LookupResult:
    legal_name: str
    profile_name: Optional[str]


def lookup_autodeposit(world: "World", address: str) -> Optional[LookupResult]:
    """Name lookup shown to senders before an autodeposit.

    Requires nothing beyond a logged-in session and is not rate limited,
    so it doubles as an address-to-legal-name oracle.
    """
    record = world.autodeposit.get(address)
    if record is None:
        world.record("lookup-autodeposit", address=address, revealed="no")
        return None
    policy = world.fis[record.fi].name_format
    profile = record.profile_name \
        if policy in (NameFormat.CUSTOM, NameFormat.BOTH) else None
    world.record("lookup-autodeposit", address=address, revealed="yes",
                 legal_name=record.legal_name)
    return LookupResult(record.legal_name, profile)


def initiate_autodeposit(world: "World", sender_account: str, address: str,
                         amount: Money, message: str = "", *,
                         sender_email: Optional[str] = None) -> str:
    """Send to a registered address; funds land with no recipient action
    and the recipient has no way to reject."""
    record = world.autodeposit.get(address)
    if record is None:
        raise NotRegistered(f"{address} has no autodeposit registration")
    _check_send_limits(world, sender_account, amount)
    if not world.fraud_scorer(sender_account, address, amount):
        raise FraudHold(f"risk scoring held the transfer to {address}")
    tx = Transfer(
        transfer_id=world.next_transfer_id(),
        reference_number=world.next_reference(),
        kind=TransferKind.AUTODEPOSIT,
        sender_account=sender_account,
        sender_email=_sender_email(world, sender_account, sender_email),
        specified_recipient_name=record.legal_name,
        recipient_contact=world.contact(address),
        amount=amount,
        custom_message=message,
        expires_at=world.clock.now + DEFAULT_EXPIRY_DAYS * MINUTES_PER_DAY,
    )
    world.transfers[tx.transfer_id] = tx
    _move_to_suspense(world, tx)
    source_fi = world.account(sender_account).fi
    _deposit_from_suspense(world, tx, source_fi, record.account_id)
    tx.transition(TransferStatus.DEPOSITED)
    tx.deposited_into = record.account_id
    _record_deposit(world, tx, record.account_id, bound=True)
    world.record("initiate-autodeposit", transfer=tx.transfer_id,
                 amount=amount.cents, contact=address,
                 auth="no", sender_verified="no")
    deliver(world, compose(world, tx, EventKind.RECIPIENT_NOTICE, Channel.EMAIL))
    deliver(world, compose(world, tx, EventKind.SENDER_CONFIRMATION,
                           Channel.EMAIL, status_value="accepted"))
    return tx.transfer_id


# -- request money -------------------------------------------------------------------


def initiate_money_request(world: "World", requestor_account: str,
                           specified_recipient_name: str, contact: str,
                           amount: Money, message: str = "", *,
                           sender_email: Optional[str] = None) -> str:
    """Ask a contact to authorize sending funds to the requestor."""
    recipient = world.contact(contact)
    world.account(requestor_account)
    if amount.is_zero:
        raise AmountOutOfRange("cannot request a zero amount")
    if not world.fraud_scorer(requestor_account, contact, amount):
        raise FraudHold(f"risk scoring held the request to {contact}")
    tx = Transfer(
        transfer_id=world.next_transfer_id(),
        reference_number=world.next_reference(),
        kind=TransferKind.REQUEST_MONEY,
        sender_account=requestor_account,
        sender_email=_sender_email(world, requestor_account, sender_email),
        specified_recipient_name=specified_recipient_name,
        recipient_contact=recipient,
        amount=amount,
        custom_message=message,
        status=TransferStatus.REQUESTED,
        expires_at=world.clock.now + DEFAULT_EXPIRY_DAYS * MINUTES_PER_DAY,
        link_token=world.new_token("fulfil"),
    )
    world.transfers[tx.transfer_id] = tx
    world.link_tokens[tx.link_token] = tx.transfer_id
    deliver(world, compose(world, tx, EventKind.REQUEST_NOTICE,
                           _notice_channel(recipient)))
    world.record("initiate-request", transfer=tx.transfer_id,
                 amount=amount.cents, contact=contact,
                 auth="no", sender_verified="no")
    return tx.transfer_id


def _pending_request(world: "World", link_token: str) -> Transfer:
    transfer_id = world.link_tokens.get(link_token)
    if transfer_id is None:
        raise UnknownToken(f"unknown link token {link_token}")
    tx = world.transfers[transfer_id]
    if tx.kind is not TransferKind.REQUEST_MONEY \
            or tx.status is not TransferStatus.REQUESTED:
        raise RequestNotPending(f"{transfer_id} is {tx.status.value}")
    return tx


def fulfil_request(world: "World", link_token: str, payer_account: str, *,
                   confirmation_message: Optional[str] = None) -> None:
    """Payer authorizes the request; funds move payer -> requestor."""
    tx = _pending_request(world, link_token)
    payer = world.account(payer_account)
    payer_fi = world.fis[payer.fi]
    if tx.amount < payer_fi.min_transfer:
        raise BelowRecipientFiMinimum(
            f"{tx.amount.cad} below {payer_fi.fi_id} minimum "
            f"{payer_fi.min_transfer.cad}")
    if payer.balance < tx.amount:
        raise InsufficientFunds(
            f"{payer_account} holds {payer.balance.cad}, needs {tx.amount.cad}")
    world.ledger.post(Leg.account(payer_account), Leg.suspense(payer.fi),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)
    _deposit_from_suspense(world, tx, payer.fi, tx.sender_account)
    tx.transition(TransferStatus.DEPOSITED)
    tx.deposited_into = tx.sender_account
    tx.fulfilled_from = payer_account
    if payer_fi.supports_confirmation_message:
        tx.confirmation_message = confirmation_message or ""
    contact_text = world.contact_text(tx.recipient_contact)
    world.preferred_fi[contact_text] = payer.fi
    _record_deposit(world, tx, tx.sender_account, bound=True)
    world.record("fulfil-request", transfer=tx.transfer_id,
                 payer=payer_account, auth="no")
    deliver(world, compose(world, tx, EventKind.REQUESTOR_CONFIRMATION,
                           Channel.EMAIL, status_value="accepted"))


def decline_request(world: "World", link_token: str) -> None:
    tx = _pending_request(world, link_token)
    tx.transition(TransferStatus.DECLINED)
    world.record("decline-request", transfer=tx.transfer_id)
    deliver(world, compose(world, tx, EventKind.REQUESTOR_CONFIRMATION,
                           Channel.EMAIL, status_value="declined"))


# -- expiry -------------------------------------------------------------------------


def expire_sweep(world: "World", now: Optional[int] = None) -> list[str]:
    """Refund and expire everything pending at or past its expiry time.

    Sweeps against the world clock unless an explicit horizon is given.
    """
    horizon = world.clock.now if now is None else now
    expired = []
    for tx in world.transfers.values():
        if tx.expires_at > horizon:
            continue
        if tx.kind is TransferKind.STANDARD \
                and tx.status is TransferStatus.NOTIFICATION_SENT:
            tx.transition(TransferStatus.EXPIRED)
            _refund(world, tx)
            expired.append(tx.transfer_id)
        elif tx.kind is TransferKind.REQUEST_MONEY \
                and tx.status is TransferStatus.REQUESTED:
            tx.transition(TransferStatus.EXPIRED)
            expired.append(tx.transfer_id)
    if expired:
        world.record("expire-sweep", count=len(expired),
                     transfers=",".join(expired))
    return expired
