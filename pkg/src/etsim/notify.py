"""Notification synthesis and delivery exposure.

The information carried by each notification is embedded as data: one
matrix row per (transfer kind, event, channel) combination observed in the
production system. Cells that vary by bank are symbolic name rules keyed
on each institution's name-format policy, so the same row reproduces the
per-bank variations without hardcoding bank identities.

Rendered notifications use a canonical text form (see ``render``) so that
fixtures can be checked in and diffed byte-for-byte, and so eavesdropper
analysis consumes exactly what was sent.

Delivery models exposure, not cryptography: an email to a provider without
incoming TLS is plaintext in transit; SMS is encrypted in transit but
readable on a compromised device; portal-inbox messages never leave the
institution's website.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional, Union

from .clock import fmt_minutes
from .model import (EmailAddress, FiPolicy, NameFormat, PhoneNumber,
                    SimulationError)

if TYPE_CHECKING:  # pragma: no cover
    from .legacy import Transfer
    from .world import World


class UnsupportedCombination(SimulationError):
    pass


class UnknownDestination(SimulationError):
    pass


class Field(Enum):
    """Closed enumeration of everything a notification can disclose."""

    PREFERRED_LANGUAGE = "PreferredLanguage"
    STATUS = "Status"
    RECIPIENT_NAME_CUSTOM = "RecipientNameCustom"
    RECIPIENT_NAME_LEGAL = "RecipientNameLegal"
    SENDER_NAME_CUSTOM = "SenderNameCustom"
    SENDER_NAME_LEGAL = "SenderNameLegal"
    SENDER_EMAIL = "SenderEmail"
    AMOUNT = "Amount"
    CUSTOM_MESSAGE = "CustomMessage"
    CONFIRMATION_MESSAGE = "ConfirmationMessage"
    SENDER_FI = "SenderFI"
    RECIPIENT_FI = "RecipientFI"
    REFERENCE_NUMBER = "ReferenceNumber"
    DEPOSIT_LINK = "DepositLink"
    SELECT_FI_LINK = "SelectFILink"
    PREFERRED_FI_LINK = "PreferredFILink"
    EXPIRY_DATE = "ExpiryDate"


class EventKind(Enum):
    RECIPIENT_NOTICE = "recipient-notice"
    SENDER_CONFIRMATION = "sender-confirmation"
    REQUEST_NOTICE = "request-notice"
    REQUESTOR_CONFIRMATION = "requestor-confirmation"


class Channel(Enum):
    EMAIL = "email"
    SMS = "sms"
    PORTAL_INBOX = "portal-inbox"


class NameRule(Enum):
    """How a name cell resolves against an institution's name policy.

    BY_POLICY              custom -> custom, legal -> legal, both -> both
    LEGAL_PLUS_CUSTOMARY   legal always; custom added when the policy
                           passes a custom form (custom or both)
    LEGAL_PLUS_IF_BOTH     legal always; custom added only for policy both
    CUSTOM_PLUS_IF_BOTH    custom always; legal added only for policy both
    FIXED_CUSTOM           the free-text name the initiator typed
    FIXED_LEGAL            the registered legal name
    NONE                   name withheld entirely
    """

    BY_POLICY = "by-policy"
    LEGAL_PLUS_CUSTOMARY = "legal-plus-customary"
    LEGAL_PLUS_IF_BOTH = "legal-plus-if-both"
    CUSTOM_PLUS_IF_BOTH = "custom-plus-if-both"
    FIXED_CUSTOM = "fixed-custom"
    FIXED_LEGAL = "fixed-legal"
    NONE = "none"


def _resolve_name(rule: NameRule, policy: Optional[FiPolicy],
                  custom: Field, legal: Field) -> frozenset[Field]:
    fmt = policy.name_format if policy is not None else None
    if rule is NameRule.NONE:
        return frozenset()
    if rule is NameRule.FIXED_CUSTOM:
        return frozenset({custom})
    if rule is NameRule.FIXED_LEGAL:
        return frozenset({legal})
    if rule is NameRule.BY_POLICY:
        if fmt is NameFormat.CUSTOM:
            return frozenset({custom})
        if fmt is NameFormat.BOTH:
            return frozenset({custom, legal})
        return frozenset({legal})
    if rule is NameRule.LEGAL_PLUS_CUSTOMARY:
        if fmt in (NameFormat.CUSTOM, NameFormat.BOTH):
            return frozenset({legal, custom})
        return frozenset({legal})
    if rule is NameRule.LEGAL_PLUS_IF_BOTH:
        if fmt is NameFormat.BOTH:
            return frozenset({legal, custom})
        return frozenset({legal})
    if rule is NameRule.CUSTOM_PLUS_IF_BOTH:
        if fmt is NameFormat.BOTH:
            return frozenset({custom, legal})
        return frozenset({custom})
    raise AssertionError(rule)


@dataclass(frozen=True)
class MatrixRow:
    """Field content of one notification type.

    ``non_authoritative`` flags fields whose presence was inferred rather
    than directly observed for this row (mobile flows have gaps).
    """

    fixed: frozenset[Field]
    sender_name: NameRule = NameRule.NONE
    recipient_name: NameRule = NameRule.NONE
    confirmation_if_supported: bool = False
    subsequent_extra: frozenset[Field] = frozenset()
    non_authoritative: frozenset[Field] = frozenset()


F = Field
_BASE = frozenset({F.PREFERRED_LANGUAGE, F.STATUS, F.AMOUNT, F.CUSTOM_MESSAGE})

# Keyed on (transfer kind label, event, channel). Kind labels are the
# legacy transfer kinds; the directed protocol composes its own generic
# notices and never consults this matrix.
STANDARD = "standard"
AUTODEPOSIT = "autodeposit"
REQUEST_MONEY = "request-money"

_STANDARD_NOTICE_EMAIL = MatrixRow(
    fixed=_BASE | {F.SELECT_FI_LINK, F.EXPIRY_DATE, F.SENDER_FI,
                   F.REFERENCE_NUMBER, F.DEPOSIT_LINK},
    sender_name=NameRule.BY_POLICY,
    recipient_name=NameRule.FIXED_CUSTOM,
    subsequent_extra=frozenset({F.PREFERRED_FI_LINK}),
)

# The mobile flow drops the recipient name and the sender's institution;
# the sender-name format was not directly observed for SMS.
_STANDARD_NOTICE_SMS = MatrixRow(
    fixed=_BASE | {F.SELECT_FI_LINK, F.EXPIRY_DATE, F.REFERENCE_NUMBER,
                   F.DEPOSIT_LINK},
    sender_name=NameRule.BY_POLICY,
    recipient_name=NameRule.NONE,
    non_authoritative=frozenset({F.SENDER_NAME_CUSTOM, F.SENDER_NAME_LEGAL}),
)

_STANDARD_CONFIRMATION = MatrixRow(
    fixed=_BASE | {F.SENDER_FI},
    sender_name=NameRule.BY_POLICY,
    recipient_name=NameRule.FIXED_CUSTOM,
    confirmation_if_supported=True,
)

_AUTODEPOSIT_NOTICE = MatrixRow(
    fixed=_BASE | {F.SENDER_FI, F.REFERENCE_NUMBER, F.RECIPIENT_FI},
    sender_name=NameRule.BY_POLICY,
    recipient_name=NameRule.FIXED_LEGAL,
)

_AUTODEPOSIT_CONFIRMATION = MatrixRow(
    fixed=_BASE | {F.SENDER_FI, F.REFERENCE_NUMBER},
    sender_name=NameRule.BY_POLICY,
    recipient_name=NameRule.LEGAL_PLUS_IF_BOTH,
)

_REQUEST_NOTICE_EMAIL = MatrixRow(
    fixed=_BASE | {F.SELECT_FI_LINK, F.EXPIRY_DATE, F.SENDER_FI,
                   F.SENDER_EMAIL, F.RECIPIENT_FI, F.REFERENCE_NUMBER,
                   F.DEPOSIT_LINK},
    sender_name=NameRule.LEGAL_PLUS_CUSTOMARY,
    recipient_name=NameRule.CUSTOM_PLUS_IF_BOTH,
    subsequent_extra=frozenset({F.PREFERRED_FI_LINK}),
)

_REQUEST_NOTICE_SMS = MatrixRow(
    fixed=_BASE | {F.SELECT_FI_LINK, F.EXPIRY_DATE, F.SENDER_EMAIL,
                   F.RECIPIENT_FI, F.REFERENCE_NUMBER, F.DEPOSIT_LINK},
    sender_name=NameRule.LEGAL_PLUS_CUSTOMARY,
    recipient_name=NameRule.CUSTOM_PLUS_IF_BOTH,
    non_authoritative=frozenset({F.RECIPIENT_NAME_LEGAL}),
)

_REQUESTOR_CONFIRMATION = MatrixRow(
    fixed=_BASE | {F.SENDER_FI},
    sender_name=NameRule.BY_POLICY,
    recipient_name=NameRule.FIXED_CUSTOM,
    confirmation_if_supported=True,
)

MATRIX: dict[tuple[str, EventKind, Channel], MatrixRow] = {
    (STANDARD, EventKind.RECIPIENT_NOTICE, Channel.EMAIL): _STANDARD_NOTICE_EMAIL,
    (STANDARD, EventKind.RECIPIENT_NOTICE, Channel.SMS): _STANDARD_NOTICE_SMS,
    (STANDARD, EventKind.SENDER_CONFIRMATION, Channel.EMAIL): _STANDARD_CONFIRMATION,
    (STANDARD, EventKind.SENDER_CONFIRMATION, Channel.PORTAL_INBOX): _STANDARD_CONFIRMATION,
    (AUTODEPOSIT, EventKind.RECIPIENT_NOTICE, Channel.EMAIL): _AUTODEPOSIT_NOTICE,
    (AUTODEPOSIT, EventKind.SENDER_CONFIRMATION, Channel.EMAIL): _AUTODEPOSIT_CONFIRMATION,
    (AUTODEPOSIT, EventKind.SENDER_CONFIRMATION, Channel.PORTAL_INBOX): _AUTODEPOSIT_CONFIRMATION,
    (REQUEST_MONEY, EventKind.REQUEST_NOTICE, Channel.EMAIL): _REQUEST_NOTICE_EMAIL,
    (REQUEST_MONEY, EventKind.REQUEST_NOTICE, Channel.SMS): _REQUEST_NOTICE_SMS,
    (REQUEST_MONEY, EventKind.REQUESTOR_CONFIRMATION, Channel.EMAIL): _REQUESTOR_CONFIRMATION,
    (REQUEST_MONEY, EventKind.REQUESTOR_CONFIRMATION, Channel.PORTAL_INBOX): _REQUESTOR_CONFIRMATION,
}


def field_matrix(kind: str, channel: Channel, event: EventKind,
                 subsequent: bool,
                 sender_fi_policy: FiPolicy,
                 recipient_fi_policy: Optional[FiPolicy]) -> frozenset[Field]:
    """The exact field-name set for one notification combination.

    Pure function over the embedded matrix. ``recipient_fi_policy`` is the
    institution on the receiving/acting side when known (deposit target,
    autodeposit registration, request payer); passing ``None`` resolves the
    recipient-dependent conditionals to their mandatory parts only.
    """
    row = MATRIX.get((kind, event, channel))
    if row is None:
        raise UnsupportedCombination(f"no {kind} {event.value} over {channel.value}")
    fields = set(row.fixed)
    fields |= _resolve_name(row.sender_name, sender_fi_policy,
                            F.SENDER_NAME_CUSTOM, F.SENDER_NAME_LEGAL)
    fields |= _resolve_name(row.recipient_name, recipient_fi_policy,
                            F.RECIPIENT_NAME_CUSTOM, F.RECIPIENT_NAME_LEGAL)
    if row.confirmation_if_supported and recipient_fi_policy is not None \
            and recipient_fi_policy.confirmation_messages:
        fields.add(F.CONFIRMATION_MESSAGE)
    if subsequent:
        fields |= row.subsequent_extra
    return frozenset(fields)


Destination = Union[EmailAddress, PhoneNumber, str]


def destination_text(destination: Destination) -> str:
    if isinstance(destination, EmailAddress):
        return destination.address
    if isinstance(destination, PhoneNumber):
        return f"sms:{destination.number}"
    return f"portal:{destination}"


@dataclass
class Notification:
    event: EventKind
    channel: Channel
    destination: Destination
    fields: dict[Field, str]
    kind_label: str
    transfer_ref: Optional[str] = None
    link_token: Optional[str] = None
    subsequent: bool = False
    signed: bool = False
    emitted_at: int = 0
    delivered_at: Optional[int] = None
    non_authoritative: frozenset[Field] = frozenset()

    def field_names(self) -> tuple[str, ...]:
        return tuple(sorted(f.value for f in self.fields))

    def render(self) -> str:
        """Canonical wire form: a header line then one TAB-separated
        ``field<TAB>value`` line per field, sorted by field name."""
        lines = [f"{self.event.value}\t{self.channel.value}\t"
                 f"{destination_text(self.destination)}"]
        for name, value in sorted((f.value, v) for f, v in self.fields.items()):
            lines.append(f"{name}\t{value}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DeliveryRecord:
    seq: int
    notification: Notification
    plaintext_exposed_in_transit: bool
    endpoint_exposed: bool

    @property
    def delivered_at(self) -> int:
        assert self.notification.delivered_at is not None
        return self.notification.delivered_at


_STATUS_VALUES = {
    (STANDARD, EventKind.RECIPIENT_NOTICE): "sent",
    (AUTODEPOSIT, EventKind.RECIPIENT_NOTICE): "autodeposit",
    (REQUEST_MONEY, EventKind.REQUEST_NOTICE): "request",
}


def compose(world: "World", transfer: "Transfer", event: EventKind,
            channel: Channel, *, status_value: Optional[str] = None) -> Notification:
    """Populate a notification for a legacy transfer event.

    Field keys come from ``field_matrix``; values are drawn from the
    transfer, the institutions' name policies, and the preferred-FI
    memory for the contact. Request notices carry the union of what the
    payer can see across the whole request flow (notice page plus the
    post-fulfilment confirmation), priced at the payer's home institution.
    """
    sender_acct = world.account(transfer.sender_account)
    sender = world.customers[sender_acct.owner]
    sender_fi = world.fis[sender_acct.fi]
    contact = transfer.recipient_contact
    contact_text = world.contact_text(contact)

    registry = world.autodeposit.get(contact_text) \
        if transfer.kind_label == AUTODEPOSIT else None

    if event in (EventKind.RECIPIENT_NOTICE, EventKind.REQUEST_NOTICE):
        destination: Destination = contact
        subsequent = contact_text in world.preferred_fi
        if transfer.kind_label == AUTODEPOSIT:
            recipient_fi = world.fis[registry.fi] if registry else None
        elif transfer.kind_label == REQUEST_MONEY:
            payer = world.owner_of_contact(contact)
            home = world.home_fi(payer) if payer else None
            recipient_fi = world.fis[home] if home else None
        else:
            recipient_fi = None
    else:
        if sender_fi.supports_portal_inbox:
            destination = sender.customer_id
            channel = Channel.PORTAL_INBOX
        else:
            destination = transfer.sender_email
        subsequent = False
        if transfer.kind_label == AUTODEPOSIT:
            recipient_fi = world.fis[registry.fi] if registry else None
        elif transfer.deposited_into is not None:
            recipient_fi = world.fis[world.account(transfer.deposited_into).fi]
        else:
            recipient_fi = None

    fields = field_matrix(transfer.kind_label, channel, event, subsequent,
                          sender_fi.policy,
                          recipient_fi.policy if recipient_fi else None)
    row = MATRIX[(transfer.kind_label, event, channel)]

    if status_value is None:
        status_value = _STATUS_VALUES.get((transfer.kind_label, event), "accepted")

    if isinstance(destination, str):
        audience = sender
    else:
        owner = world.owner_of_contact(destination) if event in (
            EventKind.RECIPIENT_NOTICE, EventKind.REQUEST_NOTICE) \
            else sender.customer_id
        audience = world.customers.get(owner, sender)

    payer_customer = None
    if transfer.kind_label == REQUEST_MONEY:
        payer_id = world.owner_of_contact(contact)
        payer_customer = world.customers.get(payer_id) if payer_id else None

    values: dict[Field, str] = {}
    for f in fields:
        if f is Field.PREFERRED_LANGUAGE:
            values[f] = audience.preferred_language
        elif f is Field.STATUS:
            values[f] = status_value
        elif f is Field.SENDER_NAME_CUSTOM:
            values[f] = sender.name(NameFormat.CUSTOM)
        elif f is Field.SENDER_NAME_LEGAL:
            values[f] = sender.name(NameFormat.LEGAL)
        elif f is Field.RECIPIENT_NAME_CUSTOM:
            if registry is not None:
                values[f] = registry.profile_name or registry.legal_name
            else:
                values[f] = transfer.specified_recipient_name
        elif f is Field.RECIPIENT_NAME_LEGAL:
            if registry is not None:
                values[f] = registry.legal_name
            elif payer_customer is not None:
                values[f] = payer_customer.legal_name
            elif transfer.deposited_into is not None:
                depositor = world.account(transfer.deposited_into).owner
                values[f] = world.customers[depositor].legal_name
            else:
                values[f] = transfer.specified_recipient_name
        elif f is Field.SENDER_EMAIL:
            values[f] = transfer.sender_email.address
        elif f is Field.AMOUNT:
            values[f] = transfer.amount.cad
        elif f is Field.CUSTOM_MESSAGE:
            values[f] = transfer.custom_message or ""
        elif f is Field.CONFIRMATION_MESSAGE:
            values[f] = transfer.confirmation_message or ""
        elif f is Field.SENDER_FI:
            values[f] = sender_fi.display_name
        elif f is Field.RECIPIENT_FI:
            values[f] = recipient_fi.display_name if recipient_fi else ""
        elif f is Field.REFERENCE_NUMBER:
            values[f] = transfer.reference_number
        elif f is Field.DEPOSIT_LINK:
            values[f] = transfer.link_token or ""
        elif f is Field.SELECT_FI_LINK:
            values[f] = f"select-fi:{transfer.link_token}"
        elif f is Field.PREFERRED_FI_LINK:
            values[f] = f"fi:{world.preferred_fi[contact_text]}"
        elif f is Field.EXPIRY_DATE:
            values[f] = fmt_minutes(transfer.expires_at)
        else:  # pragma: no cover - closed enum
            raise AssertionError(f)

    carries_token = event in (EventKind.RECIPIENT_NOTICE, EventKind.REQUEST_NOTICE)
    return Notification(
        event=event,
        channel=channel,
        destination=destination,
        fields=values,
        kind_label=transfer.kind_label,
        transfer_ref=transfer.transfer_id,
        link_token=transfer.link_token if carries_token else None,
        subsequent=subsequent,
        emitted_at=world.clock.now,
        non_authoritative=row.non_authoritative & fields,
    )


MAX_LATENCY_MINUTES = 30


def deliver(world: "World", notification: Notification) -> DeliveryRecord:
    """Deliver a notification, stamping latency and exposure flags.

    Latency is uniform over [1, 29] minutes from the world's ``delivery``
    stream, inside the platform's under-30-minutes behaviour.
    """
    dest = notification.destination
    if isinstance(dest, EmailAddress):
        if dest.address not in world.emails:
            raise UnknownDestination(dest.address)
        plaintext = not dest.provider_tls_incoming
        endpoint = dest.endpoint_compromised
    elif isinstance(dest, PhoneNumber):
        if dest.number not in world.phones:
            raise UnknownDestination(dest.number)
        plaintext = False
        endpoint = dest.endpoint_compromised
    else:
        if dest not in world.customers:
            raise UnknownDestination(str(dest))
        plaintext = False
        endpoint = False
    latency = world.rng.stream("delivery").randint(1, MAX_LATENCY_MINUTES - 1)
    notification.emitted_at = world.clock.now
    notification.delivered_at = world.clock.now + latency
    record = DeliveryRecord(
        seq=len(world.delivery_log),
        notification=notification,
        plaintext_exposed_in_transit=plaintext,
        endpoint_exposed=endpoint,
    )
    world.delivery_log.append(record)
    return record
