"""The hardened transfer protocol built around registered identifiers.

A customer registers an identifier (email-based or a short alphanumeric
string), backed by a verified notification address, a uniformly random
3-digit security code, and an explicit list of linked deposit accounts.
Transfers are technically bound to the identifier: funds can only land in
one of its linked accounts, so the legacy redirection playbook has nothing
to grab. Notifications are generic — a kind word and nothing else — and
every fund-moving operation consumes a single-use authorization token.

A deliberate property: failures caused by a nonexistent identifier and by
a wrong security code raise the byte-identical error, so the interface
cannot be used to probe which identifiers exist.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence, Union

from .clock import MINUTES_PER_DAY
from .legacy import _check_send_limits, _deposit_from_suspense  # shared money paths
from .model import (EmailAddress, InsufficientFunds, Leg, Money,
                    PhoneNumber, SimulationError)
from .notify import (Channel, Destination, EventKind, Field, Notification,
                     deliver)

if TYPE_CHECKING:  # pragma: no cover
    from .world import World


class IdTaken(SimulationError):
    pass


class AddressAlreadyLinked(SimulationError):
    pass


class BadFormat(SimulationError):
    pass


class BadToken(SimulationError):
    pass


class AuthRequired(SimulationError):
    pass


class NotPending(SimulationError):
    pass


class AccountNotLinked(SimulationError):
    pass


class WindowExpired(SimulationError):
    pass


class NotReturnable(SimulationError):
    pass


class RequestNotPending(SimulationError):
    pass


INVALID_ID_OR_CODE = "invalid identifier or security code"


class InvalidIdOrCode(SimulationError):
    """Raised identically for every identifier/code failure mode."""

    def __init__(self) -> None:
        super().__init__(INVALID_ID_OR_CODE)


RETURN_WINDOW_DAYS = 30
_SHORT_ID = re.compile(r"^[A-Za-z0-9]{1,10}$")


class AuthPurpose(Enum):
    INITIATE_TRANSFER = "initiate-transfer"
    FULFIL_REQUEST = "fulfil-request"
    DEVICE_CHANGE = "device-change"


@dataclass
class OneTimeAuth:
    token: str
    purpose: AuthPurpose
    bound_customer: str
    consumed: bool = False


@dataclass
class InteracID:
    id_string: str
    owner: str
    notification_address: Union[EmailAddress, PhoneNumber]
    security_code: str
    linked_accounts: tuple[str, ...]
    verified: bool = False
    autodeposit_only: bool = False


class DirectedStatus(Enum):
    PENDING_SELECTION = "pending-selection"
    DEPOSITED = "deposited"
    REJECTED = "rejected"
    RETURNED = "returned"
    EXPIRED = "expired"


@dataclass
class DirectedTransfer:
    transfer_id: str
    sender_account: str
    sender_handle: str  # opaque per-transfer handle; never shown to the recipient
    target_id: str
    amount: Money
    message: str = ""
    status: DirectedStatus = DirectedStatus.PENDING_SELECTION
    deposited_into: Optional[str] = None
    return_deadline: Optional[int] = None
    via_autodeposit: bool = False


@dataclass
class DirectedRequest:
    request_id: str
    requestor_account: str
    target_id: str
    amount: Money
    message: str = ""
    fulfilled: bool = False
    declined: bool = False


# -- one-time authorization ----------------------------------------------------


def issue_one_time_auth(world: "World", customer_id: str,
                        purpose: AuthPurpose) -> OneTimeAuth:
    if customer_id not in world.customers:
        raise SimulationError(f"unknown customer {customer_id}")
    auth = OneTimeAuth(world.new_token("auth"), purpose, customer_id)
    world.auths[auth.token] = auth
    return auth


def _consume_auth(world: "World", auth: Optional[OneTimeAuth],
                  purpose: AuthPurpose, customer_id: str, op: str) -> None:
    if auth is None:
        world.record(op, outcome="error:AuthRequired", customer=customer_id)
        raise AuthRequired(f"{op} requires a one-time authorization")
    stored = world.auths.get(auth.token)
    if stored is None or stored.consumed or stored.purpose is not purpose \
            or stored.bound_customer != customer_id:
        world.record(op, outcome="error:AuthRequired", customer=customer_id)
        raise AuthRequired("authorization token invalid for this operation")
    stored.consumed = True
    world.record("consume-auth", token=stored.token,
                 purpose=purpose.value, customer=customer_id)


# -- identifier registration -----------------------------------------------------


def _validate_id_string(id_string: str, notification_address: str) -> None:
    if "@" in id_string:
        if id_string != notification_address:
            raise BadFormat("an email-based identifier must be its own "
                            "notification address")
        if id_string.count("@") != 1:
            raise BadFormat(f"bad email identifier {id_string!r}")
        return
    if not _SHORT_ID.match(id_string):
        raise BadFormat(f"identifier must be 1..10 alphanumeric characters: "
                        f"{id_string!r}")
    if id_string.isdigit():
        # Phone numbers change hands; digit strings are not identifiers.
        raise BadFormat("all-digit identifiers are not allowed")


def register_interac_id(world: "World", customer_id: str, id_string: str,
                        notification_address: str,
                        linked_accounts: Sequence[str],
                        autodeposit_only: bool = False) -> tuple[InteracID, str]:
    """Register an unverified identifier; returns it plus the verification
    token delivered to the notification address."""
    if customer_id not in world.customers:
        raise SimulationError(f"unknown customer {customer_id}")
    if id_string in world.interac_ids:
        raise IdTaken(f"identifier {id_string!r} is taken")
    _validate_id_string(id_string, notification_address)
    if notification_address in world.address_to_id:
        raise AddressAlreadyLinked(
            f"{notification_address} is already linked to an identifier")
    address = world.contact(notification_address)
    if not linked_accounts:
        raise BadFormat("at least one linked account is required")
    if autodeposit_only and len(linked_accounts) != 1:
        raise BadFormat("autodeposit identifiers link exactly one account")
    for account_id in linked_accounts:
        account = world.account(account_id)
        if account.owner != customer_id:
            raise SimulationError(f"{account_id} does not belong to {customer_id}")

    code = f"{world.rng.stream('codes').randrange(1000):03d}"
    interac_id = InteracID(
        id_string=id_string,
        owner=customer_id,
        notification_address=address,
        security_code=code,
        linked_accounts=tuple(linked_accounts),
        autodeposit_only=autodeposit_only,
    )
    world.interac_ids[id_string] = interac_id
    world.address_to_id[notification_address] = id_string
    token = world.new_token("verify")
    world.verification_tokens[token] = id_string
    deliver(world, _generic_notice(world, "verify-identifier", address,
                                   world.customers[customer_id],
                                   link_token=token))
    world.record("register-id", id=id_string, customer=customer_id,
                 autodeposit="yes" if autodeposit_only else "no")
    return interac_id, token


def verify_identifier(world: "World", verification_token: str) -> InteracID:
    id_string = world.verification_tokens.pop(verification_token, None)
    if id_string is None:
        raise BadToken("unknown or already-used verification token")
    interac_id = world.interac_ids[id_string]
    interac_id.verified = True
    world.record("verify-id", id=id_string)
    return interac_id


# -- generic notifications ---------------------------------------------------------


def _generic_notice(world: "World", kind_token: str, destination: Destination,
                    audience, *, link_token: Optional[str] = None,
                    transfer_ref: Optional[str] = None) -> Notification:
    channel = Channel.EMAIL if isinstance(destination, EmailAddress) else Channel.SMS
    return Notification(
        event=EventKind.RECIPIENT_NOTICE,
        channel=channel,
        destination=destination,
        fields={Field.STATUS: kind_token},
        kind_label="directed",
        transfer_ref=transfer_ref,
        link_token=link_token,
        signed=audience.signed_notices,
        emitted_at=world.clock.now,
    )


def compose_generic_notification(world: "World", kind_token: str,
                                 target: InteracID,
                                 transfer_ref: Optional[str] = None) -> Notification:
    """A notice that says only which kind of event happened. No amount, no
    names, no institutions, no links, no expiry — the recipient logs in to
    see anything more."""
    audience = world.customers[target.owner]
    return _generic_notice(world, kind_token, target.notification_address,
                           audience, transfer_ref=transfer_ref)


def _relay_to_sender(world: "World", actor: str, tx: DirectedTransfer,
                     status: str) -> None:
    # Real-time status updates to the other party are opt-in for the
    # customer whose action triggered them; default is silence.
    if not world.customers[actor].realtime_status_relay:
        return
    sender_owner = world.account(tx.sender_account).owner
    sender_ids = [i for i in world.interac_ids.values()
                  if i.owner == sender_owner and i.verified]
    if sender_ids:
        deliver(world, _generic_notice(world, status,
                                       sender_ids[0].notification_address,
                                       world.customers[sender_owner],
                                       transfer_ref=tx.transfer_id))


# -- sending -------------------------------------------------------------------------


def _check_target(world: "World", sender_customer: str, target_id_string: str,
                  code_entered: str, op: str) -> InteracID:
    target = world.interac_ids.get(target_id_string)
    ok = target is not None and target.verified \
        and target.security_code == code_entered
    if not ok:
        world.code_guess_counts[sender_customer] = \
            world.code_guess_counts.get(sender_customer, 0) + 1
        limit = world.code_guess_limit
        if limit is not None and world.code_guess_counts[sender_customer] > limit:
            from .legacy import LimitExceeded
            world.record(op, outcome="error:LimitExceeded",
                         customer=sender_customer)
            raise LimitExceeded("identifier/code attempt limit reached")
        exc = InvalidIdOrCode()
        world.record(op, outcome="error:InvalidIdOrCode",
                     customer=sender_customer, serialized=str(exc))
        raise exc
    return target


def send_directed(world: "World", sender_account: str, target_id_string: str,
                  code_entered: str, amount: Money, message: str = "",
                  auth: Optional[OneTimeAuth] = None) -> str:
    """Send to an identifier. The target's security code must accompany
    the identifier; any mismatch — unknown identifier, unverified
    identifier or wrong code — fails identically."""
    sender_customer = world.account(sender_account).owner
    _consume_auth(world, auth, AuthPurpose.INITIATE_TRANSFER,
                  sender_customer, "send-directed")
    target = _check_target(world, sender_customer, target_id_string,
                           code_entered, "send-directed")
    _check_send_limits(world, sender_account, amount)

    tx = DirectedTransfer(
        transfer_id=world.next_transfer_id(),
        sender_account=sender_account,
        sender_handle=world.new_token("handle"),
        target_id=target.id_string,
        amount=amount,
        message=message,
    )
    world.directed[tx.transfer_id] = tx
    sender_fi = world.account(sender_account).fi
    world.ledger.post(Leg.account(sender_account), Leg.suspense(sender_fi),
                      amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)
    world.record("send-directed", transfer=tx.transfer_id,
                 amount=amount.cents, target=target.id_string, auth="yes",
                 sender_verified="yes" if world.holds_verified_id(sender_customer)
                 else "no")
    if target.autodeposit_only:
        account_id = target.linked_accounts[0]
        _deposit_from_suspense(world, tx, sender_fi, account_id)
        tx.status = DirectedStatus.DEPOSITED
        tx.deposited_into = account_id
        tx.via_autodeposit = True
        tx.return_deadline = world.clock.now + RETURN_WINDOW_DAYS * MINUTES_PER_DAY
        world.record("deposit", transfer=tx.transfer_id, kind="directed",
                     account=account_id,
                     owner=world.account(account_id).owner,
                     intended=target.owner,
                     bound="yes" if account_id in target.linked_accounts else "no")
        deliver(world, compose_generic_notification(world, "autodeposit",
                                                    target, tx.transfer_id))
    else:
        deliver(world, compose_generic_notification(world, "directed",
                                                    target, tx.transfer_id))
    return tx.transfer_id


def _pending_directed(world: "World", transfer_id: str) -> DirectedTransfer:
    tx = world.directed.get(transfer_id)
    if tx is None or tx.status is not DirectedStatus.PENDING_SELECTION:
        raise NotPending(f"{transfer_id} is not pending selection")
    return tx


def recipient_select_account(world: "World", transfer_id: str,
                             chosen_account: str) -> None:
    """The recipient picks one of the accounts linked to the target
    identifier. Any other account is refused outright."""
    tx = _pending_directed(world, transfer_id)
    target = world.interac_ids[tx.target_id]
    if chosen_account not in target.linked_accounts:
        world.record("select-account", transfer=transfer_id,
                     account=chosen_account, outcome="error:AccountNotLinked")
        raise AccountNotLinked(
            f"{chosen_account} is not linked to {target.id_string}")
    sender_fi = world.account(tx.sender_account).fi
    _deposit_from_suspense(world, tx, sender_fi, chosen_account)
    tx.status = DirectedStatus.DEPOSITED
    tx.deposited_into = chosen_account
    world.record("deposit", transfer=transfer_id, kind="directed",
                 account=chosen_account,
                 owner=world.account(chosen_account).owner,
                 intended=target.owner, bound="yes")
    _relay_to_sender(world, target.owner, tx, "deposited")


def recipient_reject(world: "World", transfer_id: str) -> None:
    tx = _pending_directed(world, transfer_id)
    target = world.interac_ids[tx.target_id]
    sender_fi = world.account(tx.sender_account).fi
    world.ledger.post(Leg.suspense(sender_fi), Leg.account(tx.sender_account),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)
    tx.status = DirectedStatus.REJECTED
    world.record("reject-directed", transfer=transfer_id)
    _relay_to_sender(world, target.owner, tx, "rejected")


def return_autodeposit(world: "World", transfer_id: str,
                       auth: Optional[OneTimeAuth] = None) -> None:
    """Send an autodeposited transfer back without learning who sent it.

    The reversal runs along the recorded money path; everything the
    recipient can observe about the return carries no sender identity and
    no sender identifier.
    """
    tx = world.directed.get(transfer_id)
    if tx is None or not tx.via_autodeposit \
            or tx.status is not DirectedStatus.DEPOSITED:
        raise NotReturnable(f"{transfer_id} is not a returnable autodeposit")
    target = world.interac_ids[tx.target_id]
    _consume_auth(world, auth, AuthPurpose.INITIATE_TRANSFER,
                  target.owner, "return-autodeposit")
    if tx.return_deadline is None or world.clock.now > tx.return_deadline:
        raise WindowExpired(f"return window closed for {transfer_id}")
    assert tx.deposited_into is not None
    recipient_fi = world.account(tx.deposited_into).fi
    sender_fi = world.account(tx.sender_account).fi
    world.ledger.post(Leg.account(tx.deposited_into), Leg.suspense(recipient_fi),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)
    if recipient_fi != sender_fi:
        world.ledger.post(Leg.suspense(recipient_fi), Leg.suspense(sender_fi),
                          tx.amount, timestamp=world.clock.now,
                          transfer_id=tx.transfer_id)
    world.ledger.post(Leg.suspense(sender_fi), Leg.account(tx.sender_account),
                      tx.amount, timestamp=world.clock.now,
                      transfer_id=tx.transfer_id)
    tx.status = DirectedStatus.RETURNED
    world.record("return-autodeposit", transfer=transfer_id, auth="yes")
    # The sender learns their transfer came back; the notice to them is as
    # generic as every other.
    sender_owner = world.account(tx.sender_account).owner
    sender_ids = [i for i in world.interac_ids.values()
                  if i.owner == sender_owner and i.verified]
    if sender_ids:
        deliver(world, _generic_notice(world, "returned",
                                       sender_ids[0].notification_address,
                                       world.customers[sender_owner],
                                       transfer_ref=tx.transfer_id))


# -- requests ---------------------------------------------------------------------------


def request_money_directed(world: "World", requestor_account: str,
                           target_id_string: str, code_entered: str,
                           amount: Money, message: str = "",
                           auth: Optional[OneTimeAuth] = None) -> str:
    """Request funds from an identifier's owner; same code discipline as
    sending."""
    requestor_customer = world.account(requestor_account).owner
    _consume_auth(world, auth, AuthPurpose.INITIATE_TRANSFER,
                  requestor_customer, "request-directed")
    target = _check_target(world, requestor_customer, target_id_string,
                           code_entered, "request-directed")
    if amount.is_zero:
        from .legacy import AmountOutOfRange
        raise AmountOutOfRange("cannot request a zero amount")
    request = DirectedRequest(
        request_id=world.next_transfer_id(),
        requestor_account=requestor_account,
        target_id=target.id_string,
        amount=amount,
        message=message,
    )
    world.directed_requests[request.request_id] = request
    world.record("request-directed", request=request.request_id,
                 amount=amount.cents, target=target.id_string, auth="yes",
                 sender_verified="yes" if world.holds_verified_id(requestor_customer)
                 else "no")
    deliver(world, compose_generic_notification(world, "request", target,
                                                request.request_id))
    return request.request_id


def fulfil_directed_request(world: "World", request_id: str,
                            payer_account: str,
                            auth: Optional[OneTimeAuth] = None) -> None:
    """The identifier's owner pays a pending request from one of their own
    accounts; withdrawal demands its own fresh authorization."""
    request = world.directed_requests.get(request_id)
    if request is None or request.fulfilled or request.declined:
        raise RequestNotPending(f"{request_id} is not pending")
    target = world.interac_ids[request.target_id]
    payer = world.account(payer_account)
    if payer.owner != target.owner:
        raise AccountNotLinked(
            f"{payer_account} does not belong to the requested identifier's owner")
    _consume_auth(world, auth, AuthPurpose.FULFIL_REQUEST, payer.owner,
                  "fulfil-directed")
    if payer.balance < request.amount:
        raise InsufficientFunds(
            f"{payer_account} holds {payer.balance.cad}, "
            f"needs {request.amount.cad}")
    world.ledger.post(Leg.account(payer_account), Leg.suspense(payer.fi),
                      request.amount, timestamp=world.clock.now,
                      transfer_id=request.request_id)
    requestor_fi = world.account(request.requestor_account).fi
    if payer.fi != requestor_fi:
        world.ledger.post(Leg.suspense(payer.fi), Leg.suspense(requestor_fi),
                          request.amount, timestamp=world.clock.now,
                          transfer_id=request.request_id)
    world.ledger.post(Leg.suspense(requestor_fi),
                      Leg.account(request.requestor_account),
                      request.amount, timestamp=world.clock.now,
                      transfer_id=request.request_id)
    request.fulfilled = True
    requestor_owner = world.account(request.requestor_account).owner
    requestor_linked = any(
        i.owner == requestor_owner and i.verified
        and request.requestor_account in i.linked_accounts
        for i in world.interac_ids.values())
    world.record("deposit", transfer=request.request_id, kind="directed-request",
                 account=request.requestor_account, owner=requestor_owner,
                 intended=requestor_owner,
                 bound="yes" if requestor_linked else "no")
    world.record("fulfil-directed", request=request_id, payer=payer_account,
                 auth="yes")


def decline_directed_request(world: "World", request_id: str) -> None:
    request = world.directed_requests.get(request_id)
    if request is None or request.fulfilled or request.declined:
        raise RequestNotPending(f"{request_id} is not pending")
    request.declined = True
    world.record("decline-directed", request=request_id)


# -- device changes ------------------------------------------------------------------------


def change_device(world: "World", customer_id: str,
                  auth: Optional[OneTimeAuth] = None) -> None:
    """Bind a new device to a customer; needs its own authorization rather
    than a guessable challenge question."""
    if customer_id not in world.customers:
        raise SimulationError(f"unknown customer {customer_id}")
    _consume_auth(world, auth, AuthPurpose.DEVICE_CHANGE, customer_id,
                  "change-device")
    world.record("change-device", customer=customer_id, auth="yes")
