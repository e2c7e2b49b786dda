"""One simulation world: a self-contained value holding all mutable state.

A world is mutated by exactly one thread; independent worlds (e.g. Monte
Carlo trials) are built from derived seeds and never share state. Every
security-relevant operation appends a trace event, which is what both the
report generator and the protocol-requirement checker consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Union

from .clock import SimClock
from .model import (Account, Customer, EmailAddress, FinancialInstitution,
                    FraudScorer, Ledger, Money, PhoneNumber,
                    SimulationError, allow_all)
from .notify import DeliveryRecord
from .rng import RandomStreams

if TYPE_CHECKING:  # pragma: no cover
    from .directed import DirectedRequest, DirectedTransfer, InteracID, OneTimeAuth
    from .legacy import AutodepositRecord, Transfer


class InternalInvariantError(SimulationError):
    """A world reached a state the model forbids; aborts the run."""


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    op: str
    details: tuple[tuple[str, str], ...]
    outcome: str  # "ok" or "error:<Name>"

    def detail(self, key: str) -> Optional[str]:
        for k, v in self.details:
            if k == key:
                return v
        return None

    def render(self) -> str:
        detail_text = " ".join(f"{k}={v}" for k, v in self.details)
        return f"{self.seq}\t{self.op}\t{self.outcome}\t{detail_text}"


Contact = Union[EmailAddress, PhoneNumber]


class World:
    def __init__(self, seed: int = 0):
        self.seed = seed
        self.clock = SimClock()
        self.rng = RandomStreams(seed)
        self.ledger = Ledger()
        self.fis: dict[str, FinancialInstitution] = {}
        self.customers: dict[str, Customer] = {}
        self.emails: dict[str, EmailAddress] = {}
        self.phones: dict[str, PhoneNumber] = {}
        self.email_owner: dict[str, str] = {}
        self.phone_owner: dict[str, str] = {}
        self.customer_accounts: dict[str, list[str]] = {}
        # legacy protocol state
        self.transfers: dict[str, "Transfer"] = {}
        self.link_tokens: dict[str, str] = {}
        self.autodeposit: dict[str, "AutodepositRecord"] = {}
        self.preferred_fi: dict[str, str] = {}
        self.attack_scripts: dict[str, tuple[str, ...]] = {}
        # directed protocol state
        self.interac_ids: dict[str, "InteracID"] = {}
        self.address_to_id: dict[str, str] = {}
        self.verification_tokens: dict[str, str] = {}
        self.auths: dict[str, "OneTimeAuth"] = {}
        self.directed: dict[str, "DirectedTransfer"] = {}
        self.directed_requests: dict[str, "DirectedRequest"] = {}
        self.code_guess_counts: dict[str, int] = {}
        self.code_guess_limit: Optional[int] = None
        # observability
        self.delivery_log: list[DeliveryRecord] = []
        self.trace: list[TraceEvent] = []
        self.fraud_scorer: FraudScorer = allow_all
        self._transfer_seq = 0
        self._reference_seq = 0

    # -- setup ---------------------------------------------------------------

    def add_fi(self, fi_id: str, display_name: Optional[str] = None,
               **kwargs) -> FinancialInstitution:
        if fi_id in self.fis:
            raise ValueError(f"duplicate institution {fi_id}")
        fi = FinancialInstitution(fi_id, display_name or fi_id, **kwargs)
        self.fis[fi_id] = fi
        self.ledger.register_fi(fi_id)
        return fi

    def add_customer(self, customer_id: str, legal_name: str,
                     profile_name: Optional[str] = None,
                     preferred_language: str = "English",
                     **kwargs) -> Customer:
        if customer_id in self.customers:
            raise ValueError(f"duplicate customer {customer_id}")
        customer = Customer(customer_id, legal_name, profile_name,
                            preferred_language, **kwargs)
        self.customers[customer_id] = customer
        self.customer_accounts.setdefault(customer_id, [])
        return customer

    def add_email(self, customer_id: str, address: str, *,
                  tls: bool = True, compromised: bool = False) -> EmailAddress:
        if customer_id not in self.customers:
            raise ValueError(f"unknown customer {customer_id}")
        if address in self.emails:
            raise ValueError(f"duplicate email {address}")
        email = EmailAddress(address, provider_tls_incoming=tls,
                             endpoint_compromised=compromised)
        self.emails[address] = email
        self.email_owner[address] = customer_id
        return email

    def add_phone(self, customer_id: str, number: str, *,
                  compromised: bool = False) -> PhoneNumber:
        if customer_id not in self.customers:
            raise ValueError(f"unknown customer {customer_id}")
        if number in self.phones:
            raise ValueError(f"duplicate phone {number}")
        phone = PhoneNumber(number, endpoint_compromised=compromised)
        self.phones[number] = phone
        self.phone_owner[number] = customer_id
        return phone

    def add_account(self, account_id: str, owner: str, fi: str) -> Account:
        if owner not in self.customers:
            raise ValueError(f"unknown customer {owner}")
        if fi not in self.fis:
            raise ValueError(f"unknown institution {fi}")
        account = Account(account_id, owner, fi)
        self.ledger.register_account(account)
        self.customer_accounts[owner].append(account_id)
        return account

    def mint(self, account_id: str, amount: Money) -> int:
        return self.ledger.mint(account_id, amount, timestamp=self.clock.now)

    # -- lookups ---------------------------------------------------------------

    def contact(self, text: str) -> Contact:
        if "@" in text:
            contact = self.emails.get(text)
        else:
            contact = self.phones.get(text)
        if contact is None:
            from .notify import UnknownDestination
            raise UnknownDestination(text)
        return contact

    def contact_text(self, contact: Contact) -> str:
        return contact.address if isinstance(contact, EmailAddress) else contact.number

    def owner_of_contact(self, contact: Contact) -> Optional[str]:
        if isinstance(contact, EmailAddress):
            return self.email_owner.get(contact.address)
        return self.phone_owner.get(contact.number)

    def account(self, account_id: str) -> Account:
        acct = self.ledger.accounts.get(account_id)
        if acct is None:
            from .model import UnknownAccount
            raise UnknownAccount(f"unknown account {account_id}")
        return acct

    def home_fi(self, customer_id: str) -> Optional[str]:
        accounts = self.customer_accounts.get(customer_id) or []
        if not accounts:
            return None
        return self.account(accounts[0]).fi

    def holds_verified_id(self, customer_id: str) -> bool:
        return any(i.owner == customer_id and i.verified
                   for i in self.interac_ids.values())

    # -- identifiers ------------------------------------------------------------

    def next_transfer_id(self) -> str:
        self._transfer_seq += 1
        return f"tx-{self._transfer_seq:04d}"

    def next_reference(self) -> str:
        self._reference_seq += 1
        return f"REF{self._reference_seq:08d}"

    def new_token(self, label: str) -> str:
        return f"{label}-{self.rng.stream('tokens').getrandbits(64):016x}"

    # -- tracing ------------------------------------------------------------------

    def record(self, op: str, outcome: str = "ok", **details) -> TraceEvent:
        event = TraceEvent(
            seq=len(self.trace),
            op=op,
            details=tuple((k.replace("_", "-"), str(v)) for k, v in details.items()),
            outcome=outcome,
        )
        self.trace.append(event)
        return event

    # -- invariants -----------------------------------------------------------------

    def conservation_audit(self) -> None:
        """Abort the run if the ledger and journal disagree."""
        if not self.ledger.check_replay():
            raise InternalInvariantError("journal replay does not match live balances")
        for account in self.ledger.accounts.values():
            if account.balance.cents < 0:  # pragma: no cover - Money forbids it
                raise InternalInvariantError(f"negative balance on {account.account_id}")
