"""Domain entities and the double-entry ledger.

Money moves between customer accounts and one suspense (trust) account per
financial institution, mirroring a good-funds clearing model: a transfer
debits the sender instantly into suspense and credits the final account
instantly on completion. Every movement is a journal entry with exactly
one debit leg and one credit leg of equal amount, so replaying the journal
from empty balances reproduces live state exactly, and total system value
is conserved by every operation except explicit minting (which uses an
external leg and exists only for scenario setup).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .clock import MINUTES_PER_DAY


class SimulationError(Exception):
    """Base class for all simulator errors."""


class UnknownAccount(SimulationError):
    pass


class UnknownLeg(SimulationError):
    pass


class ZeroAmount(SimulationError):
    pass


class InsufficientFunds(SimulationError):
    pass


@dataclass(frozen=True, order=True)
class Money:
    """An exact CAD amount in integer cents. Never negative."""

    cents: int

    def __post_init__(self) -> None:
        if not isinstance(self.cents, int) or isinstance(self.cents, bool):
            raise TypeError(f"cents must be int, got {self.cents!r}")
        if self.cents < 0:
            raise ValueError(f"negative amount: {self.cents}")

    def __add__(self, other: "Money") -> "Money":
        return Money(self.cents + other.cents)

    def __sub__(self, other: "Money") -> "Money":
        return Money(self.cents - other.cents)

    def scaled(self, factor: int) -> "Money":
        return Money(self.cents * factor)

    @property
    def is_zero(self) -> bool:
        return self.cents == 0

    @property
    def cad(self) -> str:
        return f"CAD {self.cents // 100}.{self.cents % 100:02d}"

    @classmethod
    def parse_cad(cls, text: str) -> "Money":
        """Inverse of ``cad``; accepts ``CAD 15.00`` or ``15.00``."""
        body = text.strip()
        if body.startswith("CAD"):
            body = body[3:].strip()
        if "." in body:
            dollars, _, frac = body.partition(".")
            if len(frac) != 2:
                raise ValueError(f"bad money literal: {text!r}")
            return cls(int(dollars) * 100 + int(frac))
        return cls(int(body) * 100)


ZERO = Money(0)


class NameFormat(Enum):
    """Which name form an institution passes over the transfer interface."""

    CUSTOM = "custom"
    LEGAL = "legal"
    BOTH = "both"


@dataclass(frozen=True)
class FiPolicy:
    """The per-institution knobs that shape notification content."""

    name_format: NameFormat
    confirmation_messages: bool = True


@dataclass
class FinancialInstitution:
    fi_id: str
    display_name: str
    name_format: NameFormat = NameFormat.LEGAL
    min_transfer: Money = Money(1)
    max_transfer: Money = Money(300_000)
    daily_send_limit: Money = Money(100_000)
    daily_deposit_limit: Money = Money(1_000_000)
    supports_confirmation_message: bool = True
    supports_portal_inbox: bool = False

    def __post_init__(self) -> None:
        if self.min_transfer > self.max_transfer:
            raise ValueError(f"{self.fi_id}: min_transfer above max_transfer")

    @property
    def policy(self) -> FiPolicy:
        return FiPolicy(self.name_format, self.supports_confirmation_message)


@dataclass
class EmailAddress:
    address: str
    provider_tls_incoming: bool = True
    endpoint_compromised: bool = False

    def __post_init__(self) -> None:
        if self.address.count("@") != 1:
            raise ValueError(f"email must contain exactly one '@': {self.address!r}")


@dataclass
class PhoneNumber:
    number: str
    endpoint_compromised: bool = False

    def __post_init__(self) -> None:
        if not self.number or not self.number.isdigit():
            raise ValueError(f"phone number must be non-empty digits: {self.number!r}")


@dataclass
class Customer:
    customer_id: str
    legal_name: str
    profile_name: Optional[str] = None
    preferred_language: str = "English"
    realtime_status_relay: bool = False
    signed_notices: bool = False

    def __post_init__(self) -> None:
        if not self.legal_name:
            raise ValueError("legal_name must be non-empty")

    def name(self, form: "NameFormat") -> str:
        if form is NameFormat.CUSTOM:
            return self.profile_name or self.legal_name
        return self.legal_name


@dataclass
class Account:
    account_id: str
    owner: str
    fi: str
    balance: Money = ZERO


@dataclass(frozen=True)
class Leg:
    """One side of a journal entry: a customer account, an institution's
    suspense account, or the external world (minting only)."""

    kind: str
    ref: str

    @classmethod
    def account(cls, account_id: str) -> "Leg":
        return cls("account", account_id)

    @classmethod
    def suspense(cls, fi_id: str) -> "Leg":
        return cls("suspense", fi_id)

    @classmethod
    def external(cls) -> "Leg":
        return cls("external", "mint")

    def __str__(self) -> str:
        return f"{self.kind}:{self.ref}"


@dataclass(frozen=True)
class JournalEntry:
    seq: int
    timestamp: int
    debit: Leg
    credit: Leg
    amount: Money
    transfer_id: Optional[str]


@dataclass(frozen=True)
class DailyTotals:
    sent: Money
    deposited: Money


class FraudHold(SimulationError):
    """A pluggable risk scorer refused the operation."""


# Hook point for a risk engine. The production engine is opaque, so the
# default allows everything; tests may plug in a policy.
FraudScorer = Callable[[str, str, Money], bool]


def allow_all(sender_account: str, contact: str, amount: Money) -> bool:
    return True


class Ledger:
    """Accounts, per-institution suspense accounts and an append-only journal."""

    def __init__(self) -> None:
        self.accounts: dict[str, Account] = {}
        self.suspense: dict[str, Money] = {}
        self.journal: list[JournalEntry] = []
        # (account_id, day) -> [sent_cents, deposited_cents]; kept in lockstep
        # with the journal so daily-limit checks stay O(1)
        self._daily: dict[tuple[str, int], list[int]] = {}

    # -- registration -----------------------------------------------------

    def register_fi(self, fi_id: str) -> None:
        self.suspense.setdefault(fi_id, ZERO)

    def register_account(self, account: Account) -> None:
        if account.account_id in self.accounts:
            raise ValueError(f"duplicate account {account.account_id}")
        if account.fi not in self.suspense:
            raise UnknownLeg(f"unknown institution {account.fi}")
        self.accounts[account.account_id] = account

    # -- balance access ----------------------------------------------------

    def _get(self, leg: Leg) -> Money:
        if leg.kind == "account":
            acct = self.accounts.get(leg.ref)
            if acct is None:
                raise UnknownLeg(f"unknown account leg {leg}")
            return acct.balance
        if leg.kind == "suspense":
            if leg.ref not in self.suspense:
                raise UnknownLeg(f"unknown suspense leg {leg}")
            return self.suspense[leg.ref]
        raise UnknownLeg(f"external leg has no balance: {leg}")

    def _set(self, leg: Leg, value: Money) -> None:
        if leg.kind == "account":
            self.accounts[leg.ref].balance = value
        elif leg.kind == "suspense":
            self.suspense[leg.ref] = value
        else:  # pragma: no cover - guarded by callers
            raise UnknownLeg(str(leg))

    def balance_of(self, leg: Leg) -> Money:
        return self._get(leg)

    def total_system_value(self) -> Money:
        total = sum(a.balance.cents for a in self.accounts.values())
        total += sum(s.cents for s in self.suspense.values())
        return Money(total)

    # -- movement ----------------------------------------------------------

    def mint(self, account_id: str, amount: Money, *, timestamp: int) -> int:
        """Credit an account from the external world (scenario setup only)."""
        if account_id not in self.accounts:
            raise UnknownAccount(f"unknown account {account_id}")
        if amount.is_zero:
            raise ZeroAmount("cannot mint a zero amount")
        return self._apply(Leg.external(), Leg.account(account_id), amount,
                           timestamp=timestamp, transfer_id=None)

    def post(self, debit: Leg, credit: Leg, amount: Money, *,
             timestamp: int, transfer_id: Optional[str]) -> int:
        """Atomically debit one leg and credit the other by `amount`."""
        if amount.is_zero:
            raise ZeroAmount("zero transfer amount")
        if debit.kind == "external" or credit.kind == "external":
            raise UnknownLeg("external legs are reserved for minting")
        if self._get(debit) < amount:
            raise InsufficientFunds(
                f"{debit} holds {self._get(debit).cad}, needs {amount.cad}")
        self._get(credit)  # raises UnknownLeg before any mutation
        return self._apply(debit, credit, amount,
                           timestamp=timestamp, transfer_id=transfer_id)

    def _apply(self, debit: Leg, credit: Leg, amount: Money, *,
               timestamp: int, transfer_id: Optional[str]) -> int:
        seq = len(self.journal)
        self.journal.append(JournalEntry(seq, timestamp, debit, credit,
                                         amount, transfer_id))
        if debit.kind != "external":
            self._set(debit, self._get(debit) - amount)
        if credit.kind != "external":
            self._set(credit, self._get(credit) + amount)
        day = timestamp // MINUTES_PER_DAY
        if debit.kind == "account" and credit.kind == "suspense":
            self._daily.setdefault((debit.ref, day), [0, 0])[0] += amount.cents
        if credit.kind == "account" and debit.kind == "suspense":
            self._daily.setdefault((credit.ref, day), [0, 0])[1] += amount.cents
        return seq

    # -- reads over the journal ---------------------------------------------

    def daily_totals(self, account_id: str, day: int) -> DailyTotals:
        """Gross e-transfer flow for one account on one simulated day.

        `sent` sums debits into suspense; `deposited` sums credits received
        from suspense (refunds included). Minting is external and excluded.
        """
        if account_id not in self.accounts:
            raise UnknownAccount(f"unknown account {account_id}")
        sent, deposited = self._daily.get((account_id, day), (0, 0))
        return DailyTotals(Money(sent), Money(deposited))

    def replay(self) -> dict[str, int]:
        """Recompute all balances from the journal alone."""
        balances = {str(Leg.account(a)): 0 for a in self.accounts}
        balances.update({str(Leg.suspense(f)): 0 for f in self.suspense})
        for entry in self.journal:
            if entry.debit.kind != "external":
                balances[str(entry.debit)] -= entry.amount.cents
            if entry.credit.kind != "external":
                balances[str(entry.credit)] += entry.amount.cents
        return balances

    def live_balances(self) -> dict[str, int]:
        live = {str(Leg.account(a)): acct.balance.cents
                for a, acct in self.accounts.items()}
        live.update({str(Leg.suspense(f)): s.cents
                     for f, s in self.suspense.items()})
        return live

    def check_replay(self) -> bool:
        return self.replay() == self.live_balances()
