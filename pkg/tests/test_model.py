import random

import pytest

from etsim.clock import MINUTES_PER_DAY, SimClock, fmt_minutes
from etsim.model import (Account, EmailAddress, FinancialInstitution,
                         InsufficientFunds, Ledger, Leg, Money, PhoneNumber,
                         UnknownAccount, UnknownLeg, ZeroAmount)


def make_ledger(accounts=("a", "b"), fis=("f1", "f2")) -> Ledger:
    ledger = Ledger()
    for fi in fis:
        ledger.register_fi(fi)
    for i, account_id in enumerate(accounts):
        ledger.register_account(Account(account_id, owner=f"cust-{i}",
                                        fi=fis[i % len(fis)]))
    return ledger


class TestMoney:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Money(-1)

    def test_rejects_non_integer(self):
        with pytest.raises(TypeError):
            Money(1.5)

    def test_arithmetic_is_exact(self):
        assert Money(1500) + Money(23500) == Money(25000)
        assert Money(25000) - Money(1500) == Money(23500)

    def test_subtraction_below_zero_rejected(self):
        with pytest.raises(ValueError):
            Money(10) - Money(11)

    def test_cad_rendering(self):
        assert Money(1500).cad == "CAD 15.00"
        assert Money(10).cad == "CAD 0.10"
        assert Money(190000).cad == "CAD 1900.00"

    def test_parse_cad_roundtrip(self):
        for cents in (0, 1, 10, 1500, 23500, 48500, 190000):
            assert Money.parse_cad(Money(cents).cad) == Money(cents)

    def test_ordering(self):
        assert Money(1500) < Money(23500) < Money(48500)


class TestMint:
    def test_zero_amount_rejected(self):
        ledger = make_ledger()
        with pytest.raises(ZeroAmount):
            ledger.mint("a", Money(0), timestamp=0)

    def test_unknown_account(self):
        ledger = make_ledger()
        with pytest.raises(UnknownAccount):
            ledger.mint("nope", Money(100), timestamp=0)

    def test_single_credit(self):
        ledger = make_ledger()
        ledger.mint("a", Money(150_000), timestamp=0)
        assert ledger.balance_of(Leg.account("a")) == Money(150_000)

    def test_two_mints_match_journal_sum(self):
        # oracle: sum credited amounts straight off the journal
        ledger = make_ledger()
        ledger.mint("a", Money(100_000), timestamp=0)
        ledger.mint("a", Money(90_000), timestamp=5)
        expected = sum(e.amount.cents for e in ledger.journal
                       if e.credit == Leg.account("a"))
        assert expected == 190_000
        assert ledger.balance_of(Leg.account("a")).cents == expected
        assert ledger.replay() == ledger.live_balances()


class TestPost:
    def test_account_to_suspense(self):
        ledger = make_ledger()
        ledger.mint("a", Money(1500), timestamp=0)
        ledger.post(Leg.account("a"), Leg.suspense("f1"), Money(1500),
                    timestamp=0, transfer_id="t")
        assert ledger.balance_of(Leg.account("a")) == Money(0)
        assert ledger.balance_of(Leg.suspense("f1")) == Money(1500)

    def test_zero_amount(self):
        ledger = make_ledger()
        with pytest.raises(ZeroAmount):
            ledger.post(Leg.account("a"), Leg.suspense("f1"), Money(0),
                        timestamp=0, transfer_id=None)

    def test_unknown_legs(self):
        ledger = make_ledger()
        ledger.mint("a", Money(10), timestamp=0)
        with pytest.raises(UnknownLeg):
            ledger.post(Leg.account("a"), Leg.suspense("nope"), Money(10),
                        timestamp=0, transfer_id=None)
        with pytest.raises(UnknownLeg):
            ledger.post(Leg.account("missing"), Leg.suspense("f1"), Money(10),
                        timestamp=0, transfer_id=None)
        with pytest.raises(UnknownLeg):
            ledger.post(Leg.external(), Leg.account("a"), Money(10),
                        timestamp=0, transfer_id=None)

    def test_insufficient_funds_rejected_before_mutation(self):
        ledger = make_ledger()
        ledger.mint("a", Money(5), timestamp=0)
        with pytest.raises(InsufficientFunds):
            ledger.post(Leg.account("a"), Leg.suspense("f1"), Money(6),
                        timestamp=0, transfer_id=None)
        assert ledger.balance_of(Leg.account("a")) == Money(5)

    def test_fuzz_random_legs_conserve_total(self):
        # oracle: account+suspense sum is invariant under any mix of valid
        # postings once minting is done
        rng = random.Random(1234)
        ledger = make_ledger(accounts=("a", "b", "c"), fis=("f1", "f2"))
        for account_id in ("a", "b", "c"):
            ledger.mint(account_id, Money(1_000_000), timestamp=0)
        legs = [Leg.account(a) for a in ("a", "b", "c")]
        legs += [Leg.suspense(f) for f in ("f1", "f2")]
        total_before = ledger.total_system_value()
        posted = 0
        while posted < 10_000:
            debit, credit = rng.sample(legs, 2)
            amount = Money(rng.randint(1, 500))
            if ledger.balance_of(debit) < amount:
                continue
            ledger.post(debit, credit, amount, timestamp=posted,
                        transfer_id=None)
            posted += 1
        assert ledger.total_system_value() == total_before
        assert ledger.replay() == ledger.live_balances()


class TestReads:
    def test_fresh_ledger_total_zero(self):
        assert make_ledger().total_system_value() == Money(0)

    def test_total_after_mint(self):
        ledger = make_ledger()
        ledger.mint("a", Money(100), timestamp=0)
        assert ledger.total_system_value() == Money(100)

    def test_daily_totals_matches_journal_scan(self):
        # mirrors three deposits of 200/600/1100 dollars landing in one day;
        # oracle recomputes from the journal
        ledger = make_ledger()
        ledger.mint("a", Money(500_000), timestamp=0)
        for cents in (20_000, 60_000, 110_000):
            ledger.post(Leg.account("a"), Leg.suspense("f1"), Money(cents),
                        timestamp=10, transfer_id=None)
            ledger.post(Leg.suspense("f1"), Leg.account("b"), Money(cents),
                        timestamp=20, transfer_id=None)
        day = 0
        expected_deposited = sum(
            e.amount.cents for e in ledger.journal
            if e.credit == Leg.account("b") and e.debit.kind == "suspense"
            and e.timestamp // MINUTES_PER_DAY == day)
        assert expected_deposited == 190_000
        totals = ledger.daily_totals("b", day)
        assert totals.deposited.cents == expected_deposited
        assert totals.sent == Money(0)

    def test_daily_totals_split_by_day(self):
        ledger = make_ledger()
        ledger.mint("a", Money(10_000), timestamp=0)
        ledger.post(Leg.account("a"), Leg.suspense("f1"), Money(100),
                    timestamp=0, transfer_id=None)
        ledger.post(Leg.account("a"), Leg.suspense("f1"), Money(200),
                    timestamp=MINUTES_PER_DAY + 1, transfer_id=None)
        assert ledger.daily_totals("a", 0).sent == Money(100)
        assert ledger.daily_totals("a", 1).sent == Money(200)

    def test_daily_totals_unknown_account(self):
        with pytest.raises(UnknownAccount):
            make_ledger().daily_totals("nope", 0)


class TestDomainTypes:
    def test_fi_min_above_max_rejected(self):
        with pytest.raises(ValueError):
            FinancialInstitution("x", "X", min_transfer=Money(100),
                                 max_transfer=Money(10))

    def test_fi_deposit_limit_default_is_ten_thousand_cad(self):
        fi = FinancialInstitution("x", "X")
        assert fi.daily_deposit_limit == Money(1_000_000)

    def test_email_requires_single_at(self):
        with pytest.raises(ValueError):
            EmailAddress("not-an-email")
        with pytest.raises(ValueError):
            EmailAddress("a@@b")

    def test_phone_digits_only(self):
        with pytest.raises(ValueError):
            PhoneNumber("613-555")
        with pytest.raises(ValueError):
            PhoneNumber("")

    def test_clock_only_moves_forward(self):
        clock = SimClock()
        clock.advance(90)
        assert clock.now == 90
        assert clock.day == 0
        clock.advance(MINUTES_PER_DAY)
        assert clock.day == 1
        with pytest.raises(ValueError):
            clock.advance(-1)

    def test_fmt_minutes(self):
        assert fmt_minutes(0) == "d000 00:00"
        assert fmt_minutes(MINUTES_PER_DAY + 11 * 60 + 5) == "d001 11:05"
