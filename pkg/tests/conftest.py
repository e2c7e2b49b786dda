from __future__ import annotations

from pathlib import Path

import pytest

from etsim.model import Money, NameFormat
from etsim.world import World

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = REPO_ROOT / "scenarios"
FIXTURES = REPO_ROOT / "fixtures"

# Seed used for every checked-in fixture.
FIXTURE_SEED = 2019


def build_two_bank_world(seed: int = 7) -> World:
    """Two institutions, three customers, funded accounts.

    lakebank passes custom names, northbank legal names; amounts mirror the
    small/medium/big bands used throughout the suite.
    """
    w = World(seed=seed)
    w.add_fi("lakebank", "Lake Bank", name_format=NameFormat.CUSTOM,
             daily_send_limit=Money(1_000_000), max_transfer=Money(2_500_000))
    w.add_fi("northbank", "North Bank", name_format=NameFormat.LEGAL,
             daily_send_limit=Money(1_000_000), max_transfer=Money(2_500_000))
    w.add_customer("alice", "Alice Arsenault", "Ali")
    w.add_customer("bob", "Robert Belanger", "Bob")
    w.add_customer("mallory", "Mallory Mask")
    w.add_email("alice", "alice@tlsmail.test", tls=True)
    w.add_email("bob", "bob@plainmail.test", tls=False)
    w.add_email("bob", "bob.auto@tlsmail.test", tls=True)
    w.add_email("mallory", "mallory@plainmail.test", tls=False)
    w.add_phone("bob", "6135550123")
    w.add_account("alice-lake", "alice", "lakebank")
    w.add_account("bob-north", "bob", "northbank")
    w.add_account("mallory-north", "mallory", "northbank")
    w.mint("alice-lake", Money(1_000_000))
    w.mint("bob-north", Money(500_000))
    return w


@pytest.fixture
def world() -> World:
    return build_two_bank_world()
