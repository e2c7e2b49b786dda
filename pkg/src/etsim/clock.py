"""Simulated time.

Time is an integer count of minutes since world start and only moves when
the harness advances it (plus per-delivery notification latency, which is
drawn from the world's seeded rng). Nothing in the simulator reads the
wall clock.
"""

from __future__ import annotations

from dataclasses import dataclass

MINUTES_PER_DAY = 24 * 60


@dataclass
class SimClock:
    now: int = 0

    def advance(self, minutes: int) -> None:
        if minutes < 0:
            raise ValueError("clock can only move forward")
        self.now += minutes

    @property
    def day(self) -> int:
        return self.now // MINUTES_PER_DAY


def fmt_minutes(t: int) -> str:
    """Render a simulated timestamp as ``dDDD HH:MM``."""
    day, rem = divmod(t, MINUTES_PER_DAY)
    hour, minute = divmod(rem, 60)
    return f"d{day:03d} {hour:02d}:{minute:02d}"
