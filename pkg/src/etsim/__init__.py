"""Deterministic simulator of an Interac-style e-transfer ecosystem.

Builds self-contained worlds with a conservation-checked double-entry
ledger, runs the legacy transfer flows and the hardened directed-transfer
protocol over them, models notification privacy and eavesdropper
capability levels, and machine-checks the directed protocol's seven
security/privacy requirements.
"""

from .model import Money
from .world import World

__version__ = "0.1.0"
__all__ = ["Money", "World", "__version__"]
