"""
Utilities module for ddos5g.

Seed derivation, persisted transforms and (optional) charts. ``plotting`` and
``serialization`` are imported by their users directly.
"""

from .seeding import derive_seed, make_rng

__all__ = ["derive_seed", "make_rng"]
