"""Numerical checks of shifted Mahler measure identities and their elliptic regulators."""
from __future__ import annotations

__version__ = "0.1.0"
