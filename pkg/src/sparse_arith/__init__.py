"""Exact arithmetic for sparse integer sequences, their nonstandard
one-generator extensions, and the p-adic structures built on top of them."""

__version__ = "0.1.0"
