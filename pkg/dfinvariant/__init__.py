"""Exact Donaldson-Futaki invariants of Fano reductive group compactifications."""

__version__ = "0.1.0"
