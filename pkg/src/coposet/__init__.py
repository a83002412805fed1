"""Copositive matrices whose zeros have circulant support."""

__version__ = "0.1.0"
