"""Reachability and irreducibility toolkit for jump-driven SDEs."""

__version__ = "0.1.0"
