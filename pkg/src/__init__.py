"""Conformally flat constant-Ricci study toolkit."""

__version__ = "0.1.0"
