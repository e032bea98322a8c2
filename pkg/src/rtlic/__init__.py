"""Sequence-driven incremental concolic test generation for RTL designs."""

__version__ = "0.1.0"
