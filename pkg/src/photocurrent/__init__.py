"""Photoelectric current from light with arbitrary photon statistics."""

__version__ = "0.1.0"
