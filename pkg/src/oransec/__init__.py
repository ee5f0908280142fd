"""Secure UE-to-O-RU association and cipher selection."""

__version__ = "0.1.0"
