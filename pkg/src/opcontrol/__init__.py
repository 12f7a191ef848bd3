"""Optimal prediction with control: memory-corrected DMDc for averaged dynamics."""

__version__ = "0.1.0"
