"""Frequency conversion in width-engineered chi(2) waveguides."""

__version__ = "0.1.0"
