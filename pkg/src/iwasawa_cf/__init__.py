"""Iwasawa lambda invariants of imaginary quadratic fields from minus continued fractions."""

__version__ = "0.1.0"
