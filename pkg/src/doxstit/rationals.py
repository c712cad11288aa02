"""Exact rational parsing/formatting for model files and reports.

All quantities in this package (history values, probability masses,
expected utilities) are `fractions.Fraction`; nothing is ever a float.
The wire form is a string "p/q" or a plain integer string.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ModelFormatError


def parse_rational(text, where: str = "") -> Fraction:
    """Parse "p/q" or an integer (string or int) into a Fraction."""
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ModelFormatError(f"{where}: expected a rational string, got {text!r}")
    s = text.strip()
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            d = int(den)
            if d == 0:
                raise ZeroDivisionError
            return Fraction(int(num), d)
        return Fraction(int(s))
    except (ValueError, ZeroDivisionError):
        raise ModelFormatError(f"{where}: {text!r} is not a rational 'p/q' or integer") from None


def format_rational(q: Fraction) -> str:
    """Canonical wire form: lowest terms, "p/q" or bare integer."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
