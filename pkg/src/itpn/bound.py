"""Exact bounds: rationals extended with a single +infinity value.

Finite bounds are plain ``fractions.Fraction`` (or ``int``) objects.  ``INF``
is a singleton that absorbs addition and compares above every rational, so
``min``/``max`` and ``+`` work unchanged on mixed operands.
"""

from fractions import Fraction
from numbers import Rational


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __hash__(self):
        return hash("itpn.INF")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        if other is self or isinstance(other, Rational):
            return self
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        raise ValueError("negation of +inf is not a bound")

    def __sub__(self, other):
        if isinstance(other, Rational):
            return self
        raise ValueError("inf - inf is undefined")

    def __reduce__(self):
        return "INF"


INF = _Infinity()


def is_inf(b):
    return b is INF


def as_bound(value):
    """Convert ints, Fractions, decimal strings or 'inf' into a bound."""
    if value is INF:
        return INF
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "+inf", "infinity", "oo"):
            return INF
        return Fraction(v)
    if isinstance(value, float):
        raise TypeError("floating point bounds are not accepted")
    return Fraction(value)


def bmin(*values):
    """MIN over bounds; accepts either varargs or a single iterable."""
    if len(values) == 1 and not isinstance(values[0], (Rational, _Infinity)):
        values = tuple(values[0])
    best = INF
    for v in values:
        if v < best:
            best = v
    return best


def fmt(b):
    if b is INF:
        return "inf"
    b = Fraction(b)
    if b.denominator == 1:
        return str(b.numerator)
    return f"{b.numerator}/{b.denominator}"
