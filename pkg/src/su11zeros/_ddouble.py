"""Scalar double-double arithmetic (about 32 significant digits).

Values are ``(hi, lo)`` tuples with ``|lo| <= ulp(hi)/2``.
"""

from __future__ import annotations

_SPLITTER = 134217729.0


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _renorm(hi: float, lo: float) -> tuple[float, float]:
    s = hi + lo
    return s, lo - (s - hi)


def add(x, y):
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    e += t
    s, e = _renorm(s, e)
    e += f
    return _renorm(s, e)


def neg(x):
    return -x[0], -x[1]


def mul(x, y):
    p, e = two_prod(x[0], y[0])
    e += x[0] * y[1] + x[1] * y[0]
    return _renorm(p, e)


def from_float(a: float):
    return float(a), 0.0


def power(x, n: int):
    """``x**n`` for a non-negative integer ``n`` by binary powering."""
    result = (1.0, 0.0)
    base = x
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def to_float(x) -> float:
    return x[0] + x[1]
