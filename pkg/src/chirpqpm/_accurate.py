"""Float64 helpers for large phases modulo 2*pi and for sums with heavy cancellation.

Products are formed with Dekker's error-free transformation and reduced with a
three-part Cody-Waite split of 2*pi, so a phase of a few thousand radians keeps
an absolute error near machine epsilon instead of ``eps * |phase|``.
``csum`` is a cascaded compensated summation (pairwise TwoSum with an error
accumulator) for the alternating double sums.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

TWO_PI = 6.283185307179586
# 2*pi = _C1 + _C2 + _C3; _C1 and _C2 carry 30 significant bits so k*_C1, k*_C2 are exact for |k| < 2**23
_C1 = 6.283185303211212
_C2 = 3.9683743166540886e-09
_C3 = 2.068073192717642e-18
_KMAX = 2.0 ** 22
_SPLIT = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """``(p, e)`` with ``p = fl(a*b)`` and ``a*b = p + e`` exactly."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def reduce(hi, lo=0.0):
    """``(hi + lo) mod 2*pi`` into ``[-pi, pi]``, for ``|lo|`` small relative to ``hi``."""
    hi = np.asarray(hi, dtype=float)
    k = np.round(hi / TWO_PI)
    if np.any(np.abs(k) >= _KMAX):
        return np.remainder(hi + lo + np.pi, TWO_PI) - np.pi
    r = ((hi - k * _C1) - k * _C2) - k * _C3
    return r + lo


def mulmod(a, b, k=None):
    """``k*a*b mod 2*pi`` with ``k`` an optional integer-valued factor, ``|k| < 2**26``."""
    h, e = two_prod(a, b)
    if k is None:
        return reduce(h, e)
    k = np.asarray(k, dtype=float)
    # k has few bits, so only h needs splitting and k*hh, k*hl are exact
    hh, hl = _split(h)
    p = k * h
    return reduce(p, ((k * hh - p) + k * hl) + k * e)


def wrap(phase):
    """Final reduction of a sum of already reduced phases."""
    return np.remainder(phase + np.pi, TWO_PI) - np.pi


# 2*pi to 60 digits; reduction of exact rationals loses nothing at the phases used here
TWO_PI_Q = Fraction("6.283185307179586476925286766559005768394338798750211641949889")


def q(x) -> Fraction:
    """Exact rational value of a float (or int)."""
    return Fraction(x)


def const_mod_2pi(x: Fraction) -> float:
    """Exact rational phase reduced into ``[-pi, pi]`` and rounded once."""
    k = round(x / TWO_PI_Q)
    return float(x - k * TWO_PI_Q)


def dd(x: Fraction) -> tuple[float, float]:
    """Double-double ``(hi, lo)`` with ``hi + lo`` equal to ``x`` to ~1e-32 relative."""
    hi = float(x)
    return hi, float(x - Fraction(hi))


def dd_mulmod(a, hi, lo, k=None):
    """``k * a * (hi + lo) mod 2*pi`` for a float array ``a`` and a double-double factor."""
    base = mulmod(a, hi, k)
    a = np.asarray(a, dtype=float)
    tail = a * lo if k is None else np.asarray(k, dtype=float) * a * lo
    return base + tail


def two_sum(a, b):
    """``(s, e)`` with ``s = fl(a+b)`` and ``a+b = s + e`` exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def csum(x, axis=-1):
    """Compensated sum along ``axis``; result is as if computed in about twice the precision."""
    x = np.moveaxis(np.asarray(x), axis, -1)
    if np.iscomplexobj(x):
        return csum(x.real) + 1j * csum(x.imag)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-1])
    err = np.zeros(x.shape[:-1])
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            x = np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
        s, e = two_sum(x[..., 0::2], x[..., 1::2])
        err = err + e.sum(axis=-1)
        x = s
    return x[..., 0] + err
