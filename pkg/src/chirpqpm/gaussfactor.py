"""Truncated weighted Gauss sums, a trial-divisor factoring scan, and a mapping that
realizes a Gauss sum as the layer sum of an index-chirped stack.

    S_N(tau) = sum_{m=-M}^{M} W_m exp(2 pi i (m + m^2/N) tau)

The stack realization uses 2M+1 equal layers of length l.  Layer j = m + M picks up
the quadratic phase ``alpha j^2 l^2 / 2`` and the linear phase ``-j dk l``, so choosing

    alpha l^2 / 2 = 2 pi tau' / N            (tau' = tau reduced mod N)
    dk l         = -2 pi tau (1 - 2M/N)      (mod 2 pi)

reproduces every term up to a common phase and the per-layer factor sinc(x_j), with
``x_j = (dk - alpha j l) l / 2``.  Note that ``x_j`` depends on l only through the
products above, so the layer length cannot shrink it; the attainable
``delta = max_j |x_j|`` is fixed by (N, M, tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accurate as acc
from . import engine
from .model import LayerSequence

__all__ = [
    "GaussSumSpec",
    "FactorScanResult",
    "SpdcGaussMapping",
    "gauss_sum",
    "factor_amplitude",
    "factor_magnitude",
    "factor_scan",
    "divisors",
    "map_spdc_to_gauss",
    "realize",
]

THRESHOLD = 1 / math.sqrt(2)


@dataclass(frozen=True)
class GaussSumSpec:
    """``S_N(tau)`` with ``2M+1`` weights; ``weights=None`` means uniform ``1/(2M+1)``."""

    n_under_test: int
    truncation: int
    argument: float = 0.0
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.n_under_test) != self.n_under_test or self.n_under_test < 1:
            raise ValueError(f"n_under_test must be a positive integer, got {self.n_under_test!r}")
        if int(self.truncation) != self.truncation or self.truncation < 0:
            raise ValueError(f"truncation must be a nonnegative integer, got {self.truncation!r}")
        if not math.isfinite(self.argument):
            raise ValueError("argument must be finite")
        if self.weights is not None:
            w = self.weights
            if len(w) != 2 * self.truncation + 1:
                raise ValueError(f"need {2 * self.truncation + 1} weights, got {len(w)}")
            if any(not math.isfinite(x) or x < 0 for x in w):
                raise ValueError("weights must be finite and nonnegative")

    @property
    def m(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)

    @property
    def w(self) -> np.ndarray:
        if self.weights is None:
            return np.full(2 * self.truncation + 1, 1.0 / (2 * self.truncation + 1))
        return np.asarray(self.weights, dtype=float)


def _frac_mul(k, x):
    """``k*x mod 1`` in [-1/2, 1/2] for integer arrays ``k`` and a float ``x``."""
    p, e = acc.two_prod(np.asarray(k, dtype=float), x)
    r = p - np.round(p)
    return r + e


def _turns(g: GaussSumSpec) -> np.ndarray:
    """``(m + m^2/N) tau mod 1`` per term."""
    m, n, tau = g.m, int(g.n_under_test), g.argument
    if float(tau).is_integer():
        t = int(tau)
        num = np.array([((mi * n + mi * mi) * t) % n for mi in m.tolist()], dtype=float)
        return num / n
    return _frac_mul(m, tau) + _frac_mul(m * m, tau / n)


def gauss_sum(g: GaussSumSpec) -> complex:
    """Direct evaluation with each phase reduced mod 2*pi before the exponential."""
    ph = 2 * np.pi * _turns(g)
    w = g.w
    return complex(acc.csum(w * np.cos(ph)), acc.csum(w * np.sin(ph)))


def _reciprocal_sum(n: int, ell: int, M: int) -> np.ndarray:
    m = np.arange(M + 1, dtype=np.int64)
    r = (m * m % ell) * (n % ell) % ell
    ph = 2 * np.pi * r / ell
    return complex(np.cos(ph).sum(), np.sin(ph).sum()) / (M + 1)


def factor_amplitude(n: int, ell: int, M: int) -> float:
    """``|A|`` with ``A = (1/(M+1)) sum_{m=0}^{M} exp(2 pi i m^2 n / ell)``."""
    _check_trial(n, ell, M)
    return min(abs(_reciprocal_sum(n, ell, M)), 1.0)


def factor_magnitude(n: int, ell: int, M: int) -> float:
    """Detection signal ``|A|^2`` in [0, 1]; exactly 1 when ``ell`` divides ``n``.

    The squared modulus is what separates divisors from non-divisors at the 1/sqrt(2)
    level: ``|A|`` alone stays above it for many ``ell = 0 mod 4`` at moderate M.
    """
    _check_trial(n, ell, M)
    if n % ell == 0:
        return 1.0
    return min(abs(_reciprocal_sum(n, ell, M)) ** 2, 1.0)


def _check_trial(n, ell, M):
    if n < 1 or ell < 2 or M < 1:
        raise ValueError(f"need n >= 1, ell >= 2, M >= 1 (got n={n}, ell={ell}, M={M})")


def _magnitudes(n: int, ells: np.ndarray, M: int) -> np.ndarray:
    """Vectorized ``factor_magnitude`` over trial divisors, integer phase arithmetic."""
    m = np.arange(M + 1, dtype=np.int64)[None, :]
    e = ells.astype(np.int64)[:, None]
    r = (m * m % e) * (n % e) % e
    ph = 2 * np.pi * r / e
    A = np.abs(np.cos(ph).sum(axis=1) + 1j * np.sin(ph).sum(axis=1)) / (M + 1)
    out = np.minimum(A * A, 1.0)
    out[n % ells == 0] = 1.0
    return out


@dataclass(frozen=True)
class FactorScanResult:
    n: int
    truncation: int
    threshold: float
    candidates: tuple[tuple[int, float], ...]
    accepted: tuple[int, ...]


def factor_scan(n: int, M: int, threshold: float = THRESHOLD) -> FactorScanResult:
    """Evaluate trial divisors 2..isqrt(n); accept those above ``threshold`` and their cofactors.

    A prime ``n`` yields an empty accepted set.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if M < 1:
        raise ValueError("M must be >= 1")
    n = int(n)
    ells = np.arange(2, math.isqrt(n) + 1)
    mags = _magnitudes(n, ells, M) if ells.size else np.empty(0)
    acc_set = set()
    for ell, v in zip(ells.tolist(), mags.tolist()):
        if v > threshold:
            acc_set.add(ell)
            acc_set.add(n // ell)
    cands = tuple(zip(ells.tolist(), mags.tolist()))
    return FactorScanResult(n, M, threshold, cands, tuple(sorted(acc_set)))


def divisors(n: int) -> set[int]:
    """Nontrivial divisors of ``n`` by trial division."""
    return {d for d in range(2, n) if n % d == 0}


@dataclass(frozen=True)
class SpdcGaussMapping:
    """Stack parameters realizing a Gauss sum.

    ``delta`` is the achieved ``max_j |x_j|``; ``global_phase`` is the phase the layer sum
    carries relative to ``(2M+1) S_N(tau)`` (after dividing by the layer length).
    """

    alpha: float
    dk: float
    layer_len: float
    delta: float
    global_phase: float
    target: GaussSumSpec


def _min_delta(g: GaussSumSpec):
    n, M, tau = g.n_under_test, g.truncation, g.argument
    tau_r = tau - n * round(tau / n)
    q = 2 * np.pi * tau_r / n  # alpha l^2 / 2
    theta = -2 * np.pi * _frac_mul(np.array([1]), tau * (1 - 2 * M / n))[0]
    centre = 2 * q * M
    theta += 2 * np.pi * round((centre - theta) / (2 * np.pi))
    j = np.arange(2 * M + 1)
    delta = float(np.max(np.abs(theta - 2 * q * j)) / 2)
    return q, theta, delta


def map_spdc_to_gauss(target: GaussSumSpec, l: float, delta: float = 0.05) -> SpdcGaussMapping:
    """Chirp ``alpha`` (1/um^2) and mismatch ``dk`` (1/um) whose layer sum reproduces ``target``.

    Raises ``ValueError`` when the attainable ``max_j |x_j|`` exceeds ``delta``; the message
    reports the minimal attainable value, which no choice of ``l`` changes.
    """
    if not (math.isfinite(l) and l > 0):
        raise ValueError("layer length must be > 0")
    q, theta, achieved = _min_delta(target)
    if achieved > delta:
        raise ValueError(f"requested delta={delta:g} infeasible for N={target.n_under_test}, "
                         f"M={target.truncation}, tau={target.argument:g}; minimal attainable "
                         f"delta is {achieved:.6g} for every layer length")
    n, M, tau = target.n_under_test, target.truncation, target.argument
    g = -theta / 2 - 2 * np.pi * float(_frac_mul(np.array([1]), tau * (M * M / n - M))[0])
    return SpdcGaussMapping(2 * q / l ** 2, theta / l, l, achieved, float(acc.wrap(g)), target)


def realize(mp: SpdcGaussMapping) -> complex:
    """Engine layer sum for the mapped stack, divided by ``l`` and with the global phase removed.

    Layer ``j`` carries ``chi_j = (2M+1) W_j`` so the result approximates ``(2M+1) S_N(tau)``.
    """
    g = mp.target
    n_layers = 2 * g.truncation + 1
    j = np.arange(n_layers)
    chis = n_layers * g.w
    seq = LayerSequence.from_arrays(np.full(n_layers, mp.layer_len), chis, -mp.alpha * j * mp.layer_len)
    F = complex(engine.amplitude_general(seq, mp.dk).value)
    return F / mp.layer_len * complex(math.cos(mp.global_phase), -math.sin(mp.global_phase))
