"""Two-photon phase-matching amplitudes and normalized spectral densities.

All functions are vectorized over the mismatch / detuning argument and return
a numpy scalar-or-array of the same shape.  Densities are normalized as
``|F|**2 / (L**2 * chi0**2)``; the pump envelope and quantization prefactors
are dropped.

Paths
-----
general sum    ``F = sum_m l_m chi_m exp(-i(phi_m + dk_m l_m/2)) sinc(dk_m l_m/2)``
pairwise       ``|F|^2 = sum_m |F_m|^2 + 2 Re sum_{m1<m2} F_m1 F_m2*`` (verification, O(N^2))
photonic       equal layers, mismatch ``dk - alpha (m-1) l`` (Gauss-sum form, and its squared
               double-sum form)
aperiodic      alternating-sign layers ``l0 + (m-1) zeta`` (Gauss-sum form with ``1/dk`` and its
               squared double-sum form; series fallback near ``dk = 0``)
periodic       Dirichlet-kernel form of the ``zeta = 0`` aperiodic stack
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _accurate as acc
from .model import AperiodicPolingSpec, DispersionParams, LayerSequence, PhotonicChirpSpec

__all__ = [
    "AmplitudeResult",
    "SERIES_THRESHOLD",
    "phase_mismatch",
    "amplitude_general",
    "density_general",
    "amplitude_photonic",
    "density_photonic",
    "amplitude_aperiodic",
    "density_aperiodic",
    "density_periodic",
    "normalization",
]

# |dk| * l_max below this switches the aperiodic forms to the series limit
SERIES_THRESHOLD = 1e-6
# target element count per block in the O(N^2) paths
_PAIR_BLOCK = 1 << 20


@dataclass(frozen=True)
class AmplitudeResult:
    """Complex amplitude ``value`` with optional per-layer partials.

    ``partials[..., m]`` is ``l_m chi_m F_m`` so that ``value == partials.sum(-1)``;
    ``phases[..., m]`` is the accumulated phase ``phi_m`` entering layer m.
    """

    value: complex | np.ndarray
    partials: np.ndarray | None = None
    phases: np.ndarray | None = None


def _expi(phase):
    """``exp(-i*phase)`` for an already reduced phase."""
    return np.cos(phase) - 1j * np.sin(phase)


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def _out(arr):
    return arr[()] if isinstance(arr, np.ndarray) and arr.ndim == 0 else arr


def phase_mismatch(omega_over_c, d: DispersionParams):
    """``dk0 + B * Omega/c``."""
    return _out(d.dk0 + d.B * np.asarray(omega_over_c, dtype=float))


def normalization(seq: LayerSequence) -> float:
    return (seq.total_length * seq.chi_ref) ** 2


def _pair_indices(n):
    return np.triu_indices(n, 1)


def _blocked(fn, x, n_pairs):
    """Apply ``fn`` to fixed-size blocks of the flattened argument ``x``.

    Block size depends only on the pair count, so results do not depend on how
    callers chunk their grids.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    block = max(1, _PAIR_BLOCK // max(n_pairs, 1))
    out = np.empty(flat.shape, dtype=float)
    for s in range(0, flat.size, block):
        out[s:s + block] = fn(flat[s:s + block])
    return _out(out.reshape(x.shape))


def _dd_array(values):
    pairs = [acc.dd(v) for v in values]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


# ---------------------------------------------------------------- general layer sum


@lru_cache(maxsize=64)
def _general_geometry(seq: LayerSequence):
    """Layer midpoints as double-doubles and the dk-independent phase of each layer, reduced."""
    lengths = seq.lengths
    offs = seq.dk_offsets
    zmid, const = [], []
    z = Fraction(0)
    offset_phase = Fraction(0)
    for l, o in zip(lengths, offs):
        ql, qo = Fraction(l), Fraction(o)
        zmid.append(z + ql / 2)
        const.append(acc.const_mod_2pi(offset_phase + qo * ql / 2))
        z += ql
        offset_phase += ql * qo
    zh, zl = _dd_array(zmid)
    starts = [Fraction(0)]
    for l in lengths[:-1]:
        starts.append(starts[-1] + Fraction(l))
    sh, sl = _dd_array(starts)
    return lengths, seq.chis, offs, zh, zl, np.array(const), sh, sl


def _general_terms(seq: LayerSequence, dk, want_phi=False):
    """Real weights ``a_m`` and reduced phases ``theta_m`` with ``G_m = a_m exp(-i theta_m)``."""
    lengths, chis, offs, zh, zl, const, sh, sl = _general_geometry(seq)
    dk = np.asarray(dk, dtype=float)[..., None]
    theta = acc.dd_mulmod(dk, zh, zl) + const
    a = lengths * chis * _sinc((dk + offs) * lengths / 2)
    phi = None
    if want_phi:
        # phi_m = dk * z_m + sum_{n<m} l_n off_n
        offset_phase = np.concatenate(([0.0], np.cumsum(lengths * offs)[:-1]))
        phi = acc.dd_mulmod(dk, sh, sl) + offset_phase
    return a, theta, phi


def amplitude_general(seq: LayerSequence, dk, partials: bool = False) -> AmplitudeResult:
    """Layer-sum amplitude; ``sinc(0)`` is exactly 1."""
    a, theta, phi = _general_terms(seq, dk, want_phi=partials)
    terms = a * _expi(theta)
    value = _out(acc.csum(terms))
    if partials:
        return AmplitudeResult(value, terms, phi)
    return AmplitudeResult(value)


def density_general(seq: LayerSequence, dk):
    """Normalized density from the expanded pairwise sum over layers."""
    n = len(seq)
    i1, i2 = _pair_indices(n)
    norm = normalization(seq)

    def block(dkb):
        a, theta, _ = _general_terms(seq, dkb)
        # Re(G1 G2*) = a1 a2 cos(theta1 - theta2)
        cross = 2 * a[:, i1] * a[:, i2] * np.cos(theta[:, i1] - theta[:, i2])
        return acc.csum(np.concatenate([a * a, cross], axis=-1)) / norm

    return _blocked(block, dk, n * (n - 1) // 2)


# ---------------------------------------------------------------- photonic stack


@lru_cache(maxsize=64)
def _photonic_geometry(spec: PhotonicChirpSpec, pairs: bool):
    n = spec.n_layers
    ql, qa = Fraction(spec.layer_len), Fraction(spec.alpha)
    quad = np.array([acc.const_mod_2pi(qa * j * j * ql * ql / 2) for j in range(n)])
    pair_quad = None
    if pairs:
        i1, i2 = _pair_indices(n)
        # alpha * p * (m - 1 + p/2) * l^2 with m - 1 = i1, i.e. quad[i2] - quad[i1];
        # both ends are reduced exactly, so the difference is good to a few ulp of pi
        pair_quad = quad[i2] - quad[i1]
    return quad, pair_quad


def _photonic_amplitude_dk(spec: PhotonicChirpSpec, dk):
    dk = np.asarray(dk, dtype=float)[..., None]
    l, alpha = spec.layer_len, spec.alpha
    m = np.arange(1, spec.n_layers + 1)
    j = m - 1
    quad, _ = _photonic_geometry(spec, False)
    phase = acc.mulmod(dk, l, m) - quad
    terms = _expi(phase) * _sinc((dk - alpha * j * l) * l / 2)
    pref = spec.layer_len * spec.chi0 * np.conj(_expi(acc.mulmod(dk[..., 0], l / 2)))
    return pref * acc.csum(terms), terms


def amplitude_photonic(spec: PhotonicChirpSpec, d: DispersionParams, omega_over_c,
                       partials: bool = False) -> AmplitudeResult:
    """Gauss-sum amplitude of the index-chirped photonic stack.

    ``partials`` are the bracketed Gauss-sum terms (without the ``l*chi0*exp(i l dk/2)``
    prefactor).
    """
    value, terms = _photonic_amplitude_dk(spec, phase_mismatch(omega_over_c, d))
    return AmplitudeResult(_out(value), terms if partials else None)


def density_photonic(spec: PhotonicChirpSpec, d: DispersionParams, omega_over_c):
    """Normalized density of the photonic stack as the sinc-sinc-cos double sum."""
    n, l, alpha = spec.n_layers, spec.layer_len, spec.alpha
    j = np.arange(n)
    i1, i2 = _pair_indices(n)
    p = (i2 - i1).astype(float)
    _, pair_quad = _photonic_geometry(spec, True)

    def block(dkb):
        dkb = dkb[:, None]
        s = _sinc((dkb - alpha * j * l) * l / 2)
        arg = acc.mulmod(dkb, l, p) - pair_quad
        cross = 2 * s[:, i1] * s[:, i2] * np.cos(arg)
        return acc.csum(np.concatenate([s * s, cross], axis=-1)) / (n * n)

    return _blocked(block, phase_mismatch(omega_over_c, d), n * (n - 1) // 2)


# ---------------------------------------------------------------- aperiodic stack


@lru_cache(maxsize=64)
def _aperiodic_geometry(spec: AperiodicPolingSpec, pairs: bool):
    n = spec.n_layers
    q0, qz = Fraction(spec.l0), Fraction(spec.zeta)
    # m*l0 + (m-1)^2 zeta/2
    gh, gl = _dd_array([m * q0 + (m - 1) ** 2 * qz / 2 for m in range(1, n + 1)])
    span = None
    if pairs:
        i1, i2 = _pair_indices(n)
        # p*(l0 + zeta*(2m + p - 2)/2) with m - 1 = i1 is g[i2] - g[i1]; the leading
        # difference is formed error-free and renormalized to a double-double
        hi, err = acc.two_sum(gh[i2], -gh[i1])
        lo = err + (gl[i2] - gl[i1])
        top = hi + lo
        span = (top, lo - (top - hi))
    return gh, gl, span


def _half_sin_over_dk(dk, lengths, series: np.ndarray):
    """``sin(dk*l/2)/dk``, switching to ``(l/2)(1 - (dk*l/2)**2/6)`` where ``series`` is set."""
    x = acc.mulmod(dk, lengths / 2)
    safe = np.where(series, 1.0, dk)
    direct = np.sin(x) / safe
    xs = dk * lengths / 2
    return np.where(series, lengths / 2 * (1 - xs * xs / 6), direct)


def amplitude_aperiodic(spec: AperiodicPolingSpec, dk, series_threshold: float = SERIES_THRESHOLD,
                        partials: bool = False) -> AmplitudeResult:
    """Gauss-sum amplitude of the alternating-sign stack with chirped layer lengths.

    Written as ``(2 chi0/dk) exp(-i dk l0/2) sum_m (-1)^m exp(-i dk (m l0 + (m-1)^2 zeta/2))
    sin(dk l_m/2)``.  For ``|dk| * l_max < series_threshold`` the removable ``1/dk``
    singularity is replaced by its series; at ``dk = 0`` the value is
    ``chi0 * sum_m (-1)**m * l_m``.
    """
    dk = np.asarray(dk, dtype=float)[..., None]
    n = spec.n_layers
    m = np.arange(1, n + 1)
    lengths = spec.lengths
    series = np.abs(dk) * float(lengths.max()) < series_threshold
    q = _half_sin_over_dk(dk, lengths, series)
    gh, gl, _ = _aperiodic_geometry(spec, False)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    terms = sign * _expi(acc.dd_mulmod(dk, gh, gl)) * q
    value = 2 * spec.chi0 * _expi(acc.mulmod(dk[..., 0], spec.l0 / 2)) * acc.csum(terms)
    return AmplitudeResult(_out(value), terms if partials else None)


def density_aperiodic(spec: AperiodicPolingSpec, d: DispersionParams, omega_over_c,
                      series_threshold: float = SERIES_THRESHOLD):
    """Normalized density of the aperiodic stack as the sin-sin-cos double sum over ``dk^2``."""
    n = spec.n_layers
    lengths = spec.lengths
    lmax = float(lengths.max())
    i1, i2 = _pair_indices(n)
    p = i2 - i1
    psign = np.where(p % 2 == 0, 1.0, -1.0)
    _, _, (sh, sl) = _aperiodic_geometry(spec, True)
    norm = spec.total_length ** 2

    def pair_sum(v, dkb):
        arg = acc.dd_mulmod(dkb, sh, sl)
        cross = 2 * psign * v[:, i1] * v[:, i2] * np.cos(arg)
        return acc.csum(np.concatenate([v * v, cross], axis=-1))

    def block(dkb):
        dkb = dkb[:, None]
        series = np.abs(dkb[:, 0]) * lmax < series_threshold
        out = np.empty(dkb.shape[0])
        if (~series).any():
            dd = dkb[~series]
            s = np.sin(acc.mulmod(dd, lengths / 2))
            out[~series] = 4 * pair_sum(s, dd) / (dd[:, 0] ** 2)
        if series.any():
            dd = dkb[series]
            q = _half_sin_over_dk(dd, lengths, np.ones(dd.shape[:1] + lengths.shape, dtype=bool))
            out[series] = 4 * pair_sum(q, dd)
        return out / norm

    return _blocked(block, phase_mismatch(omega_over_c, d), n * (n - 1) // 2)


# ---------------------------------------------------------------- periodic stack


def density_periodic(n_layers: int, l0: float, d: DispersionParams, omega_over_c,
                     approx: bool = False):
    """Normalized density of N alternating layers of length ``l0``.

    Exact form is the Dirichlet ratio ``sin^2(N x)/sin^2(x)`` (``x`` measured from the
    grating-matched point ``dk = pi/l0``) times ``sinc^2(dk*l0/2)``, divided by N^2.
    ``approx=True`` drops the Dirichlet ratio, keeping the ``N^2 sinc^2`` envelope.
    """
    if n_layers < 1 or l0 <= 0:
        raise ValueError("need n_layers >= 1 and l0 > 0")
    dk = np.asarray(phase_mismatch(omega_over_c, d), dtype=float)
    env = _sinc(dk * l0 / 2) ** 2
    if approx:
        return _out(env)
    # x = (dk - pi/l0) l0/2 = dk l0/2 - pi/2; sin(Nx)/sin(x) has period pi up to a sign
    x = acc.mulmod(dk, l0 / 2) - math.pi / 2
    y = x - math.pi * np.round(x / math.pi)
    small = np.abs(y) < 1e-8
    ys = np.where(small, 1.0, y)
    ratio = np.where(small, 1.0 - (n_layers ** 2 - 1) * y * y / 6,
                     np.sin(n_layers * ys) / (n_layers * np.sin(ys)))
    return _out(ratio * ratio * env)
