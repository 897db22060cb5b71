"""Spectrum sampling, wavelength mapping, peak prediction/detection and bandwidth."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.optimize import brentq
from scipy.signal import peak_prominences

from . import engine
from .model import (AperiodicPolingSpec, DispersionParams, LayerSequence, PeriodicPolingSpec,
                    PhotonicChirpSpec, build_aperiodic, build_periodic, build_photonic)

__all__ = [
    "FrequencyGrid",
    "SpectrumResult",
    "Peak",
    "PeakSet",
    "Bandwidth",
    "METHODS",
    "DEFAULT_GRID",
    "SINC2_HALF_POWER_X",
    "omega_to_signal_wavelength",
    "signal_wavelength_to_omega",
    "build_layers",
    "evaluate_density",
    "evaluate_spectrum",
    "form_densities",
    "predict_peaks",
    "detect_peaks",
    "predict_support_aperiodic",
    "dilate",
    "auto_grid",
    "superlevel_intervals",
    "bandwidth",
    "max_rel_dev",
]

Structure = Union[PhotonicChirpSpec, AperiodicPolingSpec, PeriodicPolingSpec, LayerSequence]

METHODS = ("closed_form", "general_sum", "double_sum")
# grid points per evaluation block; fixed so output is independent of the thread count
BLOCK = 1024

# sinc(x)^2 = 1/2
SINC2_HALF_POWER_X = brentq(lambda x: (math.sin(x) / x) ** 2 - 0.5, 1.0, 2.0, xtol=1e-15)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid in Omega/c (1/um)."""

    min: float
    max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.min >= self.max:
            raise ValueError(f"grid needs min < max, got [{self.min}, {self.max}]")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"grid needs n_points >= 2, got {self.n_points}")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.min, self.max, int(self.n_points))

    @property
    def step(self) -> float:
        return (self.max - self.min) / (self.n_points - 1)


DEFAULT_GRID = FrequencyGrid(-0.35, 0.35, 8001)


def omega_to_signal_wavelength(omega_over_c, lambda0: float):
    """Signal wavelength for detuning Omega (signal at omega0/2 - Omega)."""
    w = np.asarray(omega_over_c, dtype=float)
    r = w * lambda0 / math.pi
    if np.any(r >= 1) or not np.all(np.isfinite(r)):
        raise ValueError("Omega/c must stay below pi/lambda0 (signal frequency must be positive)")
    out = 2 * lambda0 / (1 - r)
    return out[()] if out.ndim == 0 else out


def signal_wavelength_to_omega(wavelength, lambda0: float):
    lam = np.asarray(wavelength, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("wavelength must be positive")
    out = math.pi / lambda0 * (1 - 2 * lambda0 / lam)
    return out[()] if out.ndim == 0 else out


@dataclass
class SpectrumResult:
    grid: FrequencyGrid
    density: np.ndarray
    signal_wavelength: np.ndarray
    lambda0: float
    structure: dict = field(default_factory=dict)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.points


def build_layers(spec: Structure) -> LayerSequence:
    if isinstance(spec, LayerSequence):
        return spec
    if isinstance(spec, PhotonicChirpSpec):
        return build_photonic(spec)
    if isinstance(spec, PeriodicPolingSpec):
        return build_periodic(spec)
    if isinstance(spec, AperiodicPolingSpec):
        return build_aperiodic(spec)
    raise TypeError(f"unsupported structure {type(spec).__name__}")


def describe(spec: Structure) -> dict:
    if isinstance(spec, LayerSequence):
        return {"kind": "layers", "n_layers": len(spec), "total_length": spec.total_length}
    kind = {PhotonicChirpSpec: "photonic", AperiodicPolingSpec: "aperiodic",
            PeriodicPolingSpec: "periodic"}[type(spec)]
    out = {"kind": kind}
    out.update({k: getattr(spec, k) for k in spec.__dataclass_fields__})
    return out


def evaluate_density(spec: Structure, d: DispersionParams, omega_over_c, method: str = "closed_form"):
    """Normalized density at the given detunings via the selected engine path."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    w = np.asarray(omega_over_c, dtype=float)
    if method == "general_sum" or isinstance(spec, LayerSequence) and method == "closed_form":
        seq = build_layers(spec)
        F = engine.amplitude_general(seq, engine.phase_mismatch(w, d)).value
        return np.abs(F) ** 2 / engine.normalization(seq)
    if method == "double_sum":
        if isinstance(spec, PhotonicChirpSpec):
            return engine.density_photonic(spec, d, w)
        if isinstance(spec, PeriodicPolingSpec):
            return engine.density_aperiodic(spec.as_aperiodic(), d, w)
        if isinstance(spec, AperiodicPolingSpec):
            return engine.density_aperiodic(spec, d, w)
        return engine.density_general(spec, engine.phase_mismatch(w, d))
    if isinstance(spec, PhotonicChirpSpec):
        F = engine.amplitude_photonic(spec, d, w).value
        return np.abs(F) ** 2 / (spec.total_length * spec.chi0) ** 2
    if isinstance(spec, PeriodicPolingSpec):
        return engine.density_periodic(spec.n_layers, spec.l0, d, w)
    F = engine.amplitude_aperiodic(spec, engine.phase_mismatch(w, d)).value
    return np.abs(F) ** 2 / (spec.total_length * spec.chi0) ** 2


def form_densities(spec: Structure, d: DispersionParams, omega_over_c) -> dict[str, np.ndarray]:
    """Every independent evaluation path available for ``spec``, keyed by form name.

    ``layer_sum`` and ``pair_sum`` apply to any stack; ``gauss`` and ``gauss_pairs``
    are the structure-specific closed form and its squared double sum; ``periodic``
    is the Dirichlet-kernel form for equal alternating layers.
    """
    w = np.asarray(omega_over_c, dtype=float)
    seq = build_layers(spec)
    dk = engine.phase_mismatch(w, d)
    norm = engine.normalization(seq)
    out = {
        "layer_sum": np.abs(engine.amplitude_general(seq, dk).value) ** 2 / norm,
        "pair_sum": engine.density_general(seq, dk),
    }
    if isinstance(spec, PhotonicChirpSpec):
        out["gauss"] = np.abs(engine.amplitude_photonic(spec, d, w).value) ** 2 / norm
        out["gauss_pairs"] = engine.density_photonic(spec, d, w)
    elif isinstance(spec, (AperiodicPolingSpec, PeriodicPolingSpec)):
        ap = spec.as_aperiodic() if isinstance(spec, PeriodicPolingSpec) else spec
        out["gauss"] = np.abs(engine.amplitude_aperiodic(ap, dk).value) ** 2 / norm
        out["gauss_pairs"] = engine.density_aperiodic(ap, d, w)
        if ap.zeta == 0:
            out["periodic"] = engine.density_periodic(ap.n_layers, ap.l0, d, w)
    return {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in out.items()}


def _resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


def evaluate_spectrum(spec: Structure, d: DispersionParams, grid: FrequencyGrid = DEFAULT_GRID,
                      method: str = "closed_form", threads: int | None = 1) -> SpectrumResult:
    """Sample the normalized density over ``grid``.

    Points are evaluated in fixed blocks of ``BLOCK``; ``threads`` only changes how
    blocks are scheduled, never the numbers.
    """
    w = grid.points
    wavelengths = omega_to_signal_wavelength(w, d.lambda0)
    blocks = [w[s:s + BLOCK] for s in range(0, w.size, BLOCK)]
    n_threads = min(_resolve_threads(threads), len(blocks))
    if n_threads == 1:
        parts = [evaluate_density(spec, d, b, method) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(lambda b: evaluate_density(spec, d, b, method), blocks))
    density = np.concatenate([np.atleast_1d(p) for p in parts])
    return SpectrumResult(grid, density, np.asarray(wavelengths), d.lambda0, describe(spec))


@dataclass(frozen=True)
class Peak:
    omega_over_c: float
    wavelength: float
    height: float
    width: float


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...]
    resolved: bool

    def __len__(self) -> int:
        return len(self.peaks)

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.omega_over_c for p in self.peaks])

    @property
    def widths(self) -> np.ndarray:
        return np.array([p.width for p in self.peaks])


def _resolved(positions: np.ndarray, widths: np.ndarray) -> bool:
    """Lines are resolved when each adjacent pair is farther apart than their mean width."""
    if len(positions) <= 1:
        return True
    order = np.argsort(positions)
    pos, wid = positions[order], widths[order]
    spacing = np.diff(pos)
    return bool(np.all((wid[:-1] + wid[1:]) / 2 < spacing))


def predict_peaks(spec: PhotonicChirpSpec, d: DispersionParams) -> PeakSet:
    """Line positions ``Omega_m/c = (alpha (m-1) l - dk0)/B`` of the photonic stack.

    Each line is the ``sinc^2`` of one phase-matched layer, so its width is the
    half-power width of that sinc: ``4 x_half / (|B| l)`` in Omega/c.  Heights are the
    density evaluated at the predicted positions.
    """
    l = spec.layer_len
    m = np.arange(1, spec.n_layers + 1)
    pos = (spec.alpha * (m - 1) * l - d.dk0) / d.B
    width = 4 * SINC2_HALF_POWER_X / (abs(d.B) * l)
    heights = np.atleast_1d(evaluate_density(spec, d, pos))
    with np.errstate(divide="ignore"):
        lam = [omega_to_signal_wavelength(p, d.lambda0) if p * d.lambda0 / math.pi < 1 else math.inf
               for p in pos]
    peaks = tuple(Peak(float(p), float(lw), float(h), width) for p, lw, h in zip(pos, lam, heights))
    return PeakSet(peaks, _resolved(pos, np.full(pos.shape, width)))


def _crossing(x, y, i, j, level):
    return x[i] + (level - y[i]) / (y[j] - y[i]) * (x[j] - x[i])


def detect_peaks(sr: SpectrumResult, rel_threshold: float = 0.1,
                 min_prominence: float = 0.0) -> PeakSet:
    """Strict local maxima above ``rel_threshold * max`` with parabolic refinement.

    ``min_prominence`` (fraction of the global max, default off) drops maxima whose
    topographic prominence is smaller, which merges interference ripple on a line top.

    Widths are full widths at half of each peak's height, with crossings found by
    linear interpolation (clipped at the grid edge).  An empty spectrum raises;
    a spectrum with no strict maxima (e.g. identically zero) returns an empty set.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    y = np.asarray(sr.density, dtype=float)
    x = sr.omega
    if y.size == 0:
        raise ValueError("empty spectrum")
    top = float(y.max())
    if top <= 0 or y.size < 3:
        return PeakSet((), True)
    interior = np.arange(1, y.size - 1)
    is_max = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] >= rel_threshold * top)
    cand = interior[is_max]
    if min_prominence > 0 and cand.size:
        prom = peak_prominences(y, cand)[0]
        cand = cand[prom >= min_prominence * top]
    peaks = []
    h = sr.grid.step
    for i in cand:
        ym, y0, yp = y[i - 1], y[i], y[i + 1]
        denom = ym - 2 * y0 + yp
        delta = 0.5 * (ym - yp) / denom if denom != 0 else 0.0
        pos = x[i] + delta * h
        height = y0 - 0.25 * (ym - yp) * delta
        half = height / 2
        k = i
        while k > 0 and y[k] >= half:
            k -= 1
        left = _crossing(x, y, k, k + 1, half) if y[k] < half else x[0]
        k = i
        while k < y.size - 1 and y[k] >= half:
            k += 1
        right = _crossing(x, y, k - 1, k, half) if y[k] < half else x[-1]
        peaks.append(Peak(float(pos), float(omega_to_signal_wavelength(pos, sr.lambda0)),
                          float(height), float(right - left)))
    peaks = tuple(peaks)
    return PeakSet(peaks, _resolved(np.array([p.omega_over_c for p in peaks]),
                                    np.array([p.width for p in peaks])))


def predict_support_aperiodic(spec: AperiodicPolingSpec | PeriodicPolingSpec,
                              d: DispersionParams) -> tuple[float, float]:
    """Omega/c interval where ``dk(Omega)`` lies in the grating band ``[pi/l_max, pi/l_min]``.

    Layer lengths follow the engine convention ``l0 + (m-1) zeta``.
    """
    if isinstance(spec, PeriodicPolingSpec):
        spec = spec.as_aperiodic()
    lengths = spec.lengths
    band = np.array([math.pi / lengths.max(), math.pi / lengths.min()])
    w = (band - d.dk0) / d.B
    return float(w.min()), float(w.max())


def dilate(interval: tuple[float, float], frac: float) -> tuple[float, float]:
    """Widen an interval symmetrically so its width grows by ``frac``."""
    lo, hi = interval
    pad = frac * (hi - lo) / 2
    return lo - pad, hi + pad


def auto_grid(spec: Structure, d: DispersionParams, n_points: int = 8001) -> FrequencyGrid:
    """Photonic and explicit stacks: the default grid.  Chirped poling: predicted support dilated by 50%."""
    if isinstance(spec, AperiodicPolingSpec) and spec.zeta != 0:
        lo, hi = dilate(predict_support_aperiodic(spec, d), 0.5)
        return FrequencyGrid(lo, hi, n_points)
    return FrequencyGrid(DEFAULT_GRID.min, DEFAULT_GRID.max, n_points)


def superlevel_intervals(sr: SpectrumResult, frac: float = 0.5) -> list[tuple[float, float]]:
    """Intervals where the linear interpolant of the density is >= ``frac * max``."""
    y = np.asarray(sr.density, dtype=float)
    x = sr.omega
    if y.size == 0:
        raise ValueError("empty spectrum")
    top = float(y.max())
    if not top > 0:
        raise ValueError("spectrum is identically zero")
    level = frac * top
    above = y >= level
    out = []
    start = x[0] if above[0] else None
    for i in np.flatnonzero(above[:-1] != above[1:]):
        xc = _crossing(x, y, i, i + 1, level)
        if above[i]:
            out.append((float(start), float(xc)))
            start = None
        else:
            start = xc
    if start is not None:
        out.append((float(start), float(x[-1])))
    return out


@dataclass(frozen=True)
class Bandwidth:
    width_omega: float
    width_lambda: float
    intervals: tuple[tuple[float, float], ...]


def bandwidth(sr: SpectrumResult) -> Bandwidth:
    """Measure of the half-maximum superlevel set, in Omega/c and in signal wavelength."""
    ivs = superlevel_intervals(sr, 0.5)
    w_omega = math.fsum(b - a for a, b in ivs)
    lam = [omega_to_signal_wavelength(np.array([a, b]), sr.lambda0) for a, b in ivs]
    w_lambda = math.fsum(abs(float(l[1] - l[0])) for l in lam)
    return Bandwidth(w_omega, w_lambda, tuple(ivs))


def max_rel_dev(a, b, floor: float = 1e-6, peak: float | None = None) -> float:
    """Max pointwise ``|a-b| / max(|a|, |b|, floor * peak)``.

    ``peak`` defaults to the larger of both maxima; pass the full-spectrum peak when
    comparing a subset.  The floor keeps exact spectral zeros from turning rounding
    noise into unbounded relative error.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return 0.0
    if peak is None:
        peak = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if peak == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor * peak)
    return float(np.max(np.abs(a - b) / scale))
