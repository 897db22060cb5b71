"""One-parameter sweeps and a scan-then-golden-section search over the poling chirp."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import (AperiodicPolingSpec, DispersionParams, PeriodicPolingSpec, PhotonicChirpSpec,
                    ValidationError, solve_l0, solve_l0_fixed_alpha, zeta_alpha_relation)
from .spectra import (DEFAULT_GRID, FrequencyGrid, SpectrumResult, Structure, auto_grid, bandwidth,
                      detect_peaks, evaluate_spectrum, _resolve_threads)

__all__ = [
    "PARAMETERS",
    "OBJECTIVES",
    "SweepSpec",
    "SweepRow",
    "OptimizationResult",
    "evaluate_objectives",
    "substitute",
    "sweep",
    "zeta_bounds",
    "optimize_zeta",
]

PARAMETERS = ("alpha", "zeta", "n_layers", "dk0", "B")
OBJECTIVES = ("bandwidth", "peak_count", "max_density", "mean_peak_spacing")
HOLDS = ("length", "alpha", "none")
# maxima on a line top that are less prominent than this (fraction of the global max)
# are interference ripple, not separate lines
PEAK_PROMINENCE = 0.1

INV_PHI = (math.sqrt(5) - 1) / 2


def _peaks(sr: SpectrumResult):
    return detect_peaks(sr, 0.1, min_prominence=PEAK_PROMINENCE)


def evaluate_objectives(sr: SpectrumResult, names: Sequence[str]) -> dict[str, float]:
    out = {}
    for name in names:
        if name == "bandwidth":
            out[name] = bandwidth(sr).width_omega
        elif name == "peak_count":
            out[name] = float(len(_peaks(sr)))
        elif name == "max_density":
            out[name] = float(np.max(sr.density))
        elif name == "mean_peak_spacing":
            pos = np.sort(_peaks(sr).positions)
            out[name] = float(np.mean(np.diff(pos))) if pos.size > 1 else math.nan
        else:
            raise ValueError(f"unknown objective {name!r}; choose from {OBJECTIVES}")
    return out


@dataclass(frozen=True)
class SweepSpec:
    """Sweep ``parameter`` over ``values`` starting from ``structure``/``dispersion``.

    ``grid=None`` picks ``auto_grid`` for every point.  ``hold`` controls what
    ``n_layers`` keeps fixed: the total length, the spatial chirp alpha (chirped
    poling only), or nothing.
    """

    structure: Structure
    dispersion: DispersionParams
    parameter: str
    values: tuple[float, ...]
    objectives: tuple[str, ...] = ("bandwidth",)
    grid: FrequencyGrid | None = None
    method: str = "closed_form"
    hold: str = "length"

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {PARAMETERS}, got {self.parameter!r}")
        if len(self.values) == 0:
            raise ValueError("value list is empty")
        for name in self.objectives:
            if name not in OBJECTIVES:
                raise ValueError(f"unknown objective {name!r}; choose from {OBJECTIVES}")
        if self.hold not in HOLDS:
            raise ValueError(f"hold must be one of {HOLDS}")
        s = self.structure
        if self.parameter == "zeta" and not isinstance(s, (AperiodicPolingSpec, PeriodicPolingSpec)):
            raise ValueError("zeta applies only to poled structures")
        if self.parameter == "alpha" and isinstance(s, PeriodicPolingSpec):
            raise ValueError("alpha needs a photonic or chirped-poling structure")


def substitute(structure: Structure, d: DispersionParams, parameter: str, value: float,
               hold: str = "length") -> tuple[Structure, DispersionParams]:
    """The (structure, dispersion) pair with one parameter replaced."""
    if parameter == "dk0":
        return structure, dataclasses.replace(d, dk0=float(value))
    if parameter == "B":
        return structure, dataclasses.replace(d, B=float(value))
    s = structure
    if isinstance(s, PeriodicPolingSpec):
        s = s.as_aperiodic()
    if parameter == "zeta":
        return AperiodicPolingSpec(s.n_layers, s.l0, float(value), s.chi0), d
    if parameter == "alpha":
        if isinstance(s, PhotonicChirpSpec):
            return dataclasses.replace(s, alpha=float(value)), d
        return AperiodicPolingSpec(s.n_layers, s.l0, zeta_alpha_relation(s.l0, float(value)), s.chi0), d
    if parameter == "n_layers":
        if float(value) != int(value):
            raise ValidationError("n_layers", f"must be an integer, got {value!r}")
        n = int(value)
        if isinstance(s, PhotonicChirpSpec):
            if hold == "none":
                return dataclasses.replace(s, n_layers=n), d
            return PhotonicChirpSpec.from_total_length(n, s.total_length, s.alpha, s.chi0), d
        if hold == "none":
            return AperiodicPolingSpec(n, s.l0, s.zeta, s.chi0), d
        L = s.n_layers * s.l0 + s.zeta * s.n_layers * (s.n_layers + 1) / 2
        if hold == "alpha":
            l0, zeta = solve_l0_fixed_alpha(n, math.pi * s.zeta / s.l0 ** 3, L)
        else:
            zeta = s.zeta
            l0 = solve_l0(n, zeta, L)
        spec = AperiodicPolingSpec(n, l0, zeta, s.chi0)
        # keep the grating band centred where it was relative to the mismatch
        lens = spec.lengths
        return spec, dataclasses.replace(d, dk0=math.pi * (1 / lens.min() + 1 / lens.max()) / 2)
    raise ValueError(f"unknown parameter {parameter!r}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    objectives: dict | None
    error: str | None = None


def sweep(s: SweepSpec, threads: int | None = 1) -> list[SweepRow]:
    """One row per value, in input order.  Invalid points become rows with ``error`` set."""

    def point(value):
        try:
            st, d = substitute(s.structure, s.dispersion, s.parameter, value, s.hold)
            grid = s.grid if s.grid is not None else auto_grid(st, d)
            sr = evaluate_spectrum(st, d, grid, s.method)
            return SweepRow(float(value), evaluate_objectives(sr, s.objectives))
        except (ValueError, ArithmeticError) as exc:
            return SweepRow(float(value), None, str(exc))

    n = min(_resolve_threads(threads), len(s.values))
    if n == 1:
        rows = [point(v) for v in s.values]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(point, s.values))
    if all(r.error is not None for r in rows):
        raise ValueError("every sweep point is invalid: " + "; ".join(r.error for r in rows))
    return rows


@dataclass(frozen=True)
class OptimizationResult:
    best: float
    objective: float
    trace: tuple[tuple[float, float], ...]


def zeta_bounds(n_layers: int, total_length: float) -> tuple[float, float]:
    """Open interval of zeta keeping ``l0 > 0`` under ``l_n = l0 + n*zeta``."""
    return 0.0, 2 * total_length / (n_layers * (n_layers + 1))


def optimize_zeta(n_layers: int, total_length: float, d: DispersionParams,
                  objective: str | Callable[[SpectrumResult], float] = "bandwidth",
                  grid: FrequencyGrid = DEFAULT_GRID, seeds: Sequence[float] = (2.82,),
                  n_coarse: int = 32, rtol: float = 1e-3, method: str = "closed_form") -> OptimizationResult:
    """Maximize ``objective`` over zeta on a fixed grid.

    A ``n_coarse``-point scan of the open feasible interval plus the in-range
    ``seeds`` brackets the best point; golden-section search refines it until the
    bracket is below ``rtol`` relative to zeta.  The result is the argmax of the
    full trace.
    """
    if n_layers < 2 or n_layers % 2:
        raise ValueError(f"n_layers must be even and >= 2, got {n_layers}")
    if not total_length > 0:
        raise ValueError("total_length must be > 0")
    lo, hi = zeta_bounds(n_layers, total_length)
    if not hi > lo:
        raise ValueError("empty feasible zeta interval")
    if isinstance(objective, str):
        name = objective
        if name not in OBJECTIVES:
            raise ValueError(f"unknown objective {name!r}")

        def objective(sr, name=name):
            return evaluate_objectives(sr, [name])[name]

    trace = []

    def f(zeta):
        spec = AperiodicPolingSpec(n_layers, solve_l0(n_layers, zeta, total_length), zeta)
        v = float(objective(evaluate_spectrum(spec, d, grid, method)))
        v = v if math.isfinite(v) else -math.inf
        trace.append((float(zeta), v))
        return v

    coarse = [lo + (hi - lo) * (k + 0.5) / n_coarse for k in range(n_coarse)]
    pts = sorted(set(coarse) | {float(s) for s in seeds if lo < s < hi})
    vals = [f(z) for z in pts]
    k = int(np.argmax(vals))
    a = pts[k - 1] if k > 0 else lo + (pts[0] - lo) * 1e-6
    b = pts[k + 1] if k + 1 < len(pts) else hi - (hi - pts[-1]) * 1e-6

    c = b - INV_PHI * (b - a)
    e = a + INV_PHI * (b - a)
    fc, fe = f(c), f(e)
    while b - a > rtol * abs(pts[k]):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + INV_PHI * (b - a)
            fe = f(e)

    best, val = max(trace, key=lambda t: t[1])
    return OptimizationResult(best, val, tuple(trace))
