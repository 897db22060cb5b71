"""Built-in parameter sets for the photonic (fig1*), periodic/aperiodic (fig2*) and
chirped-poling (fig3*) reference spectra.

Common parameters: L = 8000 um, B = 0.3, lambda0 = 0.458 um.  For fig3* the central
mismatch is ``pi / l_k`` with ``l_k = l0 + k*zeta`` (the tabulated convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (AperiodicPolingSpec, DispersionParams, PeriodicPolingSpec, PhotonicChirpSpec,
                    shifted_layer_length)
from .spectra import DEFAULT_GRID, FrequencyGrid, Structure, auto_grid

TOTAL_LENGTH = 8000.0
B = 0.3
LAMBDA0 = 0.458
ALPHA = 1.2e-5
ALPHA_HALF = 6e-6


@dataclass(frozen=True)
class Fixture:
    name: str
    structure: Structure
    dispersion: DispersionParams
    grid: FrequencyGrid
    description: str = ""
    flags: tuple[str, ...] = field(default=())


def _photonic(name, n, alpha, k, desc):
    spec = PhotonicChirpSpec.from_total_length(n, TOTAL_LENGTH, alpha)
    d = DispersionParams(LAMBDA0, B, k * alpha * spec.layer_len)
    return Fixture(name, spec, d, DEFAULT_GRID, desc)


def _chirped(name, n, l0, zeta, k, desc, flags=()):
    spec = AperiodicPolingSpec(n, l0, zeta)
    d = DispersionParams(LAMBDA0, B, math.pi / shifted_layer_length(l0, zeta, k))
    return Fixture(name, spec, d, auto_grid(spec, d), desc, tuple(flags))


def _length_flag(n, l0, zeta):
    total = n * l0 + zeta * n * (n + 1) / 2
    if abs(total - TOTAL_LENGTH) > 1e-3 * TOTAL_LENGTH:
        return (f"length-mismatch: layers l0+n*zeta (n=1..{n}) total {total:g} um, "
                f"not L={TOTAL_LENGTH:g} um",)
    return ()


def _build() -> dict[str, Fixture]:
    fx = [
        _photonic("fig1a", 5, ALPHA, 3, "photonic N=5, dk0=3*alpha*l"),
        _photonic("fig1b", 10, ALPHA, 5, "photonic N=10, dk0=5*alpha*l"),
        _photonic("fig1c", 20, ALPHA, 10, "photonic N=20, dk0=10*alpha*l"),
        _photonic("fig1d", 80, ALPHA, 40, "photonic N=80, dk0=40*alpha*l"),
        _photonic("fig1e", 5, ALPHA_HALF, 3, "photonic N=5, halved chirp, dk0=3*alpha*l"),
        _photonic("fig1f", 80, ALPHA_HALF, 40, "photonic N=80, halved chirp, dk0=40*alpha*l"),
        Fixture("fig2a", PeriodicPolingSpec(50, 160.0), DispersionParams(LAMBDA0, B, 0.0), DEFAULT_GRID,
                "periodic poling N=50, l=160, dk0=0"),
        Fixture("fig2b", AperiodicPolingSpec(50, 88.09, 2.82), DispersionParams(LAMBDA0, B, 0.0),
                DEFAULT_GRID, "chirped poling N=50, l0=88.09, zeta=2.82, dk0=0"),
        _chirped("fig3a", 50, 109.5, 1.0, 37, "chirped poling N=50, l0=109.5, zeta=1, dk0=pi/l_37",
                 _length_flag(50, 109.5, 1.0)),
        _chirped("fig3b", 50, 88.09, 2.82, 40, "chirped poling N=50, l0=88.09, zeta=2.82, dk0=pi/l_40",
                 _length_flag(50, 88.09, 2.82)),
        _chirped("fig3c", 100, 52.225, 0.55, 85, "chirped poling N=100, l0=52.225, zeta=0.55, dk0=pi/l_85",
                 _length_flag(100, 52.225, 0.55)),
        _chirped("fig3d", 160, 35.51, 0.18, 140, "chirped poling N=160, l0=35.51, zeta=0.18, dk0=pi/l_140",
                 _length_flag(160, 35.51, 0.18)),
    ]
    return {f.name: f for f in fx}


FIXTURES: dict[str, Fixture] = _build()


def get(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
