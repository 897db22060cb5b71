"""Structure and dispersion parameter types, and layer-sequence builders.

Units are canonical throughout: lengths in um, wavevectors in 1/um,
spatial chirp alpha in 1/um^2.  Unit conversion happens at the CLI boundary.

Two layer-length conventions exist for aperiodically poled stacks:

* ``build_aperiodic`` uses ``l_m = l0 + (m - 1) * zeta`` for m = 1..N.
* ``solve_l0`` (and the fixtures built from it) uses ``l_n = l0 + n * zeta``
  for n = 1..N, which is the convention the tabulated (N, zeta, l0, L)
  quadruples satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ValidationError",
    "DispersionParams",
    "PhotonicChirpSpec",
    "IndexChirpSpec",
    "AperiodicPolingSpec",
    "PeriodicPolingSpec",
    "Layer",
    "LayerSequence",
    "build_photonic",
    "build_aperiodic",
    "build_periodic",
    "alpha_from_index_chirp",
    "zeta_alpha_relation",
    "alpha_from_zeta",
    "solve_l0",
    "solve_l0_fixed_alpha",
    "shifted_layer_length",
]


class ValidationError(ValueError):
    """Invalid structure or dispersion parameters.

    ``field`` names the offending parameter.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _require(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise ValidationError(field, message)


def _finite(value: float, name: str) -> None:
    _require(math.isfinite(value), name, f"must be finite, got {value!r}")


@dataclass(frozen=True)
class DispersionParams:
    """Pump wavelength ``lambda0`` (um), walk-off ``B = c*D`` and central mismatch ``dk0`` (1/um)."""

    lambda0: float
    B: float
    dk0: float = 0.0

    def __post_init__(self):
        for name in ("lambda0", "B", "dk0"):
            _finite(getattr(self, name), name)
        _require(self.lambda0 > 0, "lambda0", "must be > 0")
        _require(self.B != 0, "B", "must be nonzero (B = 0 makes the detuning map degenerate)")

    @property
    def omega0_over_c(self) -> float:
        return 2 * math.pi / self.lambda0


@dataclass(frozen=True)
class PhotonicChirpSpec:
    """Equal layers of length ``layer_len`` whose mismatch drifts by ``-alpha*l`` per layer."""

    n_layers: int
    layer_len: float
    alpha: float = 0.0
    chi0: float = 1.0

    def __post_init__(self):
        _require(isinstance(self.n_layers, (int, np.integer)) and self.n_layers >= 1,
                 "n_layers", f"must be a positive integer, got {self.n_layers!r}")
        for name in ("layer_len", "alpha", "chi0"):
            _finite(getattr(self, name), name)
        _require(self.layer_len > 0, "layer_len", "must be > 0")
        _require(self.chi0 != 0, "chi0", "must be nonzero")

    @property
    def total_length(self) -> float:
        return self.n_layers * self.layer_len

    @classmethod
    def from_total_length(cls, n_layers: int, total_length: float, alpha: float = 0.0,
                          chi0: float = 1.0) -> "PhotonicChirpSpec":
        _require(total_length > 0, "total_length", "must be > 0")
        return cls(n_layers, total_length / n_layers, alpha, chi0)


@dataclass(frozen=True)
class IndexChirpSpec:
    """Linear refractive-index chirp slopes (1/um) and base indices."""

    beta0: float = 0.0
    beta_s: float = 0.0
    beta_i: float = 0.0
    n0: float = 1.0
    n_s: float = 1.0
    n_i: float = 1.0

    def __post_init__(self):
        for name in ("beta0", "beta_s", "beta_i", "n0", "n_s", "n_i"):
            _finite(getattr(self, name), name)
        for name in ("n0", "n_s", "n_i"):
            _require(getattr(self, name) > 0, name, "must be > 0")

    def check_positive_over(self, length: float) -> None:
        """Raise unless every index stays positive over a stack of ``length`` um."""
        for base, slope, name in ((self.n0, self.beta0, "beta0"), (self.n_s, self.beta_s, "beta_s"),
                                  (self.n_i, self.beta_i, "beta_i")):
            _require(base - slope * length > 0, name,
                     f"index {base} - {slope}*z becomes nonpositive within {length} um")


@dataclass(frozen=True)
class AperiodicPolingSpec:
    """Alternating-sign layers with lengths ``l0 + (m-1)*zeta``."""

    n_layers: int
    l0: float
    zeta: float = 0.0
    chi0: float = 1.0

    def __post_init__(self):
        _require(isinstance(self.n_layers, (int, np.integer)) and self.n_layers >= 1,
                 "n_layers", f"must be a positive integer, got {self.n_layers!r}")
        for name in ("l0", "zeta", "chi0"):
            _finite(getattr(self, name), name)
        _require(self.l0 > 0, "l0", "must be > 0")
        _require(self.chi0 != 0, "chi0", "must be nonzero")
        last = self.l0 + (self.n_layers - 1) * self.zeta
        if last <= 0:
            bad = next(m for m in range(1, self.n_layers + 1) if self.l0 + (m - 1) * self.zeta <= 0)
            raise ValidationError("zeta", f"layer {bad} length {self.l0 + (bad - 1) * self.zeta:g} is not positive")

    @property
    def lengths(self) -> np.ndarray:
        return self.l0 + np.arange(self.n_layers) * self.zeta

    @property
    def total_length(self) -> float:
        n = self.n_layers
        return n * self.l0 + self.zeta * n * (n - 1) / 2


@dataclass(frozen=True)
class PeriodicPolingSpec:
    """Alternating-sign layers of identical length ``l0`` (the zeta = 0 case)."""

    n_layers: int
    l0: float
    chi0: float = 1.0

    def __post_init__(self):
        AperiodicPolingSpec(self.n_layers, self.l0, 0.0, self.chi0)

    @property
    def total_length(self) -> float:
        return self.n_layers * self.l0

    def as_aperiodic(self) -> AperiodicPolingSpec:
        return AperiodicPolingSpec(self.n_layers, self.l0, 0.0, self.chi0)


@dataclass(frozen=True)
class Layer:
    length: float
    chi: float
    dk_offset: float = 0.0


@dataclass(frozen=True)
class LayerSequence:
    """Resolved layers; the local mismatch in layer m is ``dk + dk_offset[m]``."""

    layers: tuple[Layer, ...]
    total_length_expected: float | None = field(default=None, compare=False)

    def __post_init__(self):
        _require(len(self.layers) > 0, "layers", "sequence is empty")
        for i, layer in enumerate(self.layers, start=1):
            _require(math.isfinite(layer.length) and layer.length > 0, "length",
                     f"layer {i} has nonpositive length {layer.length!r}")
            _require(math.isfinite(layer.chi), "chi", f"layer {i} chi not finite")
            _require(math.isfinite(layer.dk_offset), "dk_offset", f"layer {i} offset not finite")
        _require(any(layer.chi != 0 for layer in self.layers), "chi", "all layers have zero chi")
        if self.total_length_expected is not None:
            L = self.total_length
            _require(abs(L - self.total_length_expected) <= 1e-9 * abs(self.total_length_expected),
                     "length", f"layer lengths sum to {L}, expected {self.total_length_expected}")

    @classmethod
    def from_arrays(cls, lengths: Sequence[float], chis: Sequence[float],
                    dk_offsets: Sequence[float] | None = None) -> "LayerSequence":
        if dk_offsets is None:
            dk_offsets = [0.0] * len(lengths)
        if not (len(lengths) == len(chis) == len(dk_offsets)):
            raise ValidationError("layers", "lengths, chis and dk_offsets differ in size")
        return cls(tuple(Layer(float(l), float(c), float(o)) for l, c, o in zip(lengths, chis, dk_offsets)))

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([layer.length for layer in self.layers])

    @property
    def chis(self) -> np.ndarray:
        return np.array([layer.chi for layer in self.layers])

    @property
    def dk_offsets(self) -> np.ndarray:
        return np.array([layer.dk_offset for layer in self.layers])

    @property
    def total_length(self) -> float:
        return math.fsum(layer.length for layer in self.layers)

    @property
    def chi_ref(self) -> float:
        """Reference susceptibility used for normalization: the largest |chi|."""
        return max(abs(layer.chi) for layer in self.layers)


def build_photonic(spec: PhotonicChirpSpec) -> LayerSequence:
    n, l = spec.n_layers, spec.layer_len
    offsets = -spec.alpha * np.arange(n) * l
    layers = tuple(Layer(l, spec.chi0, float(o)) for o in offsets)
    return LayerSequence(layers, total_length_expected=n * l)


def build_aperiodic(spec: AperiodicPolingSpec) -> LayerSequence:
    lengths = spec.lengths
    layers = tuple(Layer(float(length), spec.chi0 * (-1) ** m, 0.0) for m, length in enumerate(lengths))
    return LayerSequence(layers, total_length_expected=spec.total_length)


def build_periodic(spec: PeriodicPolingSpec) -> LayerSequence:
    return build_aperiodic(spec.as_aperiodic())


def alpha_from_index_chirp(d: DispersionParams, idx: IndexChirpSpec) -> float:
    """Spatial chirp (1/um^2) induced by linear index chirps: (2*pi/lambda0)*(b0 - bs/2 - bi/2)."""
    return d.omega0_over_c * (idx.beta0 - idx.beta_s / 2 - idx.beta_i / 2)


def zeta_alpha_relation(l0: float, alpha: float) -> float:
    """Poling chirp (um) equivalent to a spatial chirp alpha for first-layer length l0."""
    _require(l0 > 0, "l0", "must be > 0")
    return alpha * l0 ** 3 / math.pi


def alpha_from_zeta(l0: float, zeta: float) -> float:
    _require(l0 > 0, "l0", "must be > 0")
    return math.pi * zeta / l0 ** 3


def solve_l0(n_layers: int, zeta: float, total_length: float) -> float:
    """First-layer length such that layers ``l0 + n*zeta`` (n = 1..N) sum to ``total_length``."""
    _require(n_layers >= 1, "n_layers", "must be >= 1")
    _require(total_length > 0, "total_length", "must be > 0")
    l0 = total_length / n_layers - zeta * (n_layers + 1) / 2
    # both ends must be positive: l_1 = l0 + zeta and l_N = l0 + N*zeta
    if l0 <= 0 or l0 + zeta <= 0 or l0 + n_layers * zeta <= 0:
        raise ValidationError("zeta", f"chirp too large for N, L (l0 = {l0:g})")
    return l0


def solve_l0_fixed_alpha(n_layers: int, alpha: float, total_length: float) -> tuple[float, float]:
    """Jointly solve ``zeta = alpha*l0**3/pi`` and ``solve_l0``; returns ``(l0, zeta)``."""
    _require(alpha >= 0, "alpha", "must be >= 0")
    target = total_length / n_layers
    if alpha == 0:
        return target, 0.0

    def resid(l0):
        return l0 + (n_layers + 1) * alpha * l0 ** 3 / (2 * math.pi) - target

    l0 = brentq(resid, 0.0, target, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return l0, zeta_alpha_relation(l0, alpha)


def shifted_layer_length(l0: float, zeta: float, n: int) -> float:
    """Layer length under the ``l_n = l0 + n*zeta`` convention."""
    return l0 + n * zeta
