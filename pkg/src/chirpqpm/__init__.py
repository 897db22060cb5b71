"""Biphoton spectra of layered nonlinear crystals with chirped phase matching.

Submodules: ``model`` (structure types and builders), ``engine`` (amplitudes and
densities), ``spectra`` (sampling, peaks, bandwidth), ``optimize`` (sweeps and chirp
search), ``gaussfactor`` (Gauss sums and factoring), ``config`` and ``cli``.
"""

__version__ = "0.1.0"

from .model import (AperiodicPolingSpec, DispersionParams, IndexChirpSpec, Layer, LayerSequence,
                    PeriodicPolingSpec, PhotonicChirpSpec, ValidationError)
from .spectra import FrequencyGrid, evaluate_spectrum

__all__ = [
    "AperiodicPolingSpec",
    "DispersionParams",
    "FrequencyGrid",
    "IndexChirpSpec",
    "Layer",
    "LayerSequence",
    "PeriodicPolingSpec",
    "PhotonicChirpSpec",
    "ValidationError",
    "evaluate_spectrum",
]
