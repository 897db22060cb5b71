import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirpqpm.model import (AperiodicPolingSpec, DispersionParams, IndexChirpSpec, LayerSequence,
                            PeriodicPolingSpec, PhotonicChirpSpec, ValidationError, alpha_from_index_chirp,
                            alpha_from_zeta, build_aperiodic, build_periodic, build_photonic,
                            shifted_layer_length, solve_l0, solve_l0_fixed_alpha, zeta_alpha_relation)


def test_dispersion_validation():
    with pytest.raises(ValidationError) as e:
        DispersionParams(0.458, 0.0)
    assert e.value.field == "B"
    with pytest.raises(ValidationError):
        DispersionParams(-1.0, 0.3)
    with pytest.raises(ValidationError):
        DispersionParams(0.458, 0.3, math.nan)
    assert DispersionParams(0.458, 0.3).omega0_over_c == pytest.approx(2 * math.pi / 0.458)


def test_photonic_single_layer_has_no_offset():
    seq = build_photonic(PhotonicChirpSpec(1, 100.0, alpha=3.0))
    assert len(seq) == 1
    assert seq.dk_offsets[0] == 0.0


def test_photonic_fig1a_last_offset():
    seq = build_photonic(PhotonicChirpSpec.from_total_length(5, 8000.0, 1.2e-5))
    assert seq.lengths[0] == 1600.0
    assert seq.dk_offsets[4] == pytest.approx(-0.0768, rel=1e-12)


def test_photonic_zero_chirp_identical_layers():
    seq = build_photonic(PhotonicChirpSpec(3, 10.0, 0.0))
    assert np.all(seq.dk_offsets == 0)
    assert len(set(seq.layers)) == 1


def test_photonic_invalid_fields_named():
    with pytest.raises(ValidationError) as e:
        PhotonicChirpSpec(0, 1.0)
    assert e.value.field == "n_layers"
    with pytest.raises(ValidationError) as e:
        PhotonicChirpSpec(3, -1.0)
    assert e.value.field == "layer_len"


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.floats(0.1, 5000), st.floats(-1e-3, 1e-3))
def test_photonic_offsets_affine(n, l, alpha):
    seq = build_photonic(PhotonicChirpSpec(n, l, alpha))
    assert seq.total_length == pytest.approx(n * l, rel=1e-12)
    if n > 1:
        np.testing.assert_allclose(np.diff(seq.dk_offsets), -alpha * l, rtol=1e-9, atol=1e-15)


def test_aperiodic_unchirped_pair():
    seq = build_aperiodic(AperiodicPolingSpec(2, 50.0, 0.0))
    assert list(seq.lengths) == [50.0, 50.0]
    assert list(seq.chis) == [1.0, -1.0]


def test_aperiodic_fig2b_last_layer():
    seq = build_aperiodic(AperiodicPolingSpec(50, 88.09, 2.82))
    assert seq.lengths[-1] == pytest.approx(226.27, rel=1e-12)


def test_aperiodic_degenerate_layer_rejected():
    with pytest.raises(ValidationError, match="layer 2"):
        AperiodicPolingSpec(3, 1.0, -1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.floats(1.0, 500.0), st.floats(0.0, 5.0), st.floats(0.5, 3.0))
def test_aperiodic_alternation_and_steps(n, l0, zeta, chi0):
    seq = build_aperiodic(AperiodicPolingSpec(n, l0, zeta, chi0))
    c = seq.chis
    np.testing.assert_array_equal(c[:-1] * c[1:], -chi0 ** 2)
    if n > 1:
        np.testing.assert_allclose(np.diff(seq.lengths), zeta, atol=1e-9 * (l0 + n * zeta))


def test_periodic_is_zero_chirp_aperiodic():
    assert build_periodic(PeriodicPolingSpec(4, 7.0)) == build_aperiodic(AperiodicPolingSpec(4, 7.0, 0.0))


def test_layer_sequence_checks():
    with pytest.raises(ValidationError):
        LayerSequence(())
    with pytest.raises(ValidationError, match="layer 2"):
        LayerSequence.from_arrays([1.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        LayerSequence.from_arrays([1.0], [1.0, 2.0])
    layers = LayerSequence.from_arrays([1.0, 2.0], [1.0, 1.0]).layers
    with pytest.raises(ValidationError, match="expected 4"):
        LayerSequence(layers, total_length_expected=4.0)


def test_alpha_from_index_chirp():
    d = DispersionParams(0.458, 0.3)
    assert alpha_from_index_chirp(d, IndexChirpSpec()) == 0.0
    beta = 3e-7
    assert alpha_from_index_chirp(d, IndexChirpSpec(beta, 2 * beta, 2 * beta)) == pytest.approx(
        -2 * math.pi / 0.458 * beta, rel=1e-12)
    # 2*pi*1e-6/0.458
    assert alpha_from_index_chirp(d, IndexChirpSpec(1e-6)) == pytest.approx(1.37188e-5, rel=1e-5)


def test_index_chirp_positivity():
    idx = IndexChirpSpec(beta0=1e-4, n0=1.5)
    idx.check_positive_over(1000.0)
    with pytest.raises(ValidationError):
        idx.check_positive_over(20000.0)


def test_zeta_alpha_relation():
    assert zeta_alpha_relation(50.0, 0.0) == 0.0
    # 240 cm^-2 = 2.4e-6 um^-2
    assert alpha_from_zeta(109.5, 1.0) == pytest.approx(2.393e-6, rel=1e-3)
    assert zeta_alpha_relation(52.225, 1.2e-5) == pytest.approx(0.55, rel=0.02)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 1000.0), st.floats(1e-9, 1e-3))
def test_zeta_alpha_round_trip(l0, alpha):
    assert alpha_from_zeta(l0, zeta_alpha_relation(l0, alpha)) == pytest.approx(alpha, rel=1e-12)


def test_solve_l0_reference_values():
    assert solve_l0(10, 0.0, 8000.0) == 800.0
    assert solve_l0(100, 0.55, 8000.0) == pytest.approx(52.225, abs=1e-12)
    assert solve_l0(160, 0.18, 8000.0) == pytest.approx(35.51, abs=1e-12)
    with pytest.raises(ValidationError, match="chirp too large"):
        solve_l0(100, 2.0, 8000.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.floats(100.0, 20000.0), st.floats(0.0, 0.9))
def test_solve_l0_round_trip(n, L, frac):
    zeta = frac * 2 * L / (n * (n + 1))
    l0 = solve_l0(n, zeta, L)
    total = math.fsum(shifted_layer_length(l0, zeta, k) for k in range(1, n + 1))
    assert total == pytest.approx(L, rel=1e-9)


def test_solve_l0_fixed_alpha_consistent():
    l0, zeta = solve_l0_fixed_alpha(100, 1.2e-5, 8000.0)
    assert zeta == pytest.approx(zeta_alpha_relation(l0, 1.2e-5), rel=1e-12)
    assert solve_l0(100, zeta, 8000.0) == pytest.approx(l0, rel=1e-10)
    assert solve_l0_fixed_alpha(10, 0.0, 8000.0) == (800.0, 0.0)
