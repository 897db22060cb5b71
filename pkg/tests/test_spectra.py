import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirpqpm.fixtures import FIXTURES, get
from chirpqpm.model import AperiodicPolingSpec, DispersionParams, PhotonicChirpSpec
from chirpqpm.spectra import (DEFAULT_GRID, METHODS, SINC2_HALF_POWER_X, FrequencyGrid, SpectrumResult,
                              auto_grid, bandwidth, detect_peaks, dilate, evaluate_spectrum, max_rel_dev,
                              omega_to_signal_wavelength, predict_peaks, predict_support_aperiodic,
                              signal_wavelength_to_omega, superlevel_intervals)


def test_wavelength_map_examples():
    assert omega_to_signal_wavelength(0.0, 0.458) == pytest.approx(0.916, rel=1e-15)
    assert omega_to_signal_wavelength(0.1, 0.458) == pytest.approx(0.916 / (1 - 0.1 * 0.458 / math.pi), rel=1e-14)
    assert omega_to_signal_wavelength(0.1, 0.458) == pytest.approx(0.92955, abs=1e-5)
    with pytest.raises(ValueError):
        omega_to_signal_wavelength(math.pi / 0.458, 0.458)
    with pytest.raises(ValueError):
        omega_to_signal_wavelength(np.array([0.0, 10.0]), 0.458)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5.0, 6.8), st.floats(0.2, 1.5))
def test_wavelength_round_trip(w, lam0):
    if w * lam0 / math.pi >= 0.999:
        return
    lam = omega_to_signal_wavelength(w, lam0)
    assert signal_wavelength_to_omega(lam, lam0) == pytest.approx(w, rel=1e-12, abs=1e-12)


def test_wavelengths_monotone():
    lam = omega_to_signal_wavelength(DEFAULT_GRID.points, 0.458)
    assert np.all(np.diff(lam) > 0)


def test_grid_validation():
    with pytest.raises(ValueError):
        FrequencyGrid(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        FrequencyGrid(0.0, 1.0, 1)
    assert DEFAULT_GRID.points.size == 8001
    assert DEFAULT_GRID.step == pytest.approx(8.75e-5)


@pytest.mark.parametrize("name", ["fig1b", "fig2b", "fig3c"])
def test_methods_agree_on_fixture(name):
    f = FIXTURES[name]
    grid = FrequencyGrid(f.grid.min, f.grid.max, 1601)
    res = [evaluate_spectrum(f.structure, f.dispersion, grid, m).density for m in METHODS]
    assert max_rel_dev(res[0], res[1]) < 1e-9
    assert max_rel_dev(res[0], res[2]) < 1e-9


def test_thread_count_does_not_change_output():
    f = FIXTURES["fig1c"]
    a = evaluate_spectrum(f.structure, f.dispersion, f.grid, threads=1).density
    b = evaluate_spectrum(f.structure, f.dispersion, f.grid, threads=4).density
    assert a.tobytes() == b.tobytes()


def test_single_layer_sinc_symmetric():
    spec = PhotonicChirpSpec(1, 300.0)
    d = DispersionParams(0.458, 0.3)
    sr = evaluate_spectrum(spec, d, FrequencyGrid(-0.2, 0.2, 2001))
    np.testing.assert_allclose(sr.density, sr.density[::-1], rtol=1e-13, atol=1e-16)
    x = 0.3 * sr.omega * 300 / 2
    np.testing.assert_allclose(sr.density, np.sinc(x / np.pi) ** 2, rtol=1e-12, atol=1e-16)


def test_fig2a_global_max():
    f = FIXTURES["fig2a"]
    sr = evaluate_spectrum(f.structure, f.dispersion, f.grid)
    # dk0 = 0 makes the spectrum even in Omega; look at the positive branch
    pos = sr.omega > 0
    assert sr.density[pos].max() == pytest.approx(sr.density.max(), rel=1e-12)
    assert abs(sr.omega[pos][np.argmax(sr.density[pos])] - math.pi / 160 / 0.3) <= f.grid.step


def test_predict_peaks_degenerate_and_fig1a():
    ps = predict_peaks(PhotonicChirpSpec(4, 100.0, 0.0), DispersionParams(0.458, 0.3, 0.0))
    assert np.all(ps.positions == 0)
    ps = predict_peaks(FIXTURES["fig1a"].structure, FIXTURES["fig1a"].dispersion)
    np.testing.assert_allclose(ps.positions, [-0.192, -0.128, -0.064, 0.0, 0.064], atol=1e-15)
    assert ps.resolved
    assert ps.widths[0] == pytest.approx(4 * SINC2_HALF_POWER_X / (0.3 * 1600))
    assert not predict_peaks(FIXTURES["fig1d"].structure, FIXTURES["fig1d"].dispersion).resolved


def test_sinc2_half_power_root():
    assert math.sin(SINC2_HALF_POWER_X) ** 2 / SINC2_HALF_POWER_X ** 2 == pytest.approx(0.5, rel=1e-14)
    assert SINC2_HALF_POWER_X == pytest.approx(1.39156, abs=1e-5)


def _sr(y, lo=0.0, hi=1.0):
    y = np.asarray(y, dtype=float)
    g = FrequencyGrid(lo, hi, y.size)
    return SpectrumResult(g, y, np.zeros_like(y), 0.458)


def test_detect_peaks_zero_and_empty():
    assert len(detect_peaks(_sr(np.zeros(50)))) == 0
    with pytest.raises(ValueError):
        detect_peaks(SpectrumResult(DEFAULT_GRID, np.array([]), np.array([]), 0.458))
    with pytest.raises(ValueError):
        detect_peaks(_sr(np.ones(5)), rel_threshold=1.5)


def test_detect_peaks_parabolic_refinement():
    x = np.linspace(-1, 1, 201)
    sr = _sr(np.exp(-((x - 0.0123) / 0.2) ** 2), -1, 1)
    ps = detect_peaks(sr)
    assert len(ps) == 1
    assert ps.positions[0] == pytest.approx(0.0123, abs=2e-4)
    # Gaussian FWHM = 2 sqrt(ln 2) * 0.2
    assert ps.widths[0] == pytest.approx(2 * math.sqrt(math.log(2)) * 0.2, rel=2e-3)


def test_detect_peaks_prominence_merges_ripple():
    x = np.linspace(-1, 1, 2001)
    y = np.exp(-(x / 0.3) ** 2) * (1 + 0.05 * np.cos(200 * x))
    assert len(detect_peaks(_sr(y, -1, 1))) > 1
    assert len(detect_peaks(_sr(y, -1, 1), min_prominence=0.1)) == 1


def test_fig2a_single_peak_above_half():
    f = FIXTURES["fig2a"]
    sr = evaluate_spectrum(f.structure, f.dispersion, f.grid)
    pos = detect_peaks(sr, 0.5).positions
    assert np.sum(pos > 0) == 1


def test_predict_support():
    spec = AperiodicPolingSpec(10, 50.0, 0.0)
    d = DispersionParams(0.458, 0.3, 0.0)
    lo, hi = predict_support_aperiodic(spec, d)
    assert lo == hi == pytest.approx(math.pi / 50 / 0.3)
    # fig3d: band in dk is [pi/l_max, pi/l_min] with l_m = 35.51 + (m-1)*0.18
    f = FIXTURES["fig3d"]
    lo, hi = predict_support_aperiodic(f.structure, f.dispersion)
    band = np.array([lo, hi]) * 0.3 + f.dispersion.dk0
    np.testing.assert_allclose(band, [math.pi / (35.51 + 159 * 0.18), math.pi / 35.51], rtol=1e-12)


def test_dilate():
    assert dilate((1.0, 3.0), 0.1) == pytest.approx((0.9, 3.1))
    assert dilate((1.0, 3.0), 0.0) == (1.0, 3.0)


def test_auto_grid():
    f = FIXTURES["fig3b"]
    g = auto_grid(f.structure, f.dispersion)
    lo, hi = dilate(predict_support_aperiodic(f.structure, f.dispersion), 0.5)
    assert (g.min, g.max, g.n_points) == (lo, hi, 8001)
    assert auto_grid(FIXTURES["fig1a"].structure, FIXTURES["fig1a"].dispersion) == DEFAULT_GRID


def test_bandwidth_single_sinc():
    l = 400.0
    spec = PhotonicChirpSpec(1, l)
    d = DispersionParams(0.458, 0.3)
    sr = evaluate_spectrum(spec, d, FrequencyGrid(-0.2, 0.2, 40001))
    bw = bandwidth(sr)
    assert bw.width_omega == pytest.approx(4 * SINC2_HALF_POWER_X / (0.3 * l), rel=1e-6)
    assert bw.width_omega == pytest.approx(5.566 / (0.3 * l), rel=1e-3)
    assert len(bw.intervals) == 1
    assert bw.width_lambda > 0


def test_bandwidth_errors_and_scale_invariance():
    with pytest.raises(ValueError):
        bandwidth(_sr(np.zeros(10)))
    rng = np.random.default_rng(3)
    y = rng.uniform(0, 1, 300)
    a = superlevel_intervals(_sr(y))
    assert superlevel_intervals(_sr(y * 2.0 ** -20)) == a
    b = superlevel_intervals(_sr(y * 1e-7))
    np.testing.assert_allclose(np.array(b), np.array(a), rtol=1e-13)


def test_band_wider_than_any_comb_line():
    a, d_ = FIXTURES["fig1a"], FIXTURES["fig1d"]
    band = bandwidth(evaluate_spectrum(d_.structure, d_.dispersion, d_.grid)).width_omega
    lines = bandwidth(evaluate_spectrum(a.structure, a.dispersion, a.grid)).intervals
    assert all(band > hi - lo for lo, hi in lines)


@pytest.mark.parametrize("name", ["fig1d", "fig1f", "fig3d"])
def test_bandwidth_grid_refinement(name):
    f = get(name)
    coarse = bandwidth(evaluate_spectrum(f.structure, f.dispersion, f.grid)).width_omega
    fine_grid = FrequencyGrid(f.grid.min, f.grid.max, 2 * f.grid.n_points - 1)
    fine = bandwidth(evaluate_spectrum(f.structure, f.dispersion, fine_grid)).width_omega
    assert abs(fine - coarse) < 0.01 * coarse


def test_max_rel_dev_floor():
    assert max_rel_dev([1.0, 0.0], [1.0, 1e-12]) == pytest.approx(1e-6)
    assert max_rel_dev([0.0], [0.0]) == 0.0
    assert max_rel_dev([2.0], [1.0]) == 0.5
