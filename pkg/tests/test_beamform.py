import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GEOM, GRID
from omnipl import (
    SPEED_OF_LIGHT,
    BeamformConfig,
    FrequencyGrid,
    PathSet,
    UcaGeometry,
    array_beam_pattern,
    array_gain,
    beamform_spectrum,
    beamwidth_deg,
    make_gaussian,
    make_isotropic,
    synth_dss_cfr,
    synth_vaa_cfr,
)
from omnipl.beamform import steering_matrix, steering_weight, window_mask, wrap_deg_pm

SMALL_GRID = FrequencyGrid(28e9, 30e9, 70)  # not a multiple of the chunk size
SMALL_GEOM = UcaGeometry(36, 0.15)


def _direct_spectrum(cfr, steer, B):
    """Brute force: one weight matrix per frequency."""
    f = cfr.grid.frequencies
    return np.stack([steering_matrix(cfr.geometry, fi, steer, B) @ cfr.data[:, i] for i, fi in enumerate(f)])


def test_wrap_convention():
    assert wrap_deg_pm(180.0) == 180.0
    assert wrap_deg_pm(-180.0) == 180.0
    assert wrap_deg_pm(190.0) == -170.0


def test_weight_outside_window_is_zero():
    # element 81 sits at 120 degrees
    assert steering_weight(GEOM, 29e9, 0.0, 81) == 0


def test_weight_minus_one():
    geom = UcaGeometry(240, 14.5 * SPEED_OF_LIGHT / 29e9)
    assert steering_weight(geom, 29e9, 0.0, 1) == pytest.approx(-1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(28e9, 30e9), st.integers(0, 239), st.integers(-60, 60))
def test_steered_phase_cancels(f, k, offset):
    steer = GEOM.element_angles[k]
    p = (k + offset) % 240 + 1
    w = steering_weight(GEOM, f, steer, p)
    d = steer - GEOM.element_angles[p - 1]
    a = np.exp(2j * np.pi * f * GEOM.radius * np.cos(np.deg2rad(d)) / SPEED_OF_LIGHT)
    assert abs(w * a - 1) <= 1e-12


@pytest.mark.parametrize("k", [0, 1, 60, 119, 239])
def test_window_cardinality(k):
    m = window_mask([GEOM.element_angles[k]], GEOM.element_angles, 90.0)
    assert m.sum() == 121
    assert np.count_nonzero(steering_matrix(GEOM, 29e9, GEOM.element_angles[k])) == 121


def test_single_path_coherent_sum():
    cfr = synth_vaa_cfr(PathSet([45.0], [20e-9], amplitude=[1.0]), GEOM, make_isotropic(), GRID)
    Q = beamform_spectrum(cfr).Q
    assert np.allclose(np.abs(Q[:, 30]), 121.0, rtol=1e-12)


def test_zero_in_zero_out():
    cfr = synth_vaa_cfr(PathSet(), SMALL_GEOM, make_isotropic(), SMALL_GRID)
    assert not beamform_spectrum(cfr).Q.any()


def test_matches_direct_evaluation():
    truth = PathSet([10.0, 133.0, -77.0], [1e-9, 6e-9, 11e-9], amplitude=[1.0, 0.4j, 0.2])
    cfr = synth_vaa_cfr(truth, SMALL_GEOM, make_gaussian(40.0), SMALL_GRID)
    steer = np.arange(0.0, 360.0, 2.5)
    for B in (45.0, 90.0, 180.0):
        Q = beamform_spectrum(cfr, BeamformConfig(B, tuple(steer))).Q
        want = _direct_spectrum(cfr, steer, B)
        assert np.abs(Q - want).max() <= 1e-12 * np.abs(want).max()


def test_superposition():
    elem = make_gaussian(40.0)
    a = PathSet([0.0], [2e-9], amplitude=[1.0])
    b = PathSet([100.0], [5e-9], amplitude=[0.5j])
    Qa = beamform_spectrum(synth_vaa_cfr(a, SMALL_GEOM, elem, SMALL_GRID)).Q
    Qb = beamform_spectrum(synth_vaa_cfr(b, SMALL_GEOM, elem, SMALL_GRID)).Q
    Qab = beamform_spectrum(synth_vaa_cfr(a.union(b), SMALL_GEOM, elem, SMALL_GRID)).Q
    assert np.abs(Qab - Qa - Qb).max() <= 1e-12 * np.abs(Qab).max()


def test_decomposition_into_beam_patterns():
    elem = make_gaussian(40.0)
    truth = PathSet([20.0, -150.0], [3e-9, 9e-9], amplitude=[0.8, 0.3 - 0.2j])
    cfr = synth_vaa_cfr(truth, SMALL_GEOM, elem, SMALL_GRID)
    spec = beamform_spectrum(cfr)
    f = SMALL_GRID.frequencies
    want = np.zeros_like(spec.Q)
    for az, tau, a in zip(truth.azimuth_deg, truth.delay_s, truth.amplitude):
        for i, fi in enumerate(f):
            want[i] += a * np.exp(-2j * np.pi * fi * tau) * array_beam_pattern(SMALL_GEOM, elem, fi, az, spec.angles)
    assert np.abs(spec.Q - want).max() <= 1e-9 * np.abs(want).max()


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 35), st.floats(-180, 180))
def test_grid_shift_equivariance(shift, az):
    elem = make_gaussian(40.0)
    step = 360.0 / SMALL_GEOM.num_elements
    truth = PathSet([az], [4e-9], amplitude=[1.0])
    moved = PathSet([az + shift * step], [4e-9], amplitude=[1.0])
    Q0 = beamform_spectrum(synth_vaa_cfr(truth, SMALL_GEOM, elem, SMALL_GRID)).Q
    Q1 = beamform_spectrum(synth_vaa_cfr(moved, SMALL_GEOM, elem, SMALL_GRID)).Q
    assert np.allclose(Q1, np.roll(Q0, shift, axis=1), rtol=0, atol=1e-9 * np.abs(Q0).max())


def test_workers_do_not_change_bits():
    truth = PathSet([5.0, 200.0], [7e-9, 30e-9], amplitude=[1.0, 0.3])
    cfr = synth_vaa_cfr(truth, GEOM, make_gaussian(40.0), GRID)
    one = beamform_spectrum(cfr, workers=1).Q
    many = beamform_spectrum(cfr, workers=4).Q
    assert one.tobytes() == many.tobytes()


def test_rejects_dss_input():
    dss = synth_dss_cfr(PathSet(), np.arange(0, 360, 10.0), make_isotropic(), SMALL_GRID)
    with pytest.raises(ValueError, match="VAA"):
        beamform_spectrum(dss)


def test_array_gain_values():
    assert array_gain(GEOM, make_isotropic(), 29e9, 0.0) == pytest.approx(121.0, rel=1e-12)
    assert array_gain(GEOM, make_isotropic(), 28.3e9, 1.5) == pytest.approx(121.0, rel=1e-12)
    tiny = UcaGeometry(240, 1e-18)
    assert array_gain(tiny, make_isotropic(), 29e9, 0.0, B=180.0) == pytest.approx(240.0, rel=1e-12)


def test_main_lobe_is_maximum():
    steer = np.arange(0.0, 360.0, 0.25)
    for elem in (make_isotropic(), make_gaussian(40.0)):
        v = np.abs(array_beam_pattern(GEOM, elem, 29e9, 30.0, steer))
        assert np.argmax(v) == 120
        assert v.max() == pytest.approx(array_gain(GEOM, elem, 29e9, 30.0), rel=1e-12)


def test_directional_elements_narrow_the_beam():
    steer = np.arange(0.0, 360.0, 0.05)
    v = np.abs(array_beam_pattern(GEOM, make_gaussian(40.0), 29e9, 0.0, steer)) ** 2
    assert beamwidth_deg(v, steer) < 40.0


def test_beamwidth_of_gaussian_curve():
    ang = np.arange(0.0, 360.0, 0.01)
    p = np.exp(-4 * np.log(2) * (wrap_deg_pm(ang - 90.0) / 12.0) ** 2)
    assert beamwidth_deg(p, ang, -10 * np.log10(2)) == pytest.approx(12.0, abs=1e-4)
