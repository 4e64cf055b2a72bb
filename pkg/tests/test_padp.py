import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DTAU, GEOM, GRID, on_grid
from omnipl import (
    FrequencyGrid,
    PathSet,
    PeakConfig,
    UcaGeometry,
    add_noise,
    array_gain,
    beamform_spectrum,
    compute_padp,
    compute_pdp,
    detect_paths,
    estimate_noise_floor,
    make_gaussian,
    make_isotropic,
    synth_dss_cfr,
    synth_vaa_cfr,
)
from omnipl.padp import Padp

THETA = GEOM.element_angles


def vaa_padp(truth, elem, **kw):
    return compute_padp(beamform_spectrum(synth_vaa_cfr(truth, GEOM, elem, GRID)), **kw)


def dss_padp(truth, elem, **kw):
    return compute_padp(synth_dss_cfr(truth, THETA, elem, GRID), **kw)


def test_single_path_peak_is_gain_squared(iso):
    p = vaa_padp(PathSet([THETA[30]], on_grid([40]), amplitude=[1.0]), iso)
    assert p.power.shape == (1001, 240)
    assert p.power[40, 30] == pytest.approx(121.0**2, rel=1e-12)
    assert np.unravel_index(np.argmax(p.power), p.power.shape) == (40, 30)


def test_zero_input(iso):
    p = dss_padp(PathSet(), iso)
    assert not p.power.any()


def test_delay_grid():
    p = dss_padp(PathSet(), make_isotropic())
    assert p.delay_step == pytest.approx(0.4995e-9, abs=1e-13)
    assert p.delays[-1] + p.delay_step == pytest.approx(500e-9, rel=1e-12)
    p4 = dss_padp(PathSet(), make_isotropic(), zero_pad=4)
    assert p4.delay_step == pytest.approx(DTAU / 4, rel=1e-12)


def test_parseval():
    truth = PathSet([0.0, 77.0, -140.0], [3e-9, 41.3e-9, 120.7e-9], amplitude=[1.0, 0.4j, 0.1 + 0.1j])
    cfr = synth_dss_cfr(truth, THETA, make_gaussian(40.0), GRID)
    p = compute_padp(cfr)
    lhs = p.power.sum(axis=0) * p.energy_weight
    rhs = np.mean(np.abs(cfr.data) ** 2, axis=1)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=0)
    # energy weighting keeps the identity under zero padding and windowing
    ph = compute_padp(cfr, zero_pad=4, window="hann")
    w = np.hanning(1003)[1:-1]
    rhs_w = np.sum(np.abs(cfr.data * w) ** 2, axis=1) / np.sum(w**2)
    assert np.allclose(ph.power.sum(axis=0) * ph.energy_weight, rhs_w, rtol=1e-9, atol=0)


def test_hann_keeps_on_grid_peak(horn):
    p = dss_padp(PathSet([THETA[0]], on_grid([60]), amplitude=[0.5]), horn, zero_pad=4, window="hann")
    assert p.power[240, 0] == pytest.approx(0.25, rel=1e-12)


def test_pdp_single_path(horn):
    pdp = compute_pdp(dss_padp(PathSet([THETA[7]], on_grid([25]), amplitude=[1.0]), horn))
    assert np.argmax(pdp) == 25
    assert np.sort(pdp)[-2] < 1e-20


def test_pdp_two_delays_same_angle(horn):
    truth = PathSet([THETA[0]] * 2, [10e-9, 30e-9], amplitude=[1.0, 0.7])
    pdp = compute_pdp(dss_padp(truth, horn))
    top = set(np.argsort(pdp)[-2:])
    assert top == {round(10e-9 / DTAU), round(30e-9 / DTAU)}


def test_flat_noise_pdp():
    noise = add_noise(synth_dss_cfr(PathSet(), THETA, make_isotropic(), GRID), -50.0, 11)
    pdp = compute_pdp(compute_padp(noise))
    db = 10 * np.log10(pdp / np.median(pdp))
    assert np.mean(np.abs(db) <= 3.0) >= 0.99


def test_noise_floor_of_clean_scene(horn):
    p = dss_padp(PathSet([0.0, 90.0], on_grid([40, 140]), amplitude=[1.0, 0.5]), horn)
    assert estimate_noise_floor(p) < 1e-12 * p.power.max()


def test_noise_floor_tracks_injected_noise():
    sigma2_db = -60.0
    noise = add_noise(synth_dss_cfr(PathSet(), THETA, make_isotropic(), GRID), sigma2_db, 5)
    floor = estimate_noise_floor(compute_padp(noise))
    # |q|^2 of white noise averaged over F points is exponential with mean sigma^2 / F
    expected = 10 ** (sigma2_db / 10) / GRID.num_points
    assert abs(10 * np.log10(floor / expected)) < 2.0


def test_noise_floor_of_constant():
    p = Padp(np.full((50, 4), 3.5), np.arange(50) * 1e-9, np.arange(4.0), "dss", 50)
    assert estimate_noise_floor(p) == 3.5


def test_noise_floor_needs_enough_bins():
    p = Padp(np.ones((10, 4)), np.arange(10) * 1e-9, np.arange(4.0), "dss", 10)
    with pytest.raises(ValueError):
        estimate_noise_floor(p)


def test_two_co_delay_paths_separated_in_angle(iso, horn):
    truth = PathSet([THETA[0], THETA[60]], on_grid([30, 30]), amplitude=[1.0, 1.0])
    # isotropic elements leave array sidelobes at -7.97 dB, so the dynamic
    # range must stay inside that window
    for elem, cfg in ((iso, PeakConfig(dynamic_range_db=7.0)), (horn, PeakConfig())):
        found = detect_paths(vaa_padp(truth, elem), cfg)
        assert len(found) == 2
        assert sorted(found.azimuth_deg) == [0.0, 90.0]
        assert np.all(found.delay_s == on_grid(30))


def test_isotropic_sidelobes_pass_a_wide_dynamic_range(iso):
    truth = PathSet([THETA[0]], on_grid([30]), amplitude=[1.0])
    assert len(detect_paths(vaa_padp(truth, iso), PeakConfig(dynamic_range_db=25.0))) > 1


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_noise_only_detects_nothing(seed):
    noise = add_noise(synth_vaa_cfr(PathSet(), GEOM, make_isotropic(), GRID), -40.0, seed)
    assert len(detect_paths(compute_padp(beamform_spectrum(noise)))) == 0


def test_single_path_round_trip(horn):
    truth = PathSet([THETA[100]], on_grid([77]), amplitude=[0.01 * np.exp(1j)])
    found = detect_paths(vaa_padp(truth, horn))
    assert len(found) == 1
    g = array_gain(GEOM, horn, GRID.center, THETA[100])
    assert found.power[0] / g**2 == pytest.approx(1e-4, rel=1e-6)


def test_delay_mode_reports_strongest_angle(horn):
    truth = PathSet([THETA[10], THETA[100]], on_grid([20, 50]), amplitude=[1.0, 0.5])
    found = detect_paths(dss_padp(truth, horn), mode="delay")
    assert list(found.azimuth_deg) == [THETA[10], THETA[100]]
    assert found.power == pytest.approx([1.0, 0.25], rel=1e-12)
    with pytest.raises(ValueError):
        detect_paths(dss_padp(truth, horn), mode="nope")


@pytest.fixture(scope="module")
def multipath_padp():
    truth = PathSet.from_db([0.0, 35.0, 120.0, -100.0, 170.0], on_grid([20, 21, 45, 80, 81]),
                            [0.0, -4.0, -8.0, -12.0, -15.0], [0.0, 50.0, 100.0, 150.0, 200.0])
    return vaa_padp(truth, make_gaussian(40.0))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 30.0), st.floats(0.0, 10.0))
def test_threshold_monotonicity(multipath_padp, thr, extra):
    lo = detect_paths(multipath_padp, PeakConfig(threshold_db_above_noise=thr, dynamic_range_db=60.0))
    hi = detect_paths(multipath_padp, PeakConfig(threshold_db_above_noise=thr + extra, dynamic_range_db=60.0))
    assert len(hi) <= len(lo)


def test_detections_are_strict_local_maxima(multipath_padp):
    P = multipath_padp.power
    found = detect_paths(multipath_padp)
    assert len(found) == 5
    for az, tau in zip(found.azimuth_deg, found.delay_s):
        d = int(np.argmin(np.abs(multipath_padp.delays - tau)))
        a = int(np.argmin(np.abs(multipath_padp.angles - az % 360)))
        box = [P[(d + i) % P.shape[0], (a + j) % P.shape[1]] for i in (-1, 0, 1) for j in (-1, 0, 1) if i or j]
        assert P[d, a] > max(box)


def test_detection_permutation_invariant(horn):
    az = [THETA[0], THETA[80], THETA[160]]
    tau = on_grid([10, 30, 50])
    amp = [1.0, 0.5j, 0.3]
    a = detect_paths(vaa_padp(PathSet(az, tau, amplitude=amp), horn))
    b = detect_paths(vaa_padp(PathSet(az[::-1], tau[::-1], amplitude=amp[::-1]), horn))
    assert np.array_equal(a.azimuth_deg, b.azimuth_deg)
    assert np.array_equal(a.delay_s, b.delay_s)
    assert np.allclose(a.power, b.power, rtol=1e-12)


def test_detection_rotation_equivariant():
    geom = UcaGeometry(48, 0.15)
    grid = FrequencyGrid(28e9, 30e9, 201)
    elem = make_gaussian(40.0)
    th = geom.element_angles
    tau = np.array([5, 9]) / (grid.num_points * grid.step)

    def run(shift):
        truth = PathSet([th[3] + shift * 7.5, th[20] + shift * 7.5], tau, amplitude=[1.0, 0.6])
        return detect_paths(compute_padp(beamform_spectrum(synth_vaa_cfr(truth, geom, elem, grid))))

    base, moved = run(0), run(5)
    assert np.allclose((moved.azimuth_deg - base.azimuth_deg) % 360, 37.5)
    assert np.array_equal(moved.delay_s, base.delay_s)


def test_peak_config_validation():
    with pytest.raises(ValueError):
        PeakConfig(threshold_db_above_noise=0)
    with pytest.raises(ValueError):
        PeakConfig(delay_neighborhood=0)
