import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chernsim.controls import (
    ControlVector, adiabatic_prep_schedule, adiabaticity_measure, elliptic_ramp, hamiltonian_at,
    hamiltonian_from_controls, meridian_ramp, two_qubit_ramp, up_state_is_ground,
)
from chernsim.errors import ArgumentError, DegenerateManifoldError, UnsupportedError, ValidationError
from chernsim.units import MHZ
from conftest import SZ, dense_hamiltonian

H_R = 10 * MHZ


def test_meridian_endpoints_and_midpoint():
    s = meridian_ramp(H_R, 0.0, 600.0)
    assert s.at(0.0).as_array() == pytest.approx([0, 0, H_R, 0, 0, 0, 0], abs=1e-15)
    assert s.at(300.0).as_array() == pytest.approx([H_R, 0, 0, 0, 0, 0, 0], abs=1e-15)
    assert float(s.theta(s.T_f)) == math.pi


def test_meridian_never_encloses_origin_when_offset_exceeds_radius():
    s = meridian_ramp(H_R, 12 * MHZ, 600.0)
    z = s.controls(np.linspace(0, 600, 1001))[:, 2]
    assert np.all(z > 0)
    assert z[-1] == pytest.approx(2 * MHZ)


def test_meridian_rejects_zero_radius_and_bad_time():
    with pytest.raises(DegenerateManifoldError):
        meridian_ramp(0.0, 0.0, 100.0)
    with pytest.raises(ValidationError):
        meridian_ramp(H_R, 0.0, -1.0)


def test_at_rejects_time_outside_window():
    with pytest.raises(ArgumentError):
        meridian_ramp(H_R, 0.0, 100.0).at(100.1)


def test_circle_is_special_ellipse():
    ts = np.linspace(0, 400, 97)
    assert np.array_equal(elliptic_ramp(H_R, H_R, 400.0).controls(ts), meridian_ramp(H_R, 0.0, 400.0).controls(ts))


def test_ellipse_start_and_adiabaticity():
    s = elliptic_ramp(H_R, H_R, 400.0)
    assert s.at(0).as_array()[:3] == pytest.approx([0, 0, H_R])
    assert adiabaticity_measure(s) == pytest.approx(400 * 10e-3 * math.sqrt(2), rel=1e-12)  # 5.66


def test_two_qubit_decoupled_limit_and_endpoints():
    s = two_qubit_ramp(H_R, 0.0, 0.0, 500.0)
    ts = np.linspace(0, 500, 33)
    c, m = s.controls(ts), meridian_ramp(H_R, 0.0, 500.0).controls(ts)
    assert np.array_equal(c[:, 0:3], m[:, 0:3]) and np.array_equal(c[:, 3:6], m[:, 0:3])
    s = two_qubit_ramp(H_R, 6 * MHZ, 4 * MHZ, 500.0)
    assert s.at(0).as_array() == pytest.approx([0, 0, 16 * MHZ, 0, 0, H_R, 4 * MHZ])
    assert s.at(500).as_array()[2] == pytest.approx(-4 * MHZ)


def test_prep_schedule_linear_midpoint_and_hold():
    target = ControlVector((0.03, -0.01, 0.05), (0.01, 0.02, 0.04), 0.02)
    s = adiabatic_prep_schedule(target)
    assert s.T_total == 1000.0
    assert s.at(250.0).as_array() == pytest.approx(target.as_array() / 2, abs=1e-15)
    for t in (500.0, 731.0, 1000.0):
        assert s.at(t).as_array() == pytest.approx(target.as_array(), abs=1e-15)


def test_prep_schedule_geodesic_keeps_magnitude_and_lands_on_target():
    target = ControlVector((H_R, 0, 0))
    s = adiabatic_prep_schedule(target, path="geodesic")
    c = s.controls(np.linspace(0, 500, 11))[:, :3]
    assert np.allclose(np.linalg.norm(c, axis=1), H_R, rtol=1e-12)
    assert s.at(800).as_array()[:3] == pytest.approx([H_R, 0, 0], abs=1e-15)


def test_single_qubit_start_hamiltonian():
    h = hamiltonian_at(meridian_ramp(H_R, 3 * MHZ, 100.0), 0.0).entries
    assert np.allclose(h, -0.5 * (13 * MHZ) * SZ, atol=1e-15)


def test_two_qubit_theta0_matrix_entries():
    H_0, g = 6 * MHZ, 4 * MHZ
    h = hamiltonian_at(two_qubit_ramp(H_R, H_0, g, 100.0), 0.0).entries
    Hz1, Hz2 = H_0 + H_R, H_R
    expected = np.diag([-(Hz1 + Hz2) / 2, -(Hz1 - Hz2) / 2, (Hz1 - Hz2) / 2, (Hz1 + Hz2) / 2]).astype(complex)
    expected[1, 2] = expected[2, 1] = g
    assert np.allclose(h, expected, atol=1e-15)


def test_hamiltonian_matches_kron_oracle(rng):
    for _ in range(200):
        row = rng.normal(size=7)
        for n in (1, 2):
            assert np.allclose(hamiltonian_from_controls(row, n).entries, dense_hamiltonian(row, n), atol=1e-14)


def test_hermiticity_over_1000_random_schedule_times(rng):
    for _ in range(1000):
        s = two_qubit_ramp(rng.uniform(0.01, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 300.0)
        h = hamiltonian_at(s, rng.uniform(0, 300)).entries
        assert np.max(np.abs(h - h.conj().T)) <= 1e-12


def test_adiabaticity_examples():
    assert adiabaticity_measure(meridian_ramp(H_R, 0, 600.0)) == pytest.approx(6.0)
    assert adiabaticity_measure(meridian_ramp(H_R, 0, 100.0)) == pytest.approx(1.0)
    assert adiabaticity_measure(meridian_ramp(H_R, 0, 1200.0)) == pytest.approx(12.0)
    with pytest.raises(UnsupportedError):
        adiabaticity_measure(adiabatic_prep_schedule(ControlVector((0, 0, H_R))))


def test_up_state_ground_check():
    assert up_state_is_ground(two_qubit_ramp(H_R, 0.0, 4 * MHZ, 100.0))
    assert not up_state_is_ground(two_qubit_ramp(H_R, 0.0, 15 * MHZ, 100.0))


@given(st.floats(0.001, 0.5), st.floats(-0.5, 0.5), st.floats(1, 2000), st.floats(0, 1),
       st.floats(0, 2 * math.pi))
def test_constant_radius_property(H_r, H_0, T_f, frac, phi):
    for s in (meridian_ramp(H_r, H_0, T_f, phi), two_qubit_ramp(H_r, H_0, 0.1, T_f, phi)):
        c = s.at(frac * T_f).as_array()
        assert math.hypot(math.hypot(c[0], c[1]), c[2] - H_0) == pytest.approx(H_r, rel=1e-12)


@given(st.floats(0.001, 0.5), st.floats(1, 2000), st.floats(0, 1))
def test_schedule_evaluation_is_pure(H_r, T_f, frac):
    s = meridian_ramp(H_r, 0.0, T_f)
    assert s.at(frac * T_f) == s.at(frac * T_f)
