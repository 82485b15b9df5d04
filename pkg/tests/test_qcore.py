import numpy as np
import pytest
from hypothesis import given, strategies as st

from chernsim.errors import DegeneracyError, ValidationError
from chernsim.qcore import (
    HermitianOperator, StateVector, eigh, eigh_batch, evolve_step, expectation, ground_state, pauli,
)
from conftest import SX, SY, SZ, random_hermitian

finite = st.floats(-50, 50, allow_nan=False)


def test_pauli_y_single_qubit():
    assert np.array_equal(pauli("y", 0, 1).entries, np.array([[0, -1j], [1j, 0]]))


def test_pauli_z_on_first_of_two_is_left_kron_factor():
    assert np.array_equal(pauli("z", 0, 2).entries, np.diag([1, 1, -1, -1]).astype(complex))


def test_pauli_squares_to_identity():
    p = pauli("x", 1, 2).entries
    assert np.allclose(p @ p, np.eye(4), atol=0)


@pytest.mark.parametrize("q", [0, 1])
def test_pauli_commutator_algebra(q):
    x, y, z = (pauli(a, q, 2).entries for a in "xyz")
    assert np.max(np.abs(x @ y - y @ x - 2j * z)) <= 1e-14


def test_state_vector_rejects_unnormalized():
    with pytest.raises(ValidationError):
        StateVector(np.array([1.0, 1.0], dtype=complex))


def test_hermitian_operator_rejects_nonhermitian():
    with pytest.raises(ValidationError):
        HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eigh_sigma_z():
    assert np.allclose(eigh(HermitianOperator(SZ)).eigenvalues, [-1, 1], atol=1e-14)


def test_eigh_transverse_field_half_splitting():
    assert np.allclose(eigh(HermitianOperator(-0.5 * SX)).eigenvalues, [-0.5, 0.5], atol=1e-14)


def test_eigh_two_qubit_theta0_contains_coupled_pair():
    from chernsim.controls import hamiltonian_from_controls
    g = 0.37
    w = eigh(hamiltonian_from_controls([0, 0, 0.9, 0, 0, 0.9, g], 2)).eigenvalues
    assert np.min(np.abs(w - g)) < 1e-12 and np.min(np.abs(w + g)) < 1e-12


@pytest.mark.parametrize("d", [2, 4])
def test_eigh_reconstruction_and_orthonormality_1000_random(rng, d):
    hs = np.stack([random_hermitian(rng, d, rng.uniform(0.01, 100)) for _ in range(1000)])
    w, v = eigh_batch(hs)
    for h, wi, vi in zip(hs, w, v):
        scale = np.max(np.abs(h))
        assert np.max(np.abs(h - (vi * wi) @ vi.conj().T)) <= 1e-10 * scale
        assert np.max(np.abs(vi.conj().T @ vi - np.eye(d))) <= 1e-10
    # oracle: LAPACK eigenvalues
    assert np.allclose(w, np.linalg.eigvalsh(hs), atol=1e-10 * np.max(np.abs(hs)))


def test_eigh_is_deterministic(rng):
    h = HermitianOperator(random_hermitian(rng, 4))
    a, b = eigh(h), eigh(h)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_ground_state_raises_on_degeneracy():
    with pytest.raises(DegeneracyError):
        ground_state(HermitianOperator(np.zeros((2, 2), dtype=complex)))


def test_expectations_of_basis_and_sigma_y_eigenstate():
    up = StateVector.basis(0, 2)
    assert expectation(up, HermitianOperator(SZ)) == pytest.approx(1.0)
    assert expectation(up, HermitianOperator(SY)) == pytest.approx(0.0)
    y_plus = StateVector.normalized(np.array([1, 1j]))
    assert expectation(y_plus, HermitianOperator(SY)) == pytest.approx(1.0, abs=1e-14)


def test_evolve_eigenstate_stays_put():
    psi = evolve_step(StateVector.basis(0, 2), HermitianOperator(-0.5 * 0.3 * SZ), 7.0)
    assert abs(expectation(psi, HermitianOperator(SZ)) - 1) <= 1e-12


def test_evolve_pi_rotation_flips():
    H_r = 0.2
    psi = evolve_step(StateVector.basis(0, 2), HermitianOperator(-0.5 * H_r * SX), np.pi / H_r)
    assert abs(abs(psi.amplitudes[1]) - 1) < 1e-12


def test_evolve_semigroup(rng):
    h = HermitianOperator(random_hermitian(rng, 4))
    psi = StateVector.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
    two = evolve_step(evolve_step(psi, h, 0.3), h, 0.3)
    one = evolve_step(psi, h, 0.6)
    assert np.max(np.abs(two.amplitudes - one.amplitudes)) <= 1e-12


def test_evolve_matches_matrix_exponential_oracle(rng):
    from scipy.linalg import expm
    h = random_hermitian(rng, 4)
    psi = StateVector.normalized(rng.normal(size=4) + 0j)
    out = evolve_step(psi, HermitianOperator(h), 0.8)
    assert np.allclose(out.amplitudes, expm(-0.8j * h) @ psi.amplitudes, atol=1e-12)


@given(st.lists(finite, min_size=16, max_size=16), st.floats(1e-3, 100), st.sampled_from([2, 4]))
def test_unitarity_property(vals, dt, d):
    a = np.array(vals[: d * d]).reshape(d, d) if d == 4 else np.array(vals[:4]).reshape(2, 2)
    h = HermitianOperator(0.5 * (a + a.T) + 0.5j * (a - a.T))
    psi = StateVector.basis(0, h.dim)
    assert abs(np.linalg.norm(evolve_step(psi, h, dt).amplitudes) - 1) <= 1e-12
