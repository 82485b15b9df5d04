"""Shared fixtures and independent oracles (numpy LAPACK, scipy ODE)."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings
from scipy.integrate import solve_ivp

settings.register_profile("chernsim", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("chernsim")

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def dense_hamiltonian(row, n_qubits: int) -> np.ndarray:
    """Hamiltonian built with numpy kron from a control row [x1,y1,z1,x2,y2,z2,g]."""
    if n_qubits == 1:
        return -0.5 * (row[0] * SX + row[1] * SY + row[2] * SZ)
    q1 = [np.kron(s, I2) for s in (SX, SY, SZ)]
    q2 = [np.kron(I2, s) for s in (SX, SY, SZ)]
    h = -0.5 * sum(row[a] * q1[a] + row[3 + a] * q2[a] for a in range(3))
    return h + 0.5 * row[6] * (np.kron(SX, SX) + np.kron(SY, SY))


def ode_expectations(schedule, psi0, times, op_list, rtol=1e-11, atol=1e-12):
    """Integrate i dψ/dt = H(t)ψ with DOP853 and return ⟨op⟩ at `times`."""
    n = schedule.n_qubits

    def rhs(t, y):
        psi = y[: y.size // 2] + 1j * y[y.size // 2:]
        h = dense_hamiltonian(schedule.controls(min(max(t, 0.0), schedule.T_total))[0], n)
        d = -1j * (h @ psi)
        return np.concatenate([d.real, d.imag])

    y0 = np.concatenate([psi0.real, psi0.imag])
    sol = solve_ivp(rhs, (times[0], times[-1]), y0, method="DOP853", t_eval=times, rtol=rtol, atol=atol)
    psi = sol.y[: y0.size // 2] + 1j * sol.y[y0.size // 2:]
    return [np.real(np.einsum("it,ij,jt->t", psi.conj(), op, psi)) for op in op_list]


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
