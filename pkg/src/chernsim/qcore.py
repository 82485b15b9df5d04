"""Small-dimension Hilbert space primitives (dims 2 and 4).

States and operators are thin immutable wrappers around complex numpy
arrays. Diagonalization uses a cyclic complex Jacobi solver compiled with
numba, so results are bit-reproducible and independent of LAPACK.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ArgumentError, DegeneracyError, ValidationError

DIMS = (2, 4)
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-9
DEGENERACY_RTOL = 1e-9
JACOBI_TOL = 1e-13


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes).reshape(-1)
        if a.size not in DIMS:
            raise ArgumentError(f"state dimension must be 2 or 4, got {a.size}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("state has non-finite amplitudes")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state not normalized: |psi|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        a = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(a / np.linalg.norm(a))

    @classmethod
    def basis(cls, index: int, dim: int) -> "StateVector":
        a = np.zeros(dim, dtype=np.complex128)
        a[index] = 1.0
        return cls(a)

    @classmethod
    def all_up(cls, n_qubits: int) -> "StateVector":
        return cls.basis(0, 2**n_qubits)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in DIMS:
            raise ArgumentError(f"operator must be 2x2 or 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("operator has non-finite entries")
        err = float(np.max(np.abs(m - m.conj().T)))
        if err > HERMITIAN_TOL:
            raise ValidationError(f"operator not Hermitian (max asymmetry {err:.3e})")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def __matmul__(self, other: "HermitianOperator") -> np.ndarray:
        return self.entries @ other.entries


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    source_dim: int

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


# --- Pauli operators -------------------------------------------------------

_SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli(axis: str, qubit: int, n_qubits: int) -> HermitianOperator:
    """σ^axis on `qubit`; qubit 0 is the left tensor factor."""
    if axis not in _SIGMA:
        raise ArgumentError(f"unknown Pauli axis {axis!r}")
    if n_qubits not in (1, 2):
        raise ArgumentError("n_qubits must be 1 or 2")
    if not 0 <= qubit < n_qubits:
        raise ArgumentError(f"qubit index {qubit} out of range for {n_qubits} qubits")
    m = np.ones((1, 1), dtype=np.complex128)
    for q in range(n_qubits):
        m = np.kron(m, _SIGMA[axis] if q == qubit else np.eye(2))
    return HermitianOperator(m)


# --- Jacobi eigensolver ----------------------------------------------------

@njit(cache=True)
def jacobi_eigh_kernel(h):
    """Cyclic complex Jacobi. Returns ascending eigenvalues and phase-fixed columns."""
    n = h.shape[0]
    a = h.copy()
    for i in range(n):
        a[i, i] = a[i, i].real
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(a[i, j]) ** 2
    scale = np.sqrt(scale)
    if scale > 0.0:
        for _sweep in range(64):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * abs(a[p, q]) ** 2
            if np.sqrt(off) <= 1e-13 * scale:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    r = abs(apq)
                    if r <= 1e-300:
                        continue
                    ph = apq / r
                    theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                    if abs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    upp = c + 0j
                    upq = s + 0j
                    uqp = -s * np.conj(ph)
                    uqq = c * np.conj(ph)
                    for k in range(n):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = akp * upp + akq * uqp
                        a[k, q] = akp * upq + akq * uqq
                    for k in range(n):
                        apk = a[p, k]
                        aqk = a[q, k]
                        a[p, k] = np.conj(upp) * apk + np.conj(uqp) * aqk
                        a[q, k] = np.conj(upq) * apk + np.conj(uqq) * aqk
                    a[p, q] = 0j
                    a[q, p] = 0j
                    a[p, p] = a[p, p].real
                    a[q, q] = a[q, q].real
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = vkp * upp + vkq * uqp
                        v[k, q] = vkp * upq + vkq * uqq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(w, kind="mergesort")
    ws = np.empty(n)
    vs = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        ws[j] = w[order[j]]
        col = v[:, order[j]]
        big = 0.0
        for k in range(n):
            if abs(col[k]) > big:
                big = abs(col[k])
        m = 0
        for k in range(n):
            if abs(col[k]) >= big * (1.0 - 1e-9):
                m = k
                break
        phase = np.conj(col[m]) / abs(col[m])
        for k in range(n):
            vs[k, j] = col[k] * phase
        vs[m, j] = abs(col[m]) + 0j
    return ws, vs


@njit(cache=True)
def eigh_batch_kernel(hs):
    """Diagonalize a stack of Hermitian matrices, shape (m, n, n)."""
    m = hs.shape[0]
    n = hs.shape[1]
    ws = np.empty((m, n))
    vs = np.empty((m, n, n), dtype=np.complex128)
    for i in range(m):
        w, v = jacobi_eigh_kernel(hs[i])
        ws[i] = w
        vs[i] = v
    return ws, vs


@njit(cache=True)
def evolve_kernel(psi, h, dt):
    w, v = jacobi_eigh_kernel(h)
    n = psi.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        c = 0j
        for k in range(n):
            c += np.conj(v[k, j]) * psi[k]
        c *= np.exp(-1j * w[j] * dt)
        for k in range(n):
            out[k] += v[k, j] * c
    return out


def eigh(H: HermitianOperator) -> SpectralDecomposition:
    """Ascending eigenvalues; each eigenvector's largest component is real-positive."""
    if not isinstance(H, HermitianOperator):
        H = HermitianOperator(H)
    w, v = jacobi_eigh_kernel(np.ascontiguousarray(H.entries))
    w.setflags(write=False)
    v.setflags(write=False)
    return SpectralDecomposition(w, v, H.dim)


def eigh_batch(hs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized eigh over a stack (m, n, n); no Hermiticity validation."""
    return eigh_batch_kernel(np.ascontiguousarray(hs, dtype=np.complex128))


def degeneracy_tolerance(H: HermitianOperator) -> float:
    return DEGENERACY_RTOL * max(1.0, H.norm_max())


def ground_state(H: HermitianOperator) -> StateVector:
    """Lowest eigenvector; raises DegeneracyError when the lowest gap is within tolerance."""
    dec = eigh(H)
    gap = float(dec.eigenvalues[1] - dec.eigenvalues[0])
    if gap <= degeneracy_tolerance(H):
        raise DegeneracyError(f"degenerate ground state (gap {gap:.3e})", gap)
    return StateVector(dec.eigenvectors[:, 0])


def expectation(psi: StateVector, A: HermitianOperator) -> float:
    if psi.dim != A.dim:
        raise ArgumentError(f"dimension mismatch: state {psi.dim}, operator {A.dim}")
    val = np.vdot(psi.amplitudes, A.entries @ psi.amplitudes)
    if abs(val.imag) > 1e-10 * max(1.0, A.norm_max()):
        raise ValidationError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def evolve_step(psi: StateVector, H: HermitianOperator, dt: float) -> StateVector:
    """exp(-i H dt) psi through the eigendecomposition of H."""
    if psi.dim != H.dim:
        raise ArgumentError(f"dimension mismatch: state {psi.dim}, operator {H.dim}")
    if not dt > 0:
        raise ArgumentError("dt must be positive")
    out = evolve_kernel(np.ascontiguousarray(psi.amplitudes), np.ascontiguousarray(H.entries), float(dt))
    return StateVector(out)
