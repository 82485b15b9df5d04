"""Pulse schedules and the instantaneous qubit Hamiltonian.

A control vector packs the fields as ``[x1, y1, z1, x2, y2, z2, g]`` in
rad/ns. The Hamiltonian is

    H = -1/2 Σ_q H_q·σ_q + (g/2)(σx1 σx2 + σy1 σy2)

in the basis ↑↑, ↑↓, ↓↑, ↓↓ with σz|↑⟩ = +|↑⟩.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numba import njit

from .errors import ArgumentError, DegenerateManifoldError, DegeneracyError, UnsupportedError, ValidationError
from .qcore import HermitianOperator, StateVector, eigh

KINDS = ("meridian", "elliptic", "two_qubit", "adiabatic_prep")
PREP_PATHS = ("linear", "geodesic")


@dataclass(frozen=True)
class ControlVector:
    """Fields per qubit and coupling, rad/ns."""

    q1: tuple[float, float, float]
    q2: tuple[float, float, float] = (0.0, 0.0, 0.0)
    g: float = 0.0

    def __post_init__(self):
        q1 = tuple(float(x) for x in self.q1)
        q2 = tuple(float(x) for x in self.q2)
        if len(q1) != 3 or len(q2) != 3:
            raise ArgumentError("each qubit field needs three components")
        if not all(math.isfinite(x) for x in (*q1, *q2, float(self.g))):
            raise ValidationError("control vector must be finite")
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "q2", q2)
        object.__setattr__(self, "g", float(self.g))

    def as_array(self) -> np.ndarray:
        return np.array([*self.q1, *self.q2, self.g])

    @classmethod
    def from_array(cls, a) -> "ControlVector":
        a = [float(x) for x in a]
        return cls(tuple(a[0:3]), tuple(a[3:6]), a[6])


@dataclass(frozen=True)
class ControlSchedule:
    kind: str
    n_qubits: int
    T_f: float
    H_r: float = 0.0
    H_0: float = 0.0
    g: float = 0.0
    H_X_max: float = 0.0
    H_Z_max: float = 0.0
    phi_plane: float = 0.0
    target: Optional[ControlVector] = None
    T_hold: float = 0.0
    path: str = "linear"
    phi_hint: float = 0.0
    time_reversed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown schedule kind {self.kind!r}")
        if self.n_qubits not in (1, 2):
            raise ArgumentError("n_qubits must be 1 or 2")
        if not (math.isfinite(self.T_f) and self.T_f > 0):
            raise ValidationError("T_f must be positive")
        if self.path not in PREP_PATHS:
            raise ArgumentError(f"unknown prep path {self.path!r}")

    @property
    def T_total(self) -> float:
        return self.T_f + self.T_hold if self.kind == "adiabatic_prep" else self.T_f

    @property
    def v_theta(self) -> float:
        return math.pi / self.T_f

    def theta(self, t):
        return np.pi * np.asarray(t, dtype=float) / self.T_f

    def reversed(self) -> "ControlSchedule":
        return replace(self, time_reversed=not self.time_reversed)

    def controls(self, ts) -> np.ndarray:
        """Vectorized evaluator: times (n,) -> control rows (n, 7)."""
        t = np.atleast_1d(np.asarray(ts, dtype=float))
        if self.time_reversed:
            t = self.T_total - t
        out = np.zeros((t.size, 7))
        if self.kind == "adiabatic_prep":
            return self._prep_controls(t, out)
        th = np.pi * t / self.T_f
        s, c = np.sin(th), np.cos(th)
        cp, sp = math.cos(self.phi_plane), math.sin(self.phi_plane)
        if self.kind == "elliptic":
            out[:, 0] = self.H_X_max * s * cp
            out[:, 1] = self.H_X_max * s * sp
            out[:, 2] = self.H_Z_max * c
            return out
        out[:, 0] = self.H_r * s * cp
        out[:, 1] = self.H_r * s * sp
        out[:, 2] = self.H_0 + self.H_r * c
        if self.kind == "two_qubit":
            out[:, 3] = out[:, 0]
            out[:, 4] = out[:, 1]
            out[:, 5] = self.H_r * c
            out[:, 6] = self.g
        return out

    def _prep_controls(self, t, out):
        target = self.target.as_array()
        frac = np.clip(t / self.T_f, 0.0, 1.0)
        if self.path == "linear":
            return frac[:, None] * target[None, :]
        for q in range(self.n_qubits):
            vec = target[3 * q:3 * q + 3]
            mag = float(np.linalg.norm(vec))
            if mag == 0.0:
                continue
            n = vec / mag
            alpha = math.acos(max(-1.0, min(1.0, n[2])))
            rho = math.hypot(n[0], n[1])
            if rho > 1e-15:
                ex, ey = n[0] / rho, n[1] / rho
            else:
                ex, ey = math.cos(self.phi_hint), math.sin(self.phi_hint)
            beta = alpha * frac
            out[:, 3 * q] = mag * np.sin(beta) * ex
            out[:, 3 * q + 1] = mag * np.sin(beta) * ey
            out[:, 3 * q + 2] = mag * np.cos(beta)
        out[:, 6] = frac * target[6]
        return out

    def at(self, t: float) -> ControlVector:
        t = float(t)
        if not (0.0 <= t <= self.T_total):
            raise ArgumentError(f"t={t} outside [0, {self.T_total}]")
        return ControlVector.from_array(self.controls(t)[0])


def _check_radius(H_r: float, T_f: float):
    if not H_r > 0:
        raise DegenerateManifoldError("H_r must be positive (zero-radius manifold)")
    if not T_f > 0:
        raise ValidationError("T_f must be positive")


def meridian_ramp(H_r: float, H_0: float, T_f: float, phi_plane: float = 0.0) -> ControlSchedule:
    """Single-qubit ramp θ = πt/T_f at fixed radius H_r about (0, 0, H_0)."""
    _check_radius(H_r, T_f)
    return ControlSchedule("meridian", 1, float(T_f), H_r=float(H_r), H_0=float(H_0), phi_plane=float(phi_plane))


def elliptic_ramp(H_X_max: float, H_Z_max: float, T_f: float) -> ControlSchedule:
    """H_X = H_X_max sin(πt/T_f), H_Z = H_Z_max cos(πt/T_f)."""
    if not (H_X_max > 0 and H_Z_max > 0):
        raise DegenerateManifoldError("ellipse semi-axes must be positive")
    if not T_f > 0:
        raise ValidationError("T_f must be positive")
    return ControlSchedule("elliptic", 1, float(T_f), H_X_max=float(H_X_max), H_Z_max=float(H_Z_max))


def two_qubit_ramp(H_r: float, H_0: float, g: float, T_f: float, phi_plane: float = 0.0) -> ControlSchedule:
    """Both qubits ramp on radius H_r; H_0 offsets qubit 1 only; g is constant."""
    _check_radius(H_r, T_f)
    return ControlSchedule("two_qubit", 2, float(T_f), H_r=float(H_r), H_0=float(H_0), g=float(g),
                           phi_plane=float(phi_plane))


def adiabatic_prep_schedule(target: ControlVector, T_ramp: float = 500.0, T_hold: float = 500.0,
                            path: str = "linear", phi_hint: float = 0.0, n_qubits: int = 1) -> ControlSchedule:
    """Ramp from zero field to `target` over T_ramp, then hold.

    path="linear" scales every component linearly. path="geodesic" keeps the
    field magnitude fixed and turns its direction from +z to the target,
    which is what actually carries |↑⟩ along to the target ground state.
    """
    if not (T_ramp > 0 and T_hold > 0):
        raise ValidationError("T_ramp and T_hold must be positive")
    if not isinstance(target, ControlVector):
        target = ControlVector.from_array(target)
    return ControlSchedule("adiabatic_prep", n_qubits, float(T_ramp), target=target, T_hold=float(T_hold),
                           path=path, phi_hint=float(phi_hint))


# --- Hamiltonian construction ----------------------------------------------

@njit(cache=True)
def fill_hamiltonian(c, n_qubits, h):
    """Write the Hamiltonian for control row `c` into `h` (2x2 or 4x4)."""
    h[:, :] = 0j
    if n_qubits == 1:
        h[0, 0] = -0.5 * c[2]
        h[1, 1] = 0.5 * c[2]
        h[0, 1] = -0.5 * (c[0] - 1j * c[1])
        h[1, 0] = -0.5 * (c[0] + 1j * c[1])
        return
    for a in range(2):
        sa = 1.0 - 2.0 * a
        for b in range(2):
            sb = 1.0 - 2.0 * b
            h[2 * a + b, 2 * a + b] = -0.5 * (sa * c[2] + sb * c[5])
    off1 = -0.5 * (c[0] - 1j * c[1])
    off2 = -0.5 * (c[3] - 1j * c[4])
    for b in range(2):
        h[b, 2 + b] += off1
        h[2 + b, b] += np.conj(off1)
    for a in range(2):
        h[2 * a, 2 * a + 1] += off2
        h[2 * a + 1, 2 * a] += np.conj(off2)
    h[1, 2] += c[6]
    h[2, 1] += c[6]


@njit(cache=True)
def hamiltonians_batch(ctrl, n_qubits):
    """Hamiltonians for each control row of `ctrl` (m, 7) -> (m, d, d)."""
    d = 2**n_qubits
    out = np.empty((ctrl.shape[0], d, d), dtype=np.complex128)
    for i in range(ctrl.shape[0]):
        fill_hamiltonian(ctrl[i], n_qubits, out[i])
    return out


def hamiltonian_from_controls(cv, n_qubits: int) -> HermitianOperator:
    row = cv.as_array() if isinstance(cv, ControlVector) else np.asarray(cv, dtype=float)
    h = np.zeros((2**n_qubits, 2**n_qubits), dtype=np.complex128)
    fill_hamiltonian(row, n_qubits, h)
    return HermitianOperator(h)


def hamiltonian_at(s: ControlSchedule, t: float) -> HermitianOperator:
    return hamiltonian_from_controls(s.at(t), s.n_qubits)


def adiabaticity_measure(s: ControlSchedule) -> float:
    """A = T_f·H_r/2π (sphere ramps) or T_f·√(H_X²+H_Z²)/2π (ellipse)."""
    if s.kind in ("meridian", "two_qubit"):
        return s.T_f * s.H_r / (2 * math.pi)
    if s.kind == "elliptic":
        return s.T_f * math.hypot(s.H_X_max, s.H_Z_max) / (2 * math.pi)
    raise UnsupportedError("adiabaticity is undefined for adiabatic_prep schedules")


def up_state_is_ground(s: ControlSchedule) -> bool:
    """True when |↑…↑⟩ is the non-degenerate ground state of H(0)."""
    dec = eigh(hamiltonian_at(s, 0.0))
    w = dec.eigenvalues
    tol = 1e-9 * max(1.0, float(np.max(np.abs(w))))
    if w[1] - w[0] <= tol:
        return False
    return abs(dec.eigenvectors[0, 0]) > 1 - 1e-9
