"""Chern number estimators and the analytic oracles they are checked against."""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .controls import adiabaticity_measure, hamiltonians_batch
from .errors import ArgumentError, DegeneracyError
from .propagator import TrajectoryRecord
from .qcore import eigh_batch, pauli

METHODS = ("dynamical", "spectral", "texture", "monopole_count", "lattice")
FLAGS = ("near_boundary", "degenerate_encounter", "low_adiabaticity")
LOW_ADIABATICITY = 1.5


@dataclass(frozen=True)
class ChernEstimate:
    value: float
    rounded: Optional[int]
    method: str
    adiabaticity: Optional[float] = None
    flags: frozenset = field(default_factory=frozenset)
    info: dict = field(default_factory=dict, compare=False)

    @property
    def residual(self) -> float:
        """|value − rounded|; NaN when rounding was refused."""
        return abs(self.value - self.rounded) if self.rounded is not None else math.nan


@dataclass(frozen=True)
class QubitParams:
    n_qubits: int
    H_r: float
    H_0: float = 0.0
    g: float = 0.0

    def __post_init__(self):
        if self.n_qubits not in (1, 2):
            raise ArgumentError("n_qubits must be 1 or 2")
        if not self.H_r > 0:
            raise ArgumentError("H_r must be positive")


@dataclass(frozen=True)
class MonopoleSet:
    positions: tuple  # H_z values on the sphere axis, rad/ns
    charge: int = 1


@dataclass(frozen=True)
class CurvatureSample:
    theta: float
    B: float


SPECTRAL_MIN_OVERLAP = 0.9999  # ground-state overlap across half a Simpson panel
SPECTRAL_MAX_DEPTH = 20


def _nearest(x: float) -> int:
    return int(math.floor(x + 0.5))


# --- dynamical ---------------------------------------------------------------

def chern_dynamical(traj: TrajectoryRecord, H_r: Optional[float] = None) -> ChernEstimate:
    """Ch = ∫ (H_r/2) sin(πt/T_f) Σ_q ⟨σ_φ,q⟩ dt by trapezoid over the recorded samples.

    σ_φ is the spin component along the azimuthal direction of the ramp plane
    (σ^y for the default φ = 0 plane). For ellipses the prefactor is the
    in-plane amplitude H_X_max unless `H_r` is given.
    """
    s = traj.schedule
    if s.kind not in ("meridian", "elliptic", "two_qubit"):
        raise ArgumentError(f"dynamical Chern needs a ramp schedule, got {s.kind}")
    if f"sy_q{s.n_qubits}" not in traj.observables:
        raise ArgumentError("trajectory has no <sigma_y> series")
    amp = H_r if H_r is not None else (s.H_X_max if s.kind == "elliptic" else s.H_r)
    t = np.asarray(traj.sample_times)
    sy = traj.total("y")
    if s.phi_plane != 0.0:
        sy = math.cos(s.phi_plane) * sy - math.sin(s.phi_plane) * traj.total("x")
    weight = 0.5 * amp * np.sin(np.pi * t / s.T_f)
    value = float(np.trapezoid(weight * sy, t))
    A = adiabaticity_measure(s)
    flags = {"low_adiabaticity"} if A < LOW_ADIABATICITY else set()
    if "degenerate_encounter" in traj.flags:
        flags.add("degenerate_encounter")
    return ChernEstimate(value, _nearest(value), "dynamical", A, frozenset(flags))


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


# --- spectral ----------------------------------------------------------------

def _sphere_hamiltonians(p: QubitParams, thetas: np.ndarray) -> np.ndarray:
    ctrl = np.zeros((thetas.size, 7))
    s, c = np.sin(thetas), np.cos(thetas)
    ctrl[:, 0] = p.H_r * s
    ctrl[:, 2] = p.H_0 + p.H_r * c
    if p.n_qubits == 2:
        ctrl[:, 3] = p.H_r * s
        ctrl[:, 5] = p.H_r * c
        ctrl[:, 6] = p.g
    return hamiltonians_batch(ctrl, p.n_qubits)


@lru_cache(maxsize=None)
def _sum_pauli(axis: str, n_qubits: int) -> np.ndarray:
    return sum(pauli(axis, q, n_qubits).entries for q in range(n_qubits))


def _curvature_batch(params: QubitParams, thetas: np.ndarray, phase_perturbation=None):
    """Curvature at each θ; NaN where the ground state is degenerate. Returns (B, gaps, ground vectors)."""
    thetas = np.asarray(thetas, dtype=float)
    hs = _sphere_hamiltonians(params, thetas)
    w, v = eigh_batch(hs)
    if phase_perturbation is not None:
        v = v * np.exp(1j * np.asarray(phase_perturbation))[None, None, :]
    n = params.n_qubits
    s, c = np.sin(thetas), np.cos(thetas)
    sx, sy, sz = (_sum_pauli(a, n) for a in "xyz")
    d_theta = -0.5 * params.H_r * (c[:, None, None] * sx - s[:, None, None] * sz)
    d_phi = -0.5 * params.H_r * s[:, None, None] * sy
    v0 = v[:, :, 0]
    vh = np.conj(np.swapaxes(v, 1, 2))
    a = np.einsum("tnk,tk->tn", vh, np.einsum("tkl,tl->tk", d_phi, v0))  # ⟨n|∂φH|0⟩
    b = np.einsum("tnk,tk->tn", vh, np.einsum("tkl,tl->tk", d_theta, v0))  # ⟨n|∂θH|0⟩
    x = np.conj(a[:, 1:]) * b[:, 1:]  # ⟨0|∂φH|n⟩⟨n|∂θH|0⟩
    gaps = w[:, 1] - w[:, 0]
    tol = 1e-9 * np.maximum(1.0, np.abs(hs).max(axis=(1, 2)))
    degenerate = gaps <= tol
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.sum(-2.0 * x.imag / (w[:, 1:] - w[:, :1]) ** 2, axis=1)
    B[degenerate] = np.nan
    return B, gaps, v0


def spectral_curvature(params: QubitParams, theta: float, _phase_perturbation=None) -> CurvatureSample:
    """B_θφ(θ) = i Σ_{n≠0} [⟨0|∂_φH|n⟩⟨n|∂_θH|0⟩ − c.c.]/(E_n − E_0)² at φ = 0.

    Uses only matrix elements of the analytic derivatives
    ∂_θH = −(H_r/2) Σ_q (cosθ σx_q − sinθ σz_q), ∂_φH = −(H_r/2) sinθ Σ_q σy_q
    and energies. Oriented so that one enclosed monopole gives +sinθ/2.
    """
    B, gaps, _ = _curvature_batch(params, np.array([float(theta)]), _phase_perturbation)
    if np.isnan(B[0]):
        raise DegeneracyError(f"degenerate ground state at theta={theta:.6g} (gap {gaps[0]:.3e})", float(gaps[0]))
    return CurvatureSample(float(theta), float(B[0]))


def simpson_weights(n: int, a: float, b: float) -> np.ndarray:
    if n < 3 or n % 2 == 0:
        raise ArgumentError("Simpson quadrature needs an odd node count >= 3")
    h = (b - a) / (n - 1)
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def _overlap(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.abs(np.einsum("ik,ik->i", np.conj(u), v))


def chern_spectral(params: QubitParams, n_theta: int = 721) -> ChernEstimate:
    """Simpson integral of B_θφ over θ ∈ [0, π]; refuses to round on degeneracy.

    Starts from n_theta nodes and bisects every Simpson panel across which the
    ground state turns by more than SPECTRAL_MIN_OVERLAP, so narrow avoided
    crossings are resolved. A panel still unresolved after SPECTRAL_MAX_DEPTH
    bisections holds a level crossing and is treated like a degenerate node.
    """
    w = simpson_weights(n_theta, 0.0, math.pi)  # validates n_theta
    nodes = np.linspace(0.0, math.pi, n_theta)
    B, _, v0 = _curvature_batch(params, nodes)
    if np.any(np.isnan(B)):
        return ChernEstimate(math.nan, None, "spectral", None, frozenset({"degenerate_encounter"}))
    # panels as (left, right) node triples: a, a+h, a+2h
    a, b = nodes[0:-1:2], nodes[2::2]
    Ba, Bm, Bb = B[0:-1:2], B[1::2], B[2::2]
    va, vm, vb = v0[0:-1:2], v0[1::2], v0[2::2]
    total, refinements = 0.0, 0
    for depth in range(SPECTRAL_MAX_DEPTH + 1):
        smooth = np.minimum(_overlap(va, vm), _overlap(vm, vb)) >= SPECTRAL_MIN_OVERLAP
        total += float(np.sum((b - a)[smooth] / 6.0 * (Ba + 4 * Bm + Bb)[smooth]))
        if smooth.all():
            break
        if depth == SPECTRAL_MAX_DEPTH:
            return ChernEstimate(math.nan, None, "spectral", None, frozenset({"degenerate_encounter"}),
                                 {"refinements": refinements})
        keep = ~smooth
        a, b, Ba, Bm, Bb, va, vm, vb = (x[keep] for x in (a, b, Ba, Bm, Bb, va, vm, vb))
        m = 0.5 * (a + b)
        q = np.concatenate([0.5 * (a + m), 0.5 * (m + b)])
        Bq, _, vq = _curvature_batch(params, q)
        refinements += q.size
        if np.any(np.isnan(Bq)):
            return ChernEstimate(math.nan, None, "spectral", None, frozenset({"degenerate_encounter"}),
                                 {"refinements": refinements})
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        Ba, Bm, Bb = np.concatenate([Ba, Bm]), Bq, np.concatenate([Bm, Bb])
        va, vm, vb = np.concatenate([va, vm]), vq, np.concatenate([vm, vb])
    return ChernEstimate(total, _nearest(total), "spectral", None, frozenset(), {"refinements": refinements})


# --- monopoles ----------------------------------------------------------------

def degeneracy_loci(H_0: float, g: float) -> MonopoleSet:
    """Roots of |H_z + H_0/2| = √(H_0²/4 + g²): H_z = (−H_0 ± √(H_0² + 4g²))/2."""
    r = math.hypot(H_0, 2.0 * g)
    return MonopoleSet(((-H_0 + r) / 2.0, (-H_0 - r) / 2.0))


def monopole_count(H_0: float, g: float, H_r: float, n_qubits: int = 2) -> ChernEstimate:
    """Number of degeneracies strictly inside the sphere of radius H_r."""
    if not H_r > 0:
        raise ArgumentError("H_r must be positive")
    positions = degeneracy_loci(H_0, g).positions if n_qubits == 2 else (-H_0,)
    count = sum(1 for z in positions if abs(z) < H_r)
    flags = frozenset({"near_boundary"}) if any(abs(abs(z) - H_r) < 1e-6 * H_r for z in positions) else frozenset()
    return ChernEstimate(float(count), count, "monopole_count", None, flags)


def sector_energies(H_z: float, H_0: float, g: float) -> np.ndarray:
    """Eigenvalues of the two-qubit Hamiltonian on the field axis, ascending.

    Fields (0, 0, H_z + H_0) on qubit 1 and (0, 0, H_z) on qubit 2:
    E_↑↑ = −(H_z + H_0/2), E_↓↓ = +(H_z + H_0/2), E_↑↓ = ±√(H_0²/4 + g²).
    """
    e = H_z + H_0 / 2.0
    r = math.hypot(H_0 / 2.0, g)
    return np.sort(np.array([-e, e, -r, r]))
