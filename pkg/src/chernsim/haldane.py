"""Four-band stacked triangular-lattice model (orbitals A↑, B↑, B↓, C↓).

Sublattice A couples to B↑ and C to B↓ through nearest-neighbour hopping t1;
A and C carry opposite complex next-nearest-neighbour hopping t2 (phase π/2);
t3 hybridizes B↑ with B↓; h_z is a Zeeman shift. Under 3√3·t2 = H_r,
−t3 = g, 2h_z = H_0 the ground band carries the two-qubit Chern number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .berry import ChernEstimate
from .errors import ArgumentError, GaplessError
from .qcore import HermitianOperator, eigh, eigh_batch

SQRT3 = math.sqrt(3.0)

# nearest-neighbour displacements and next-nearest-neighbour vectors
NN_VECTORS = np.array([[0.0, 1.0], [-SQRT3 / 2, -0.5], [SQRT3 / 2, -0.5]])
NNN_VECTORS = np.array([NN_VECTORS[1] - NN_VECTORS[2], NN_VECTORS[2] - NN_VECTORS[0], NN_VECTORS[0] - NN_VECTORS[1]])
BRAVAIS = np.array([NN_VECTORS[1] - NN_VECTORS[0], NN_VECTORS[2] - NN_VECTORS[0]])
RECIPROCAL = 2 * np.pi * np.linalg.inv(BRAVAIS).T  # rows G1, G2 with G_i·R_j = 2π δ_ij
K_POINT = np.array([4 * np.pi / (3 * SQRT3), 0.0])
K_PRIME_POINT = -K_POINT


@dataclass(frozen=True)
class HaldaneParams:
    t1: float
    t2: float
    t3: float = 0.0
    h_z: float = 0.0
    phase: float = math.pi / 2

    def __post_init__(self):
        if not self.t1 > 0:
            raise ArgumentError("t1 must be positive")
        if self.phase != math.pi / 2:
            raise ArgumentError("hopping phase is fixed at pi/2")
        if not all(math.isfinite(x) for x in (self.t1, self.t2, self.t3, self.h_z)):
            raise ArgumentError("hoppings must be finite")


@dataclass(frozen=True, eq=False)
class BlochPoint:
    k: tuple
    H_k: HermitianOperator
    band_energies: np.ndarray


def nn_cos_sum(k) -> float:
    return float(np.sum(np.cos(NN_VECTORS @ np.asarray(k, dtype=float))))


def nnn_sin_sum(k):
    k = np.asarray(k, dtype=float)
    return np.sin(k @ NNN_VECTORS.T).sum(axis=-1)


def nn_form_factor(k):
    """Σ_j exp(i k·(a_j − a_1)): periodic in the reciprocal lattice, vanishes at K and K′."""
    k = np.asarray(k, dtype=float)
    return np.exp(1j * (k @ (NN_VECTORS - NN_VECTORS[0]).T)).sum(axis=-1)


def bloch_matrices(p: HaldaneParams, ks: np.ndarray) -> np.ndarray:
    """Stack of 4x4 Bloch Hamiltonians for momenta ks with shape (..., 2)."""
    ks = np.asarray(ks, dtype=float)
    S = nnn_sin_sum(ks)
    c = -p.t1 * nn_form_factor(ks)
    H = np.zeros(ks.shape[:-1] + (4, 4), dtype=np.complex128)
    H[..., 0, 0] = -2 * p.t2 * S - p.h_z
    H[..., 1, 1] = -p.h_z
    H[..., 2, 2] = p.h_z
    H[..., 3, 3] = 2 * p.t2 * S + p.h_z
    H[..., 1, 2] = H[..., 2, 1] = p.t3
    for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)):
        H[..., i, j] = c
        H[..., j, i] = np.conj(c)
    return H


def bloch_hamiltonian(p: HaldaneParams, k) -> BlochPoint:
    H = HermitianOperator(bloch_matrices(p, np.asarray(k, dtype=float)))
    return BlochPoint(tuple(float(x) for x in k), H, eigh(H).eigenvalues)


def from_qubit_params(H_r: float, g: float, H_0: float, scale: float = 1.0, t1: float | None = None) -> HaldaneParams:
    """3√3·t2 = H_r, t3 = −g, h_z = H_0/2 (all divided by `scale`).

    t1 defaults to max(5|t2|, |t3|, |h_z|), enough to keep the ground band
    separated away from the zone corners.
    """
    if not H_r > 0:
        raise ArgumentError("H_r must be positive")
    t2 = H_r / (3 * SQRT3 * scale)
    t3 = -g / scale
    h_z = H_0 / (2 * scale)
    if t1 is None:
        t1 = max(5 * abs(t2), abs(t3), abs(h_z))
    return HaldaneParams(t1=t1, t2=t2, t3=t3, h_z=h_z)


def _k_grid(N: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    frac = np.stack([i / N, j / N], axis=-1)
    return frac @ RECIPROCAL


def lattice_chern(p: HaldaneParams, band: int = 0, N: int = 48) -> ChernEstimate:
    """Link-variable plaquette Chern number of one band on an N×N zone grid."""
    if band not in range(4):
        raise ArgumentError("band must be 0..3")
    if N < 3:
        raise ArgumentError("N must be at least 3")
    ks = _k_grid(N)
    w, v = eigh_batch(bloch_matrices(p, ks).reshape(-1, 4, 4))
    w = w.reshape(N, N, 4)
    gaps = []
    if band > 0:
        gaps.append(w[..., band] - w[..., band - 1])
    if band < 3:
        gaps.append(w[..., band + 1] - w[..., band])
    min_gap = float(min(gap.min() for gap in gaps))
    if min_gap <= 1e-10:
        raise GaplessError(f"band {band} touches a neighbour on the grid (gap {min_gap:.3e})")
    u = v.reshape(N, N, 4, 4)[..., band]
    u1 = np.roll(u, -1, axis=0)
    u2 = np.roll(u, -1, axis=1)
    u12 = np.roll(u1, -1, axis=1)

    def link(a, b):
        z = np.einsum("...k,...k->...", a.conj(), b)
        return z / np.abs(z)

    F = np.angle(link(u, u1) * link(u1, u12) * link(u12, u2) * link(u2, u))
    raw = float(F.sum() / (2 * np.pi))
    value = float(round(raw))
    return ChernEstimate(value, int(value), "lattice", None, frozenset(),
                         {"raw": raw, "N": N, "band": band, "min_gap": min_gap})


def corner_path(n: int = 201, extent: float = 1.5) -> np.ndarray:
    """Straight cut through K′, Γ and K, extended by `extent` times |K|."""
    s = np.linspace(-extent, extent, n)
    return s[:, None] * K_POINT[None, :]


def band_dispersion(p: HaldaneParams, k_path) -> np.ndarray:
    """Ascending band energies along k_path, shape (n_k, 4)."""
    ks = np.atleast_2d(np.asarray(k_path, dtype=float))
    if ks.shape[0] == 0:
        raise ArgumentError("k_path is empty")
    w, _ = eigh_batch(bloch_matrices(p, ks))
    return w
