"""Sphere-to-Brillouin-zone mapping and spin-texture Chern numbers.

The parameter sphere is projected onto the hexagonal zone: the northern
hemisphere goes to a triangle centred on a K corner, the southern one to a
triangle centred on the neighbouring K′ corner. Three rotated copies
(sectors) tile the zone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .berry import ChernEstimate, QubitParams, _nearest
from .controls import ControlVector
from .errors import ArgumentError, ResolutionError
from .propagator import adiabatic_prepare
from .qcore import eigh_batch

N_SECTORS = 3
PREPS = ("exact_ground", "adiabatic_sim")
TEXTURE_METHODS = ("solid_angle", "planar")


def _rot(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class BrillouinZone:
    """Regular hexagon of corner radius b (= |K − K′|) centred on Γ."""

    b: float = 1.0

    def __post_init__(self):
        if not self.b > 0:
            raise ArgumentError("b must be positive")

    @property
    def vertices(self) -> np.ndarray:
        a = np.arange(6) * np.pi / 3
        return self.b * np.stack([np.cos(a), np.sin(a)], axis=1)

    def K(self, sector: int = 0) -> np.ndarray:
        return _rot(2 * np.pi * sector / 3) @ np.array([self.b, 0.0])

    def K_prime(self, sector: int = 0) -> np.ndarray:
        return _rot(2 * np.pi * sector / 3) @ (self.b * np.array([0.5, math.sqrt(3) / 2]))


@dataclass(frozen=True)
class TexturePoint:
    k: tuple
    bloch: tuple
    sector: int
    theta: float
    phi: float


@dataclass(frozen=True)
class DiracParams:
    m0: float
    mt: float
    v_F: float = 1.0

    @classmethod
    def from_qubit(cls, H_0: float, H_r: float) -> "DiracParams":
        """H_0/H_r plays the role of m0/mt."""
        return cls(m0=H_0, mt=H_r)


def triangle_radius(phi, b: float = 1.0):
    """Distance from a corner to the equilateral triangle of circumradius b around it."""
    p = np.mod(np.asarray(phi, dtype=float), 2 * np.pi)
    half = b * math.sin(math.pi / 6)
    with np.errstate(divide="ignore"):
        r = np.where(p < 2 * np.pi / 3, half / np.sin(5 * np.pi / 6 - p),
                     np.where(p < 4 * np.pi / 3, half / np.abs(np.cos(p)), half / np.sin(p - 7 * np.pi / 6)))
    return r


def _triangle_radius_slope(phi, b: float = 1.0):
    p = np.mod(np.asarray(phi, dtype=float), 2 * np.pi)
    half = b * math.sin(math.pi / 6)
    s1 = 5 * np.pi / 6 - p
    s3 = p - 7 * np.pi / 6
    return np.where(p < 2 * np.pi / 3, half * np.cos(s1) / np.sin(s1) ** 2,
                    np.where(p < 4 * np.pi / 3, -half * np.sin(p) / np.cos(p) ** 2,
                             -half * np.cos(s3) / np.sin(s3) ** 2))


def _check_angles(theta):
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > np.pi) or not np.all(np.isfinite(th)):
        raise ArgumentError("theta must lie in [0, pi]")


def confocal_map(theta, phi, sector: int = 0, bz: BrillouinZone = BrillouinZone()):
    """(θ, φ) -> (k_x, k_y). Vectorized over theta/phi arrays."""
    if sector not in range(N_SECTORS):
        raise ArgumentError("sector must be 0, 1 or 2")
    _check_angles(theta)
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    r = triangle_radius(ph, bz.b)
    north = th < np.pi / 2
    rho = np.where(north, r * np.tan(th / 2), r * np.tan((np.pi - th) / 2))
    direction = np.where(north, ph, np.pi - ph)
    K, Kp = np.array([bz.b, 0.0]), bz.b * np.array([0.5, math.sqrt(3) / 2])
    cx = np.where(north, K[0], Kp[0])
    cy = np.where(north, K[1], Kp[1])
    x = cx + rho * np.cos(direction)
    y = cy + rho * np.sin(direction)
    R = _rot(2 * np.pi * sector / 3)
    kx = R[0, 0] * x + R[0, 1] * y
    ky = R[1, 0] * x + R[1, 1] * y
    if np.ndim(kx) == 0:
        return float(kx), float(ky)
    return kx, ky


def confocal_jacobian(theta, phi, bz: BrillouinZone = BrillouinZone()) -> np.ndarray:
    """∂(k_x, k_y)/∂(θ, φ), shape (..., 2, 2); rotation by the sector leaves det unchanged."""
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    r = triangle_radius(ph, bz.b)
    dr = _triangle_radius_slope(ph, bz.b)
    north = th < np.pi / 2
    half = np.where(north, th / 2, (np.pi - th) / 2)
    t = np.tan(half)
    sec2 = 1.0 / np.cos(half) ** 2
    d_rho_theta = np.where(north, 0.5 * r * sec2, -0.5 * r * sec2)
    rho = r * t
    psi = np.where(north, ph, np.pi - ph)
    c, s = np.cos(psi), np.sin(psi)
    J = np.empty(np.broadcast(th, ph).shape + (2, 2))
    J[..., 0, 0] = d_rho_theta * c
    J[..., 1, 0] = d_rho_theta * s
    # d/dφ of rho·(cos ψ, sin ψ); ψ' = ±1
    sign = np.where(north, 1.0, -1.0)
    J[..., 0, 1] = dr * t * c - sign * rho * s
    J[..., 1, 1] = dr * t * s + sign * rho * c
    return J


@dataclass(frozen=True, eq=False)
class TextureGrid:
    thetas: np.ndarray
    phis: np.ndarray
    bloch: np.ndarray  # (n_theta, n_phi, 3) unit vectors
    valid: np.ndarray  # (n_theta, n_phi) bool
    prep: str = "exact_ground"
    params: Optional[QubitParams] = None
    bz: BrillouinZone = BrillouinZone()
    flags: frozenset = field(default_factory=frozenset)

    def points(self) -> list:
        out = []
        for sector in range(N_SECTORS):
            kx, ky = confocal_map(self.thetas[:, None] * np.ones_like(self.phis)[None, :],
                                  np.ones_like(self.thetas)[:, None] * self.phis[None, :], sector, self.bz)
            for i, th in enumerate(self.thetas):
                for j, ph in enumerate(self.phis):
                    if self.valid[i, j]:
                        out.append(TexturePoint((float(kx[i, j]), float(ky[i, j])), tuple(self.bloch[i, j]),
                                                sector, float(th), float(ph)))
        return out


def _field(params: QubitParams, theta: np.ndarray) -> np.ndarray:
    return np.stack([params.H_r * np.sin(theta), np.zeros_like(theta), params.H_0 + params.H_r * np.cos(theta)], 1)


def _rotate_about_z(vectors: np.ndarray, phis: np.ndarray) -> np.ndarray:
    c, s = np.cos(phis), np.sin(phis)
    x, y, z = vectors[:, 0], vectors[:, 1], vectors[:, 2]
    return np.stack([x[:, None] * c[None, :] - y[:, None] * s[None, :],
                     x[:, None] * s[None, :] + y[:, None] * c[None, :],
                     np.broadcast_to(z[:, None], (vectors.shape[0], phis.size))], axis=-1)


def _exact_ground_bloch(params: QubitParams, thetas: np.ndarray):
    F = _field(params, thetas)
    hs = np.empty((thetas.size, 2, 2), dtype=np.complex128)
    hs[:, 0, 0] = -0.5 * F[:, 2]
    hs[:, 1, 1] = 0.5 * F[:, 2]
    hs[:, 0, 1] = -0.5 * F[:, 0]
    hs[:, 1, 0] = -0.5 * F[:, 0]
    w, v = eigh_batch(hs)
    g = v[:, :, 0]
    z = np.conj(g[:, 0]) * g[:, 1]
    bloch = np.stack([2 * z.real, 2 * z.imag, np.abs(g[:, 0]) ** 2 - np.abs(g[:, 1]) ** 2], 1)
    tol = 1e-9 * np.maximum(1.0, np.abs(hs).max(axis=(1, 2)))
    return bloch, (w[:, 1] - w[:, 0]) > tol


def texture_grid(params: QubitParams, n_theta: int = 50, n_phi: int = 50, prep: str = "exact_ground",
                 bz: BrillouinZone = BrillouinZone(), **prep_options) -> TextureGrid:
    """Ground-state Bloch vectors on a θ × φ grid of the parameter sphere.

    θ includes both poles; φ is periodic. Each θ row is computed at φ = 0 and
    rotated about z, which is exact because the Hamiltonian is cylindrically
    symmetric. Degenerate points are marked invalid.
    """
    if params.n_qubits != 1:
        raise ArgumentError("textures are defined for single-qubit parameters")
    if n_theta < 8 or n_phi < 8:
        raise ArgumentError("texture grid must be at least 8x8")
    if prep not in PREPS:
        raise ArgumentError(f"unknown preparation {prep!r}")
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    flags = set()
    if prep == "exact_ground":
        row, ok = _exact_ground_bloch(params, thetas)
    else:
        F = _field(params, thetas)
        row = np.zeros((n_theta, 3))
        ok = np.ones(n_theta, dtype=bool)
        for i in range(n_theta):
            res = adiabatic_prepare(ControlVector(tuple(F[i])), **prep_options)
            flags |= res.flags
            if "degenerate_encounter" in res.flags:
                ok[i] = False
                continue
            v = res.bloch[0].as_array()
            row[i] = v / np.linalg.norm(v)
    bloch = _rotate_about_z(row, phis)
    valid = np.broadcast_to(ok[:, None], (n_theta, n_phi)).copy()
    for a in (bloch, valid, thetas, phis):
        a.setflags(write=False)
    return TextureGrid(thetas, phis, bloch, valid, prep, params, bz, frozenset(flags))


def _check_resolution(grid: TextureGrid):
    b, ok = grid.bloch, grid.valid
    d_theta = np.einsum("ijk,ijk->ij", b[1:], b[:-1])
    d_phi = np.einsum("ijk,ijk->ij", b, np.roll(b, -1, axis=1))
    ok_theta = ok[1:] & ok[:-1]
    ok_phi = ok & np.roll(ok, -1, axis=1)
    if np.any(d_theta[ok_theta] < 0) or np.any(d_phi[ok_phi] < 0):
        raise ResolutionError("adjacent Bloch vectors more than 90 degrees apart; refine the grid")


def _triangle_solid_angle(a, b, c):
    num = np.einsum("...k,...k->...", a, np.cross(b, c))
    den = 1.0 + np.einsum("...k,...k->...", a, b) + np.einsum("...k,...k->...", b, c) \
        + np.einsum("...k,...k->...", c, a)
    return 2.0 * np.arctan2(num, den)


def _solid_angle_total(grid: TextureGrid) -> float:
    b = grid.bloch
    a_ = b[:-1]
    b_ = b[1:]
    c_ = np.roll(b[1:], -1, axis=1)
    d_ = np.roll(b[:-1], -1, axis=1)
    cell_ok = grid.valid[:-1] & grid.valid[1:] & np.roll(grid.valid[:-1], -1, 1) & np.roll(grid.valid[1:], -1, 1)
    omega = _triangle_solid_angle(a_, b_, c_) + _triangle_solid_angle(a_, c_, d_)
    return float(np.sum(omega[cell_ok])) / (4 * np.pi)


def _planar_total(grid: TextureGrid) -> float:
    """(1/4π) Σ σ·(∂σ/∂k_x × ∂σ/∂k_y) |det J| Δθ Δφ at cell centres, one sector."""
    b = grid.bloch
    th, ph = grid.thetas, grid.phis
    dth = np.diff(th)[:, None]
    dph = 2 * np.pi / ph.size
    b00, b10 = b[:-1], b[1:]
    b01, b11 = np.roll(b[:-1], -1, 1), np.roll(b[1:], -1, 1)
    centre = 0.25 * (b00 + b10 + b01 + b11)
    s_theta = 0.5 * (b10 - b00 + b11 - b01) / dth[..., None]
    s_phi = 0.5 * (b01 - b00 + b11 - b10) / dph
    tc = 0.5 * (th[:-1] + th[1:])
    pc = ph + 0.5 * dph
    J = confocal_jacobian(tc[:, None], pc[None, :], grid.bz)
    Jinv = np.linalg.inv(J)
    # σ_k = σ_(θ,φ) · J^{-1}
    s_kx = s_theta * Jinv[..., 0, 0][..., None] + s_phi * Jinv[..., 1, 0][..., None]
    s_ky = s_theta * Jinv[..., 0, 1][..., None] + s_phi * Jinv[..., 1, 1][..., None]
    integrand = np.einsum("...k,...k->...", centre, np.cross(s_kx, s_ky)) * np.abs(np.linalg.det(J))
    cell_ok = grid.valid[:-1] & grid.valid[1:] & np.roll(grid.valid[:-1], -1, 1) & np.roll(grid.valid[1:], -1, 1)
    return float(np.sum((integrand * dth * dph)[cell_ok])) / (4 * np.pi)


def texture_chern(grid: TextureGrid, method: str = "solid_angle"):
    """Texture winding number as a ChernEstimate (method="texture").

    method="both" returns a dict with both estimates. The per-sector value is
    the Chern number; `info["full_fbz"]` holds the sum over all three sectors.
    """
    if method == "both":
        return {m: texture_chern(grid, m) for m in TEXTURE_METHODS}
    if method not in TEXTURE_METHODS:
        raise ArgumentError(f"unknown texture method {method!r}")
    _check_resolution(grid)
    value = _solid_angle_total(grid) if method == "solid_angle" else _planar_total(grid)
    info = {"texture_method": method, "full_fbz": N_SECTORS * value, "per_sector": value}
    flags = frozenset({"degenerate_encounter"}) if not grid.valid.all() else frozenset()
    return ChernEstimate(value, _nearest(value), "texture", None, flags, info)


def dirac_phase(d: DiracParams) -> str:
    """"trivial" iff |m0| > |mt|, "boundary" when equal, else "topological"."""
    if abs(d.m0) == abs(d.mt):
        return "boundary"
    return "trivial" if abs(d.m0) > abs(d.mt) else "topological"
