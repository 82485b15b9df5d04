"""Parameter sweeps, shot noise, and the figure preset registry."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import __version__
from .berry import ChernEstimate, QubitParams, chern_dynamical, chern_spectral, degeneracy_loci, monopole_count
from .bzmap import texture_chern, texture_grid
from .controls import adiabaticity_measure, elliptic_ramp, meridian_ramp, two_qubit_ramp
from .errors import ArgumentError, ChernSimError
from .haldane import HaldaneParams, band_dispersion, corner_path, from_qubit_params, lattice_chern
from .propagator import TrajectoryRecord, propagate
from .units import MHZ

KINDS = ("single", "two_qubit", "elliptic")
AXIS_NAMES = ("H_r", "H_0", "g", "H_X", "H_Z")
SWEEP_METHODS = ("dynamical", "spectral", "monopole_count", "lattice")
DEFAULT_SHOTS = 300


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ArgumentError(f"unknown axis {self.name!r}")
        if self.count < 2:
            raise ArgumentError("axis count must be >= 2")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """A 2-D grid of ramp experiments. Field values are rad/ns, times ns."""

    kind: str
    axes: tuple
    fixed: tuple = ()  # (name, value) pairs
    T_f: float = 1000.0
    target_A: Optional[float] = None
    shots: Optional[int] = None
    seed: int = 0
    methods: tuple = ("dynamical", "spectral", "monopole_count")
    n_record: int = 50
    substeps: int = 64
    name: str = "custom"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown sweep kind {self.kind!r}")
        if len(self.axes) != 2:
            raise ArgumentError("a sweep needs exactly two axes")
        object.__setattr__(self, "axes", tuple(a if isinstance(a, Axis) else Axis(**a) for a in self.axes))
        object.__setattr__(self, "fixed", tuple(sorted((str(k), float(v)) for k, v in dict(self.fixed).items())))
        object.__setattr__(self, "methods", tuple(m for m in SWEEP_METHODS if m in self.methods))
        unknown = set(dict(self.fixed)) - set(AXIS_NAMES)
        if unknown:
            raise ArgumentError(f"unknown fixed parameters {sorted(unknown)}")
        if self.shots is not None and self.shots < 1:
            raise ArgumentError("shots must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError("seed must fit in 64 bits")
        if self.target_A is None and not self.T_f > 0:
            raise ArgumentError("T_f must be positive")

    @property
    def shape(self) -> tuple:
        return (self.axes[0].count, self.axes[1].count)

    def cell_params(self, i: int, j: int) -> dict:
        p = {"H_r": 0.0, "H_0": 0.0, "g": 0.0, "H_X": 0.0, "H_Z": 0.0}
        p.update(dict(self.fixed))
        p[self.axes[0].name] = float(self.axes[0].values[i])
        p[self.axes[1].name] = float(self.axes[1].values[j])
        return p

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axes"] = [asdict(a) for a in self.axes]
        d["fixed"] = [list(kv) for kv in self.fixed]
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        d = dict(d)
        d["axes"] = tuple(Axis(**a) for a in d["axes"])
        d["fixed"] = tuple((k, v) for k, v in d["fixed"])
        d["methods"] = tuple(d["methods"])
        return cls(**d)


@dataclass(frozen=True)
class CellResult:
    i: int
    j: int
    x: float
    y: float
    estimates: dict  # method -> ChernEstimate
    flags: tuple = ()


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    spec: SweepSpec
    cells: tuple  # row-major CellResult
    provenance: dict = field(default_factory=dict)

    def cell(self, i: int, j: int) -> CellResult:
        return self.cells[i * self.spec.shape[1] + j]

    def grid(self, method: str, attr: str = "value") -> np.ndarray:
        out = np.full(self.spec.shape, np.nan)
        for c in self.cells:
            est = c.estimates.get(method)
            if est is not None:
                v = getattr(est, attr)
                out[c.i, c.j] = np.nan if v is None else v
        return out


# --- shot noise ----------------------------------------------------------------

def cell_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, cell index)."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


def sample_observable(p_true, N: int, stream: np.random.Generator):
    """Mean of N ±1 outcomes with P(+1) = (1 + p)/2."""
    if N < 1:
        raise ArgumentError("N must be >= 1")
    p = np.asarray(p_true, dtype=float)
    if np.any(np.abs(p) > 1 + 1e-12) or not np.all(np.isfinite(p)):
        raise ArgumentError("p_true must lie in [-1, 1]")
    prob = np.clip((1.0 + p) / 2.0, 0.0, 1.0)
    k = stream.binomial(N, prob)
    out = (2.0 * k - N) / N
    return float(out) if np.ndim(out) == 0 else out


def noisy_trajectory(traj: TrajectoryRecord, shots: int, stream: np.random.Generator) -> TrajectoryRecord:
    """Replace every recorded expectation by a finite-shot estimate."""
    obs = {key: sample_observable(traj.observables[key], shots, stream) for key in sorted(traj.observables)}
    return replace(traj, observables=obs)


# --- cell evaluation ---------------------------------------------------------------

def _schedule(spec: SweepSpec, p: dict):
    if spec.kind == "elliptic":
        radius = math.hypot(p["H_X"], p["H_Z"])
    else:
        radius = p["H_r"]
    T_f = 2 * math.pi * spec.target_A / radius if spec.target_A is not None else spec.T_f
    if spec.kind == "single":
        return meridian_ramp(p["H_r"], p["H_0"], T_f)
    if spec.kind == "two_qubit":
        return two_qubit_ramp(p["H_r"], p["H_0"], p["g"], T_f)
    return elliptic_ramp(p["H_X"], p["H_Z"], T_f)


def _monopoles(spec: SweepSpec, p: dict) -> ChernEstimate:
    if spec.kind == "elliptic":
        return ChernEstimate(1.0, 1, "monopole_count")  # origin always inside the ellipse
    return monopole_count(p["H_0"], p["g"], p["H_r"], n_qubits=2 if spec.kind == "two_qubit" else 1)


def evaluate_cell(spec: SweepSpec, i: int, j: int) -> CellResult:
    """Run every requested method for one grid point; failures become flags."""
    p = spec.cell_params(i, j)
    estimates, flags = {}, set()
    for method in spec.methods:
        try:
            if method == "dynamical":
                s = _schedule(spec, p)
                traj = propagate(s, n_record=spec.n_record, substeps=spec.substeps)
                flags |= traj.flags
                if spec.shots is not None:
                    traj = noisy_trajectory(traj, spec.shots, cell_rng(spec.seed, i * spec.shape[1] + j))
                estimates[method] = chern_dynamical(traj)
            elif method == "spectral":
                if spec.kind == "elliptic":
                    flags.add("unsupported:spectral")
                    continue
                n = 2 if spec.kind == "two_qubit" else 1
                estimates[method] = chern_spectral(QubitParams(n, p["H_r"], p["H_0"], p["g"]))
            elif method == "monopole_count":
                estimates[method] = _monopoles(spec, p)
            elif method == "lattice":
                if spec.kind != "two_qubit":
                    flags.add("unsupported:lattice")
                    continue
                estimates[method] = lattice_chern(from_qubit_params(p["H_r"], p["g"], p["H_0"]))
        except ChernSimError as exc:
            flags.add(f"error:{method}:{type(exc).__name__}")
    for est in estimates.values():
        flags |= est.flags
    x, y = p[spec.axes[0].name], p[spec.axes[1].name]
    return CellResult(i, j, x, y, estimates, tuple(sorted(flags)))


def _evaluate_chunk(args):
    spec, indices = args
    n_j = spec.shape[1]
    return [evaluate_cell(spec, k // n_j, k % n_j) for k in indices]


def provenance(spec: SweepSpec) -> dict:
    return {"code_version": __version__, "seed": spec.seed, "spec": spec.to_dict()}


def sweep(spec: SweepSpec, workers: int = 1) -> PhaseDiagram:
    """Evaluate every cell independently; results are placed by cell index."""
    n = spec.shape[0] * spec.shape[1]
    if workers <= 1:
        cells = _evaluate_chunk((spec, range(n)))
    else:
        chunks = [list(range(k, n, workers * 4)) for k in range(workers * 4)]
        cells = [None] * n
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, result in zip(chunks, pool.map(_evaluate_chunk, [(spec, c) for c in chunks])):
                for k, cell in zip(idx, result):
                    cells[k] = cell
    return PhaseDiagram(spec, tuple(cells), provenance(spec))


# --- presets ---------------------------------------------------------------------------

FIG4A_POINTS = {  # MHz at H_r/2π = 10 MHz: (H_0, g)
    "A": (2.0, 1.0), "B": (9.0, 1.0), "C": (16.0, 1.0),
    "D": (1.0, 2.0), "E": (1.0, 8.0), "F": (1.0, 14.0),
}
FIG3D_RATIOS = tuple(round(0.1 * k, 10) for k in range(21) if k != 10)
FIGS6_TIMES = (100.0, 200.0, 400.0, 600.0, 800.0)
PRESETS = ("fig2", "fig3a", "fig3d", "fig4b", "fig4c", "figS6", "fig4a_monopoles", "figS3_bands")


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple


@dataclass(frozen=True, eq=False)
class PresetResult:
    name: str
    diagrams: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _mhz_axis(name, lo, hi, count):
    return Axis(name, lo * MHZ, hi * MHZ, count)


def preset_specs(name: str, seed: int = 0, shots: Optional[int] = None) -> dict:
    """SweepSpecs behind the phase-diagram presets, keyed by output name."""
    common = dict(seed=seed, shots=shots)
    if name == "fig3a":
        return {"fig3a": SweepSpec("single", (_mhz_axis("H_r", 1, 20, 21), _mhz_axis("H_0", 1, 20, 21)),
                                   T_f=1000.0, name="fig3a", **common)}
    if name == "fig4b":
        return {f"fig4b_g{g}": SweepSpec("two_qubit", (_mhz_axis("H_r", 1, 20, 21), _mhz_axis("H_0", 0, 30, 21)),
                                         fixed=(("g", g * MHZ),), T_f=1000.0, name=f"fig4b_g{g}", **common)
                for g in (0, 4)}
    if name == "fig4c":
        return {"fig4c": SweepSpec("two_qubit", (_mhz_axis("H_0", 0, 30, 21), _mhz_axis("g", 0, 20, 21)),
                                   fixed=(("H_r", 10 * MHZ),), T_f=1000.0, name="fig4c", **common)}
    if name == "figS6":
        return {f"figS6_tf{int(T)}": SweepSpec("elliptic", (_mhz_axis("H_X", 1, 10, 10), _mhz_axis("H_Z", 1, 10, 10)),
                                              T_f=T, methods=("dynamical", "monopole_count"),
                                              name=f"figS6_tf{int(T)}", **common)
                for T in FIGS6_TIMES}
    raise ArgumentError(f"{name!r} is not a phase-diagram preset")


def _fig2(seed, shots) -> PresetResult:
    H_r = 10 * MHZ
    traj = propagate(meridian_ramp(H_r, 0.0, 600.0))
    if shots is not None:
        traj = noisy_trajectory(traj, shots, cell_rng(seed, 0))
    dyn = chern_dynamical(traj)
    spec = chern_spectral(QubitParams(1, H_r))
    rows = tuple((float(t), *(float(traj.observables[f"s{a}_q1"][k]) for a in "yxz"))
                 for k, t in enumerate(traj.sample_times))
    table = Table(("t_ns", "sy_q1", "sx_q1", "sz_q1"), rows)
    summary = {"ch_dynamical": dyn.value, "ch_spectral": spec.value, "ch_monopole": 1,
               "adiabaticity": dyn.adiabaticity, "within_0.05": abs(dyn.value - 1) <= 0.05,
               "norm_drift": traj.norm_drift}
    return PresetResult("fig2", {}, {"fig2_trajectory": table}, summary)


def fig3d_scan(ratios=FIG3D_RATIOS, H_r: float = 10 * MHZ, T_f: float = 1000.0, n_theta: int = 50,
               n_phi: int = 50) -> Table:
    rows = []
    for r in ratios:
        params = QubitParams(1, H_r, r * H_r)
        exact = texture_chern(texture_grid(params, n_theta, n_phi, "exact_ground")).value
        adiabatic = texture_chern(texture_grid(params, n_theta, n_phi, "adiabatic_sim")).value
        dyn = chern_dynamical(propagate(meridian_ramp(H_r, r * H_r, T_f))).value
        spec = chern_spectral(params).value
        rows.append((float(r), exact, adiabatic, dyn, spec))
    return Table(("h0_over_hr", "ch_texture_exact", "ch_texture_adiabatic", "ch_dynamical", "ch_spectral"),
                 tuple(rows))


def _fig3d() -> PresetResult:
    table = fig3d_scan()
    diff = max(abs(row[2] - row[3]) for row in table.rows)
    return PresetResult("fig3d", {}, {"fig3d": table},
                        {"max_texture_dynamical_diff": diff, "agree_within_0.1": diff <= 0.1})


def _fig4a() -> PresetResult:
    H_r = 10 * MHZ
    rows = []
    for label, (h0, g) in FIG4A_POINTS.items():
        up, down = degeneracy_loci(h0 * MHZ, g * MHZ).positions
        count = monopole_count(h0 * MHZ, g * MHZ, H_r).rounded
        lat = lattice_chern(from_qubit_params(H_r, g * MHZ, h0 * MHZ)).rounded
        spec = chern_spectral(QubitParams(2, H_r, h0 * MHZ, g * MHZ)).rounded
        rows.append((label, h0, g, up / MHZ, down / MHZ, count, lat, spec))
    cols = ("point", "H_0_MHz", "g_MHz", "Hz_upper_MHz", "Hz_lower_MHz", "monopole_count", "lattice_chern",
            "spectral_chern")
    agree = all(r[5] == r[6] == r[7] for r in rows)
    return PresetResult("fig4a_monopoles", {}, {"fig4a_monopoles": Table(cols, tuple(rows))},
                        {"H_r_MHz": 10.0, "all_methods_agree": agree})


def figS3_panels() -> dict:
    """Band-structure panels: hopping only, t2, strong hybridization, strong Zeeman."""
    t2 = 1 / (3 * math.sqrt(3))
    return {
        "b_t1_only": HaldaneParams(1.0, 0.0),
        "c_t2": HaldaneParams(1.0, t2),
        "d_large_t3": HaldaneParams(1.0, t2, t3=-2.0),
        "e_large_hz": HaldaneParams(1.0, t2, h_z=2.0),
    }


def _figS3() -> PresetResult:
    path = corner_path()
    s = np.linspace(-1.5, 1.5, path.shape[0])
    tables, summary = {}, {}
    for label, p in figS3_panels().items():
        e = band_dispersion(p, path)
        tables[f"figS3_bands_{label}"] = Table(("k_over_K", "E0", "E1", "E2", "E3"),
                                               tuple((float(x), *map(float, row)) for x, row in zip(s, e)))
        try:
            summary[f"lattice_chern_{label}"] = lattice_chern(p).rounded
        except ChernSimError:
            summary[f"lattice_chern_{label}"] = None
    return PresetResult("figS3_bands", {}, tables, summary)


def _figS6_summary(diagrams: dict) -> dict:
    out = {}
    for key, pd in diagrams.items():
        val = pd.grid("dynamical")
        A = pd.grid("dynamical", "adiabaticity")
        err = np.abs(val - 1.0)
        good = A > 1.5
        out[key] = {
            "T_f": pd.spec.T_f,
            "mean_error_all": float(np.mean(err)),
            "mean_error_A_gt_1.5": float(np.mean(err[good])) if good.any() else None,
            "fraction_good_A_gt_1.5": float(np.mean(err[good] < 0.15)) if good.any() else None,
            "cells_A_gt_1.5": int(good.sum()),
        }
    return out


def _diagram_summary(diagrams: dict) -> dict:
    out = {}
    for key, pd in diagrams.items():
        dyn = pd.grid("dynamical", "rounded")
        mono = pd.grid("monopole_count", "rounded")
        A = pd.grid("dynamical", "adiabaticity")
        ok = A >= 3
        out[key] = {"cells": int(dyn.size), "agree_A_ge_3": float(np.mean(dyn[ok] == mono[ok])) if ok.any() else None}
    return out


def run_preset(name: str, workers: int = 1, seed: int = 0, shots: Optional[int] = None) -> PresetResult:
    """Compute a figure preset. Writing to disk is the shell's job."""
    if name not in PRESETS:
        raise ArgumentError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    if name == "fig2":
        return _fig2(seed, shots)
    if name == "fig3d":
        return _fig3d()
    if name == "fig4a_monopoles":
        return _fig4a()
    if name == "figS3_bands":
        return _figS3()
    diagrams = {key: sweep(spec, workers) for key, spec in preset_specs(name, seed, shots).items()}
    summary = _figS6_summary(diagrams) if name == "figS6" else _diagram_summary(diagrams)
    return PresetResult(name, diagrams, {}, summary)
