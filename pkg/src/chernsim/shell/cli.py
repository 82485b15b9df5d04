"""`chernsim` command line.

Frequencies on the command line are H/2π in MHz and times are in ns. They
are converted to rad/ns once, here, and everything downstream uses
internal units.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from .. import __version__
from ..berry import QubitParams, chern_dynamical, chern_spectral, degeneracy_loci, monopole_count
from ..bzmap import texture_chern, texture_grid
from ..controls import adiabaticity_measure, elliptic_ramp, meridian_ramp, two_qubit_ramp
from ..errors import ChernSimError
from ..haldane import HaldaneParams, band_dispersion, corner_path, from_qubit_params, lattice_chern
from ..propagator import propagate
from ..runner import AXIS_NAMES, PRESETS, Axis, SweepSpec, Table, noisy_trajectory, cell_rng, run_preset, sweep
from ..units import mhz, to_mhz
from . import serialize
from .config import load_config

OUT_ENV = "CHERNSIM_OUT"
COMMANDS = ("ramp", "chern", "phase-diagram", "monopoles", "texture", "haldane", "adiabaticity", "preset")

# experimental defaults, named after the figure they come from
FIG3A_T_F = 1000.0  # ns, phase diagrams
FIG2_T_F = 600.0  # ns, single ramp
FIGS4_N_RECORD = 50
FIGS4_SHOTS = 300
DEFAULT_SUBSTEPS = 64

FREQ_FLAGS = {"hr": "H_r", "h0": "H_0", "g": "g", "hx": "H_X", "hz": "H_Z"}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)  # rad/ns
    T_f: Optional[float] = None
    target_A: Optional[float] = None
    n_record: int = FIGS4_N_RECORD
    substeps: int = DEFAULT_SUBSTEPS
    shots: Optional[int] = None
    seed: int = 0
    workers: int = 1
    out_dir: Optional[str] = None
    formats: tuple = ("csv", "json", "svg")
    qubits: int = 1
    kind: str = "meridian"
    preset: Optional[str] = None
    axis1: Optional[Axis] = None
    axis2: Optional[Axis] = None
    methods: tuple = ("dynamical", "spectral", "monopole_count")
    n_theta: int = 50
    n_phi: int = 50
    prep: str = "exact_ground"
    lattice: dict = field(default_factory=dict)
    lattice_n: int = 48


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("physics (frequencies are H/2π in MHz, times in ns)")
    g.add_argument("--hr", type=float, help="sphere radius H_r/2π [MHz]")
    g.add_argument("--h0", type=float, help="bias H_0/2π on qubit 1 [MHz]")
    g.add_argument("--g", type=float, help="coupling g/2π [MHz]")
    g.add_argument("--hx", type=float, help="ellipse semi-axis H_X/2π [MHz]")
    g.add_argument("--hz", type=float, help="ellipse semi-axis H_Z/2π [MHz]")
    g.add_argument("--tf", type=float, help="ramp time T_f [ns]")
    g.add_argument("--target-a", type=float, help="choose T_f per cell to reach adiabaticity A")
    g.add_argument("--qubits", type=int, choices=(1, 2), help="number of qubits")
    g.add_argument("--kind", choices=("meridian", "elliptic", "two_qubit"), help="ramp kind")
    n = p.add_argument_group("numerics and output")
    n.add_argument("--n-record", type=int, help=f"recorded samples per ramp (default {FIGS4_N_RECORD})")
    n.add_argument("--substeps", type=int, help=f"integrator steps per sample (default {DEFAULT_SUBSTEPS})")
    n.add_argument("--shots", type=int, help="projective measurements per sample (0 = exact expectations)")
    n.add_argument("--noise", action="store_const", const=True, help=f"shot noise with {FIGS4_SHOTS} shots")
    n.add_argument("--seed", type=int, help="64-bit RNG seed")
    n.add_argument("--workers", type=int, help="worker processes for sweeps")
    n.add_argument("--out", help=f"output directory (default ${OUT_ENV} or no files)")
    n.add_argument("--format", help="comma-separated subset of csv,json,svg")
    n.add_argument("--config", help="key=value file; keys are flag names, command-line flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chernsim", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"chernsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "ramp": "simulate one ramp and report its trajectory",
        "chern": "Chern number of one parameter point by every method",
        "phase-diagram": "sweep two parameters",
        "monopoles": "degeneracy positions on the field axis",
        "texture": "ground-state spin texture over the Brillouin zone",
        "haldane": "four-band lattice: bands and ground-band Chern number",
        "adiabaticity": "Chern error versus ramp time on ellipse grids",
        "preset": "reproduce a figure",
    }
    subs = {}
    for name in COMMANDS:
        subs[name] = sub.add_parser(name, help=helps[name], description=helps[name])
        _common(subs[name])
    for name in ("phase-diagram",):
        subs[name].add_argument("--axis1", help="NAME:MIN:MAX:COUNT, frequencies in MHz (e.g. H_r:1:20:21)")
        subs[name].add_argument("--axis2", help="NAME:MIN:MAX:COUNT")
        subs[name].add_argument("--methods", help="comma-separated subset of dynamical,spectral,monopole_count,lattice")
    subs["texture"].add_argument("--n-theta", type=int, help="polar grid size")
    subs["texture"].add_argument("--n-phi", type=int, help="azimuthal grid size")
    subs["texture"].add_argument("--prep", choices=("exact_ground", "adiabatic_sim"), help="state preparation")
    for flag in ("--t1", "--t2", "--t3", "--hz-lattice"):
        subs["haldane"].add_argument(flag, type=float, help="lattice parameter (overrides the qubit mapping)")
    subs["haldane"].add_argument("--lattice-n", type=int, help="momentum grid size per direction")
    subs["preset"].add_argument("name", choices=PRESETS, help="figure preset")
    return parser


def _parse_axis(text: str) -> Axis:
    try:
        name, lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise UsageError(f"bad axis {text!r}; expected NAME:MIN:MAX:COUNT") from exc
    if name not in AXIS_NAMES:
        raise UsageError(f"unknown axis name {name!r}")
    return Axis(name, mhz(lo), mhz(hi), count)


def _merge_config(ns: argparse.Namespace, parser: argparse.ArgumentParser):
    if not getattr(ns, "config", None):
        return
    values = load_config(ns.config)
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    actions = {a.dest: a for a in sub._actions}
    for key, raw in values.items():
        if key not in actions or key in ("config", "help", "name"):
            raise ChernSimError(f"unknown config key {key!r}")
        if getattr(ns, key) is not None:
            continue
        act = actions[key]
        if act.const is True:
            val = raw.lower() in ("1", "true", "yes", "on")
        else:
            val = act.type(raw) if act.type else raw
        if act.choices and val not in act.choices:
            raise ChernSimError(f"config key {key}: {val!r} not in {list(act.choices)}")
        setattr(ns, key, val)


def parse_cli(args=None) -> RunConfig:
    """Parse arguments (plus optional config file) into a RunConfig in internal units."""
    parser = build_parser()
    ns = parser.parse_args(args)
    _merge_config(ns, parser)
    cfg = RunConfig(command=ns.command)
    for flag, name in FREQ_FLAGS.items():
        v = getattr(ns, flag, None)
        if v is not None:
            cfg.params[name] = mhz(v)
    cfg.T_f = ns.tf
    cfg.target_A = ns.target_a
    cfg.n_record = ns.n_record or FIGS4_N_RECORD
    cfg.substeps = ns.substeps or DEFAULT_SUBSTEPS
    if ns.shots:
        cfg.shots = ns.shots
    elif ns.noise:
        cfg.shots = FIGS4_SHOTS
    cfg.seed = ns.seed or 0
    cfg.workers = ns.workers or 1
    cfg.out_dir = ns.out or os.environ.get(OUT_ENV)
    if ns.format:
        fmts = tuple(f.strip() for f in ns.format.split(",") if f.strip())
        bad = set(fmts) - set(serialize.FORMATS)
        if bad:
            raise UsageError(f"unknown format(s) {sorted(bad)}")
        cfg.formats = fmts
    cfg.qubits = ns.qubits or (2 if ns.kind == "two_qubit" else 1)
    cfg.kind = ns.kind or ("two_qubit" if cfg.qubits == 2 else "meridian")
    if ns.command == "phase-diagram":
        if not (ns.axis1 and ns.axis2):
            raise UsageError("phase-diagram needs --axis1 and --axis2")
        cfg.axis1, cfg.axis2 = _parse_axis(ns.axis1), _parse_axis(ns.axis2)
        if ns.methods:
            cfg.methods = tuple(m.strip() for m in ns.methods.split(","))
    if ns.command == "texture":
        cfg.n_theta = ns.n_theta or 50
        cfg.n_phi = ns.n_phi or 50
        cfg.prep = ns.prep or "exact_ground"
    if ns.command == "haldane":
        cfg.lattice = {k: getattr(ns, k) for k in ("t1", "t2", "t3", "hz_lattice") if getattr(ns, k) is not None}
        cfg.lattice_n = ns.lattice_n or 48
    if ns.command == "preset":
        cfg.preset = ns.name
    return cfg


# --- command implementations ---------------------------------------------------

def _require(cfg: RunConfig, *names):
    missing = [n for n in names if n not in cfg.params]
    if missing:
        flags = {v: k for k, v in FREQ_FLAGS.items()}
        raise UsageError("missing " + ", ".join(f"--{flags[n]}" for n in missing))


def _schedule(cfg: RunConfig, default_tf: float):
    p = cfg.params
    T_f = cfg.T_f if cfg.T_f is not None else default_tf
    if cfg.kind == "elliptic":
        _require(cfg, "H_X", "H_Z")
        return elliptic_ramp(p["H_X"], p["H_Z"], T_f)
    _require(cfg, "H_r")
    if cfg.kind == "two_qubit":
        return two_qubit_ramp(p["H_r"], p.get("H_0", 0.0), p.get("g", 0.0), T_f)
    return meridian_ramp(p["H_r"], p.get("H_0", 0.0), T_f)


def _provenance(cfg: RunConfig) -> dict:
    echo = {k: v for k, v in sorted(vars(cfg).items()) if k not in ("out_dir", "workers", "axis1", "axis2")}
    echo["formats"] = list(cfg.formats)
    echo["methods"] = list(cfg.methods)
    for a in ("axis1", "axis2"):
        ax = getattr(cfg, a)
        if ax is not None:
            echo[a] = {"name": ax.name, "min": ax.min, "max": ax.max, "count": ax.count}
    return {"code_version": __version__, "seed": cfg.seed, "config": echo}


def _run_ramp(cfg: RunConfig, out) -> int:
    s = _schedule(cfg, FIG2_T_F)
    traj = propagate(s, n_record=cfg.n_record, substeps=cfg.substeps)
    if cfg.shots:
        traj = noisy_trajectory(traj, cfg.shots, cell_rng(cfg.seed, 0))
    est = chern_dynamical(traj)
    out(f"ramp            {s.kind}, T_f = {s.T_f:g} ns, A = {est.adiabaticity:.2f}")
    out(f"dynamical       {est.value:.4f}")
    out(f"norm drift      {traj.norm_drift:.2e}")
    if traj.flags:
        out(f"flags           {', '.join(sorted(traj.flags))}")
    if cfg.out_dir:
        serialize.write_trajectory("ramp", traj, cfg.formats, cfg.out_dir, _provenance(cfg))
    return 0


def _run_chern(cfg: RunConfig, out) -> int:
    s = _schedule(cfg, FIG2_T_F)
    traj = propagate(s, n_record=cfg.n_record, substeps=cfg.substeps)
    if cfg.shots:
        traj = noisy_trajectory(traj, cfg.shots, cell_rng(cfg.seed, 0))
    dyn = chern_dynamical(traj)
    out(f"dynamical       {dyn.value:.2f} ± {abs(dyn.value - dyn.rounded):.2g} (A = {dyn.adiabaticity:.2f})")
    if s.kind == "elliptic":
        return 0
    p = cfg.params
    params = QubitParams(s.n_qubits, p["H_r"], p.get("H_0", 0.0), p.get("g", 0.0))
    spec = chern_spectral(params)
    spec_txt = "degenerate" if spec.rounded is None else f"{round(spec.value, 6) + 0.0:.6f}"
    out(f"spectral        {spec_txt}")
    mono = monopole_count(params.H_0, params.g, params.H_r, n_qubits=s.n_qubits)
    out(f"monopole        {mono.rounded}" + (" (near boundary)" if mono.flags else ""))
    if s.n_qubits == 2:
        try:
            lat = lattice_chern(from_qubit_params(params.H_r, params.g, params.H_0))
            out(f"lattice         {lat.rounded}")
        except ChernSimError as exc:
            out(f"lattice         {exc}")
    return 0


def _run_phase_diagram(cfg: RunConfig, out) -> int:
    kind = {"meridian": "single", "two_qubit": "two_qubit", "elliptic": "elliptic"}[cfg.kind]
    fixed = {k: v for k, v in cfg.params.items() if k not in (cfg.axis1.name, cfg.axis2.name)}
    spec = SweepSpec(kind, (cfg.axis1, cfg.axis2), tuple(fixed.items()),
                     T_f=cfg.T_f if cfg.T_f is not None else FIG3A_T_F, target_A=cfg.target_A, shots=cfg.shots,
                     seed=cfg.seed, methods=cfg.methods, n_record=cfg.n_record, substeps=cfg.substeps,
                     name="phase_diagram")
    pd = sweep(spec, cfg.workers)
    flagged = sum(1 for c in pd.cells if c.flags)
    out(f"cells           {len(pd.cells)} ({flagged} flagged)")
    if cfg.out_dir:
        for path in serialize.write_phase_diagram(pd, cfg.formats, cfg.out_dir):
            out(f"wrote           {path}")
    return 0


def _run_monopoles(cfg: RunConfig, out) -> int:
    h0, g = cfg.params.get("H_0", 0.0), cfg.params.get("g", 0.0)
    up, down = degeneracy_loci(h0, g).positions
    out(f"H_z/2π = {to_mhz(up):.6g}, {to_mhz(down):.6g} MHz")
    if "H_r" in cfg.params:
        m = monopole_count(h0, g, cfg.params["H_r"])
        out(f"enclosed by H_r/2π = {to_mhz(cfg.params['H_r']):g} MHz: {m.rounded}"
            + (" (near boundary)" if m.flags else ""))
    return 0


def _run_texture(cfg: RunConfig, out) -> int:
    _require(cfg, "H_r")
    params = QubitParams(1, cfg.params["H_r"], cfg.params.get("H_0", 0.0))
    grid = texture_grid(params, cfg.n_theta, cfg.n_phi, cfg.prep)
    for method, est in texture_chern(grid, "both").items():
        out(f"{method:<15} {est.value:.4f} (full zone {est.info['full_fbz']:.4f})")
    if grid.flags:
        out(f"flags           {', '.join(sorted(grid.flags))}")
    if cfg.out_dir:
        serialize.write_texture("texture", grid, cfg.formats, cfg.out_dir, _provenance(cfg))
    return 0


def _run_haldane(cfg: RunConfig, out) -> int:
    if {"t1", "t2"} <= set(cfg.lattice):
        lat = cfg.lattice
        p = HaldaneParams(lat["t1"], lat["t2"], lat.get("t3", 0.0), lat.get("hz_lattice", 0.0))
    else:
        _require(cfg, "H_r")
        p = from_qubit_params(cfg.params["H_r"], cfg.params.get("g", 0.0), cfg.params.get("H_0", 0.0))
    out(f"t1 = {p.t1:.6g}, t2 = {p.t2:.6g}, t3 = {p.t3:.6g}, h_z = {p.h_z:.6g}")
    try:
        out(f"lattice Chern   {lattice_chern(p, 0, cfg.lattice_n).rounded}")
    except ChernSimError as exc:
        out(f"lattice Chern   {exc}")
    if cfg.out_dir:
        import numpy as np
        path = corner_path()
        e = band_dispersion(p, path)
        s = np.linspace(-1.5, 1.5, path.shape[0])
        table = Table(("k_over_K", "E0", "E1", "E2", "E3"), tuple((float(x), *map(float, r)) for x, r in zip(s, e)))
        serialize.write_table("haldane_bands", table, cfg.formats, cfg.out_dir, _provenance(cfg),
                              {"x": "k_over_K", "y": ["E0", "E1", "E2", "E3"], "ylabel": "energy"})
    return 0


def _write_preset(result, cfg: RunConfig, out):
    for key, pd in result.diagrams.items():
        for path in serialize.write_phase_diagram(pd, cfg.formats, cfg.out_dir, stem=key):
            out(f"wrote           {path}")
    plots = {
        "fig2_trajectory": {"x": "t_ns", "y": ["sy_q1"], "ylabel": "<sigma_y>"},
        "fig3d": {"x": "h0_over_hr", "y": ["ch_texture_exact", "ch_texture_adiabatic", "ch_dynamical"],
                  "ylabel": "Ch"},
    }
    prov = {"code_version": __version__, "seed": cfg.seed, "preset": result.name}
    for key, table in result.tables.items():
        plot = plots.get(key)
        if key.startswith("figS3_bands"):
            plot = {"x": "k_over_K", "y": ["E0", "E1", "E2", "E3"], "ylabel": "energy"}
        for path in serialize.write_table(key, table, cfg.formats, cfg.out_dir, prov, plot):
            out(f"wrote           {path}")
    if "json" in cfg.formats:
        path = serialize.write_json(f"{result.name}_summary", {"summary": result.summary, "provenance": prov},
                                    cfg.out_dir)
        out(f"wrote           {path}")


def _run_preset(cfg: RunConfig, out) -> int:
    result = run_preset(cfg.preset, workers=cfg.workers, seed=cfg.seed, shots=cfg.shots)
    for k, v in result.summary.items():
        out(f"{k:<15} {v}")
    if cfg.out_dir:
        _write_preset(result, cfg, out)
    return 0


def _run_adiabaticity(cfg: RunConfig, out) -> int:
    result = run_preset("figS6", workers=cfg.workers, seed=cfg.seed, shots=cfg.shots)
    out("T_f[ns]  mean|Ch-1|  mean|Ch-1|(A>1.5)  frac<0.15(A>1.5)")
    for v in result.summary.values():
        def f(x):
            return "-" if x is None else f"{x:.3f}"
        out(f"{v['T_f']:<8g} {f(v['mean_error_all']):<11} {f(v['mean_error_A_gt_1.5']):<18} "
            f"{f(v['fraction_good_A_gt_1.5'])}")
    if cfg.out_dir:
        _write_preset(result, cfg, out)
    return 0


RUNNERS = {
    "ramp": _run_ramp, "chern": _run_chern, "phase-diagram": _run_phase_diagram, "monopoles": _run_monopoles,
    "texture": _run_texture, "haldane": _run_haldane, "preset": _run_preset, "adiabaticity": _run_adiabaticity,
}


def main(argv=None, out=print) -> int:
    """Entry point; returns 0 on success, 1 on runtime or validation errors, 2 on usage errors."""
    try:
        cfg = parse_cli(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except UsageError as exc:
        print(f"chernsim: usage error: {exc}", file=sys.stderr)
        return 2
    except (ChernSimError, OSError, ValueError) as exc:
        print(f"chernsim: error: {exc}", file=sys.stderr)
        return 1
    try:
        return RUNNERS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"chernsim: usage error: {exc}", file=sys.stderr)
        return 2
    except (ChernSimError, OSError, ValueError) as exc:
        print(f"chernsim: error: {exc}", file=sys.stderr)
        return 1
