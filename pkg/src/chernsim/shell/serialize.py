"""CSV and JSON encodings of estimates, phase diagrams, trajectories and tables."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..berry import ChernEstimate
from ..bzmap import TextureGrid
from ..propagator import TrajectoryRecord
from ..runner import CellResult, PhaseDiagram, SweepSpec, Table
from ..units import to_mhz
from . import svg

PHASE_DIAGRAM_HEADER = ("axis1", "axis2", "ch_dynamical", "ch_spectral", "ch_monopole", "flags")
FORMATS = ("csv", "json", "svg")
FREQUENCY_AXES = ("H_r", "H_0", "g", "H_X", "H_Z")


def fmt6(v) -> str:
    """Six significant digits; empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    return "" if math.isnan(v) else f"{v:.6g}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False, ensure_ascii=False) + "\n"


# --- estimates -------------------------------------------------------------

def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def estimate_to_dict(e: ChernEstimate) -> dict:
    return {
        "value": _clean(float(e.value)),
        "rounded": e.rounded,
        "method": e.method,
        "adiabaticity": _clean(e.adiabaticity),
        "flags": sorted(e.flags),
        "info": {k: _clean(v) for k, v in e.info.items()},
    }


def estimate_from_dict(d: dict) -> ChernEstimate:
    value = math.nan if d["value"] is None else float(d["value"])
    return ChernEstimate(value, d["rounded"], d["method"], d["adiabaticity"], frozenset(d["flags"]), dict(d["info"]))


# --- phase diagrams ----------------------------------------------------------------

def phase_diagram_to_dict(pd: PhaseDiagram) -> dict:
    axes = [{"name": a.name, "unit": "rad/ns", "values": [float(v) for v in a.values]} for a in pd.spec.axes]
    cells = [{
        "i": c.i, "j": c.j, "x": c.x, "y": c.y,
        "estimates": {m: estimate_to_dict(e) for m, e in c.estimates.items()},
        "flags": list(c.flags),
    } for c in pd.cells]
    return {"spec": pd.spec.to_dict(), "grid": {"axes": axes, "shape": list(pd.spec.shape), "cells": cells},
            "provenance": pd.provenance}


def phase_diagram_from_dict(d: dict) -> PhaseDiagram:
    spec = SweepSpec.from_dict(d["spec"])
    cells = tuple(CellResult(c["i"], c["j"], c["x"], c["y"],
                             {m: estimate_from_dict(e) for m, e in c["estimates"].items()}, tuple(c["flags"]))
                  for c in d["grid"]["cells"])
    return PhaseDiagram(spec, cells, d["provenance"])


def _axis_out(name: str, v: float) -> float:
    return to_mhz(v) if name in FREQUENCY_AXES else v


def phase_diagram_csv(pd: PhaseDiagram) -> str:
    """One row per cell; axis values in MHz."""
    n1, n2 = pd.spec.axes[0].name, pd.spec.axes[1].name
    rows = []
    for c in pd.cells:
        e = c.estimates
        rows.append([
            fmt6(_axis_out(n1, c.x)), fmt6(_axis_out(n2, c.y)),
            fmt6(e["dynamical"].value) if "dynamical" in e else "",
            fmt6(e["spectral"].value) if "spectral" in e else "",
            fmt6(e["monopole_count"].rounded) if "monopole_count" in e else "",
            ";".join(c.flags),
        ])
    return _csv(PHASE_DIAGRAM_HEADER, rows)


# --- trajectories, tables, textures ----------------------------------------------

def trajectory_columns(traj: TrajectoryRecord) -> list:
    n = traj.schedule.n_qubits
    return [f"s{a}_q{q + 1}" for a in "yxz" for q in range(n)]


def trajectory_csv(traj: TrajectoryRecord) -> str:
    cols = trajectory_columns(traj)
    rows = [[fmt6(t)] + [fmt6(traj.observables[c][k]) for c in cols] for k, t in enumerate(traj.sample_times)]
    return _csv(["t_ns"] + cols, rows)


def trajectory_to_dict(traj: TrajectoryRecord) -> dict:
    s = traj.schedule
    sched = {"kind": s.kind, "n_qubits": s.n_qubits, "T_f": s.T_f, "H_r": s.H_r, "H_0": s.H_0, "g": s.g,
             "H_X_max": s.H_X_max, "H_Z_max": s.H_Z_max, "phi_plane": s.phi_plane, "unit": "rad/ns"}
    return {"schedule": sched, "sample_times": [float(t) for t in traj.sample_times],
            "observables": {k: [float(x) for x in v] for k, v in traj.observables.items()},
            "substeps_per_sample": traj.substeps_per_sample, "norm_drift": traj.norm_drift,
            "flags": sorted(traj.flags)}


def table_csv(table: Table) -> str:
    return _csv(table.columns, [[fmt6(v) for v in row] for row in table.rows])


def table_to_dict(table: Table) -> dict:
    return {"columns": list(table.columns), "rows": [[_clean(v) for v in row] for row in table.rows]}


def texture_csv(grid: TextureGrid) -> str:
    rows = [[fmt6(p.k[0]), fmt6(p.k[1]), *(fmt6(b) for b in p.bloch)] for p in grid.points()]
    return _csv(("k_x", "k_y", "bx", "by", "bz"), rows)


# --- writers -------------------------------------------------------------------------

def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def write_phase_diagram(pd: PhaseDiagram, formats=FORMATS, out_dir=".", stem: str | None = None) -> list:
    """Write `stem`.csv/.json/.svg; raises OSError if the directory is unwritable."""
    stem = stem or pd.spec.name
    out = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(_write(out / f"{stem}.csv", phase_diagram_csv(pd)))
    if "json" in formats:
        written.append(_write(out / f"{stem}.json", dumps_json(phase_diagram_to_dict(pd))))
    if "svg" in formats:
        written.append(_write(out / f"{stem}.svg", svg.heatmap_svg(pd, title=stem)))
    return written


def write_table(name: str, table: Table, formats=FORMATS, out_dir=".", provenance: dict | None = None,
                plot: dict | None = None) -> list:
    out = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(_write(out / f"{name}.csv", table_csv(table)))
    if "json" in formats:
        written.append(_write(out / f"{name}.json",
                              dumps_json({"table": table_to_dict(table), "provenance": provenance or {}})))
    if "svg" in formats and plot is not None:
        x = [row[table.columns.index(plot["x"])] for row in table.rows]
        series = {c: [row[table.columns.index(c)] for row in table.rows] for c in plot["y"]}
        written.append(_write(out / f"{name}.svg",
                              svg.line_plot_svg(x, series, plot["x"], plot.get("ylabel", ""), name, provenance)))
    return written


def write_trajectory(name: str, traj: TrajectoryRecord, formats=FORMATS, out_dir=".",
                     provenance: dict | None = None) -> list:
    out = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(_write(out / f"{name}.csv", trajectory_csv(traj)))
    if "json" in formats:
        written.append(_write(out / f"{name}.json",
                              dumps_json({"trajectory": trajectory_to_dict(traj), "provenance": provenance or {}})))
    if "svg" in formats:
        cols = trajectory_columns(traj)
        written.append(_write(out / f"{name}.svg", svg.line_plot_svg(
            list(traj.sample_times), {c: list(traj.observables[c]) for c in cols}, "t_ns", "expectation", name,
            provenance)))
    return written


def write_texture(name: str, grid: TextureGrid, formats=FORMATS, out_dir=".", provenance: dict | None = None) -> list:
    out = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(_write(out / f"{name}.csv", texture_csv(grid)))
    if "svg" in formats:
        written.append(_write(out / f"{name}.svg", svg.quiver_svg(grid, name, provenance)))
    if "json" in formats:
        pts = [{"k": list(p.k), "bloch": list(p.bloch), "sector": p.sector} for p in grid.points()]
        written.append(_write(out / f"{name}.json", dumps_json({"points": pts, "provenance": provenance or {}})))
    return written


def write_json(name: str, obj, out_dir=".") -> Path:
    return _write(Path(out_dir) / f"{name}.json", dumps_json(obj))
