"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run alone with `pytest tests/test_acceptance.py -s` or `python tests/test_acceptance.py`.
"""
import math
import sys
import time

import numpy as np
import pytest

from chernsim.berry import QubitParams, _curvature_batch, chern_dynamical, chern_spectral, monopole_count
from chernsim.controls import meridian_ramp
from chernsim.errors import GaplessError
from chernsim.haldane import from_qubit_params, lattice_chern
from chernsim.propagator import propagate
from chernsim.runner import FIG4A_POINTS, _schedule, fig3d_scan, preset_specs, sweep
from chernsim.shell.cli import main
from chernsim.units import MHZ

H_R = 10 * MHZ


def report(capsys, n: int, ok: bool, detail: str):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def fig3a():
    spec = preset_specs("fig3a")["fig3a"]
    start = time.perf_counter()
    diagram = sweep(spec, workers=1)
    return diagram, time.perf_counter() - start


@pytest.fixture(scope="module")
def fig4():
    specs = {**preset_specs("fig4b"), **preset_specs("fig4c")}
    return {key: sweep(spec) for key, spec in specs.items()}


@pytest.fixture(scope="module")
def figS6():
    return {key: sweep(spec) for key, spec in preset_specs("figS6").items()}


def sphere_min_gap(p: QubitParams, n: int = 2001) -> float:
    _, gaps, _ = _curvature_batch(p, np.linspace(0.0, math.pi, n))
    return float(gaps.min())


@pytest.fixture(scope="module")
def random_points():
    """Gapped two-qubit points (H_r, H_0, g) in rad/ns, away from every gap closure on the sphere."""
    rng = np.random.default_rng(5)
    points = []
    while len(points) < 50:
        H_r, H_0, g = rng.uniform(1, 20) * MHZ, rng.uniform(-30, 30) * MHZ, rng.uniform(0, 20) * MHZ
        if sphere_min_gap(QubitParams(2, H_r, H_0, g)) > 0.05 * H_r:
            points.append((H_r, H_0, g))
    return points


# --- 1 ------------------------------------------------------------------------------

def test_criterion_1_single_qubit_ramp(capsys):
    s = meridian_ramp(H_R, 0.0, 600.0)
    chern_dynamical(propagate(s))  # JIT warm-up
    start = time.perf_counter()
    ch = chern_dynamical(propagate(s)).value
    elapsed = time.perf_counter() - start
    report(capsys, 1, abs(ch - 1) <= 0.05 and elapsed < 1.0, f"Ch = {ch:.4f}, runtime {elapsed * 1e3:.1f} ms")


# --- 2 ------------------------------------------------------------------------------

def test_criterion_2_single_qubit_sweep(capsys, fig3a):
    diagram, elapsed = fig3a
    dyn = diagram.grid("dynamical", "rounded")
    A = diagram.grid("dynamical", "adiabaticity")
    H_r, H_0 = np.meshgrid(diagram.spec.axes[0].values, diagram.spec.axes[1].values, indexing="ij")
    scored = (A >= 3) & (np.abs(H_0 - H_r) > 0.2 * H_r)
    expected = (H_r > H_0).astype(float)
    agree = float(np.mean(dyn[scored] == expected[scored]))
    report(capsys, 2, agree >= 0.95 and elapsed < 300,
           f"{agree:.1%} of {int(scored.sum())} scored cells agree, runtime {elapsed:.1f} s")


# --- 3 ------------------------------------------------------------------------------

def test_criterion_3_adiabaticity_threshold(capsys, figS6):
    by_tf = {d.spec.T_f: d for d in figS6.values()}
    d400 = by_tf[400.0]
    err = np.abs(d400.grid("dynamical") - 1.0)
    good = d400.grid("dynamical", "adiabaticity") > 1.5
    fraction = float(np.mean(err[good] < 0.15))
    means = [float(np.mean(np.abs(by_tf[t].grid("dynamical") - 1.0))) for t in sorted(by_tf)]
    monotonic = all(b < a for a, b in zip(means, means[1:]))
    report(capsys, 3, fraction >= 0.9 and monotonic,
           f"T_f=400: {fraction:.1%} of {int(good.sum())} cells with A>1.5 within 0.15; "
           f"mean error by T_f {[round(m, 3) for m in means]} monotonic={monotonic}")


# --- 4 ------------------------------------------------------------------------------

def _plateau(mono: np.ndarray) -> np.ndarray:
    """Cells whose whole 8-neighbourhood shares their monopole count."""
    n, m = mono.shape
    out = np.zeros_like(mono, dtype=bool)
    for i in range(n):
        for j in range(m):
            block = mono[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            out[i, j] = np.all(block == mono[i, j])
    return out


def _boundary_offsets(dyn: np.ndarray, mono: np.ndarray, scored: np.ndarray) -> int:
    """Dynamical boundary edges between scored cells with no analytic boundary within one cell."""
    plateau = _plateau(mono)
    misses = 0
    for axis in (0, 1):
        a, p, s = (np.moveaxis(x, axis, 0) for x in (dyn, plateau, scored))
        edge = (a[1:] != a[:-1]) & s[1:] & s[:-1]
        misses += int(np.sum(edge & p[1:] & p[:-1]))
    return misses


def test_criterion_4_two_qubit_sweeps(capsys, fig4):
    present, mismatched, scored, misplaced = set(), 0, 0, 0
    for d in fig4.values():
        dyn = d.grid("dynamical", "rounded")
        mono = d.grid("monopole_count", "rounded")
        A = d.grid("dynamical", "adiabaticity")
        plateau = _plateau(mono)
        present |= {int(x) for x in np.unique(dyn[plateau])}
        cells = plateau & (A >= 3)
        scored += int(cells.sum())
        mismatched += int(np.sum(dyn[cells] != mono[cells]))
        misplaced += _boundary_offsets(dyn, mono, A >= 3)
    ok = {0, 1, 2} <= present and mismatched == 0 and misplaced == 0
    report(capsys, 4, ok, f"plateaus {sorted(present)}, {mismatched}/{scored} plateau cells mismatch, "
                          f"{misplaced} boundary edges more than one cell from the analytic curve")


# --- 5 ------------------------------------------------------------------------------

def test_criterion_5_oracle_triangle(capsys, random_points):
    start = time.perf_counter()
    spectral_bad = [p for p in random_points
                    if chern_spectral(QubitParams(2, *p)).rounded != monopole_count(p[1], p[2], p[0]).rounded]
    lattice_points = [(H_R, h0 * MHZ, g * MHZ) for h0, g in FIG4A_POINTS.values()] + random_points[:20]
    lattice_bad = []
    for H_r, H_0, g in lattice_points:
        count = monopole_count(H_0, g, H_r).rounded
        spec = chern_spectral(QubitParams(2, H_r, H_0, g)).rounded
        try:
            lat = lattice_chern(from_qubit_params(H_r, g, H_0)).rounded
        except GaplessError:
            lat = None
        if not lat == spec == count:
            lattice_bad.append((H_r / MHZ, H_0 / MHZ, g / MHZ, count, spec, lat))
    elapsed = time.perf_counter() - start
    ok = not spectral_bad and not lattice_bad and elapsed < 60
    report(capsys, 5, ok, f"spectral/monopole mismatches {len(spectral_bad)}/50, lattice mismatches "
                          f"{len(lattice_bad)}/{len(lattice_points)} {lattice_bad[:3]}, runtime {elapsed:.1f} s")


# --- 6 ------------------------------------------------------------------------------

def test_criterion_6_texture_line_scan(capsys):
    rows = fig3d_scan().rows
    exact_err = max(abs(r[1] - (1.0 if r[0] < 1 else 0.0)) for r in rows)
    adiabatic_err = max(abs(r[2] - r[3]) for r in rows)
    worst = max(rows, key=lambda r: abs(r[2] - r[3]))
    report(capsys, 6, exact_err <= 0.02 and adiabatic_err <= 0.1,
           f"exact texture max error {exact_err:.2e}; adiabatic vs dynamical max gap {adiabatic_err:.3f} "
           f"(at H_0/H_r = {worst[0]}: texture {worst[2]:.3f}, dynamical {worst[3]:.3f})")


# --- 7 ------------------------------------------------------------------------------

def test_criterion_7_linear_response(capsys):
    err = {T: abs(chern_dynamical(propagate(meridian_ramp(H_R, 0.0, T))).value - 1.0) for T in (600.0, 1200.0)}
    ratio = err[600.0] / err[1200.0]
    report(capsys, 7, 1.4 <= ratio <= 2.6,
           f"|Ch-1| = {err[600.0]:.2e} at 600 ns, {err[1200.0]:.2e} at 1200 ns, ratio {ratio:.2f} (want 2 ± 30%)")


# --- 8 ------------------------------------------------------------------------------

def test_criterion_8_numerical_hygiene(capsys, fig3a, fig4, figS6, random_points):
    drifts = [propagate(meridian_ramp(H_R, 0.0, T)).norm_drift for T in (600.0, 1200.0)]
    diagrams = [fig3a[0], *fig4.values(), *figS6.values()]
    for d in diagrams:
        n_i, n_j = d.spec.shape
        for i in range(n_i):
            for j in range(n_j):
                s = _schedule(d.spec, d.spec.cell_params(i, j))
                drifts.append(propagate(s, n_record=d.spec.n_record, substeps=d.spec.substeps).norm_drift)
    spectral = [chern_spectral(QubitParams(2, *p)).value for p in random_points]
    spectral += [chern_spectral(QubitParams(2, H_R, h0 * MHZ, g * MHZ)).value for h0, g in FIG4A_POINTS.values()]
    spectral += [chern_spectral(QubitParams(1, H_R, r * H_R)).value for r in (0.0, 0.5, 0.9, 1.1, 1.5, 2.0)]
    spectral_res = max(abs(v - round(v)) for v in spectral)
    unstable = 0
    for H_r, H_0, g in [(H_R, h0 * MHZ, g * MHZ) for h0, g in FIG4A_POINTS.values()] + random_points[:20]:
        p = from_qubit_params(H_r, g, H_0)
        unstable += lattice_chern(p, N=24).rounded != lattice_chern(p, N=48).rounded
    ok = max(drifts) <= 1e-9 and spectral_res <= 1e-4 and unstable == 0
    report(capsys, 8, ok, f"max norm drift {max(drifts):.1e} over {len(drifts)} trajectories; "
                          f"max spectral residual {spectral_res:.1e} over {len(spectral)} points; "
                          f"lattice N=24 vs 48 differences {unstable}")


# --- 9 ------------------------------------------------------------------------------

def test_criterion_9_determinism(capsys, tmp_path):
    runs = {"a": ["--workers", "1"], "b": ["--workers", "1"], "c": ["--workers", "2"]}
    codes = [main(["preset", "fig3a", "--seed", "7", "--out", str(tmp_path / k), *extra], out=lambda *_: None)
             for k, extra in runs.items()]
    same = all((tmp_path / "a" / f"fig3a.{ext}").read_bytes() == (tmp_path / k / f"fig3a.{ext}").read_bytes()
               for k in ("b", "c") for ext in ("csv", "json"))
    report(capsys, 9, codes == [0, 0, 0] and same, f"exit codes {codes}, CSV/JSON byte-identical: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
