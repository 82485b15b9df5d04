"""Time-dependent Schrödinger integration and adiabatic state preparation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .controls import ControlSchedule, ControlVector, adiabatic_prep_schedule, fill_hamiltonian, hamiltonian_at, \
    hamiltonian_from_controls
from .errors import ArgumentError, DegeneracyError, ValidationError
from .qcore import HermitianOperator, StateVector, evolve_kernel, ground_state as _ground_state

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.x**2 + self.y**2 + self.z**2 > 1 + 1e-9:
            raise ValidationError("Bloch vector longer than 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    schedule: ControlSchedule
    sample_times: np.ndarray
    observables: dict  # e.g. "sy_q1" -> array over sample_times
    substeps_per_sample: int
    states: Optional[np.ndarray] = None  # (n_record, dim) when requested
    norm_drift: float = 0.0
    flags: frozenset = field(default_factory=frozenset)

    def total(self, axis: str) -> np.ndarray:
        return sum(self.observables[f"s{axis}_q{q + 1}"] for q in range(self.schedule.n_qubits))


@dataclass(frozen=True)
class PrepResult:
    bloch: tuple  # BlochVector per qubit
    ground: tuple  # exact ground-state BlochVector per qubit (None if degenerate)
    flags: frozenset


@njit(cache=True)
def _bloch_components(psi, n_qubits, out):
    if n_qubits == 1:
        z = np.conj(psi[0]) * psi[1]
        out[0] = 2.0 * z.real
        out[1] = 2.0 * z.imag
        out[2] = abs(psi[0]) ** 2 - abs(psi[1]) ** 2
        return
    # qubit 1: left factor, amplitude index 2a+b
    z1 = np.conj(psi[0]) * psi[2] + np.conj(psi[1]) * psi[3]
    z2 = np.conj(psi[0]) * psi[1] + np.conj(psi[2]) * psi[3]
    p = np.empty(4)
    for i in range(4):
        p[i] = abs(psi[i]) ** 2
    out[0] = 2.0 * z1.real
    out[1] = 2.0 * z1.imag
    out[2] = p[0] + p[1] - p[2] - p[3]
    out[3] = 2.0 * z2.real
    out[4] = 2.0 * z2.imag
    out[5] = p[0] - p[1] + p[2] - p[3]


@njit(cache=True)
def propagate_kernel(psi0, ctrl, dts, record, n_qubits, keep_states):
    """Midpoint-exponential stepping; `record[i]` marks a sample after step i."""
    dim = psi0.shape[0]
    n_rec = 1
    for i in range(record.shape[0]):
        if record[i]:
            n_rec += 1
    obs = np.empty((n_rec, 3 * n_qubits))
    states = np.empty((n_rec if keep_states else 0, dim), dtype=np.complex128)
    h = np.empty((dim, dim), dtype=np.complex128)
    psi = psi0.copy()
    _bloch_components(psi, n_qubits, obs[0])
    if keep_states:
        states[0] = psi
    drift = 0.0
    k = 1
    for i in range(ctrl.shape[0]):
        fill_hamiltonian(ctrl[i], n_qubits, h)
        psi = evolve_kernel(psi, h, dts[i])
        if record[i]:
            _bloch_components(psi, n_qubits, obs[k])
            if keep_states:
                states[k] = psi
            nrm = 0.0
            for j in range(dim):
                nrm += abs(psi[j]) ** 2
            drift = max(drift, abs(np.sqrt(nrm) - 1.0))
            k += 1
    return obs, states, drift


def _run(s: ControlSchedule, psi0: StateVector, sample_times: np.ndarray, substeps: int, keep_states: bool):
    """Step through consecutive sample intervals, `substeps` midpoint steps each."""
    edges = np.asarray(sample_times, dtype=float)
    widths = np.diff(edges) / substeps
    frac = (np.arange(substeps) + 0.5)
    t_mid = (edges[:-1, None] + widths[:, None] * frac[None, :]).reshape(-1)
    dts = np.repeat(widths, substeps)
    record = np.zeros(t_mid.size, dtype=np.bool_)
    record[substeps - 1::substeps] = True
    ctrl = np.ascontiguousarray(s.controls(t_mid))
    return propagate_kernel(np.ascontiguousarray(psi0.amplitudes), ctrl, dts, record, s.n_qubits, keep_states)


def _observable_map(obs: np.ndarray, n_qubits: int) -> dict:
    out = {}
    for q in range(n_qubits):
        for a, ax in enumerate(AXES):
            col = np.clip(obs[:, 3 * q + a], -1.0, 1.0)
            col.setflags(write=False)
            out[f"s{ax}_q{q + 1}"] = col
    return out


def ground_state(H: HermitianOperator) -> StateVector:
    """Lowest-energy eigenvector with the eigensolver's phase convention."""
    return _ground_state(H)


def initial_state(s: ControlSchedule) -> tuple[StateVector, frozenset]:
    """Ground state of H(0), with flags.

    Falls back to |↑…↑⟩ when H(0) is degenerate. Flags "up_not_ground" when
    the ground state is not |↑…↑⟩.
    """
    up = StateVector.all_up(s.n_qubits)
    try:
        psi = ground_state(hamiltonian_at(s, 0.0))
    except DegeneracyError:
        return up, frozenset({"degenerate_encounter", "up_not_ground"})
    if abs(psi.amplitudes[0]) > 1 - 1e-9:
        return up, frozenset()
    return psi, frozenset({"up_not_ground"})


def propagate(s: ControlSchedule, psi0: Optional[StateVector] = None, n_record: int = 50, substeps: int = 64,
              store_states: bool = False) -> TrajectoryRecord:
    """Integrate along `s`, recording Bloch components at n_record uniform times.

    With psi0 omitted the ramp starts from `initial_state(s)`.
    """
    if n_record < 2 or substeps < 1:
        raise ArgumentError("need n_record >= 2 and substeps >= 1")
    flags = frozenset()
    if psi0 is None:
        psi0, flags = initial_state(s)
    if psi0.dim != 2**s.n_qubits:
        raise ArgumentError(f"state dim {psi0.dim} does not match {s.n_qubits} qubit(s)")
    times = np.linspace(0.0, s.T_total, n_record)
    obs, states, drift = _run(s, psi0, times, substeps, store_states)
    times.setflags(write=False)
    return TrajectoryRecord(
        schedule=s,
        sample_times=times,
        observables=_observable_map(obs, s.n_qubits),
        substeps_per_sample=substeps,
        states=states if store_states else None,
        norm_drift=float(drift),
        flags=flags,
    )


def _ground_bloch(H: HermitianOperator, n_qubits: int):
    psi = ground_state(H)
    out = np.empty(3 * n_qubits)
    _bloch_components(psi.amplitudes, n_qubits, out)
    return out


def adiabatic_prepare(target: ControlVector, n_hold_samples: int = 100, T_ramp: float = 500.0,
                      T_hold: float = 500.0, path: str = "geodesic", n_qubits: int = 1,
                      phi_hint: float = 0.0, dt_max: float = 0.25) -> PrepResult:
    """Ramp from |↑…↑⟩ at zero field to `target`, hold, and average the Bloch vectors.

    Averages over n_hold_samples times spread uniformly over the hold window,
    endpoints included. Flags "low_fidelity" when the averaged vector overlaps
    the exact ground-state Bloch vector by less than 0.99.
    """
    if not isinstance(target, ControlVector):
        target = ControlVector.from_array(target)
    s = adiabatic_prep_schedule(target, T_ramp, T_hold, path=path, phi_hint=phi_hint, n_qubits=n_qubits)
    flags = set()
    H_target = hamiltonian_from_controls(target, n_qubits)
    try:
        ground = _ground_bloch(H_target, n_qubits)
    except DegeneracyError:
        ground = None
        flags.add("degenerate_encounter")
    hold_times = np.linspace(T_ramp, T_ramp + T_hold, n_hold_samples)
    obs = _ramp_then_hold(s, hold_times, dt_max, n_qubits)
    avg = obs.mean(axis=0)
    bloch, grounds = [], []
    for q in range(n_qubits):
        v = avg[3 * q:3 * q + 3]
        bloch.append(BlochVector(*np.clip(v, -1, 1)) if v @ v <= 1 + 1e-9 else BlochVector(*(v / np.linalg.norm(v))))
        if ground is None:
            grounds.append(None)
            continue
        gq = ground[3 * q:3 * q + 3]
        grounds.append(BlochVector(*(gq / max(1.0, np.linalg.norm(gq)))))
        if float(v @ gq) < 0.99 * max(np.linalg.norm(gq), 1e-300) ** 2:
            flags.add("low_fidelity")
    return PrepResult(tuple(bloch), tuple(grounds), frozenset(flags))


def _ramp_then_hold(s: ControlSchedule, hold_times: np.ndarray, dt_max: float, n_qubits: int) -> np.ndarray:
    """Finely stepped ramp to the first hold time, then the hold samples; returns hold rows."""
    n_ramp = max(1, math.ceil(hold_times[0] / dt_max))
    _, states, _ = _run(s, StateVector.all_up(n_qubits), np.array([0.0, hold_times[0]]), n_ramp, True)
    psi = StateVector.normalized(states[-1])
    if hold_times.size == 1:
        obs = np.empty((1, 3 * n_qubits))
        _bloch_components(psi.amplitudes, n_qubits, obs[0])
        return obs
    n_hold = max(1, math.ceil(np.diff(hold_times).max() / dt_max))
    obs, _, _ = _run(s, psi, hold_times, n_hold, False)
    return obs
