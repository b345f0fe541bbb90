"""Trajectory observables: phonon number, excitation number, parity, S^z and Uhlmann-Jozsa fidelity."""
from dataclasses import dataclass, field
from itertools import zip_longest
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .algebra import HilbertSpace, Operator, QuantumState, herm_sqrt, qubit_z_diagonals
from .errors import NumericalError
from .models import ModelSpec, excitation_diagonal

IMAG_TOL = 1e-7
RANGE_SLACK = 1e-7
OBSERVABLES = ("phonon", "excitation", "parity", "sz")


@dataclass(frozen=True)
class ObservableSample:
    t: float
    gt: float
    phonon: float
    excitation: float
    parity: float
    sz: float
    fidelity: Optional[float] = None


@dataclass
class Trajectory:
    samples: List[ObservableSample]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = np.array([s.t for s in self.samples])
        if times.size == 0:
            raise ValueError("trajectory has no samples")
        if times[0] != 0.0:
            raise ValueError("trajectory must start at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        values = [getattr(s, name) for s in self.samples]
        return np.array([np.nan if v is None else v for v in values], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def __len__(self) -> int:
        return len(self.samples)


def expectation(op: Operator, state: QuantumState) -> float:
    if op.space.dim != state.space.dim:
        raise ValueError("operator and state live on different spaces")
    m = op.matrix
    if state.is_pure:
        value = complex(np.vdot(state.data, m @ state.data))
    else:
        value = complex(np.einsum("ij,ji->", m, state.data))
    if abs(value.imag) >= IMAG_TOL:
        raise ValueError(
            f"expectation has imaginary part {value.imag:.3e}; operator not Hermitian or state corrupted"
        )
    return value.real


def purity(state: QuantumState) -> float:
    if state.is_pure:
        return float(np.vdot(state.data, state.data).real ** 2)
    rho = state.data
    return float(np.einsum("ij,ji->", rho, rho).real)


def fidelity(reference: QuantumState, actual: QuantumState) -> float:
    """Jozsa fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1]."""
    if reference.space.dim != actual.space.dim:
        raise ValueError("fidelity needs states on the same space")
    try:
        reference.validate()
        actual.validate()
    except ValueError as err:
        raise NumericalError(f"fidelity: {err}") from err
    if reference.is_pure and actual.is_pure:
        value = abs(np.vdot(reference.data, actual.data)) ** 2
    elif reference.is_pure or actual.is_pure:
        psi, rho = (reference, actual) if reference.is_pure else (actual, reference)
        value = np.vdot(psi.data, rho.data @ psi.data).real
    else:
        root = herm_sqrt(reference.data)
        inner = root @ actual.data @ root
        evals = linalg.eigvalsh(0.5 * (inner + inner.conj().T))
        # rounding-level eigenvalues are rank noise
        evals[evals < evals[-1] * evals.size * np.finfo(float).eps] = 0.0
        value = float(np.sum(np.sqrt(np.clip(evals, 0.0, None)))) ** 2
    if value > 1 + RANGE_SLACK or value < -RANGE_SLACK:
        raise NumericalError(f"fidelity {value:.9f} outside [0, 1]")
    return float(min(1.0, max(0.0, value)))


class ObservableSet:
    """Diagonals of the four spin/phonon observables; all are diagonal in the product basis."""

    def __init__(self, space: HilbertSpace):
        self.space = space
        self.excitation = excitation_diagonal(space).astype(float)
        self.phonon = np.repeat(np.arange(space.boson_dim, dtype=float), space.qubit_dim)
        self.parity = np.where(excitation_diagonal(space) % 2 == 0, 1.0, -1.0)
        self.sz = 0.5 * qubit_z_diagonals(space).sum(axis=0)

    def populations(self, state: QuantumState) -> np.ndarray:
        if state.is_pure:
            return np.abs(state.data) ** 2
        return np.real(np.diag(state.data))

    def measure(self, state: QuantumState) -> Dict[str, float]:
        p = self.populations(state)
        return {name: float(p @ getattr(self, name)) for name in OBSERVABLES}


def _check_ranges(values: Dict[str, float], n_qubits: int, t: float) -> None:
    half = n_qubits / 2
    if not -1 - RANGE_SLACK <= values["parity"] <= 1 + RANGE_SLACK:
        raise NumericalError(f"parity {values['parity']:.9f} out of range at t={t:.6e} s")
    if not -half - RANGE_SLACK <= values["sz"] <= half + RANGE_SLACK:
        raise NumericalError(f"S^z {values['sz']:.9f} out of range at t={t:.6e} s")


def measure_trajectory(
    states: Sequence[QuantumState],
    times: Sequence[float],
    spec: ModelSpec,
    space: HilbertSpace,
    reference_states: Optional[Sequence[QuantumState]] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Trajectory:
    if len(states) != len(times):
        raise ValueError(f"{len(states)} states for {len(times)} sample times")
    if reference_states is not None and len(reference_states) != len(states):
        raise ValueError(
            f"grid mismatch: {len(states)} states vs {len(reference_states)} reference states"
        )
    observables = ObservableSet(space)
    samples = []
    for i, (t, state) in enumerate(zip(times, states)):
        values = observables.measure(state)
        _check_ranges(values, space.n_qubits, t)
        fid = fidelity(reference_states[i], state) if reference_states is not None else None
        samples.append(ObservableSample(float(t), float(spec.g * t), fidelity=fid, **values))
    return Trajectory(samples, dict(metadata or {}))


def dominant_frequency(
    times: Sequence[float], values: Sequence[float], min_cycles: int = 1
) -> Tuple[float, int]:
    """(frequency in Hz, whole cycles over the window) of the strongest non-DC component.

    The last sample is dropped so the window spans exactly t_end for uniformly spaced samples.
    """
    t = np.asarray(times, dtype=float)[:-1]
    v = np.asarray(values, dtype=float)[:-1]
    if t.size < 4:
        raise ValueError("need at least 5 samples for a spectrum")
    window = t[-1] - t[0] + (t[1] - t[0])
    spectrum = np.abs(np.fft.rfft(v - v.mean()))
    spectrum[:max(1, min_cycles)] = 0.0
    cycles = int(np.argmax(spectrum))
    return cycles / window, cycles


def measure_paired(
    times: Sequence[float],
    ion_states: Iterable[QuantumState],
    model_states: Iterable[QuantumState],
    spec: ModelSpec,
    space: HilbertSpace,
) -> Tuple[Trajectory, Trajectory]:
    """(ion, model) trajectories from two lock-stepped state streams; ion samples carry fidelity.

    States are consumed one pair at a time so long runs never hold a full history.
    """
    observables = ObservableSet(space)
    ion_samples: List[ObservableSample] = []
    model_samples: List[ObservableSample] = []
    for t, ion_state, model_state in zip_longest(times, ion_states, model_states):
        if t is None or ion_state is None or model_state is None:
            raise ValueError("grid mismatch: ion, model and time streams differ in length")
        ion_values = observables.measure(ion_state)
        model_values = observables.measure(model_state)
        _check_ranges(ion_values, space.n_qubits, t)
        _check_ranges(model_values, space.n_qubits, t)
        gt = float(spec.g * t)
        ion_samples.append(
            ObservableSample(float(t), gt, fidelity=fidelity(model_state, ion_state), **ion_values)
        )
        model_samples.append(ObservableSample(float(t), gt, **model_values))
    return Trajectory(ion_samples), Trajectory(model_samples)
