"""Fixed-step RK4 propagation of state vectors and dephasing master equations."""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Tuple
import math
import warnings

import numpy as np
from scipy import linalg

from .algebra import NEGATIVE_EIG_TOL, HilbertSpace, QuantumState, qubit_z_diagonals
from .errors import ConfigError, Dicke2IonWarning, NumericalError
from .models import TimeDependentHamiltonian

DEFAULT_SAMPLES = 500
POINTS_PER_PERIOD = 40
FALLBACK_STEPS = 1000
RENORM_THRESHOLD = 1e-12
DRIFT_LIMIT = 1e-6
CLIP_LIMIT = 1e-5
CONVERGENCE_TOL = 1e-3


@dataclass(frozen=True)
class NoiseSpec:
    dephasing_rate: float = 0.0
    channel: str = "sigma_z"

    def __post_init__(self) -> None:
        if self.dephasing_rate < 0:
            raise ConfigError(f"noise: dephasing rate must be >= 0, got {self.dephasing_rate}")
        if self.channel != "sigma_z":
            raise ConfigError("noise: only per-qubit sigma_z dephasing is supported")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform RK4 grid; samples sit every `stride` steps, first at t=0, last at t_end.

    The requested dt is an upper bound: the step actually used is t_end / steps.
    """

    t_end: float
    dt: float
    sample_count: int = DEFAULT_SAMPLES

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"grid.dt: must be > 0, got {self.dt}")
        if not self.t_end >= self.dt:
            raise ConfigError(f"grid.t_end ({self.t_end}) must be >= dt ({self.dt})")
        if self.sample_count < 2:
            raise ConfigError("grid.samples: need at least 2 samples")

    @property
    def stride(self) -> int:
        return max(1, math.ceil(self.t_end / (self.dt * (self.sample_count - 1)) - 1e-9))

    @property
    def steps(self) -> int:
        return self.stride * (self.sample_count - 1)

    @property
    def step(self) -> float:
        return self.t_end / self.steps

    def sample_times(self) -> np.ndarray:
        return np.arange(self.sample_count) * self.stride * self.step

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_end, self.step / factor, self.sample_count)


def step_rule(h: TimeDependentHamiltonian, t_end: Optional[float] = None) -> float:
    """Step giving POINTS_PER_PERIOD points per fastest envelope or norm-bound rotation."""
    w_max = max(h.max_frequency(), h.norm_bound())
    dt = 2 * math.pi / (POINTS_PER_PERIOD * w_max) if w_max > 0 else math.inf
    if t_end is not None:
        dt = min(dt, t_end / FALLBACK_STEPS)
    if not math.isfinite(dt):
        raise ConfigError(
            "grid.t_end: required to cap the step of a Hamiltonian with no frequency scale"
        )
    return dt


def iter_unitary(
    h: TimeDependentHamiltonian, psi0: QuantumState, grid: TimeGrid
) -> Iterator[QuantumState]:
    if not psi0.is_pure:
        raise ValueError("evolve_unitary needs a pure initial state")
    space = psi0.space
    psi = np.array(psi0.data, dtype=complex)
    step = grid.step
    yield psi0
    for k in range(grid.steps):
        t = k * step
        h_mid = h(t + 0.5 * step)
        k1 = -1j * (h(t) @ psi)
        k2 = -1j * (h_mid @ (psi + 0.5 * step * k1))
        k3 = -1j * (h_mid @ (psi + 0.5 * step * k2))
        k4 = -1j * (h(t + step) @ (psi + step * k3))
        psi = psi + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        norm = float(np.linalg.norm(psi))
        if not math.isfinite(norm):
            raise NumericalError(f"non-finite state at t={t + step:.6e} s (integrator unstable)")
        drift = abs(norm - 1.0)
        if drift > DRIFT_LIMIT:
            raise NumericalError(
                f"norm drift {drift:.2e} at t={t + step:.6e} s exceeds {DRIFT_LIMIT}; dt too large"
            )
        if drift > RENORM_THRESHOLD:
            psi = psi / norm
        if (k + 1) % grid.stride == 0:
            yield QuantumState(space, psi.copy(), checked=False)


def evolve_unitary(
    h: TimeDependentHamiltonian, psi0: QuantumState, grid: TimeGrid
) -> List[QuantumState]:
    return list(iter_unitary(h, psi0, grid))


def dephasing_mask(space: HilbertSpace, rate: float) -> np.ndarray:
    """Elementwise form of Gamma * sum_m (sz_m rho sz_m - rho); every sz_m is diagonal."""
    z = qubit_z_diagonals(space)
    return rate * (z.T @ z - space.n_qubits)


def _sample_density(rho: np.ndarray, t: float) -> Tuple[np.ndarray, float]:
    """Sampled copy of rho projected onto the density-matrix invariants, with its lowest eigenvalue.

    RK4 is not positivity preserving: eigenvalues down to -CLIP_LIMIT are clipped to zero
    and the trace restored; anything further out is an integrator failure.
    """
    if not np.all(np.isfinite(rho)):
        raise NumericalError(f"non-finite density matrix at t={t:.6e} s (integrator unstable)")
    sample = 0.5 * (rho + rho.conj().T)
    trace = np.trace(sample).real
    if abs(trace - 1.0) > DRIFT_LIMIT:
        raise NumericalError(
            f"trace drift {abs(trace - 1.0):.2e} at t={t:.6e} s exceeds {DRIFT_LIMIT}; dt too large"
        )
    evals, evecs = linalg.eigh(sample)
    lowest = float(evals[0])
    if evals[0] < -CLIP_LIMIT:
        raise NumericalError(f"density matrix eigenvalue {evals[0]:.2e} at t={t:.6e} s")
    if evals[0] < -RENORM_THRESHOLD:
        evals = np.clip(evals, 0.0, None)
        sample = (evecs * evals) @ evecs.conj().T
        sample = 0.5 * (sample + sample.conj().T)
        trace = float(evals.sum())
    if abs(trace - 1.0) > RENORM_THRESHOLD:
        sample = sample / trace
    return sample, lowest


def iter_lindblad(
    h: TimeDependentHamiltonian, noise: NoiseSpec, rho0: QuantumState, grid: TimeGrid
) -> Iterator[QuantumState]:
    space = rho0.space
    rho = np.array(rho0.density(), dtype=complex)
    mask = dephasing_mask(space, noise.dephasing_rate) if noise.dephasing_rate > 0 else None

    def rhs(hm: np.ndarray, r: np.ndarray) -> np.ndarray:
        x = hm @ r
        out = -1j * (x - x.conj().T)
        if mask is not None:
            out += mask * r
        return out

    step = grid.step
    clipped = 0.0
    yield rho0.to_mixed()
    for k in range(grid.steps):
        t = k * step
        h_mid = h(t + 0.5 * step)
        k1 = rhs(h(t), rho)
        k2 = rhs(h_mid, rho + 0.5 * step * k1)
        k3 = rhs(h_mid, rho + 0.5 * step * k2)
        k4 = rhs(h(t + step), rho + step * k3)
        rho = rho + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % grid.stride == 0:
            sample, lowest = _sample_density(rho, t + step)
            clipped = min(clipped, lowest)
            yield QuantumState(space, sample, checked=False)
    if clipped < -NEGATIVE_EIG_TOL:
        warnings.warn(
            f"clipped density-matrix eigenvalues down to {clipped:.2e}; consider a smaller dt",
            Dicke2IonWarning,
            stacklevel=2,
        )


def evolve_lindblad(
    h: TimeDependentHamiltonian, noise: NoiseSpec, rho0: QuantumState, grid: TimeGrid
) -> List[QuantumState]:
    return list(iter_lindblad(h, noise, rho0, grid))


@dataclass
class Refinement:
    name: str
    max_change: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None
    tolerance: float = CONVERGENCE_TOL

    @property
    def passed(self) -> bool:
        return self.error is None and all(v < self.tolerance for v in self.max_change.values())


@dataclass
class ConvergenceReport:
    scenario: str
    tolerance: float = CONVERGENCE_TOL
    refinements: List[Refinement] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(r.passed for r in self.refinements)

    def lines(self) -> List[str]:
        out = [f"Convergence report for {self.scenario} (tolerance {self.tolerance:g})"]
        if self.error:
            out.append(f"  base run failed: {self.error}")
        for ref in self.refinements:
            status = "ok" if ref.passed else "FAIL"
            out.append(f"  [{status}] {ref.name}")
            if ref.error:
                out.append(f"      error: {ref.error}")
            for column, change in ref.max_change.items():
                out.append(f"      max |Δ {column}| = {change:.3e}")
        out.append("PASSED" if self.passed else "FAILED")
        return out


def max_changes(
    base: Mapping[str, np.ndarray], refined: Mapping[str, np.ndarray]
) -> Dict[str, float]:
    changes: Dict[str, float] = {}
    for column, values in base.items():
        other = refined.get(column)
        if other is None or np.all(np.isnan(values)):
            continue
        if len(other) != len(values):
            raise ValueError(f"column {column!r}: sample grids differ")
        changes[column] = float(np.nanmax(np.abs(np.asarray(other) - np.asarray(values))))
    return changes
