"""Dicke-family Hamiltonians, parity and Dicke states.

A TimeDependentHamiltonian is a list of terms amplitude * exp(i * frequency * t) * operator,
each optionally paired with its Hermitian conjugate, so H(t) is Hermitian by construction.
"""
from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from .algebra import (
    HilbertSpace,
    Operator,
    QuantumState,
    basis_index,
    ladder,
    number_operator,
    spin,
)
from .errors import ConfigError

MODEL_KINDS = ("dicke", "biased", "anisotropic", "tavis_cummings")
PICTURES = ("static", "interaction")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    n_qubits: int
    omega: float
    omega_q: float
    g: float
    h: float = 0.0
    s: float = 1.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model.kind: unknown kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ConfigError(f"model.n_qubits: must be a positive integer, got {self.n_qubits}")
        for name in ("g", "h", "s"):
            if getattr(self, name) < 0:
                raise ConfigError(f"model.{name}: must be >= 0, got {getattr(self, name)}")
        if self.kind == "dicke" and not (self.h == 0 and self.s == 1):
            raise ConfigError("model: kind 'dicke' requires h = 0 and s = 1")
        if self.kind == "tavis_cummings" and not (self.h == 0 and self.s == 0):
            raise ConfigError("model: kind 'tavis_cummings' requires h = 0 and s = 0")
        if self.kind == "biased" and self.s != 1:
            raise ConfigError("model: kind 'biased' requires s = 1")
        if self.kind == "anisotropic" and self.h != 0:
            raise ConfigError("model: kind 'anisotropic' requires h = 0")

    def replace(self, **changes) -> "ModelSpec":
        fields = dict(
            kind=self.kind, n_qubits=self.n_qubits, omega=self.omega,
            omega_q=self.omega_q, g=self.g, h=self.h, s=self.s,
        )
        fields.update(changes)
        return ModelSpec(**fields)


@dataclass(frozen=True)
class HamiltonianTerm:
    operator: Operator
    amplitude: complex
    frequency: float = 0.0
    with_hc: bool = True
    label: str = ""

    def envelope(self, t: float) -> complex:
        return self.amplitude * np.exp(1j * self.frequency * t)


class TimeDependentHamiltonian:
    """H(t) = sum_k [c_k(t) M_k + conj(c_k(t)) M_k^dagger (paired terms only)]."""

    def __init__(self, space: HilbertSpace, terms: Iterable[HamiltonianTerm]):
        self.space = space
        self.terms: Tuple[HamiltonianTerm, ...] = tuple(terms)
        for term in self.terms:
            if term.operator.space.dim != space.dim:
                raise ValueError(f"term {term.label!r} lives on a different space")
        self._amps = np.array([t.amplitude for t in self.terms], dtype=complex)
        self._freqs = np.array([t.frequency for t in self.terms], dtype=float)
        self._hc = np.array([i for i, t in enumerate(self.terms) if t.with_hc], dtype=int)
        mats = [t.operator.matrix for t in self.terms]
        mats += [self.terms[i].operator.matrix.conj().T for i in self._hc]
        if mats:
            self._stack = np.stack(mats)
        else:
            self._stack = np.zeros((0, space.dim, space.dim), dtype=complex)
        self._static: Optional[np.ndarray] = None
        if not np.any(self._freqs):
            self._static = self._assemble(0.0)

    def coefficients(self, t: float) -> np.ndarray:
        env = self._amps * np.exp(1j * self._freqs * t)
        return np.concatenate([env, env[self._hc].conj()])

    def _assemble(self, t: float) -> np.ndarray:
        return np.tensordot(self.coefficients(t), self._stack, axes=1)

    def __call__(self, t: float) -> np.ndarray:
        if self._static is not None:
            return self._static
        return self._assemble(t)

    def at(self, t: float) -> Operator:
        return Operator(self.space, self(t), hermitian=True)

    @property
    def is_static(self) -> bool:
        return self._static is not None

    def frequencies(self) -> np.ndarray:
        return self._freqs.copy()

    def max_frequency(self) -> float:
        return float(np.max(np.abs(self._freqs))) if self._freqs.size else 0.0

    def norm_bound(self) -> float:
        total = 0.0
        for term in self.terms:
            weight = 2.0 if term.with_hc else 1.0
            total += weight * abs(term.amplitude) * float(np.linalg.norm(term.operator.matrix, 2))
        return total

    def filtered(self, keep: Callable[[HamiltonianTerm], bool]) -> "TimeDependentHamiltonian":
        return TimeDependentHamiltonian(self.space, [t for t in self.terms if keep(t)])

    def __add__(self, other: "TimeDependentHamiltonian") -> "TimeDependentHamiltonian":
        return TimeDependentHamiltonian(self.space, self.terms + other.terms)


def _check_space(spec: ModelSpec, space: HilbertSpace) -> None:
    if spec.n_qubits != space.n_qubits:
        raise ConfigError(
            f"model has {spec.n_qubits} qubits but the Hilbert space has {space.n_qubits}"
        )


def build_model(
    spec: ModelSpec, space: HilbertSpace, picture: str = "interaction"
) -> TimeDependentHamiltonian:
    if picture not in PICTURES:
        raise ValueError(f"picture must be one of {PICTURES}, got {picture!r}")
    _check_space(spec, space)
    spec.validate()
    a, ad = ladder(space)
    sp = spin(space, "sigma_plus")
    rotating = a @ sp
    counter = ad @ sp
    if picture == "static":
        terms = [
            HamiltonianTerm(number_operator(space), spec.omega, 0.0, False, "omega a†a"),
            HamiltonianTerm(spin(space, "sigma_z"), spec.omega_q / 2, 0.0, False, "omega_q Σz/2"),
            HamiltonianTerm(rotating, spec.g, 0.0, True, "g aΣ+"),
            HamiltonianTerm(counter, spec.s * spec.g, 0.0, True, "s g a†Σ+"),
            HamiltonianTerm(spin(space, "sigma_x"), spec.h, 0.0, False, "h Σx"),
        ]
    else:
        terms = [
            HamiltonianTerm(rotating, spec.g, spec.omega_q - spec.omega, True, "g aΣ+"),
            HamiltonianTerm(counter, spec.s * spec.g, spec.omega_q + spec.omega, True, "s g a†Σ+"),
            HamiltonianTerm(sp, spec.h, spec.omega_q, True, "h Σ+"),
        ]
    return TimeDependentHamiltonian(space, [t for t in terms if t.amplitude != 0])


def excitation_diagonal(space: HilbertSpace) -> np.ndarray:
    phonons = np.repeat(np.arange(space.boson_dim), space.qubit_dim)
    ups = np.array([bin(i).count("1") for i in range(space.qubit_dim)])
    return phonons + np.tile(ups, space.boson_dim)


def parity_operator(space: HilbertSpace) -> Operator:
    signs = np.where(excitation_diagonal(space) % 2 == 0, 1.0, -1.0)
    return Operator(space, np.diag(signs), hermitian=True)


def dicke_vector(space: HilbertSpace, excitations: int, phonons: int) -> np.ndarray:
    n = space.n_qubits
    if not 0 <= excitations <= n:
        raise ValueError(f"excitations {excitations} outside 0..{n}")
    if not 0 <= phonons <= space.fock_cutoff:
        raise ValueError(f"phonons {phonons} outside 0..{space.fock_cutoff}")
    vector = np.zeros(space.dim, dtype=complex)
    amplitude = 1.0 / sqrt(comb(n, excitations))
    for ups in combinations(range(n), excitations):
        bits = [1 if m in ups else 0 for m in range(n)]
        vector[basis_index(space, phonons, bits)] = amplitude
    return vector


def dicke_state(space: HilbertSpace, excitations: int, phonons: int = 0) -> QuantumState:
    return QuantumState(space, dicke_vector(space, excitations, phonons))


def chain_states(
    space: HilbertSpace, parity: int = -1, phonon_limit: Optional[int] = None
) -> List[Tuple[int, int, QuantumState]]:
    """Symmetric states |n, D_N^k> whose excitation parity (-1)^(n+k) equals `parity`."""
    if parity not in (-1, 1):
        raise ValueError("parity must be +1 or -1")
    top = space.fock_cutoff if phonon_limit is None else min(phonon_limit, space.fock_cutoff)
    chain = []
    for n in range(top + 1):
        for k in range(space.n_qubits + 1):
            if (-1) ** (n + k) == parity:
                chain.append((n, k, dicke_state(space, k, n)))
    return chain
