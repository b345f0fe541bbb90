"""Truncated Fock (x) qubit operator algebra.

Tensor ordering is fixed everywhere as boson (x) qubit_1 (x) ... (x) qubit_N, so the
phonon index is the slowest-varying one. Each qubit uses the basis (|down>, |up>):
index 0 is |down>, sigma_z = diag(-1, +1) and sigma_plus = |up><down|.
"""
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import MemoryGuardError
from .utils import getenv_int

DEFAULT_MAX_DIM = 4096
HERMITIAN_TOL = 1e-9
NEGATIVE_EIG_TOL = 1e-7
NORM_TOL = 1e-9

SPIN_KINDS = ("sigma_z", "sigma_x", "sigma_plus", "sigma_minus")

_PAULI = {
    "sigma_z": np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex),
    "sigma_x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "sigma_plus": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
    "sigma_minus": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
}

_SPIN_SYMBOLS = {"↓": 0, "d": 0, "D": 0, "↑": 1, "u": 1, "U": 1}


@dataclass(frozen=True)
class HilbertSpace:
    n_qubits: int
    fock_cutoff: int

    @property
    def boson_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def qubit_dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def dim(self) -> int:
        return self.boson_dim * self.qubit_dim


def max_dim_from_env() -> int:
    return getenv_int("DICKE2ION_MAX_DIM", DEFAULT_MAX_DIM)


def make_space(
    n_qubits: int, fock_cutoff: int, max_dim: Optional[int] = None
) -> HilbertSpace:
    if int(n_qubits) != n_qubits or n_qubits < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n_qubits}")
    if int(fock_cutoff) != fock_cutoff or fock_cutoff < 0:
        raise ValueError(f"fock_cutoff must be a non-negative integer, got {fock_cutoff}")
    space = HilbertSpace(int(n_qubits), int(fock_cutoff))
    limit = max_dim if max_dim is not None else max_dim_from_env()
    if space.dim > limit:
        raise MemoryGuardError(
            f"Hilbert space dimension {space.dim} = ({fock_cutoff}+1)*2^{n_qubits} "
            f"exceeds the memory guard of {limit}"
        )
    return space


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def hermiticity_error(matrix: np.ndarray) -> float:
    return _max_abs(matrix - matrix.conj().T)


@dataclass(frozen=True, eq=False)
class Operator:
    space: HilbertSpace
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"operator shape {matrix.shape} does not match space dim {self.space.dim}"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T, self.hermitian)

    def commutator(self, other: "Operator") -> "Operator":
        return Operator(self.space, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def max_abs(self) -> float:
        return _max_abs(self.matrix)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(
            self.space, self.matrix + other.matrix, self.hermitian and other.hermitian
        )

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(
            self.space, self.matrix - other.matrix, self.hermitian and other.hermitian
        )

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(
            self.space,
            scalar * self.matrix,
            self.hermitian and complex(scalar).imag == 0.0,
        )

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector (1-D) or density matrix (2-D) on a HilbertSpace."""

    space: HilbertSpace
    data: np.ndarray
    checked: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=complex)
        dim = self.space.dim
        if data.ndim == 1 and data.shape != (dim,):
            raise ValueError(f"state vector length {data.shape[0]} != space dim {dim}")
        if data.ndim == 2 and data.shape != (dim, dim):
            raise ValueError(f"density matrix shape {data.shape} != ({dim}, {dim})")
        if data.ndim not in (1, 2):
            raise ValueError("state data must be a vector or a square matrix")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if self.checked:
            self.validate()

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    def validate(self) -> None:
        if not np.all(np.isfinite(self.data)):
            raise ValueError("state contains non-finite values")
        if self.is_pure:
            norm = float(np.linalg.norm(self.data))
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"pure state norm {norm:.12g} differs from 1")
            return
        trace = complex(np.trace(self.data))
        if abs(trace - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {trace:.12g} differs from 1")
        if hermiticity_error(self.data) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        min_eig = float(linalg.eigvalsh(self.data)[0])
        if min_eig < -NEGATIVE_EIG_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_mixed(self) -> "QuantumState":
        if not self.is_pure:
            return self
        return QuantumState(self.space, self.density(), checked=False)


def parse_spins(spins: Union[str, Sequence[int]]) -> Tuple[int, ...]:
    if isinstance(spins, str):
        bits = []
        for ch in spins.replace(",", "").replace(" ", ""):
            if ch not in _SPIN_SYMBOLS:
                raise ValueError(f"unknown spin symbol {ch!r} (use ↓/↑ or d/u)")
            bits.append(_SPIN_SYMBOLS[ch])
        return tuple(bits)
    return tuple(int(b) for b in spins)


def basis_index(space: HilbertSpace, phonons: int, spins: Iterable[int]) -> int:
    bits = tuple(spins)
    if len(bits) != space.n_qubits:
        raise ValueError(f"expected {space.n_qubits} spins, got {len(bits)}")
    if not 0 <= phonons <= space.fock_cutoff:
        raise ValueError(f"phonon number {phonons} outside 0..{space.fock_cutoff}")
    qubit_index = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError(f"spin bits must be 0 or 1, got {bit}")
        qubit_index = 2 * qubit_index + bit
    return phonons * space.qubit_dim + qubit_index


def basis_state(
    space: HilbertSpace, phonons: int, spins: Union[str, Sequence[int]]
) -> QuantumState:
    vector = np.zeros(space.dim, dtype=complex)
    vector[basis_index(space, phonons, parse_spins(spins))] = 1.0
    return QuantumState(space, vector)


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex), hermitian=True)


def ladder(space: HilbertSpace) -> Tuple[Operator, Operator]:
    if space.fock_cutoff < 1:
        raise ValueError("ladder operators need fock_cutoff >= 1")
    boson = np.diag(np.sqrt(np.arange(1, space.boson_dim, dtype=float)), k=1)
    a = np.kron(boson, np.eye(space.qubit_dim))
    return Operator(space, a), Operator(space, a.conj().T)


def number_operator(space: HilbertSpace) -> Operator:
    diag = np.repeat(np.arange(space.boson_dim, dtype=float), space.qubit_dim)
    return Operator(space, np.diag(diag), hermitian=True)


def _embed_qubit(space: HilbertSpace, single: np.ndarray, m: int) -> np.ndarray:
    left = np.eye(2 ** (m - 1))
    right = np.eye(2 ** (space.n_qubits - m))
    qubits = np.kron(np.kron(left, single), right)
    return np.kron(np.eye(space.boson_dim), qubits)


def spin(space: HilbertSpace, which: str, target: Union[int, str] = "collective") -> Operator:
    if which not in _PAULI:
        raise ValueError(f"unknown spin operator {which!r}; expected one of {SPIN_KINDS}")
    single = _PAULI[which]
    hermitian = which in ("sigma_z", "sigma_x")
    if target == "collective":
        total = sum(_embed_qubit(space, single, m) for m in range(1, space.n_qubits + 1))
        return Operator(space, total, hermitian)
    if isinstance(target, bool) or not isinstance(target, (int, np.integer)):
        raise ValueError(f"target must be a qubit index or 'collective', got {target!r}")
    if not 1 <= target <= space.n_qubits:
        raise IndexError(f"qubit index {target} outside 1..{space.n_qubits}")
    return Operator(space, _embed_qubit(space, single, int(target)), hermitian)


def qubit_z_diagonals(space: HilbertSpace) -> np.ndarray:
    """Rows m = diagonal of sigma_z on qubit m+1; all sigma_z are diagonal in this basis."""
    out = np.empty((space.n_qubits, space.dim))
    for m in range(1, space.n_qubits + 1):
        out[m - 1] = np.real(np.diag(_embed_qubit(space, _PAULI["sigma_z"], m)))
    return out


def _as_matrix(m: Union[Operator, np.ndarray]) -> np.ndarray:
    return m.matrix if isinstance(m, Operator) else np.asarray(m, dtype=complex)


def _check_hermitian(matrix: np.ndarray, what: str) -> None:
    scale = max(1.0, _max_abs(matrix))
    err = hermiticity_error(matrix)
    if err > HERMITIAN_TOL * scale:
        raise ValueError(f"{what}: input is not Hermitian (max deviation {err:.3e})")


def herm_sqrt(m: Union[Operator, np.ndarray]) -> Union[Operator, np.ndarray]:
    """Unique positive semidefinite square root of a PSD Hermitian matrix."""
    matrix = _as_matrix(m)
    _check_hermitian(matrix, "herm_sqrt")
    evals, evecs = linalg.eigh(0.5 * (matrix + matrix.conj().T))
    if evals.size and evals[0] < -NEGATIVE_EIG_TOL:
        raise ValueError(f"herm_sqrt: eigenvalue {evals[0]:.3e} below -{NEGATIVE_EIG_TOL}")
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    if isinstance(m, Operator):
        return Operator(m.space, root, hermitian=True)
    return root


def herm_propagator(h: Union[Operator, np.ndarray], dt: float) -> Union[Operator, np.ndarray]:
    """exp(-i h dt) for Hermitian h, by eigendecomposition."""
    matrix = _as_matrix(h)
    _check_hermitian(matrix, "herm_propagator")
    evals, evecs = linalg.eigh(0.5 * (matrix + matrix.conj().T))
    u = (evecs * np.exp(-1j * evals * dt)) @ evecs.conj().T
    if isinstance(h, Operator):
        return Operator(h.space, u)
    return u
