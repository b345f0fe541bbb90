"""Trapped-ion drive Hamiltonians in the interaction picture of the trap and the qubits.

Two fidelity levels are built:
  full          first-order Lamb-Dicke expansion of every tone, including the off-resonant
                terms rotating at the trap frequency (micromotion) and at twice it;
  sideband_rwa  only the slow carrier / red / blue resonances left by the vibrational RWA.
The optical-frequency lab-frame Hamiltonian is never integrated; omega0 is kept as metadata.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import math
import warnings

import numpy as np

from .algebra import HilbertSpace, ladder, spin
from .errors import ConfigError, Dicke2IonWarning
from .models import HamiltonianTerm, TimeDependentHamiltonian

TONE_KINDS = ("carrier", "red", "blue")
SIDEBAND_ORDER = {"carrier": 0, "red": -1, "blue": 1}
FIDELITY_LEVELS = ("full", "sideband_rwa")
ETA_MAX = 0.2
ETA_WARN = 0.1
POINTS_PER_PERIOD = 40
FALLBACK_STEPS = 1000


@dataclass(frozen=True)
class IonParams:
    nu: float
    omega0: float
    eta: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not self.nu > 0:
            raise ConfigError(f"ion.nu: trap frequency must be > 0, got {self.nu}")
        if not 0 < self.eta <= ETA_MAX:
            raise ConfigError(
                f"ion.eta: Lamb-Dicke parameter must be in (0, {ETA_MAX}], got {self.eta}"
            )
        if self.gamma < 0:
            raise ConfigError(f"ion.gamma: dephasing rate must be >= 0, got {self.gamma}")
        if self.eta > ETA_WARN:
            warnings.warn(
                f"eta = {self.eta} is above {ETA_WARN}; first-order Lamb-Dicke expansion is marginal",
                Dicke2IonWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class Tone:
    kind: str
    rabi: float
    detuning_small: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in TONE_KINDS:
            raise ConfigError(f"tone.kind: unknown {self.kind!r}; expected one of {TONE_KINDS}")
        if self.rabi < 0:
            raise ConfigError(f"tone.rabi: must be >= 0, got {self.rabi}")

    @property
    def order(self) -> int:
        return SIDEBAND_ORDER[self.kind]

    def laser_detuning(self, nu: float) -> float:
        return self.order * nu + self.detuning_small


def _check_tones(tones: Sequence[Tone]) -> None:
    if not tones:
        raise ValueError("ion_hamiltonian needs at least one tone")
    kinds = [t.kind for t in tones]
    duplicates = sorted({k for k in kinds if kinds.count(k) > 1})
    if duplicates:
        raise ValueError(f"duplicate tones of kind: {', '.join(duplicates)}")


def _check_level(fidelity_level: str) -> None:
    if fidelity_level not in FIDELITY_LEVELS:
        raise ConfigError(
            f"fidelity_level: unknown {fidelity_level!r}; expected one of {FIDELITY_LEVELS}"
        )


def _full_terms(params: IonParams, tones: Sequence[Tone], space: HilbertSpace) -> List[HamiltonianTerm]:
    sp = spin(space, "sigma_plus")
    a, ad = ladder(space)
    a_sp, ad_sp = a @ sp, ad @ sp
    terms = []
    for tone in tones:
        base = 0.5 * tone.rabi * np.exp(1j * tone.phase)
        side = 1j * params.eta * base

        # -(m nu + delta) with integer m keeps the resonant term at exactly -delta
        def freq(m: int) -> float:
            return -(m * params.nu + tone.detuning_small)

        terms += [
            HamiltonianTerm(sp, base, freq(tone.order), True, f"{tone.kind}: Σ+"),
            HamiltonianTerm(a_sp, side, freq(tone.order + 1), True, f"{tone.kind}: iη aΣ+"),
            HamiltonianTerm(ad_sp, side, freq(tone.order - 1), True, f"{tone.kind}: iη a†Σ+"),
        ]
    return terms


def _sideband_terms(params: IonParams, tones: Sequence[Tone], space: HilbertSpace) -> List[HamiltonianTerm]:
    sp = spin(space, "sigma_plus")
    terms = []
    for tone in tones:
        base = 0.5 * tone.rabi * np.exp(1j * tone.phase)
        freq = -tone.detuning_small
        if tone.kind == "carrier":
            terms.append(HamiltonianTerm(sp, base, freq, True, "carrier"))
            continue
        a, ad = ladder(space)
        op = a @ sp if tone.kind == "red" else ad @ sp
        terms.append(HamiltonianTerm(op, 1j * params.eta * base, freq, True, tone.kind))
    return terms


def ion_hamiltonian(
    params: IonParams,
    tones: Sequence[Tone],
    space: HilbertSpace,
    fidelity_level: str = "sideband_rwa",
) -> TimeDependentHamiltonian:
    _check_tones(tones)
    _check_level(fidelity_level)
    if fidelity_level == "full":
        terms = _full_terms(params, tones, space)
    else:
        terms = _sideband_terms(params, tones, space)
    return TimeDependentHamiltonian(space, [t for t in terms if t.amplitude != 0])


def recommended_timestep(
    params: IonParams,
    tones: Sequence[Tone],
    fidelity_level: str = "sideband_rwa",
    space: Optional[HilbertSpace] = None,
    t_end: Optional[float] = None,
) -> float:
    """Largest step giving POINTS_PER_PERIOD points per fastest rotation of H(t).

    The fastest rotation is 2*nu + max|Delta| at the full level and max|delta| at the
    sideband level; with a space the Hamiltonian norm bound joins the comparison.
    """
    _check_tones(tones)
    _check_level(fidelity_level)
    if fidelity_level == "full":
        w_max = 2 * params.nu + max(abs(t.laser_detuning(params.nu)) for t in tones)
    else:
        w_max = max(abs(t.detuning_small) for t in tones)
    if space is not None:
        w_max = max(w_max, ion_hamiltonian(params, tones, space, fidelity_level).norm_bound())
    dt = 2 * math.pi / (POINTS_PER_PERIOD * w_max) if w_max > 0 else math.inf
    if t_end is not None:
        dt = min(dt, t_end / FALLBACK_STEPS)
    if not math.isfinite(dt):
        raise ConfigError(
            "grid.t_end: required to cap the step of a drive with no frequency scale"
        )
    return dt


def split_terms(
    h: TimeDependentHamiltonian, threshold: float
) -> Tuple[TimeDependentHamiltonian, TimeDependentHamiltonian]:
    """(slow, fast) parts: terms rotating below / at-or-above `threshold` rad/s."""
    slow = h.filtered(lambda t: abs(t.frequency) < threshold)
    fast = h.filtered(lambda t: abs(t.frequency) >= threshold)
    return slow, fast


