"""Parameter conversion between ion drives and Dicke-family models, regimes, error budget."""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence
import math
import warnings

from .errors import ConfigError, Dicke2IonWarning
from .ionsim import IonParams, Tone
from .models import ModelSpec

SIDEBAND_PHASE = -math.pi / 2
CARRIER_PHASE = 0.0
WF_LIMIT = 0.1
DSC_LIMIT = 1.0
STRETCH_MODE_BOUND = 1e-4
UNIT_S_TOL = 1e-12
HEATING_RATE = 3.0  # phonons/s, typical linear-trap figure


@dataclass(frozen=True)
class RegimeLabel:
    label: str
    ratio: float


def tones_from_model(
    spec: ModelSpec, ion: IonParams, rabi_red: Optional[float] = None
) -> List[Tone]:
    if ion.eta <= 0:
        raise ConfigError("ion.eta: must be > 0 to map a model onto sidebands")
    if spec.omega < 0 or spec.omega_q < 0:
        raise ConfigError(
            f"model: negative frequencies requested (omega={spec.omega}, omega_q={spec.omega_q})"
        )
    expected = 2 * spec.g / ion.eta
    if rabi_red is None:
        rabi_red = expected
    elif not math.isclose(rabi_red, expected, rel_tol=1e-9):
        raise ConfigError(
            f"rabi_red {rabi_red:.6g} rad/s is inconsistent with g: 2g/eta = {expected:.6g} rad/s"
        )
    if not rabi_red > 0:
        raise ConfigError("red-sideband Rabi frequency must be > 0 (g = 0 has no ion drive)")
    tones = [
        Tone("red", rabi_red, spec.omega - spec.omega_q, SIDEBAND_PHASE),
        Tone("blue", spec.s * rabi_red, -(spec.omega + spec.omega_q), SIDEBAND_PHASE),
    ]
    if spec.h > 0:
        tones.append(Tone("carrier", 2 * spec.h, -spec.omega_q, CARRIER_PHASE))
    return tones


def _tones_by_kind(tones: Sequence[Tone]) -> Dict[str, Tone]:
    by_kind: Dict[str, Tone] = {}
    for tone in tones:
        if tone.kind in by_kind:
            raise ValueError(f"duplicate tone of kind {tone.kind!r}")
        by_kind[tone.kind] = tone
    return by_kind


def model_from_tones(tones: Sequence[Tone], ion: IonParams, n_qubits: int) -> ModelSpec:
    by_kind = _tones_by_kind(tones)
    missing = [k for k in ("red", "blue") if k not in by_kind]
    if missing:
        raise ConfigError(f"missing sideband tone(s): {', '.join(missing)}")
    red, blue = by_kind["red"], by_kind["blue"]
    if red.rabi <= 0:
        raise ConfigError("red-sideband Rabi frequency must be > 0")
    omega = (red.detuning_small - blue.detuning_small) / 2
    omega_q = -(red.detuning_small + blue.detuning_small) / 2
    g = red.rabi * ion.eta / 2
    s = blue.rabi / red.rabi
    carrier = by_kind.get("carrier")
    h = carrier.rabi / 2 if carrier is not None else 0.0
    if abs(s - 1) <= UNIT_S_TOL:
        s = 1.0
    if h > 0:
        if s != 1.0:
            raise ConfigError("a carrier tone maps to the biased model, which needs Ω^b = Ω^r")
        kind = "biased"
    elif s == 0:
        kind = "tavis_cummings"
    elif s == 1.0:
        kind = "dicke"
    else:
        kind = "anisotropic"
    return ModelSpec(kind, n_qubits, omega, omega_q, g, h, s)


def laser_frequencies(tones: Sequence[Tone], ion: IonParams) -> Dict[str, float]:
    """Absolute laser angular frequencies, e.g. omega_r = omega0 - nu + delta_r."""
    return {t.kind: ion.omega0 + t.laser_detuning(ion.nu) for t in tones}


def classify_regime(spec: ModelSpec) -> RegimeLabel:
    if spec.omega == 0:
        raise ConfigError("cannot classify a regime with omega = 0")
    ratio = max(spec.g, spec.s * spec.g) / abs(spec.omega)
    if ratio < WF_LIMIT:
        label = "WF"
    elif ratio < DSC_LIMIT:
        label = "USC"
    else:
        label = "DSC"
    return RegimeLabel(label, ratio)


def stretch_mode_error(ion: IonParams, rabi: float, n_qubits: int) -> float:
    """Probability of exciting the stretch mode, (sqrt(N) eta Omega / ((sqrt(3)-1) nu))^2."""
    if not ion.nu > 0:
        raise ConfigError("ion.nu must be > 0")
    amplitude = math.sqrt(n_qubits) * ion.eta * rabi / ((math.sqrt(3) - 1) * ion.nu)
    probability = amplitude ** 2
    if probability >= STRETCH_MODE_BOUND:
        warnings.warn(
            f"stretch-mode excitation probability {probability:.2e} is not below {STRETCH_MODE_BOUND}",
            Dicke2IonWarning,
            stacklevel=2,
        )
    return probability


def dephasing_time(gamma: float) -> float:
    return math.inf if gamma == 0 else 2 * math.pi / gamma


def collective_dephasing_factor(n_qubits: int) -> float:
    # correlated dephasing scales as N^2 instead of N
    return float(n_qubits)


def heating_estimate(rate_phonons_per_s: float, t_end: float) -> float:
    if rate_phonons_per_s < 0 or t_end < 0:
        raise ValueError("heating rate and horizon must be >= 0")
    return rate_phonons_per_s * t_end
