"""Built-in scenarios: the ten reference trapped-ion runs.

Every preset is stated in ion-frame terms (Rabi frequency, sideband detunings, s, h in units
of g) and mapped to its model with model_from_tones, so the tones stay the source of truth.
Common constants: nu = 2pi x 3 MHz, Omega (or Omega^r) = 2pi x 50 kHz, eta = 0.05,
Gamma = Omega eta / 100, omega0 = 2pi x 1e14 Hz; initial state |1, down...down>.
"""
from dataclasses import dataclass
from typing import Dict, List
import math

from .config import (
    DEFAULT_CUTOFF,
    DEFAULT_GT_END_PI,
    GridSettings,
    InitialState,
    ScenarioConfig,
)
from .errors import ConfigError
from .ionsim import IonParams, Tone
from .mapping import CARRIER_PHASE, SIDEBAND_PHASE, classify_regime, model_from_tones

TWO_PI = 2 * math.pi
NU_HZ = 3e6
OMEGA0_HZ = 1e14
RABI_HZ = 50e3
ETA = 0.05


@dataclass(frozen=True)
class PresetDrive:
    name: str
    regime: str
    n_qubits: int
    delta_r_hz: float
    delta_b_hz: float
    s: float = 1.0
    h_over_g: float = 0.0
    description: str = ""


_DRIVES = (
    PresetDrive("dicke3_wf", "WF", 3, 0.0, -125e3, description="Dicke model, three ions"),
    PresetDrive("dicke3_usc", "USC", 3, -100.0, -2.7e3, description="Dicke model, three ions"),
    PresetDrive("biased2_wf_h_g", "WF", 2, 0.0, -125e3, h_over_g=1.0,
                description="biased Dicke model, h = Omega eta / 2"),
    PresetDrive("biased2_wf_h_5g", "WF", 2, 0.0, -125e3, h_over_g=5.0,
                description="biased Dicke model, h = 5 Omega eta / 2"),
    PresetDrive("biased2_usc_h_g", "USC", 2, -100.0, -2.7e3, h_over_g=1.0,
                description="biased Dicke model, h = Omega eta / 2"),
    PresetDrive("biased2_usc_h_5g", "USC", 2, -100.0, -2.7e3, h_over_g=5.0,
                description="biased Dicke model, h = 5 Omega eta / 2"),
    PresetDrive("anis2_usc_s3", "USC", 2, -100.0, -7.7e3, s=3.0,
                description="anisotropic Dicke model, s = 3"),
    PresetDrive("anis2_usc_s5", "USC", 2, -100.0, -12.7e3, s=5.0,
                description="anisotropic Dicke model, s = 5"),
    PresetDrive("anis2_dsc_s3", "DSC", 2, -112.0, -7238.0, s=3.0,
                description="anisotropic Dicke model, s = 3"),
    PresetDrive("anis2_dsc_s5", "DSC", 2, -187.0, -12063.0, s=5.0,
                description="anisotropic Dicke model, s = 5"),
)

PRESETS: Dict[str, PresetDrive] = {d.name: d for d in _DRIVES}


def preset_names() -> List[str]:
    return [d.name for d in _DRIVES]


def preset_ion() -> IonParams:
    rabi = TWO_PI * RABI_HZ
    return IonParams(
        nu=TWO_PI * NU_HZ,
        omega0=TWO_PI * OMEGA0_HZ,
        eta=ETA,
        gamma=rabi * ETA / 100,
    )


def preset_tones(drive: PresetDrive, ion: IonParams) -> List[Tone]:
    rabi = TWO_PI * RABI_HZ
    delta_r = TWO_PI * drive.delta_r_hz
    delta_b = TWO_PI * drive.delta_b_hz
    tones = [
        Tone("red", rabi, delta_r, SIDEBAND_PHASE),
        Tone("blue", drive.s * rabi, delta_b, SIDEBAND_PHASE),
    ]
    if drive.h_over_g > 0:
        g = rabi * ion.eta / 2
        # carrier detuning -omega_q = (delta_r + delta_b) / 2
        tones.append(Tone("carrier", 2 * drive.h_over_g * g, (delta_r + delta_b) / 2, CARRIER_PHASE))
    return tones


def get_drive(name: str) -> PresetDrive:
    drive = PRESETS.get(name)
    if drive is None:
        raise ConfigError(f"preset: unknown {name!r}; available: {', '.join(preset_names())}")
    return drive


def get_preset(name: str) -> ScenarioConfig:
    drive = get_drive(name)
    ion = preset_ion()
    model = model_from_tones(preset_tones(drive, ion), ion, drive.n_qubits)
    return ScenarioConfig(
        name=drive.name,
        model=model,
        ion=ion,
        cutoff=DEFAULT_CUTOFF[drive.regime],
        grid=GridSettings(gt_end_pi=DEFAULT_GT_END_PI[drive.regime]),
        initial_state=InitialState(phonons=1, spins="↓" * drive.n_qubits),
        expected_regime=drive.regime,
        default_horizon=True,
        description=drive.description,
    )


def preset_rows() -> List[Dict[str, object]]:
    rows = []
    for drive in _DRIVES:
        config = get_preset(drive.name)
        m = config.model
        regime = classify_regime(m)
        rows.append({
            "name": drive.name,
            "kind": m.kind,
            "n_qubits": m.n_qubits,
            "rabi_r_hz": RABI_HZ,
            "delta_r_hz": drive.delta_r_hz,
            "delta_b_hz": drive.delta_b_hz,
            "s": m.s,
            "g_hz": m.g / TWO_PI,
            "h_hz": m.h / TWO_PI,
            "omega_hz": m.omega / TWO_PI,
            "omega_q_hz": m.omega_q / TWO_PI,
            "regime": regime.label,
            "ratio": regime.ratio,
            "gamma_hz": config.ion.gamma / TWO_PI,
        })
    return rows


def format_preset_table() -> List[str]:
    header = (
        f"{'name':<18}{'kind':<13}{'N':>2}  {'δr (Hz)':>10}{'δb (Hz)':>11}"
        f"{'s':>4}{'g (Hz)':>9}{'h (Hz)':>9}{'ω (Hz)':>10}{'ωq (Hz)':>10}  regime"
    )
    lines = [
        "Common: ν=2π×3 MHz, ω0=2π×1e14 Hz, Ω^r=2π×50 kHz, η=0.05, Γ=Ωη/100=2π×25 Hz;"
        " all values below are f with ω = 2π f",
        header,
        "-" * len(header),
    ]
    for row in preset_rows():
        lines.append(
            f"{row['name']:<18}{row['kind']:<13}{row['n_qubits']:>2}  "
            f"{row['delta_r_hz']:>10g}{row['delta_b_hz']:>11g}{row['s']:>4g}"
            f"{row['g_hz']:>9.6g}{row['h_hz']:>9.6g}{row['omega_hz']:>10.6g}"
            f"{row['omega_q_hz']:>10.6g}  {row['regime']} ({row['ratio']:.3f})"
        )
    return lines
