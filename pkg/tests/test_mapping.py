import math
import warnings

import pytest

from dicke2ion.errors import ConfigError, Dicke2IonWarning
from dicke2ion.ionsim import IonParams, Tone
from dicke2ion.mapping import (
    CARRIER_PHASE,
    SIDEBAND_PHASE,
    classify_regime,
    collective_dephasing_factor,
    dephasing_time,
    heating_estimate,
    laser_frequencies,
    model_from_tones,
    stretch_mode_error,
    tones_from_model,
)
from dicke2ion.models import ModelSpec
from dicke2ion.presets import get_preset, preset_names

TWO_PI = 2 * math.pi


def _spec(kind="dicke", h=0.0, s=1.0, omega_hz=1300.0):
    return ModelSpec(kind, 2, TWO_PI * omega_hz, TWO_PI * 1400, TWO_PI * 1250, TWO_PI * h, s)


@pytest.mark.parametrize("name", preset_names())
def test_presets_round_trip_through_tones(name):
    config = get_preset(name)
    spec = config.model
    back = model_from_tones(tones_from_model(spec, config.ion), config.ion, spec.n_qubits)
    assert back.kind == spec.kind
    for field in ("omega", "omega_q", "g", "h", "s"):
        assert getattr(back, field) == pytest.approx(getattr(spec, field), rel=1e-12, abs=1e-12)


def test_tones_for_a_biased_model(ion):
    spec = _spec("biased", h=500.0)
    red, blue, carrier = tones_from_model(spec, ion)
    assert red.rabi == pytest.approx(2 * spec.g / ion.eta)
    assert red.detuning_small == pytest.approx(spec.omega - spec.omega_q)
    assert blue.detuning_small == pytest.approx(-(spec.omega + spec.omega_q))
    assert red.phase == blue.phase == SIDEBAND_PHASE
    assert carrier.kind == "carrier"
    assert carrier.rabi == pytest.approx(2 * spec.h)
    assert carrier.detuning_small == pytest.approx(-spec.omega_q)
    assert carrier.phase == CARRIER_PHASE


def test_tavis_cummings_maps_to_a_dark_blue_tone(ion):
    spec = _spec("tavis_cummings", s=0.0)
    tones = tones_from_model(spec, ion)
    assert tones[1].rabi == 0.0
    assert model_from_tones(tones, ion, 2).kind == "tavis_cummings"


def test_anisotropic_round_trip(ion):
    spec = _spec("anisotropic", s=3.0)
    back = model_from_tones(tones_from_model(spec, ion), ion, 2)
    assert back.kind == "anisotropic"
    assert back.s == pytest.approx(3.0)


def test_tones_from_model_errors(ion):
    spec = _spec()
    with pytest.raises(ConfigError, match="inconsistent"):
        tones_from_model(spec, ion, rabi_red=1.0)
    assert tones_from_model(spec, ion, rabi_red=2 * spec.g / ion.eta)[0].rabi > 0
    with pytest.raises(ConfigError):
        tones_from_model(ModelSpec("dicke", 2, 1.0, 1.0, 0.0), ion)
    with pytest.raises(ConfigError, match="negative"):
        tones_from_model(ModelSpec("dicke", 2, -1.0, 1.0, 1.0), ion)


def test_model_from_tones_errors(ion):
    red = Tone("red", 1e5, 0.0, SIDEBAND_PHASE)
    blue = Tone("blue", 1e5, -1e5, SIDEBAND_PHASE)
    with pytest.raises(ConfigError, match="blue"):
        model_from_tones([red], ion, 2)
    with pytest.raises(ValueError, match="duplicate"):
        model_from_tones([red, red, blue], ion, 2)
    with pytest.raises(ConfigError):
        model_from_tones([Tone("red", 0.0), blue], ion, 2)
    lopsided = Tone("blue", 3e5, -1e5, SIDEBAND_PHASE)
    with pytest.raises(ConfigError, match="carrier"):
        model_from_tones([red, lopsided, Tone("carrier", 1e3)], ion, 2)


def test_laser_frequencies(ion):
    config = get_preset("dicke3_wf")
    tones = tones_from_model(config.model, ion)
    lasers = laser_frequencies(tones, ion)
    assert lasers["red"] == pytest.approx(ion.omega0 - ion.nu + tones[0].detuning_small)
    assert lasers["blue"] == pytest.approx(ion.omega0 + ion.nu + tones[1].detuning_small)
    assert lasers["blue"] - lasers["red"] == pytest.approx(TWO_PI * (6e6 - 125e3), rel=1e-6)


@pytest.mark.parametrize(
    "omega_hz, s, label",
    [(62.5e3, 1.0, "WF"), (10e3, 1.0, "USC"), (1300.0, 1.0, "USC"), (1250.0, 1.0, "DSC"),
     (3800.0, 3.0, "USC"), (3563.0, 3.0, "DSC")],
)
def test_classify_regime(omega_hz, s, label):
    kind = "dicke" if s == 1.0 else "anisotropic"
    regime = classify_regime(_spec(kind, s=s, omega_hz=omega_hz))
    assert regime.label == label
    assert regime.ratio == pytest.approx(s * 1250 / omega_hz)


def test_classify_regime_needs_a_boson_frequency():
    with pytest.raises(ConfigError):
        classify_regime(_spec(omega_hz=0.0))


@pytest.mark.parametrize("name", preset_names())
def test_presets_match_their_regime(name):
    config = get_preset(name)
    assert classify_regime(config.model).label == config.expected_regime


def test_stretch_mode_error_is_small_for_presets(ion):
    with warnings.catch_warnings():
        warnings.simplefilter("error", Dicke2IonWarning)
        probability = stretch_mode_error(ion, TWO_PI * 50e3, 3)
    assert 0 < probability < 1e-4


def test_stretch_mode_error_warns_for_strong_drives(ion):
    with pytest.warns(Dicke2IonWarning, match="stretch-mode"):
        probability = stretch_mode_error(ion, TWO_PI * 1e6, 3)
    assert probability >= 1e-4


def test_error_budget_helpers():
    assert dephasing_time(TWO_PI * 25) == pytest.approx(0.04)
    assert dephasing_time(0.0) == math.inf
    assert collective_dephasing_factor(3) == 3.0
    assert heating_estimate(100.0, 1e-2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        heating_estimate(-1.0, 1e-3)


def test_ion_gamma_default_is_zero():
    assert IonParams(TWO_PI * 3e6, TWO_PI * 1e14, 0.05).gamma == 0.0
