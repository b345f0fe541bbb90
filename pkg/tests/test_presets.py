import math

import pytest

from dicke2ion.errors import ConfigError
from dicke2ion.presets import (
    format_preset_table,
    get_drive,
    get_preset,
    preset_ion,
    preset_names,
    preset_rows,
    preset_tones,
)

TWO_PI = 2 * math.pi


def test_ten_presets_in_order():
    names = preset_names()
    assert len(names) == 10
    assert names[0] == "dicke3_wf"
    assert names[-1] == "anis2_dsc_s5"
    assert [get_preset(n).expected_regime for n in names].count("WF") == 3


def test_common_ion_constants():
    ion = preset_ion()
    assert ion.nu == pytest.approx(TWO_PI * 3e6)
    assert ion.eta == 0.05
    assert ion.gamma == pytest.approx(TWO_PI * 25)
    assert ion.omega0 == pytest.approx(TWO_PI * 1e14)


@pytest.mark.parametrize(
    "name, kind, n, omega_hz, omega_q_hz, s, h_over_g",
    [
        ("dicke3_wf", "dicke", 3, 62.5e3, 62.5e3, 1.0, 0.0),
        ("dicke3_usc", "dicke", 3, 1300.0, 1400.0, 1.0, 0.0),
        ("biased2_wf_h_g", "biased", 2, 62.5e3, 62.5e3, 1.0, 1.0),
        ("biased2_usc_h_5g", "biased", 2, 1300.0, 1400.0, 1.0, 5.0),
        ("anis2_usc_s3", "anisotropic", 2, 3800.0, 3900.0, 3.0, 0.0),
        ("anis2_dsc_s5", "anisotropic", 2, 5938.0, 6125.0, 5.0, 0.0),
    ],
)
def test_preset_models(name, kind, n, omega_hz, omega_q_hz, s, h_over_g):
    model = get_preset(name).model
    assert model.kind == kind
    assert model.n_qubits == n
    assert model.g == pytest.approx(TWO_PI * 1250)
    assert model.omega == pytest.approx(TWO_PI * omega_hz)
    assert model.omega_q == pytest.approx(TWO_PI * omega_q_hz)
    assert model.s == pytest.approx(s)
    assert model.h == pytest.approx(h_over_g * model.g)


@pytest.mark.parametrize("name", preset_names())
def test_preset_defaults(name):
    config = get_preset(name)
    wf = config.expected_regime == "WF"
    assert config.cutoff == (8 if wf else 20)
    assert config.grid.gt_end_pi == (4.0 if wf else 20.0)
    assert config.initial_state.phonons == 1
    assert config.initial_state.spins == "↓" * config.model.n_qubits
    assert config.default_horizon


def test_biased_presets_carry_a_carrier_tone():
    ion = preset_ion()
    tones = preset_tones(get_drive("biased2_wf_h_5g"), ion)
    assert [t.kind for t in tones] == ["red", "blue", "carrier"]
    assert tones[2].rabi == pytest.approx(2 * 5 * TWO_PI * 1250)
    assert len(preset_tones(get_drive("dicke3_wf"), ion)) == 2


def test_unknown_preset():
    with pytest.raises(ConfigError, match="available"):
        get_preset("dicke9")


def test_preset_table():
    rows = {row["name"]: row for row in preset_rows()}
    assert rows["dicke3_wf"]["g_hz"] == pytest.approx(1250.0)
    assert rows["dicke3_wf"]["omega_hz"] == pytest.approx(62.5e3)
    assert rows["dicke3_wf"]["gamma_hz"] == pytest.approx(25.0)
    assert rows["anis2_dsc_s3"]["regime"] == "DSC"
    lines = format_preset_table()
    assert len(lines) == 3 + 10
    assert all(any(line.startswith(name) for line in lines) for name in preset_names())
