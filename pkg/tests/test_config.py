import json
import math

import numpy as np
import pytest

from dicke2ion.config import (
    InitialState,
    build_scenario,
    load_config,
    merge_tables,
    scenario_to_dict,
)
from dicke2ion.errors import ConfigError, MemoryGuardError
from dicke2ion.models import dicke_state
from dicke2ion.presets import get_preset, preset_names

TWO_PI = 2 * math.pi

MINIMAL = {"model": {"n_qubits": 2, "omega_hz": 1300.0, "omega_q_hz": 1400.0, "g_hz": 1250.0}}


@pytest.fixture
def scrub_env(monkeypatch):
    """Drop variables at teardown even when load_dotenv set them behind monkeypatch's back."""

    def scrub(*names):
        for name in names:
            monkeypatch.setenv(name, "placeholder")
            monkeypatch.delenv(name)

    return scrub


def _tree(**changes):
    return merge_tables(MINIMAL, changes)


def test_load_config_resolves_env_placeholders_from_dotenv(tmp_path, scrub_env):
    scrub_env("DICKE2ION_TEST_G", "DICKE2ION_TEST_NAME")
    (tmp_path / ".env").write_text("DICKE2ION_TEST_G=1250\n")
    (tmp_path / "extra.env").write_text("DICKE2ION_TEST_NAME=from-extra\n")
    cfg = tmp_path / "scenario.toml"
    cfg.write_text(
        'name = "ENV_DICKE2ION_TEST_NAME"\n'
        'dot_env = "extra.env"\n'
        "[model]\n"
        "n_qubits = 2\nomega_hz = 1300.0\nomega_q_hz = 1400.0\n"
        'g_hz = "ENV_DICKE2ION_TEST_G"\n'
    )
    tree = load_config(str(cfg))
    assert tree["name"] == "from-extra"
    assert tree["model"]["g_hz"] == "1250"
    config = build_scenario(tree)
    assert config.model.g == pytest.approx(TWO_PI * 1250)
    assert config.name == "from-extra"


def test_unset_placeholder_is_kept_with_a_warning(tmp_path, capsys, scrub_env):
    scrub_env("DICKE2ION_TEST_MISSING")
    cfg = tmp_path / "scenario.toml"
    cfg.write_text(
        'dot_envs = ["nowhere.env"]\nlabels = ["ENV_DICKE2ION_TEST_MISSING", "plain"]\n'
        '[model]\ng_hz = "ENV_DICKE2ION_TEST_MISSING"\n'
    )
    tree = load_config(str(cfg))
    assert tree["labels"] == ["ENV_DICKE2ION_TEST_MISSING", "plain"]
    out = capsys.readouterr().out
    assert "Warning: labels[0]: environment variable 'DICKE2ION_TEST_MISSING' not set" in out
    assert "Warning: model.g_hz: environment variable" in out
    assert "Warning: dotenv file not found" in out


def test_load_config_reads_json(tmp_path):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps(MINIMAL))
    assert load_config(str(cfg)) == MINIMAL
    assert load_config(None) == {}


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.toml"))
    broken = tmp_path / "broken.toml"
    broken.write_text("[model\nn_qubits = ")
    with pytest.raises(ConfigError, match="Failed to read"):
        load_config(str(broken))
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="top level"):
        load_config(str(listed))


def test_build_scenario_defaults():
    config = build_scenario(MINIMAL)
    assert config.name == "scenario"
    assert config.model.kind == "dicke"
    assert config.model.omega == pytest.approx(TWO_PI * 1300)
    assert config.cutoff == 20
    assert config.grid.gt_end_pi == 20.0
    assert config.grid.samples == 500
    assert config.grid.dt is None
    assert config.ion.gamma == 0.0
    assert config.ion.nu == pytest.approx(TWO_PI * 3e6)
    assert config.fidelity_level == "sideband_rwa"
    assert config.reference_noise == "unitary"
    assert config.default_horizon
    space = config.space()
    np.testing.assert_array_equal(
        np.flatnonzero(config.initial_state.build(space).data), [1 * space.qubit_dim]
    )


def test_build_scenario_infers_kind_and_regime():
    biased = build_scenario(_tree(model={"h_hz": 500.0}))
    assert biased.model.kind == "biased"
    assert build_scenario(_tree(model={"s": 0.0})).model.kind == "tavis_cummings"
    assert build_scenario(_tree(model={"s": 3.0})).model.kind == "anisotropic"
    weak = build_scenario(_tree(model={"omega_hz": 62.5e3}))
    assert (weak.cutoff, weak.grid.gt_end_pi) == (8, 4.0)
    static = build_scenario(_tree(model={"omega_hz": 0.0}))
    assert static.cutoff == 20


def test_preset_with_overrides():
    config = build_scenario({"preset": "dicke3_wf", "cutoff": 5, "grid": {"gt_end_pi": 1.0}})
    preset = get_preset("dicke3_wf")
    assert config.name == "dicke3_wf"
    assert config.cutoff == 5
    assert config.grid.gt_end_pi == 1.0
    assert not config.default_horizon
    assert config.model.g == pytest.approx(preset.model.g)
    assert config.ion.gamma == pytest.approx(preset.ion.gamma)
    assert config.expected_regime == "WF"
    renamed = build_scenario({"preset": "dicke3_wf", "name": "mine"})
    assert renamed.name == "mine"
    assert renamed.default_horizon


@pytest.mark.parametrize("name", preset_names())
def test_scenario_to_dict_round_trip(name):
    preset = get_preset(name)
    config = build_scenario(scenario_to_dict(preset))
    assert config.name == preset.name
    assert config.model.kind == preset.model.kind
    for field in ("omega", "omega_q", "g", "h", "s"):
        assert getattr(config.model, field) == pytest.approx(getattr(preset.model, field), rel=1e-12)
    assert config.ion.gamma == pytest.approx(preset.ion.gamma, rel=1e-12)
    assert config.cutoff == preset.cutoff
    assert config.grid == preset.grid
    assert config.initial_state == preset.initial_state
    assert config.expected_regime == preset.expected_regime
    assert config.default_horizon


def test_t_end_from_horizon():
    assert get_preset("dicke3_wf").t_end == pytest.approx(1.6e-3)
    config = build_scenario(_tree(grid={"gt_end_pi": 2.0}))
    assert config.t_end == pytest.approx(2 * math.pi / (TWO_PI * 1250))


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"model": {"g_hz": None}}, "model.g_hz"),
        ({"model": {"g_hz": "fast"}}, "expected a number"),
        ({"model": {"g_hz": True}}, "expected a number"),
        ({"model": {"omega_hz": -1.0}}, "must be ≥ 0"),
        ({"model": {"kind": "rabi"}}, "model.kind"),
        ({"model": {"kind": "dicke", "s": 2.0}}, "requires"),
        ({"cutoff": 2.5}, "expected an integer"),
        ({"cutoff": 0}, "cutoff"),
        ({"grid": {"gt_end_pi": 0.0}}, "grid.gt_end_pi"),
        ({"grid": {"dt": -1e-6}}, "grid.dt"),
        ({"grid": {"samples": 1}}, "grid.samples"),
        ({"grid": "long"}, "grid: expected a table"),
        ({"initial_state": {"spins": "↓↓↓"}}, "3 spins for 2 qubits"),
        ({"initial_state": {"spins": "dicke:5"}}, "needs k"),
        ({"initial_state": {"spins": "↓x"}}, "initial_state.spins"),
        ({"initial_state": {"phonons": 30}}, "initial_state.phonons"),
        ({"fidelity_level": "exact"}, "fidelity_level"),
        ({"reference_noise": "thermal"}, "reference_noise"),
        ({"output": {"format": "hdf5"}}, "output.format"),
        ({"ion": {"nu_hz": 0.0}}, "ion.nu_hz"),
        ({"ion": {"eta": 0.5}}, "ion.eta"),
        ({"ion": {"gamma_hz": -2.0}}, "ion.gamma_hz"),
    ],
)
def test_field_errors(changes, message):
    tree = _tree(**changes)
    if tree["model"].get("g_hz", 0) is None:
        del tree["model"]["g_hz"]
    with pytest.raises(ConfigError, match=message):
        build_scenario(tree)


def test_zero_coupling_is_rejected():
    with pytest.raises(ConfigError, match="model.g_hz"):
        build_scenario(_tree(model={"g_hz": 0.0}))


def test_memory_guard_fires_while_building():
    tree = _tree(model={"n_qubits": 10}, cutoff=20)
    with pytest.raises(MemoryGuardError):
        build_scenario(tree)


def test_relative_output_path_resolves_against_the_config_dir(tmp_path):
    config = build_scenario(_tree(output={"path": "runs/out.csv"}), base_dir=tmp_path)
    assert config.output.path == str(tmp_path / "runs" / "out.csv")
    absolute = str(tmp_path / "abs.csv")
    assert build_scenario(_tree(output={"path": absolute}), base_dir=tmp_path / "x").output.path == absolute


def test_initial_state_dicke_spins(space_3q):
    state = InitialState(phonons=2, spins="dicke:2").build(space_3q)
    np.testing.assert_allclose(state.data, dicke_state(space_3q, 2, phonons=2).data)
    config = build_scenario(
        {"model": {"n_qubits": 3, "omega_hz": 1300.0, "omega_q_hz": 1400.0, "g_hz": 1250.0},
         "initial_state": {"phonons": 0, "spins": "dicke:1"}}
    )
    assert config.initial_state.spins == "dicke:1"


def test_merge_tables_is_deep_and_non_destructive():
    base = {"a": {"x": 1, "y": 2}, "b": 1}
    merged = merge_tables(base, {"a": {"y": 3}, "c": 4})
    assert merged == {"a": {"x": 1, "y": 3}, "b": 1, "c": 4}
    assert base == {"a": {"x": 1, "y": 2}, "b": 1}
