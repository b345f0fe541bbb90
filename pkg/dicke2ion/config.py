from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional
from dotenv import load_dotenv
from pathlib import Path
import json
import math
import re
import os

from .algebra import HilbertSpace, QuantumState, basis_state, make_space, parse_spins
from .errors import ConfigError
from .ionsim import FIDELITY_LEVELS, IonParams
from .mapping import classify_regime
from .models import MODEL_KINDS, ModelSpec, dicke_state

try:
    import tomllib as toml_loader
except Exception:
    try:
        import tomli as toml_loader
    except Exception:
        toml_loader = None

TWO_PI = 2 * math.pi
REFERENCE_NOISE = ("unitary", "dephasing")
OUTPUT_FORMATS = ("csv",)
DEFAULT_SAMPLES = 500
DEFAULT_CUTOFF = {"WF": 8, "USC": 20, "DSC": 20}
DEFAULT_GT_END_PI = {"WF": 4.0, "USC": 20.0, "DSC": 20.0}
DEFAULT_ION = {"nu_hz": 3e6, "omega0_hz": 1e14, "eta": 0.05, "gamma_hz": 0.0}
DICKE_PREFIX = "dicke:"

ENV_PLACEHOLDER = re.compile(r"ENV_([A-Z0-9_]+)")
_MISSING = object()


def _resolve_env_placeholders(obj: Any, key_path: str = "") -> Any:
    """Replace every string equal to ENV_NAME by $NAME; unset names stay and are reported by key path."""
    if isinstance(obj, dict):
        return {
            k: _resolve_env_placeholders(v, f"{key_path}.{k}" if key_path else str(k))
            for k, v in obj.items()
        }
    if isinstance(obj, (list, tuple)):
        items = [_resolve_env_placeholders(v, f"{key_path}[{i}]") for i, v in enumerate(obj)]
        return items if isinstance(obj, list) else tuple(items)
    if not isinstance(obj, str):
        return obj
    match = ENV_PLACEHOLDER.fullmatch(obj)
    if match is None:
        return obj
    env_val = os.getenv(match.group(1))
    if env_val is None:
        print(
            f"Warning: {key_path or '<root>'}: environment variable '{match.group(1)}' "
            f"not set for placeholder '{obj}'"
        )
        return obj
    return env_val


def _load_dotenvs(cfg_path: Path, data: Mapping[str, Any]) -> None:
    default_env = cfg_path.parent / ".env"
    if default_env.exists():
        load_dotenv(dotenv_path=str(default_env), override=False)

    dot_env = data.get("dot_env")
    dot_envs = data.get("dot_envs") or []
    env_paths: List[Path] = []
    if isinstance(dot_env, str) and dot_env:
        env_paths.append(cfg_path.parent / dot_env)
    if isinstance(dot_envs, list):
        for p in dot_envs:
            if isinstance(p, str) and p:
                env_paths.append(cfg_path.parent / p)
    for p in env_paths:
        if not p.exists():
            print(f"Warning: dotenv file not found: {p}")
            continue
        load_dotenv(dotenv_path=str(p), override=False)


def load_config(config_path: Optional[str]) -> Dict[str, Any]:
    """Read a TOML (or JSON) scenario/sweep file, load its .env files, resolve ENV_ placeholders."""
    if not config_path:
        return {}
    cfg_path = Path(config_path)
    if not cfg_path.exists():
        raise ConfigError(f"Config file not found: {cfg_path}")
    try:
        if cfg_path.suffix.lower() == ".json":
            with cfg_path.open("r", encoding="utf-8") as fp:
                data: Dict[str, Any] = json.load(fp)
        else:
            if toml_loader is None:
                raise ConfigError(
                    "TOML support not available. Install 'tomli' for Python < 3.11 or use Python 3.11+."
                )
            with cfg_path.open("rb") as fp:
                data = toml_loader.load(fp)
    except ConfigError:
        raise
    except Exception as err:
        raise ConfigError(f"Failed to read config {cfg_path}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"Config {cfg_path}: top level must be a table")

    _load_dotenvs(cfg_path, data)
    return _resolve_env_placeholders(data)


@dataclass(frozen=True)
class InitialState:
    """|phonons> (x) spins, where spins is a ↓/↑ string or 'dicke:k' for |D_N^k>."""

    phonons: int = 1
    spins: str = ""

    def build(self, space: HilbertSpace) -> QuantumState:
        if self.spins.startswith(DICKE_PREFIX):
            return dicke_state(space, int(self.spins[len(DICKE_PREFIX):]), self.phonons)
        spins = self.spins or "↓" * space.n_qubits
        return basis_state(space, self.phonons, spins)


@dataclass(frozen=True)
class GridSettings:
    gt_end_pi: float
    dt: Optional[float] = None
    samples: int = DEFAULT_SAMPLES


@dataclass(frozen=True)
class OutputSettings:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: ModelSpec
    ion: IonParams
    cutoff: int
    grid: GridSettings
    initial_state: InitialState = field(default_factory=InitialState)
    fidelity_level: str = "sideband_rwa"
    reference_noise: str = "unitary"
    output: OutputSettings = field(default_factory=OutputSettings)
    expected_regime: Optional[str] = None
    default_horizon: bool = False
    description: str = ""

    def __post_init__(self) -> None:
        if self.fidelity_level not in FIDELITY_LEVELS:
            raise ConfigError(
                f"fidelity_level: unknown {self.fidelity_level!r}; expected one of {FIDELITY_LEVELS}"
            )
        if self.reference_noise not in REFERENCE_NOISE:
            raise ConfigError(
                f"reference_noise: unknown {self.reference_noise!r}; expected one of {REFERENCE_NOISE}"
            )
        if self.output.format not in OUTPUT_FORMATS:
            raise ConfigError(f"output.format: unsupported {self.output.format!r}; expected csv")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ConfigError(f"cutoff: must be an integer >= 1, got {self.cutoff}")
        if not self.grid.gt_end_pi > 0:
            raise ConfigError(f"grid.gt_end_pi: must be > 0, got {self.grid.gt_end_pi}")
        if self.grid.dt is not None and not self.grid.dt > 0:
            raise ConfigError(f"grid.dt: must be > 0, got {self.grid.dt}")
        if self.grid.samples < 2:
            raise ConfigError(f"grid.samples: need at least 2, got {self.grid.samples}")
        if not self.model.g > 0:
            raise ConfigError("model.g_hz: must be > 0 (the horizon is measured in units of 1/g)")
        if not 0 <= self.initial_state.phonons <= self.cutoff:
            raise ConfigError(
                f"initial_state.phonons: {self.initial_state.phonons} outside 0..cutoff ({self.cutoff})"
            )
        self._check_spins()

    def _check_spins(self) -> None:
        spins = self.initial_state.spins
        n = self.model.n_qubits
        if spins.startswith(DICKE_PREFIX):
            k = spins[len(DICKE_PREFIX):]
            if not k.isdigit() or int(k) > n:
                raise ConfigError(f"initial_state.spins: {spins!r} needs k in 0..{n}")
            return
        try:
            bits = parse_spins(spins)
        except ValueError as err:
            raise ConfigError(f"initial_state.spins: {err}") from err
        if bits and len(bits) != n:
            raise ConfigError(f"initial_state.spins: {len(bits)} spins for {n} qubits")

    @property
    def t_end(self) -> float:
        return self.grid.gt_end_pi * math.pi / self.model.g

    def space(self) -> HilbertSpace:
        return make_space(self.model.n_qubits, self.cutoff)

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        return replace(self, **changes)

    def with_grid(self, **changes: Any) -> "ScenarioConfig":
        return replace(self, grid=replace(self.grid, **changes))


def _section(tree: Mapping[str, Any], name: str) -> Dict[str, Any]:
    value = tree.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected a table, got {type(value).__name__}")
    return value


def _float(table: Mapping[str, Any], where: str, key: str, default: Any = _MISSING) -> float:
    label = f"{where}.{key}" if where else key
    value = table.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{label}: required")
    if isinstance(value, bool):
        raise ConfigError(f"{label}: expected a number, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{label}: expected a number, got {value!r}") from None
    if not math.isfinite(number):
        raise ConfigError(f"{label}: must be finite, got {value!r}")
    return number


def _int(table: Mapping[str, Any], where: str, key: str, default: Any = _MISSING) -> int:
    label = f"{where}.{key}" if where else key
    number = _float(table, where, key, default)
    if number != int(number):
        raise ConfigError(f"{label}: expected an integer, got {table.get(key)!r}")
    return int(number)


def _non_negative(value: float, label: str) -> float:
    if value < 0:
        raise ConfigError(f"{label}: must be ≥ 0, got {value}")
    return value


def _infer_kind(h: float, s: float) -> str:
    if h > 0:
        return "biased"
    if s == 0:
        return "tavis_cummings"
    return "dicke" if s == 1 else "anisotropic"


def merge_tables(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_tables(merged[key], value)
        else:
            merged[key] = value
    return merged


def _parse_model(tree: Mapping[str, Any]) -> ModelSpec:
    table = _section(tree, "model")
    n_qubits = _int(table, "model", "n_qubits")
    omega = _non_negative(_float(table, "model", "omega_hz"), "model.omega_hz")
    omega_q = _non_negative(_float(table, "model", "omega_q_hz"), "model.omega_q_hz")
    g = _non_negative(_float(table, "model", "g_hz"), "model.g_hz")
    h = _non_negative(_float(table, "model", "h_hz", 0.0), "model.h_hz")
    s = _non_negative(_float(table, "model", "s", 1.0), "model.s")
    kind = str(table.get("kind") or _infer_kind(h, s))
    if kind not in MODEL_KINDS:
        raise ConfigError(f"model.kind: unknown {kind!r}; expected one of {MODEL_KINDS}")
    return ModelSpec(kind, n_qubits, TWO_PI * omega, TWO_PI * omega_q, TWO_PI * g, TWO_PI * h, s)


def _parse_ion(tree: Mapping[str, Any]) -> IonParams:
    table = merge_tables(DEFAULT_ION, _section(tree, "ion"))
    nu = _float(table, "ion", "nu_hz")
    if not nu > 0:
        raise ConfigError(f"ion.nu_hz: must be > 0, got {nu}")
    gamma = _non_negative(_float(table, "ion", "gamma_hz"), "ion.gamma_hz")
    return IonParams(
        nu=TWO_PI * nu,
        omega0=TWO_PI * _float(table, "ion", "omega0_hz"),
        eta=_float(table, "ion", "eta"),
        gamma=TWO_PI * gamma,
    )


def build_scenario(tree: Mapping[str, Any], base_dir: Optional[Path] = None) -> ScenarioConfig:
    """ScenarioConfig from a loaded config tree; a `preset` key supplies every field not given."""
    original = dict(tree)
    tree = dict(tree)
    preset = tree.get("preset")
    if preset:
        from .presets import get_preset

        base = scenario_to_dict(get_preset(str(preset)))
        tree = merge_tables(base, {k: v for k, v in tree.items() if k != "preset"})

    model = _parse_model(tree)
    ion = _parse_ion(tree)
    regime = classify_regime(model).label if model.omega > 0 else "DSC"

    grid_table = _section(tree, "grid")
    if "default_horizon" in original:
        default_horizon = bool(original["default_horizon"])
    elif "gt_end_pi" in _section(original, "grid"):
        default_horizon = False
    else:
        default_horizon = bool(tree.get("default_horizon", True))
    dt = grid_table.get("dt")
    grid = GridSettings(
        gt_end_pi=_float(grid_table, "grid", "gt_end_pi", DEFAULT_GT_END_PI[regime]),
        dt=None if dt is None else _float(grid_table, "grid", "dt"),
        samples=_int(grid_table, "grid", "samples", DEFAULT_SAMPLES),
    )

    init_table = _section(tree, "initial_state")
    initial_state = InitialState(
        phonons=_int(init_table, "initial_state", "phonons", 1),
        spins=str(init_table.get("spins", "")),
    )

    out_table = _section(tree, "output")
    out_path = out_table.get("path")
    if out_path and base_dir is not None and not Path(out_path).is_absolute():
        out_path = str(Path(base_dir) / out_path)
    output = OutputSettings(path=out_path, format=str(out_table.get("format", "csv")))

    config = ScenarioConfig(
        name=str(tree.get("name") or preset or "scenario"),
        model=model,
        ion=ion,
        cutoff=_int(tree, "", "cutoff", DEFAULT_CUTOFF[regime]),
        grid=grid,
        initial_state=initial_state,
        fidelity_level=str(tree.get("fidelity_level", "sideband_rwa")),
        reference_noise=str(tree.get("reference_noise", "unitary")),
        output=output,
        expected_regime=tree.get("expected_regime"),
        default_horizon=default_horizon,
        description=str(tree.get("description", "")),
    )
    config.space()
    return config


def scenario_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """Config tree (Hz units) that build_scenario turns back into `config`."""
    m, ion = config.model, config.ion
    tree: Dict[str, Any] = {
        "name": config.name,
        "fidelity_level": config.fidelity_level,
        "cutoff": config.cutoff,
        "reference_noise": config.reference_noise,
        "default_horizon": config.default_horizon,
        "model": {
            "kind": m.kind,
            "n_qubits": m.n_qubits,
            "omega_hz": m.omega / TWO_PI,
            "omega_q_hz": m.omega_q / TWO_PI,
            "g_hz": m.g / TWO_PI,
            "h_hz": m.h / TWO_PI,
            "s": m.s,
        },
        "ion": {
            "nu_hz": ion.nu / TWO_PI,
            "omega0_hz": ion.omega0 / TWO_PI,
            "eta": ion.eta,
            "gamma_hz": ion.gamma / TWO_PI,
        },
        "initial_state": asdict(config.initial_state),
        "grid": {k: v for k, v in asdict(config.grid).items() if v is not None},
        "output": {k: v for k, v in asdict(config.output).items() if v is not None},
    }
    if config.expected_regime is not None:
        tree["expected_regime"] = config.expected_regime
    if config.description:
        tree["description"] = config.description
    return tree
