"""Paired ion/model runs, trajectory files and the refinement-based convergence check."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import json
import math
import warnings

import numpy as np

from . import __version__
from .config import ScenarioConfig, scenario_to_dict
from .dynamics import (
    ConvergenceReport,
    NoiseSpec,
    Refinement,
    TimeGrid,
    iter_lindblad,
    iter_unitary,
    max_changes,
    step_rule,
)
from .errors import Dicke2IonWarning, NumericalError
from .ionsim import ion_hamiltonian, recommended_timestep
from .mapping import (
    HEATING_RATE,
    RegimeLabel,
    classify_regime,
    collective_dephasing_factor,
    dephasing_time,
    heating_estimate,
    laser_frequencies,
    stretch_mode_error,
    tones_from_model,
)
from .models import build_model
from .observables import OBSERVABLES, Trajectory, measure_paired
from .utils import ensure_parent

TWO_PI = 2 * math.pi
CSV_COLUMNS = (
    "t_seconds",
    "gt",
    "phonon_ion",
    "excitation_ion",
    "parity_ion",
    "sz_ion",
    "phonon_model",
    "excitation_model",
    "parity_model",
    "sz_model",
    "fidelity",
)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    ion: Trajectory
    model: Trajectory
    grid: TimeGrid
    metadata: Dict[str, Any] = field(default_factory=dict)

    def columns(self) -> Dict[str, np.ndarray]:
        cols: Dict[str, np.ndarray] = {
            "t_seconds": self.ion.times,
            "gt": self.ion.column("gt"),
        }
        for name in OBSERVABLES:
            cols[f"{name}_ion"] = self.ion.column(name)
        for name in OBSERVABLES:
            cols[f"{name}_model"] = self.model.column(name)
        cols["fidelity"] = self.ion.column("fidelity")
        return cols

    def table(self) -> np.ndarray:
        cols = self.columns()
        return np.column_stack([cols[name] for name in CSV_COLUMNS])


def scenario_grid(config: ScenarioConfig) -> TimeGrid:
    """Grid from the config's dt or, when absent, the stricter of the ion and model step rules."""
    space = config.space()
    tones = tones_from_model(config.model, config.ion)
    t_end = config.t_end
    recommended = min(
        recommended_timestep(config.ion, tones, config.fidelity_level, space, t_end),
        step_rule(build_model(config.model, space), t_end),
    )
    dt = config.grid.dt
    if dt is None:
        dt = recommended
    elif dt > recommended:
        warnings.warn(
            f"{config.name}: dt {dt:.3e} s is above the recommended {recommended:.3e} s",
            Dicke2IonWarning,
            stacklevel=2,
        )
    return TimeGrid(t_end, min(dt, t_end), config.grid.samples)


def _metadata(config: ScenarioConfig, grid: TimeGrid) -> Dict[str, Any]:
    tones = tones_from_model(config.model, config.ion)
    # omega = 0: infinite coupling ratio
    regime = classify_regime(config.model) if config.model.omega > 0 else RegimeLabel("DSC", math.inf)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", Dicke2IonWarning)
        stretch = stretch_mode_error(config.ion, max(t.rabi for t in tones), config.model.n_qubits)
    for w in caught:
        warnings.warn(f"{config.name}: {w.message}", Dicke2IonWarning, stacklevel=3)
    return {
        "scenario": scenario_to_dict(config),
        "version": __version__,
        "regime": {"label": regime.label, "ratio": regime.ratio, "expected": config.expected_regime},
        "tones": [
            {
                "kind": t.kind,
                "rabi_hz": t.rabi / TWO_PI,
                "detuning_hz": t.detuning_small / TWO_PI,
                "phase": t.phase,
            }
            for t in tones
        ],
        "laser_frequencies_hz": {k: v / TWO_PI for k, v in laser_frequencies(tones, config.ion).items()},
        "stretch_mode_error": stretch,
        "dephasing_time_s": dephasing_time(config.ion.gamma) if config.ion.gamma > 0 else None,
        "collective_dephasing_factor": collective_dephasing_factor(config.model.n_qubits),
        "heating_phonons": heating_estimate(HEATING_RATE, grid.t_end),
        "grid": {
            "t_end": grid.t_end,
            "dt": grid.step,
            "steps": grid.steps,
            "stride": grid.stride,
            "samples": grid.sample_count,
        },
        "dim": config.space().dim,
        "default_horizon": config.default_horizon,
        "columns": list(CSV_COLUMNS),
    }


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Evolve the ion (Lindblad, Gamma from the config) and the model reference on one grid."""
    space = config.space()
    grid = scenario_grid(config)
    metadata = _metadata(config, grid)
    tones = tones_from_model(config.model, config.ion)
    h_ion = ion_hamiltonian(config.ion, tones, space, config.fidelity_level)
    h_model = build_model(config.model, space)
    psi0 = config.initial_state.build(space)
    noise = NoiseSpec(config.ion.gamma)

    ion_states = iter_lindblad(h_ion, noise, psi0, grid)
    if config.reference_noise == "dephasing":
        model_states = iter_lindblad(h_model, noise, psi0, grid)
    else:
        model_states = iter_unitary(h_model, psi0, grid)
    try:
        ion_traj, model_traj = measure_paired(
            grid.sample_times(), ion_states, model_states, config.model, space
        )
    except NumericalError as err:
        raise NumericalError(f"scenario {config.name}: {err}") from err
    ion_traj.metadata.update(metadata)
    model_traj.metadata.update(metadata)
    return ScenarioResult(config, ion_traj, model_traj, grid, metadata)


def sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".json")


def write_trajectory(result: ScenarioResult, path: Path) -> Tuple[Path, Path]:
    """CSV with fixed column order at 12 significant digits, plus a JSON metadata sidecar."""
    path = Path(path)
    ensure_parent(path)
    np.savetxt(
        path,
        result.table(),
        fmt="%.12g",
        delimiter=",",
        header=",".join(CSV_COLUMNS),
        comments="",
    )
    sidecar = sidecar_path(path)
    meta = dict(result.metadata)
    meta["generated_at"] = datetime.now(timezone.utc).isoformat()
    meta["csv"] = path.name
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return path, sidecar


def _observable_columns(result: ScenarioResult) -> Dict[str, np.ndarray]:
    cols = result.columns()
    return {k: v for k, v in cols.items() if k not in ("t_seconds", "gt")}


def _refined_configs(
    config: ScenarioConfig, base_dt: float, halve_dt: bool, raise_cutoff: int
) -> List[Tuple[str, ScenarioConfig]]:
    refined = []
    if halve_dt:
        refined.append((f"dt/2 ({base_dt / 2:.3e} s)", config.with_grid(dt=base_dt / 2)))
    if raise_cutoff:
        raised = config.with_overrides(cutoff=config.cutoff + raise_cutoff).with_grid(dt=base_dt)
        refined.append((f"cutoff {config.cutoff} -> {raised.cutoff}", raised))
    return refined


def _run_columns(config: ScenarioConfig) -> Dict[str, np.ndarray]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", Dicke2IonWarning)
        return _observable_columns(run_scenario(config))


def convergence_check(
    config: ScenarioConfig,
    halve_dt: bool = True,
    raise_cutoff: int = 5,
    workers: int = 1,
    tolerance: float = 1e-3,
    base: Optional[ScenarioResult] = None,
) -> ConvergenceReport:
    """Rerun with dt halved and the cutoff raised; every observable must move by < tolerance."""
    report = ConvergenceReport(config.name, tolerance)
    try:
        if base is None:
            base = run_scenario(config)
    except NumericalError as err:
        report.error = str(err)
        return report
    base_cols = _observable_columns(base)
    refined = _refined_configs(config, base.grid.step, halve_dt, raise_cutoff)

    if workers > 1 and len(refined) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(refined))) as pool:
            futures = [(name, pool.submit(_run_columns, cfg)) for name, cfg in refined]
            outcomes = []
            for name, fut in futures:
                try:
                    outcomes.append((name, fut.result(), None))
                except NumericalError as err:
                    outcomes.append((name, None, str(err)))
    else:
        outcomes = []
        for name, cfg in refined:
            try:
                outcomes.append((name, _run_columns(cfg), None))
            except NumericalError as err:
                outcomes.append((name, None, str(err)))

    for name, cols, error in outcomes:
        if error is not None:
            report.refinements.append(Refinement(name, error=error, tolerance=tolerance))
        else:
            report.refinements.append(
                Refinement(name, max_changes(base_cols, cols), tolerance=tolerance)
            )
    return report
