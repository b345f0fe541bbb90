from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional
import warnings

from .config import merge_tables, build_scenario
from .errors import ConfigError, Dicke2IonError
from .locks import DEFAULT_LOCK_TTL, scenario_lock
from .scenario import run_scenario, write_trajectory
from .utils import default_output_dir, default_workers, generate_run_id, getenv_int, trajectory_path


@dataclass(frozen=True)
class SweepOutcome:
    name: str
    exit_code: int
    message: str
    csv_path: Optional[Path] = None
    skipped: bool = False


def sweep_entries(tree: Mapping[str, Any]) -> List[Dict[str, Any]]:
    """Every [[scenarios]] entry with [defaults] merged underneath it."""
    defaults = tree.get("defaults", {}) or {}
    scenarios = tree.get("scenarios", []) or []
    if not isinstance(defaults, dict):
        raise ConfigError("defaults: expected a table")
    if not isinstance(scenarios, list) or not scenarios:
        raise ConfigError("scenarios: define at least one [[scenarios]] entry")
    entries = []
    seen = set()
    for i, scenario in enumerate(scenarios):
        if not isinstance(scenario, dict):
            raise ConfigError(f"scenarios[{i}]: expected a table")
        entry = merge_tables(defaults, scenario)
        name = str(entry.get("name") or entry.get("preset") or f"scenario_{i}")
        if name in seen:
            raise ConfigError(f"scenarios[{i}]: duplicate scenario name {name!r}")
        seen.add(name)
        entry["name"] = name
        entries.append(entry)
    return entries


def run_one(
    entry: Dict[str, Any], base_dir: Optional[Path], output_dir: Path, lock_ttl: int
) -> SweepOutcome:
    name = str(entry.get("name"))
    try:
        config = build_scenario(entry, base_dir)
        csv_path = Path(config.output.path) if config.output.path else trajectory_path(output_dir, name)
        with scenario_lock(csv_path.parent, lock_ttl, generate_run_id(name)) as acquired:
            if not acquired:
                return SweepOutcome(
                    name, 0, f"Another run is in progress for scenario '{name}'. Skipping.",
                    skipped=True,
                )
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                result = run_scenario(config)
            write_trajectory(result, csv_path)
        notes = "".join(f"\n    Warning: {w.message}" for w in caught)
        return SweepOutcome(name, 0, f"Wrote: {csv_path}{notes}", csv_path)
    except Dicke2IonError as err:
        return SweepOutcome(name, err.exit_code, f"Scenario failed: {err}")
    except Exception as err:
        return SweepOutcome(name, 1, f"Scenario failed: {err}")


def run_sweep(
    tree: Mapping[str, Any],
    workers: Optional[int] = None,
    base_dir: Optional[Path] = None,
    output_dir: Optional[Path] = None,
    lock_ttl: Optional[int] = None,
) -> List[SweepOutcome]:
    """Run independent scenarios, one worker process each; a failure never stops the others."""
    entries = sweep_entries(tree)
    workers = workers or default_workers()
    output_dir = Path(output_dir) if output_dir else default_output_dir(tree.get("output_dir"))
    ttl = lock_ttl if lock_ttl is not None else getenv_int("DICKE2ION_LOCK_TTL", DEFAULT_LOCK_TTL)
    print(f"Sweep started with {len(entries)} scenario(s). Workers={workers}")

    outcomes: List[SweepOutcome] = []
    if workers == 1 or len(entries) == 1:
        for entry in entries:
            print("\n==> Running scenario:", entry["name"])
            outcome = run_one(entry, base_dir, output_dir, ttl)
            print(outcome.message)
            outcomes.append(outcome)
        return outcomes

    with ProcessPoolExecutor(max_workers=min(workers, len(entries))) as pool:
        futures = [pool.submit(run_one, entry, base_dir, output_dir, ttl) for entry in entries]
        for entry, future in zip(entries, futures):
            outcome = future.result()
            print(f"\n==> Scenario: {entry['name']}")
            print(outcome.message)
            outcomes.append(outcome)
    return outcomes


def sweep_exit_code(outcomes: List[SweepOutcome]) -> int:
    return max((o.exit_code for o in outcomes), default=0)
