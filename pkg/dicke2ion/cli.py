from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional
from dotenv import load_dotenv
import argparse
import warnings
import os

from .config import build_scenario, load_config, merge_tables
from .errors import Dicke2IonError, NumericalError
from .ionsim import FIDELITY_LEVELS
from .presets import format_preset_table
from .scenario import convergence_check, run_scenario, write_trajectory
from .sweep import run_sweep, sweep_exit_code
from .utils import default_output_dir, default_workers, trajectory_path


def print_extended_help() -> None:
    help_text = (
        "\n"
        "dicke2ion - Extended Help\n"
        "\n"
        "Commands:\n"
        "  run       --preset <name> | --config <file>    Paired ion/model run, CSV + JSON sidecar\n"
        "              --fidelity-level full|sideband_rwa  Ion Hamiltonian level (default sideband_rwa)\n"
        "              --cutoff <K>                       Fock cutoff\n"
        "              --dt <seconds>                     Step override (upper bound)\n"
        "              --gt-end <X>                       Horizon gt = X * pi\n"
        "              --samples <S>                      Number of output samples\n"
        "              --out <path.csv>                   Output CSV path\n"
        "  presets                                        List the built-in presets\n"
        "  converge  --preset <name> | --config <file>    Halve dt and raise the cutoff, compare\n"
        "              --raise-cutoff <n>  --tolerance <x>  --workers <n>\n"
        "  sweep     --config <file>                      Run [[scenarios]] concurrently\n"
        "              --workers <n>  --out-dir <dir>  --lock-ttl <seconds>\n"
        "\n"
        "Config file (TOML or JSON; frequencies in Hz, multiplied by 2*pi on load):\n"
        "  name, preset, fidelity_level, cutoff, reference_noise (unitary|dephasing)\n"
        "  [model]          kind, n_qubits, omega_hz, omega_q_hz, g_hz, h_hz, s\n"
        "  [ion]            nu_hz, omega0_hz, eta, gamma_hz\n"
        "  [initial_state]  phonons, spins ('↓↓↓', 'dud' or 'dicke:k')\n"
        "  [grid]           gt_end_pi, dt, samples\n"
        "  [output]         path, format (csv)\n"
        "  Sweep files: [defaults] merged under every [[scenarios]] entry.\n"
        "  Any string 'ENV_NAME' is replaced by the environment variable NAME.\n"
        "\n"
        "Environment:\n"
        "  DOTENV_PATH            .env file loaded at start-up (default .env)\n"
        "  DICKE2ION_MAX_DIM      memory guard on the Hilbert-space dimension (default 4096)\n"
        "  DICKE2ION_OUTPUT_DIR   default output directory (default out)\n"
        "  DICKE2ION_WORKERS      default worker count for sweep/converge\n"
        "  DICKE2ION_LOCK_TTL     seconds before a scenario lock is considered stale\n"
        "\n"
        "Exit codes: 0 success, 2 config error, 3 numerical failure, 4 memory guard.\n"
        "\n"
        "Examples:\n"
        "  List presets:           python3 main.py presets\n"
        "  Run a preset:           python3 main.py run --preset dicke3_wf\n"
        "  Full-level validation:  python3 main.py run --preset dicke3_wf --fidelity-level full --gt-end 2\n"
        "  Convergence check:      python3 main.py converge --preset anis2_dsc_s3\n"
        "  Sweep:                  python3 main.py sweep --config config.toml --workers 4\n"
    )
    print(help_text)


@contextmanager
def _printed_warnings() -> Iterator[None]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            yield
        finally:
            for w in caught:
                print(f"Warning: {w.message}")


def _scenario_tree(args: argparse.Namespace) -> Dict[str, Any]:
    if args.preset:
        tree: Dict[str, Any] = {"preset": args.preset}
    else:
        tree = load_config(args.config)
    overrides: Dict[str, Any] = {}
    if getattr(args, "fidelity_level", None):
        overrides["fidelity_level"] = args.fidelity_level
    if getattr(args, "cutoff", None) is not None:
        overrides["cutoff"] = args.cutoff
    grid: Dict[str, Any] = {}
    if getattr(args, "dt", None) is not None:
        grid["dt"] = args.dt
    if getattr(args, "gt_end", None) is not None:
        grid["gt_end_pi"] = args.gt_end
    if getattr(args, "samples", None) is not None:
        grid["samples"] = args.samples
    if grid:
        overrides["grid"] = grid
    return merge_tables(tree, overrides)


def _base_dir(args: argparse.Namespace) -> Optional[Path]:
    return Path(args.config).parent if getattr(args, "config", None) else None


def cmd_run(args: argparse.Namespace) -> int:
    config = build_scenario(_scenario_tree(args), _base_dir(args))
    out = Path(args.out or config.output.path or trajectory_path(default_output_dir(), config.name))
    print("\n==> Running scenario:", config.name)
    print(
        f"model={config.model.kind} N={config.model.n_qubits} cutoff={config.cutoff} "
        f"level={config.fidelity_level} reference={config.reference_noise} "
        f"gt_end={config.grid.gt_end_pi:g}π"
    )
    with _printed_warnings():
        result = run_scenario(config)
    regime = result.metadata["regime"]
    print(
        f"regime={regime['label']} (coupling/ω = {regime['ratio']:.3f}) "
        f"steps={result.grid.steps} dt={result.grid.step:.3e} s dim={result.metadata['dim']}"
    )
    csv_path, sidecar = write_trajectory(result, out)
    print(f"Wrote: {csv_path}")
    print(f"Wrote: {sidecar}")
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    print("Available presets:")
    for line in format_preset_table():
        print(line)
    return 0


def cmd_converge(args: argparse.Namespace) -> int:
    config = build_scenario(_scenario_tree(args), _base_dir(args))
    print("\n==> Convergence check:", config.name)
    with _printed_warnings():
        report = convergence_check(
            config,
            halve_dt=True,
            raise_cutoff=args.raise_cutoff,
            workers=args.workers or default_workers(),
            tolerance=args.tolerance,
        )
    for line in report.lines():
        print(line)
    if not report.passed:
        raise NumericalError(f"scenario {config.name} did not converge")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    tree = load_config(args.config)
    outcomes = run_sweep(
        tree,
        workers=args.workers,
        base_dir=_base_dir(args),
        output_dir=Path(args.out_dir) if args.out_dir else None,
        lock_ttl=args.lock_ttl,
    )
    failed = [o for o in outcomes if o.exit_code != 0]
    print(f"\nSweep finished: {len(outcomes) - len(failed)} ok, {len(failed)} failed")
    return sweep_exit_code(outcomes)


def _add_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", "-p", help="Built-in preset name (see 'presets')")
    source.add_argument("--config", "-c", help="Path to a TOML or JSON scenario file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dicke2ion",
        description="Trapped-ion simulator of Dicke-family models",
    )
    parser.add_argument(
        "--help-extended", action="store_true", help="Show extended help and exit"
    )
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="Run one scenario and write its trajectory")
    _add_source(run)
    run.add_argument("--fidelity-level", choices=FIDELITY_LEVELS, help="Ion Hamiltonian level")
    run.add_argument("--cutoff", type=int, help="Fock cutoff")
    run.add_argument("--dt", type=float, help="Time step override in seconds")
    run.add_argument("--gt-end", type=float, help="Horizon as a multiple of pi in units of gt")
    run.add_argument("--samples", type=int, help="Number of output samples")
    run.add_argument("--out", help="Output CSV path (sidecar written next to it)")
    run.set_defaults(func=cmd_run)

    presets = sub.add_parser("presets", help="List the built-in presets")
    presets.set_defaults(func=cmd_presets)

    converge = sub.add_parser("converge", help="Check dt / cutoff convergence of a scenario")
    _add_source(converge)
    converge.add_argument("--raise-cutoff", type=int, default=5, help="Cutoff increase (default: 5)")
    converge.add_argument("--tolerance", type=float, default=1e-3, help="Max absolute change (default: 1e-3)")
    converge.add_argument("--workers", type=int, help="Worker processes for the refined runs")
    converge.set_defaults(func=cmd_converge)

    sweep = sub.add_parser("sweep", help="Run every [[scenarios]] entry of a sweep file")
    sweep.add_argument("--config", "-c", required=True, help="Path to the sweep TOML/JSON file")
    sweep.add_argument("--workers", type=int, help="Worker processes (default: DICKE2ION_WORKERS or CPUs, max 4)")
    sweep.add_argument("--out-dir", help="Output directory (default: DICKE2ION_OUTPUT_DIR or out)")
    sweep.add_argument("--lock-ttl", type=int, help="Lock TTL seconds (default: 21600)")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    dotenv_path = os.getenv("DOTENV_PATH", ".env")
    if Path(dotenv_path).exists():
        load_dotenv(dotenv_path=dotenv_path, override=False)

    parser = build_parser()
    args = parser.parse_args(argv)

    if args.help_extended:
        print_extended_help()
        return
    if not args.command:
        parser.print_help()
        raise SystemExit(2)

    try:
        code = args.func(args)
    except Dicke2IonError as err:
        print(f"Error: {err}")
        raise SystemExit(err.exit_code)
    if code:
        raise SystemExit(code)
