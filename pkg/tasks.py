from pathlib import Path
from invoke import task
import shutil
import os
import json
from collections import Counter
from dotenv import load_dotenv


load_dotenv()


APP_NAME = "dicke2ion"
BUILD_DIR = Path(os.getenv("BUILD_DIR", "dist"))
OUTPUT_DIR = Path(os.getenv("DICKE2ION_OUTPUT_DIR", "out"))


def _echo(ctx, cmd: str) -> None:
    ctx.run(cmd, echo=True)


def _analyze_bandit_report(bandit_json: Path) -> bool:
    """Print a summary of a Bandit JSON report. Returns True if no HIGH findings."""
    if not bandit_json.exists():
        print(f"⚠️ Bandit report not generated at {bandit_json}")
        return False

    print("\n📊 Bandit Security Analysis:")
    with open(bandit_json, "r", encoding="utf-8") as f:
        results = json.load(f).get("results", [])
    if not results:
        print("   ✅ No security issues found!")
        return True

    severity_counts = Counter(r.get("issue_severity", "UNDEFINED") for r in results)
    print(f"   🔍 Total findings: {len(results)}")
    for severity in ["HIGH", "MEDIUM", "LOW"]:
        count = severity_counts.get(severity, 0)
        if count > 0:
            print(f"   {severity.capitalize()}: {count}")

    test_counts = Counter(r.get("test_name", "unknown") for r in results)
    print("   📋 Top issues:")
    for test_name, count in test_counts.most_common(5):
        print(f"      • {test_name}: {count}")
    return severity_counts.get("HIGH", 0) == 0


@task
def clean(ctx):
    for path in (BUILD_DIR, OUTPUT_DIR, Path(".pytest_cache")):
        if path.exists():
            shutil.rmtree(path)


@task(help={"slow": "Also run the long acceptance scenarios", "k": "pytest -k expression"})
def test(ctx, slow: bool = False, k: str = ""):
    """Run the test suite."""
    cmd = "python3 -m pytest -q"
    if slow:
        cmd += " --runslow"
    if k:
        cmd += f" -k '{k}'"
    _echo(ctx, cmd)


@task(help={"image": "Docker image to use for the Bandit scan"})
def security_scan(ctx, image: str = "ghcr.io/pycqa/bandit/bandit"):
    """Run Bandit inside a Docker container and fail on HIGH severity findings."""
    print("\n🛡️  Running security scans...")
    cwd = os.getcwd()
    reports_dir = BUILD_DIR / "security"
    reports_dir.mkdir(parents=True, exist_ok=True)
    bandit_json_path = reports_dir / "bandit.json"
    config_arg = "-c /src/bandit.yaml" if Path("bandit.yaml").exists() else ""

    # Bandit exits with 1 when it finds anything; the report decides.
    cmd = (
        f"docker run --rm -v '{cwd}:/src' {image} "
        f"-r {config_arg} -f json -o /src/{bandit_json_path} /src/{APP_NAME}"
    )
    ctx.run(cmd, pty=True, warn=True)

    print("\n" + "=" * 50)
    if not _analyze_bandit_report(bandit_json_path):
        print("❌ SECURITY SCAN FAILED - Critical issues found!")
        raise SystemExit("Bandit found high severity issues.")
    print("✅ SECURITY SCAN PASSED - No critical issues found!")
    print("=" * 50)


@task
def presets(ctx):
    """List the built-in scenarios."""
    _echo(ctx, "python3 main.py presets")


@task(
    help={
        "preset": "Preset name (see 'inv presets')",
        "level": "Ion fidelity level: sideband_rwa or full",
    }
)
def run(ctx, preset: str, level: str = "sideband_rwa"):
    """Run one preset and write out/<preset>/trajectory.csv."""
    _echo(ctx, f"python3 main.py run --preset {preset} --fidelity-level {level}")


@task(help={"workers": "Worker processes", "config": "Sweep file (default: config.toml)"})
def sweep(ctx, workers: int = 4, config: str = "config.toml"):
    """Run every [[scenarios]] entry of a sweep file."""
    _echo(ctx, f"python3 main.py sweep --config {config} --workers {workers}")


@task(help={"preset": "Preset name", "workers": "Worker processes for the refined runs"})
def converge(ctx, preset: str, workers: int = 2):
    """Halve dt and raise the cutoff for a preset and compare the observables."""
    _echo(ctx, f"python3 main.py converge --preset {preset} --workers {workers}")
