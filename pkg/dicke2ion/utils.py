from datetime import datetime, timezone
from pathlib import Path
from typing import Optional
import hashlib
import socket
import uuid
import os
import re


def getenv_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        print(f"Warning: ignoring non-integer {name}={raw!r}")
        return default


def default_workers() -> int:
    return max(1, getenv_int("DICKE2ION_WORKERS", min(4, os.cpu_count() or 1)))


def default_output_dir(cfg_value: Optional[str] = None) -> Path:
    return Path(os.getenv("DICKE2ION_OUTPUT_DIR", cfg_value or "out"))


def ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def to_snake_lower(text: str) -> str:
    text = text.strip().lower()
    text = re.sub(r"[^a-z0-9]+", "_", text)
    text = re.sub(r"_+", "_", text).strip("_")
    return text or "scenario"


def trajectory_path(output_dir: Path, scenario_name: str) -> Path:
    return output_dir / to_snake_lower(scenario_name) / "trajectory.csv"


def generate_run_id(scenario_name: str) -> str:
    now = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S-%f")
    host = socket.gethostname()
    rand = uuid.uuid4().hex[:8]
    base = f"{scenario_name}-{host}-{now}-{rand}"
    return hashlib.sha256(base.encode("utf-8")).hexdigest()[:16]
