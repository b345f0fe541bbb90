"""Per-scenario output locks: a file holding timestamp|pid|host|run_id, stale after a TTL."""
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

import socket
import os
import re

LOCK_NAME = ".dicke2ion.lock"
DEFAULT_LOCK_TTL = 6 * 60 * 60


def get_lock_path(output_dir: Path) -> Path:
    return output_dir / LOCK_NAME


def lock_owner(lock_path: Path) -> Optional[str]:
    try:
        parts = lock_path.read_text().strip().split("|")
    except OSError:
        return None
    return parts[3] if len(parts) > 3 else None


def _lock_age(lock_path: Path) -> float:
    try:
        stamp = float(lock_path.read_text().split("|", 1)[0])
    except (OSError, ValueError):
        return float("inf")
    return datetime.now(timezone.utc).timestamp() - stamp


def acquire_scenario_lock(lock_path: Path, ttl_seconds: int, run_id: str) -> bool:
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    if lock_path.exists():
        if _lock_age(lock_path) < ttl_seconds:
            return False
        print(f"Warning: removing stale lock {lock_path}")
        release_scenario_lock(lock_path)
    try:
        fd = os.open(str(lock_path), os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
    except FileExistsError:
        return False
    content = (
        f"{datetime.now(timezone.utc).timestamp()}|"
        f"{os.getpid()}|{re.sub(r'[|]', '_', socket.gethostname())}|{run_id}\n"
    )
    with os.fdopen(fd, "w") as fh:
        fh.write(content)
    return True


def release_scenario_lock(lock_path: Path) -> None:
    try:
        lock_path.unlink()
    except FileNotFoundError:
        pass


@contextmanager
def scenario_lock(output_dir: Path, ttl_seconds: int, run_id: str) -> Iterator[bool]:
    """Yields whether the lock was taken; only a taken lock is released on exit."""
    lock_path = get_lock_path(output_dir)
    acquired = acquire_scenario_lock(lock_path, ttl_seconds, run_id)
    try:
        yield acquired
    finally:
        if acquired:
            release_scenario_lock(lock_path)
