"""
Per-directory run manifest: tool version, config echo and hash, output inventory.
"""
from __future__ import annotations

import hashlib
import json
import platform
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__

__all__ = ["MANIFEST_NAME", "canonical_json", "config_hash", "read_manifest", "write_manifest"]

MANIFEST_NAME = "manifest.json"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True, default=str)


def config_hash(config) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _inventory(out: Path) -> list[dict]:
    files = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != MANIFEST_NAME:
            files.append({"path": p.relative_to(out).as_posix(), "bytes": p.stat().st_size, "sha256": _sha256(p)})
    return files


def write_manifest(out_dir, config: dict, extra: dict | None = None, started: str | None = None) -> Path:
    """Write (or overwrite) ``manifest.json`` in ``out_dir``; returns its path."""
    out = Path(out_dir)
    now = datetime.now(timezone.utc).isoformat()
    doc = {
        "tool": "qbattery",
        "tool_version": __version__,
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "config_hash": config_hash(config),
        "config": config,
        "started": started or now,
        "finished": now,
        "outputs": _inventory(out),
    }
    if extra:
        doc.update(extra)
    path = out / MANIFEST_NAME
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path


def read_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text())
