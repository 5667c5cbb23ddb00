"""Run manifest: digests, seeds, and stage bookkeeping for reproducibility.

Artifacts themselves never embed wall-clock time; timestamps live only
here, so identical reruns produce byte-identical artifacts and equal
recorded digests.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__

MANIFEST_NAME = "manifest.json"
SCHEMA_VERSION = 1


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class RunManifest:
    def __init__(self, run_dir: str | Path):
        self.run_dir = Path(run_dir)
        self.path = self.run_dir / MANIFEST_NAME
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self.data = {
                "schema_version": SCHEMA_VERSION,
                "tool_version": __version__,
                "config_hash": None,
                "seeds": {},
                "inputs": {},
                "stages": {},
                "artifacts": {},
            }

    def set_config(self, config_hash: str, seeds: dict) -> None:
        self.data["config_hash"] = config_hash
        self.data["seeds"] = dict(seeds)

    def record_input(self, name: str, path: str | Path) -> None:
        self.data["inputs"][name] = {
            "path": str(path),
            "sha256": sha256_file(path),
        }

    def record_stage(self, stage: str, counts: Optional[dict] = None) -> None:
        self.data["stages"][stage] = {
            "version": __version__,
            "completed_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "counts": counts or {},
        }

    def record_artifact(self, path: str | Path) -> None:
        path = Path(path)
        self.data["artifacts"][path.name] = sha256_file(path)

    def stage_done(self, stage: str) -> bool:
        return stage in self.data["stages"]

    def save(self) -> None:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(self.data, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
