"""Run configuration: one YAML file, flag overrides, stable hashing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError
from .manifest import sha256_text
from .textprep import default_stopwords_path


@dataclass
class RunConfig:
    run_dir: Path = Path("run")
    corpus: Optional[Path] = None
    gazetteer: Optional[Path] = None
    regions: Optional[Path] = None
    stopwords: Path = field(default_factory=default_stopwords_path)
    keywords: Optional[Path] = None
    survey: Optional[Path] = None
    annotated: Optional[Path] = None

    backend: str = "baseline"  # baseline | external
    adapter_command: Optional[str] = None
    adapter_address: Optional[str] = None
    adapter_batch_size: int = 64
    adapter_timeout: float = 30.0

    split_seed: int = 20
    sample_seed: int = 7
    community_seed: int = 0

    hash_dim: int = 4096
    l2: float = 1e-3
    max_iter: int = 500
    tol: float = 1e-8

    resolution: float = 1.0
    min_community_size: int = 5

    window_start: Optional[str] = None  # RFC 3339 bounds, inclusive
    window_end: Optional[str] = None

    def seeds(self) -> dict:
        return {
            "split_seed": self.split_seed,
            "sample_seed": self.sample_seed,
            "community_seed": self.community_seed,
        }

    def canonical_hash(self) -> str:
        payload = {}
        for f in fields(self):
            value = getattr(self, f.name)
            payload[f.name] = str(value) if isinstance(value, Path) else value
        return sha256_text(json.dumps(payload, sort_keys=True))


_PATH_KEYS = (
    "run_dir",
    "corpus",
    "gazetteer",
    "regions",
    "stopwords",
    "keywords",
    "survey",
    "annotated",
)
_INT_KEYS = (
    "adapter_batch_size",
    "split_seed",
    "sample_seed",
    "community_seed",
    "hash_dim",
    "max_iter",
    "min_community_size",
)
_FLOAT_KEYS = ("adapter_timeout", "l2", "tol", "resolution")


def load_config(path: str | Path, overrides: Optional[list[str]] = None) -> RunConfig:
    """Load a config file; relative paths resolve against its directory."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    base = path.parent
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        _assign(cfg, key, value, base)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, value = item.split("=", 1)
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        _assign(cfg, key, value, Path.cwd())
    if cfg.backend not in ("baseline", "external"):
        raise ConfigError(f"backend must be baseline or external, not {cfg.backend!r}")
    return cfg


def _assign(cfg: RunConfig, key: str, value, base: Path) -> None:
    if value is None:
        return
    try:
        if key in _PATH_KEYS:
            p = Path(str(value))
            setattr(cfg, key, p if p.is_absolute() else base / p)
        elif key in _INT_KEYS:
            setattr(cfg, key, int(value))
        elif key in _FLOAT_KEYS:
            setattr(cfg, key, float(value))
        else:
            setattr(cfg, key, str(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for config key {key!r}: {value!r}") from exc
