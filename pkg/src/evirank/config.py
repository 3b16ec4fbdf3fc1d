"""Engine configuration: ranking parameters, provider wiring and paths.

Config files are plain `key = value` text (# comments allowed). Provider
endpoints and modes can also be overridden through environment variables
of the form EVIRANK_<KIND>_ENDPOINT / EVIRANK_<KIND>_MODE / EVIRANK_<KIND>_TOKEN.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .providers.base import PROVIDER_KINDS, ProviderConfig

_FLOAT_KEYS = {"alpha", "beta", "d_ne", "lambda", "bm25_k1", "bm25_b"}
_INT_KEYS = {"k", "candidate_pool", "word_limit", "retries", "top_n",
             "articles_per_query", "k_override_limit_per_minute"}
_BOOL_KEYS = {"stance_per_sentence"}
_PATH_KEYS = {"index_dir", "kb_fixture_path", "frontend_dist", "abbreviations_path"}


@dataclass
class EngineConfig:
    """Everything the pipeline and service need to run one deployment."""

    k: int = 10
    alpha: float = 0.65
    beta: float = 0.45
    d_ne: float = 0.7
    lam: float = 0.5
    candidate_pool: int = 100
    word_limit: int = 64
    retries: int = 2
    top_n: int = 10
    articles_per_query: int = 1
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    stance_per_sentence: bool = False
    k_override_limit_per_minute: int = 30
    index_dir: str = ""
    kb_fixture_path: str = ""
    frontend_dist: str = ""
    abbreviations_path: str = ""
    providers: dict[str, ProviderConfig] = field(default_factory=dict)

    def __post_init__(self):
        for kind in PROVIDER_KINDS:
            self.providers.setdefault(kind, ProviderConfig(kind=kind, mode="double"))

    def validate(self) -> None:
        if self.k < 1 or self.top_n < 1 or self.candidate_pool < 1:
            raise ValueError("k, top_n and candidate_pool must be >= 1")
        for name in ("alpha", "beta", "lam"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0.0 < self.d_ne < 1.0:
            raise ValueError(f"d_ne must lie in (0, 1), got {self.d_ne}")

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "beta": self.beta,
            "d_ne": self.d_ne,
            "lambda": self.lam,
            "candidate_pool": self.candidate_pool,
            "word_limit": self.word_limit,
            "top_n": self.top_n,
            "providers": {
                kind: cfg.mode for kind, cfg in sorted(self.providers.items())
            },
        }


def _parse_value(key: str, value: str):
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _INT_KEYS:
        return int(value)
    if key in _BOOL_KEYS:
        return value.strip().lower() in ("1", "true", "yes", "on")
    return value


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Build an EngineConfig from an optional file plus env overrides."""
    values: dict[str, str] = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{line_no}: expected key = value")
                key, _, value = line.partition("=")
                values[key.strip().lower()] = value.strip()

    config = EngineConfig()
    provider_values: dict[str, dict[str, str]] = {}
    for key, value in values.items():
        if "." in key:
            kind, _, attr = key.partition(".")
            if kind not in PROVIDER_KINDS:
                raise ValueError(f"unknown provider kind in config: {kind}")
            provider_values.setdefault(kind, {})[attr] = value
        elif key == "lambda":
            config.lam = float(value)
        elif key in _PATH_KEYS or hasattr(config, key):
            setattr(config, key, _parse_value(key, value))
        else:
            raise ValueError(f"unknown config key: {key}")

    for kind in PROVIDER_KINDS:
        attrs = provider_values.get(kind, {})
        env_prefix = f"EVIRANK_{kind.upper()}"
        endpoint = os.environ.get(f"{env_prefix}_ENDPOINT", attrs.get("endpoint", ""))
        mode = os.environ.get(f"{env_prefix}_MODE",
                              attrs.get("mode", "remote" if endpoint else "double"))
        config.providers[kind] = ProviderConfig(
            kind=kind,
            mode=mode,
            endpoint=endpoint,
            timeout=float(attrs.get("timeout", 30.0)),
            batch_size=int(attrs.get("batch_size", 32)),
            token=os.environ.get(f"{env_prefix}_TOKEN", attrs.get("token", "")),
        )
    config.validate()
    return config


def with_overrides(config: EngineConfig, **kwargs) -> EngineConfig:
    """Copy the config with keyword overrides (None values are ignored)."""
    updates = {key: value for key, value in kwargs.items() if value is not None}
    updated = replace(config, providers=dict(config.providers), **updates)
    updated.validate()
    return updated
