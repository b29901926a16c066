"""Run configuration: one YAML file drives the CLI stages and the API server.

Every field has a default so a missing config file means "stub backends,
local store". Validation is strict: unknown keys are rejected so typos
surface as config errors instead of silently ignored settings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import yaml

from .topics import TopicConfig

VALID_BACKEND_ROLES = ("sentiment", "hate", "embedding", "llm", "search")


class ConfigError(ValueError):
    """Invalid or unreadable run configuration; maps to process exit 2."""


@dataclass(frozen=True)
class BackendConfig:
    """Endpoint per backend role: the literal string "stub" or an HTTP URL."""

    sentiment: str = "stub"
    hate: str = "stub"
    embedding: str = "stub"
    llm: str = "stub"
    search: str = "stub"
    token: str | None = None

    def __post_init__(self) -> None:
        for role in VALID_BACKEND_ROLES:
            value = getattr(self, role)
            if not isinstance(value, str) or (
                    value != "stub" and not value.startswith(("http://", "https://"))):
                raise ConfigError(
                    f"backend {role!r} must be 'stub' or an http(s) URL, got {value!r}")


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    cache_size: int = 32
    cors_origins: tuple[str, ...] = ()
    bearer_token: str | None = None

    def __post_init__(self) -> None:
        if not 0 < self.port < 65536:
            raise ConfigError(f"api.port out of range: {self.port}")
        if self.cache_size < 0:
            raise ConfigError("api.cache_size must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    store_path: Path = Path("store")
    keyword_file: Path | None = None
    backends: BackendConfig = field(default_factory=BackendConfig)
    topics: TopicConfig = field(default_factory=TopicConfig)
    window_from: date | None = None
    window_to: date | None = None
    concurrency: int = 1
    api: ApiConfig = field(default_factory=ApiConfig)

    def __post_init__(self) -> None:
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if (self.window_from is not None and self.window_to is not None
                and self.window_from > self.window_to):
            raise ConfigError("window.from must be <= window.to")
        if self.keyword_file is not None and not self.keyword_file.exists():
            raise ConfigError(f"keyword file not found: {self.keyword_file}")


def _as_date(value: object, name: str) -> date:
    if isinstance(value, date):
        return value
    if isinstance(value, str):
        try:
            return date.fromisoformat(value)
        except ValueError as exc:
            raise ConfigError(f"{name}: not a valid date: {value!r}") from exc
    raise ConfigError(f"{name}: expected a date, got {type(value).__name__}")


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str | Path | None) -> RunConfig:
    """Parse and validate the YAML config; None means all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text("utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        return RunConfig()
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_mapping(raw)


def config_from_mapping(raw: dict) -> RunConfig:
    _check_keys(raw, {"store", "keywords", "backends", "topics", "window",
                      "concurrency", "api"}, "config")

    backends_raw = raw.get("backends") or {}
    if not isinstance(backends_raw, dict):
        raise ConfigError("backends must be a mapping")
    _check_keys(backends_raw, set(VALID_BACKEND_ROLES) | {"token"}, "backends")
    backends = BackendConfig(**{k: v for k, v in backends_raw.items()})

    topics_raw = raw.get("topics") or {}
    if not isinstance(topics_raw, dict):
        raise ConfigError("topics must be a mapping")
    _check_keys(topics_raw, {"target_dim", "min_cluster_size", "top_n_terms",
                             "seed", "window_days"}, "topics")
    try:
        topics = TopicConfig(**{k: int(v) for k, v in topics_raw.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid topics config: {exc}") from exc

    window_raw = raw.get("window") or {}
    if not isinstance(window_raw, dict):
        raise ConfigError("window must be a mapping")
    _check_keys(window_raw, {"from", "to"}, "window")
    window_from = _as_date(window_raw["from"], "window.from") if "from" in window_raw else None
    window_to = _as_date(window_raw["to"], "window.to") if "to" in window_raw else None

    api_raw = raw.get("api") or {}
    if not isinstance(api_raw, dict):
        raise ConfigError("api must be a mapping")
    _check_keys(api_raw, {"host", "port", "cache_size", "cors_origins",
                          "bearer_token"}, "api")
    origins = api_raw.get("cors_origins") or []
    if not isinstance(origins, list) or not all(isinstance(o, str) for o in origins):
        raise ConfigError("api.cors_origins must be a list of strings")
    try:
        api = ApiConfig(host=str(api_raw.get("host", "127.0.0.1")),
                        port=int(api_raw.get("port", 8000)),
                        cache_size=int(api_raw.get("cache_size", 32)),
                        cors_origins=tuple(origins),
                        bearer_token=api_raw.get("bearer_token"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid api config: {exc}") from exc

    concurrency = raw.get("concurrency", 1)
    if not isinstance(concurrency, int):
        raise ConfigError("concurrency must be an integer")

    keywords = raw.get("keywords")
    return RunConfig(
        store_path=Path(raw.get("store", "store")),
        keyword_file=Path(keywords) if keywords else None,
        backends=backends,
        topics=topics,
        window_from=window_from,
        window_to=window_to,
        concurrency=concurrency,
        api=api,
    )
