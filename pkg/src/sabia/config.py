"""Runtime configuration: a JSON file with env-var overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .embed import EmbedderConfig
from .genclient import API_KEY_ENV, CHAT_TEMPERATURE, GATEWAY_URL_ENV

DEFAULT_SESSION_TTL_MIN = 60.0

# Scalar keys that an SABIA_<KEY> environment variable may override.
_ENV_OVERRIDES = {
    "gateway_url": GATEWAY_URL_ENV,
    "store_path": "SABIA_STORE_PATH",
    "template_path": "SABIA_TEMPLATE_PATH",
    "k": "SABIA_K",
    "temperature": "SABIA_TEMPERATURE",
}


class ConfigError(Exception):
    """The config file cannot be read or has invalid values."""


@dataclass
class AppConfig:
    gateway_url: str | None = None
    api_key_env: str = API_KEY_ENV
    store_path: str | None = None
    template_path: str | None = None
    k: int = 4
    temperature: float = CHAT_TEMPERATURE
    session_ttl_min: float = DEFAULT_SESSION_TTL_MIN
    embedder: EmbedderConfig = field(
        default_factory=lambda: EmbedderConfig(kind="local_hash", dim=768)
    )
    models: list[dict] = field(default_factory=list)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Build an AppConfig from an optional JSON file plus env overrides."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config root must be a JSON object")
    cfg = AppConfig()
    if "gateway_url" in raw:
        cfg.gateway_url = raw["gateway_url"]
    if "api_key_env" in raw:
        cfg.api_key_env = str(raw["api_key_env"])
    if "store_path" in raw:
        cfg.store_path = raw["store_path"]
    if "template_path" in raw:
        cfg.template_path = raw["template_path"]
    if "k" in raw:
        cfg.k = int(raw["k"])
    if "temperature" in raw:
        cfg.temperature = float(raw["temperature"])
    if "session_ttl_min" in raw:
        cfg.session_ttl_min = float(raw["session_ttl_min"])
    if "embedder" in raw:
        try:
            cfg.embedder = EmbedderConfig(**raw["embedder"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad embedder config: {exc}") from exc
    if "models" in raw:
        if not isinstance(raw["models"], list):
            raise ConfigError("models must be a list of model entries")
        cfg.models = raw["models"]

    for key, env_name in _ENV_OVERRIDES.items():
        value = os.environ.get(env_name)
        if value is None:
            continue
        if key == "k":
            cfg.k = int(value)
        elif key == "temperature":
            cfg.temperature = float(value)
        else:
            setattr(cfg, key, value)
    if cfg.k < 1:
        raise ConfigError("k must be >= 1")
    return cfg
