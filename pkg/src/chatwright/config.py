"""Configuration: data directory, provider mode, credentials.

Sources, later ones winning: built-in defaults, a JSON config file,
``CHATWRIGHT_*`` environment variables, explicit overrides (CLI flags).
The API key itself is only ever read from the environment variable named
by ``api_key_env`` and never appears in config files or logs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from chatwright.providers import (
    MOCK_POLICIES,
    CompletionProvider,
    LiveProvider,
    MockProvider,
    RecordingProvider,
    ReplayProvider,
    ScriptedPolicy,
)

_ENV_PREFIX = "CHATWRIGHT_"


@dataclass
class AppConfig:
    data_dir: str = "./chatwright-data"
    provider: str = "mock"            # live | replay | mock
    cassette: str | None = None       # replay source / live recording target
    record: bool = False              # wrap the live provider with a recorder
    mock_policy: str = "no-change"    # echo | no-change | scripted
    mock_script: str | None = None    # rule table for mock_policy=scripted
    api_base: str = "https://api.openai.com/v1"
    model: str = "gpt-4"
    api_key_env: str = "CHATWRIGHT_API_KEY"
    max_in_flight: int = 4
    auth_token: str | None = None     # static bearer token for the HTTP API


class ConfigError(ValueError):
    pass


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None,
                **overrides) -> AppConfig:
    env = os.environ if env is None else env
    values: dict[str, object] = {}

    if path is None and Path("chatwright.json").exists():
        path = "chatwright.json"
    if path is not None:
        raw = json.loads(Path(path).read_text("utf-8"))
        values.update(raw)

    for f in fields(AppConfig):
        env_name = _ENV_PREFIX + f.name.upper()
        if env_name in env:
            value: object = env[env_name]
            if f.type == "int":
                value = int(value)  # type: ignore[arg-type]
            elif f.type == "bool":
                value = str(value).lower() in ("1", "true", "yes")
            values[f.name] = value

    values.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(AppConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return AppConfig(**values)  # type: ignore[arg-type]


def build_provider(cfg: AppConfig) -> CompletionProvider:
    if cfg.provider == "mock":
        if cfg.mock_policy == "scripted":
            if not cfg.mock_script:
                raise ConfigError("mock_policy=scripted needs mock_script")
            policy = ScriptedPolicy.from_file(cfg.mock_script)
        elif cfg.mock_policy in MOCK_POLICIES:
            policy = MOCK_POLICIES[cfg.mock_policy]()
        else:
            raise ConfigError(f"unknown mock policy {cfg.mock_policy!r}")
        return MockProvider(policy, max_in_flight=cfg.max_in_flight)

    if cfg.provider == "replay":
        if not cfg.cassette:
            raise ConfigError("provider=replay needs a cassette path")
        return ReplayProvider(cfg.cassette, max_in_flight=cfg.max_in_flight)

    if cfg.provider == "live":
        api_key = os.environ.get(cfg.api_key_env, "")
        if not api_key:
            raise ConfigError(f"set {cfg.api_key_env} for live mode")
        provider: CompletionProvider = LiveProvider(
            cfg.api_base, api_key, model=cfg.model,
            max_in_flight=cfg.max_in_flight)
        if cfg.record:
            if not cfg.cassette:
                raise ConfigError("record=true needs a cassette path")
            provider = RecordingProvider(provider, cfg.cassette)
        return provider

    raise ConfigError(f"unknown provider mode {cfg.provider!r}")
