"""
Configuration settings for the toolkit using Pydantic Settings.
Follows the Singleton pattern for configuration management.

Run configuration precedence: CLI flag > AMCT_SEED (seed only) > config file >
built-in default.
"""

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigError
from .schemas.config import RunConfig


class Settings(BaseSettings):
    """Process-level settings with environment variable support (AMCT_*)."""

    model_config = SettingsConfigDict(
        env_prefix="AMCT_",
        env_file=".env",
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"
    log_json: bool = False

    # Overrides the config-file seed when set (AMCT_SEED)
    seed: Optional[int] = None

    # Ingestion
    max_atoms: int = 128

    # Explanation
    default_alpha: float = 0.5

    # Evaluation threads
    eval_workers: int = 1


# Singleton instance of settings
_settings: Optional[Settings] = None


def get_settings(refresh: bool = False) -> Settings:
    """
    Get the singleton settings instance.

    Args:
        refresh: Re-read the environment instead of returning the cached instance

    Returns:
        Settings: The process settings
    """
    global _settings
    if _settings is None or refresh:
        _settings = Settings()
    return _settings


def load_config_file(path: Optional[Path]) -> Dict[str, Dict[str, Any]]:
    """
    Read a JSON run-config file.

    Args:
        path: Config file path, or None for built-in defaults

    Returns:
        Dict with optional "model" and "train" sections

    Raises:
        ConfigError: If the file is unreadable or not a JSON object
    """
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - {"model", "train"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    return raw


def resolve_run_config(
    config_path: Optional[Path] = None,
    cli_overrides: Optional[Mapping[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> Tuple[RunConfig, Dict[str, str]]:
    """
    Merge defaults, config file, environment and CLI flags.

    Args:
        config_path: Optional JSON config file
        cli_overrides: Dotted keys ("train.epochs") to values; None values are ignored
        settings: Settings instance (defaults to the singleton)

    Returns:
        Tuple of the validated RunConfig and a map of dotted key to source
        ("file", "env" or "cli") for every non-default field

    Raises:
        ConfigError: If the merged configuration is invalid
    """
    settings = settings or get_settings()
    sources: Dict[str, str] = {}
    merged: Dict[str, Dict[str, Any]] = {"model": {}, "train": {}}

    for section, values in load_config_file(config_path).items():
        if not isinstance(values, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        merged[section].update(values)
        sources.update({f"{section}.{key}": "file" for key in values})

    if settings.seed is not None:
        merged["train"]["seed"] = settings.seed
        sources["train.seed"] = "env"

    for dotted, value in (cli_overrides or {}).items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if section not in merged or not key:
            raise ConfigError(f"invalid override key {dotted!r}")
        merged[section][key] = value
        sources[dotted] = "cli"

    try:
        config = RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    return config, sources
