import os
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from app.core.exceptions import ConfigurationError

# Load environment variables from .env file if present
BASE_DIR = Path(__file__).resolve().parent.parent.parent
ENV_PATH = BASE_DIR / ".env"
if ENV_PATH.exists():
    load_dotenv(dotenv_path=ENV_PATH)


class Settings:
    """Centralized process configuration."""

    # App metadata
    APP_NAME: str = os.getenv("APP_NAME", "fl-energy")
    APP_VERSION: str = os.getenv("APP_VERSION", "0.1.0")
    APP_DESC: str = os.getenv(
        "APP_DESCRIPTION",
        "Energy-accounted federated learning simulator with clustering-based client selection.",
    )

    # Debug & Logging
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Outputs
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "results")
    DEFAULT_CONFIG: str = os.getenv("DEFAULT_CONFIG", str(BASE_DIR / "config" / "default.yaml"))

    # Local training fan-out within a round
    TRAIN_WORKERS: int = int(os.getenv("TRAIN_WORKERS", 4))

    # Exact diverse-grouping oracle guard
    MAX_BRUTE_FORCE_PARTITIONS: int = int(os.getenv("MAX_BRUTE_FORCE_PARTITIONS", 1_000_000))


settings = Settings()


def read_yaml(path: Path) -> Dict[str, Any]:
    """Read a YAML mapping; an empty file yields an empty dict."""
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config root must be a mapping: {path}")
    return data


def load_run_config(path: Optional[str] = None, overrides: Optional[Iterable[tuple]] = None):
    """
    Build a validated RunConfig from an optional YAML file plus dotted-key overrides.

    Overrides are (dotted_key, value) pairs, e.g. ("selection.K", 4).
    """
    # imported here: models import exceptions from core, core must not import models at load time
    from app.models.run_model import RunConfig
    from app.utils.helpers import set_dotted

    raw: Dict[str, Any] = read_yaml(Path(path)) if path else {}
    for key, value in overrides or ():
        set_dotted(raw, key, value)

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid run config: {e}") from e
