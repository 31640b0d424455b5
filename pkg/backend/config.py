import os
import logging
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

SERVICE_NAME = "uhash-designs"
API_VERSION = "1.0.0"

LOG_FORMAT = '%(asctime)s | %(levelname)-7s | %(message)s'
LOG_DATEFMT = '%H:%M:%S'


class Settings(BaseModel):
    """Runtime knobs, read from the environment (or a .env file)."""

    table_budget: int = Field(default=10**7, gt=0)
    search_budget: int = Field(default=10**6, gt=0)
    rng_seed: int = 20240601
    jobs: int = Field(default=1, gt=0)
    log_level: str = "INFO"
    progress: bool = False


_settings: Optional[Settings] = None


def _env_flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in ("1", "true", "yes", "on")


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings(
            table_budget=int(os.getenv("UHASH_TABLE_BUDGET", 10**7)),
            search_budget=int(os.getenv("UHASH_SEARCH_BUDGET", 10**6)),
            rng_seed=int(os.getenv("UHASH_RNG_SEED", 20240601)),
            jobs=int(os.getenv("UHASH_JOBS", 1)),
            log_level=os.getenv("UHASH_LOG_LEVEL", "INFO"),
            progress=_env_flag("UHASH_PROGRESS"),
        )
    return _settings


def override_settings(**updates) -> Settings:
    """Replace the active settings; None values keep the current ones."""
    global _settings
    current = get_settings().model_dump()
    current.update({k: v for k, v in updates.items() if v is not None})
    _settings = Settings.model_validate(current)
    return _settings


def reset_settings() -> None:
    global _settings
    _settings = None


def setup_logging(level: str | None = None) -> None:
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
    )
