import logging
from pydantic import BaseSettings, validator


class EddSettings(BaseSettings):
    # Largest node count the exact solver is attempted on inside sweeps
    exact_cap: int = 30
    # Search-node cap handed to solve_exact when the caller gives none
    node_budget: int = 2_000_000
    log_level: str = "INFO"
    log_file: str = "logs/edd.log"
    workers: int = 1
    default_seed: int = 1
    preset_dir: str = "data/presets"

    class Config:
        env_prefix = 'EDD_'
        env_file = '.env'
        env_file_encoding = 'utf-8'

    @validator("exact_cap", "node_budget", "workers")
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be a positive integer")
        return value

    @validator("log_level")
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level {value!r}")
        return level


# Create a settings instance, automatically loading from environment variables
settings = EddSettings()


def reload_settings() -> EddSettings:
    """Re-read the environment (used after .env is loaded and by tests)."""
    global settings
    settings = EddSettings()
    return settings
