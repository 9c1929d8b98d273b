"""Command-line and benchmark settings, read from the environment or a .env file."""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Settings for the CLI and benchmarks, loaded from .env file or environment variables."""

    # Logging
    LOG_LEVEL: str = Field(default="WARNING", description="Logging level")

    # Output formats
    JSON_INDENT: Optional[int] = Field(default=None, ge=0, description="Indent of emitted diagram JSON (None = compact)")
    DOT_RANKDIR: str = Field(default="LR", pattern=r"^(LR|RL|TB|BT)$", description="Graphviz rank direction")

    # Validation
    VALIDATE_ON_LOAD: bool = Field(default=True, description="Check well-formedness of every diagram read from disk")

    # Benchmarks
    BENCH_REPEAT: int = Field(default=5, ge=1, description="Default number of timed runs per phase")
    BENCH_SEED: int = Field(default=0, description="Seed for randomly shaped benchmark terms")

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": True,
    }


@lru_cache
def get_settings() -> Settings:
    """Settings are read once per process; call ``get_settings.cache_clear()`` to reload."""
    return Settings()
