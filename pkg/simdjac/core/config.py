from functools import lru_cache
from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    lanes: int = 8  # s, lanes per vector
    lane_backend: str = "vector"
    workers: int = 1
    max_sweeps: int = 30
    strategy: str = "rr"
    norm_reduction: Literal["sequential", "pairwise"] = "sequential"
    gram_schmidt: bool = True  # real driver only
    debug_checks: bool = False
    max_rescale_attempts: int = 4
    log_level: str = "INFO"
    data_dir: str = "data"  # CLI outputs whose path is left out

    model_config = SettingsConfigDict(env_file=".env", env_prefix="SIMDJAC_", case_sensitive=False)

    @field_validator("lanes")
    @classmethod
    def lanes_power_of_two(cls, v: int) -> int:
        if v < 2 or v & (v - 1):
            raise ValueError(f"lanes must be a power of two >= 2, got {v}")
        return v

    @field_validator("workers", "max_sweeps", "max_rescale_attempts")
    @classmethod
    def at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v


@lru_cache
def get_settings() -> Settings:
    return Settings()
