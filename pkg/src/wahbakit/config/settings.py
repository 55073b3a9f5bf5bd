import logging
import os
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="WAHBA_KIT_",
        extra="ignore",
    )

    # Logging
    log_level: str = "WARNING"
    log_json: bool = False

    # Monte Carlo
    workers: int = Field(1, ge=1, description="Число процессов по умолчанию для simulate")
    chunk_size: int = Field(500, ge=1, description="Испытаний в одной задаче пула")

    # Solvers
    tol_scale: float = Field(1e-13, gt=0.0, description="Допуск решателей в единицах λ₀")
    quest_max_iter: int = Field(20, ge=1)
    recursive_max_iter: int = Field(8, ge=1)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"Неизвестный уровень логирования {v!r}. Допустимо: {', '.join(LOG_LEVELS)}")
        return level

    @field_validator("workers")
    @classmethod
    def validate_workers(cls, v: int) -> int:
        cpus = os.cpu_count() or 1
        if v > cpus:
            logger.warning(
                "WAHBA_KIT_WORKERS=%d больше числа CPU (%d). Параллелизм будет ограничен железом.",
                v,
                cpus,
            )
        return v


@lru_cache
def get_settings() -> Settings:
    return Settings()
