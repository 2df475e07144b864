"""
Core configuration module for the NP-LDA Workbench
"""
from typing import Optional
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "NP-LDA Workbench"
    environment: str = Field(default="development", alias="ENV")
    debug: bool = Field(default=False, alias="DEBUG")

    # Logging
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_format: str = Field(default="console", alias="LOG_FORMAT")

    # Experiments
    workers: int = Field(default=1, ge=1, alias="WORKERS")
    base_seed: int = Field(default=20220615, ge=0, alias="BASE_SEED")
    output_dir: str = Field(default="./results", alias="OUTPUT_DIR")
    parallel_backend: str = Field(default="loky", alias="PARALLEL_BACKEND")

    @field_validator("log_format", mode="before")
    @classmethod
    def normalize_log_format(cls, v):
        """Accept any casing of the renderer name"""
        if v is None or v == "":
            return "console"
        v = str(v).strip().lower()
        if v not in ("json", "console"):
            raise ValueError(f"LOG_FORMAT must be 'json' or 'console', got {v!r}")
        return v


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get application settings (singleton pattern)"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next access re-reads the environment"""
    global _settings
    _settings = None
