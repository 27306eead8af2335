"""Engine configuration using Pydantic Settings."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class EngineSettings(BaseSettings):
    """Engine settings loaded from environment variables.

    Scenario `settings` lines override these values and command line flags
    override both.
    """

    # Compatibility and identification
    epsilon: float = Field(default=0.02, ge=0.0)
    eps_id: float = Field(default=0.05, ge=0.0)

    # tau histograms and fingerprints
    bins: int = Field(default=41, ge=1)
    quantum: float = Field(default=1e-6, gt=0.0)

    # Enumeration
    cap: int = Field(default=100_000_000, ge=1)
    parallel: int = Field(default=1, ge=1)
    block_size: int = Field(default=65_536, ge=1)

    # App
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="EVIDENCE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )


def get_settings(**overrides) -> EngineSettings:
    """Get engine settings instance, with explicit values taking precedence."""
    return EngineSettings(**{k: v for k, v in overrides.items() if v is not None})
