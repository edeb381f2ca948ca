"""Application settings and configuration"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="FLEETSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
    )

    # Application
    app_name: str = "fleetsim"
    app_version: str = "0.1.0"
    debug: bool = False
    log_level: str = "INFO"

    # Run history
    database_url: str = "sqlite:///./fleetsim_runs.db"
    record_history: bool = True

    # Output
    output_dir: str = "./runs"

    # Simulation defaults (scenario files may override)
    default_dt: float = 1e-3
    default_horizon: float = 20.0
    default_record_every: int = 10
    default_seed: int = 42

    # Numerical guards
    settle_threshold: float = 0.1
    divergence_threshold: float = 1e6
    pd_tolerance: float = 1e-10
    b_bar_floor: float = 1e-4
    pitch_guard: float = 1e-3


# Global settings instance
settings = Settings()
