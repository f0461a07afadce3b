"""
Application configuration management using Pydantic settings.
Loads configuration from environment variables (prefix MCM_) and .env file.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Logging
    log_level: str = "INFO"

    # Dynamics
    gain_k: float = 1.0
    k_safety: float = 1.1
    step_size: float = 1e-3
    integrator: str = "rk4"  # Options: "explicit-euler", "rk4", "rk45-adaptive"
    max_time: float = 1e4
    convergence_tol: float = 1e-6
    trace_stride: int = 10
    rtol: float = 1e-6
    atol: float = 1e-9

    # Classifier
    default_C: float = 1.0
    sv_tolerance: float = 1e-6

    # Data and benchmark
    scaling: str = "minmax"  # Options: "none", "minmax", "standard"
    cv_folds: int = 5
    random_seed: int = 0
    jobs: int = 1
    grid_C: str = "0.03125,0.125,0.5,2,8,32"
    grid_gamma: str = "0.0625,0.25,1,4"
    uci_data_dir: Optional[str] = None

    # Reference solver
    oracle_max_iterations: int = 50000

    model_config = SettingsConfigDict(
        env_prefix="MCM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    @property
    def grid_C_list(self) -> list[float]:
        """Parse the C grid from comma-separated string."""
        return [float(value.strip()) for value in self.grid_C.split(",") if value.strip()]

    @property
    def grid_gamma_list(self) -> list[float]:
        """Parse the RBF width grid from comma-separated string."""
        return [float(value.strip()) for value in self.grid_gamma.split(",") if value.strip()]


# Global settings instance
settings = Settings()
