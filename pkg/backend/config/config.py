"""
Configuration management for the Path Competition Simulator.
Handles environment variables and simulation defaults.
"""

import os
from typing import Optional

import psutil
from dotenv import load_dotenv

from core.errors import ConfigurationError


class Config:
    """Configuration class for the simulator."""

    def __init__(self):
        """Initialize configuration with environment variables."""
        load_dotenv()

    def _read_int(self, name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw == "":
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"{name} must be an integer, got {raw!r}")

    def _read_float(self, name: str, default: float) -> float:
        raw = os.getenv(name)
        if raw is None or raw == "":
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"{name} must be a number, got {raw!r}")

    @property
    def sim_threads(self) -> int:
        """Get the parallelism cap for experiments and sweeps."""
        default = psutil.cpu_count(logical=False) or 1
        threads = self._read_int("COMPETITION_SIM_THREADS", default)
        if threads < 1:
            raise ConfigurationError("COMPETITION_SIM_THREADS must be at least 1")
        return threads

    @property
    def log_level(self) -> str:
        """Get log level from environment or use default."""
        return os.getenv("LOG_LEVEL", "INFO")

    @property
    def log_file(self) -> Optional[str]:
        """Get optional log file path from environment."""
        return os.getenv("LOG_FILE") or None

    @property
    def tolerance(self) -> float:
        """Get the default convergence threshold of the dynamics."""
        return self._read_float("SIM_TOLERANCE", 1e-6)

    @property
    def max_rounds(self) -> int:
        """Get the default round limit of the dynamics."""
        return self._read_int("SIM_MAX_ROUNDS", 10_000)

    @property
    def eta(self) -> float:
        """Get the default better-response damping."""
        return self._read_float("SIM_ETA", 0.5)

    @property
    def euler_step(self) -> float:
        """Get the default explicit Euler step."""
        return self._read_float("SIM_EULER_STEP", 0.1)

    @property
    def seed(self) -> int:
        """Get the default seed of all generators."""
        return self._read_int("SIM_SEED", 0)

    @property
    def results_dir(self) -> str:
        """Get the default output directory."""
        return os.getenv("RESULTS_DIR", "results")

    @property
    def port(self) -> int:
        """Get the port of the web surface."""
        return self._read_int("PORT", 8000)

    @property
    def secret_key(self) -> str:
        """Get Flask secret key from environment."""
        return os.getenv("SECRET_KEY", "change-this-secret-key")


# Global configuration instance
config = Config()
