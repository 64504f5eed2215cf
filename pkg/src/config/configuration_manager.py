"""
Configuration manager for loading computation settings from the environment.
"""
import os
import logging
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from ..core.field_linalg import MAX_MODULUS, is_prime
from ..models.data_models import EngineConfig, OutputFormat

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
MAX_SEED = 2 ** 64
MAX_TRIALS = 100000


class ConfigurationError(Exception):
    """Raised when configuration validation fails."""
    pass


class ConfigurationManager:
    """Loads and validates the engine configuration from environment variables."""

    def __init__(self, env_file: Optional[str] = None):
        """
        Initialize the configuration manager.

        Args:
            env_file: Optional .env file loaded before reading the environment;
                variables already set in the environment take precedence
        """
        self._engine_config: Optional[EngineConfig] = None
        self.env_file = env_file
        self.logger = logging.getLogger(__name__)

    def _load_env_file(self) -> None:
        if self.env_file is None:
            return
        if not Path(self.env_file).is_file():
            raise ConfigurationError(f"Environment file not found: {self.env_file}")
        load_dotenv(self.env_file, override=False)
        self.logger.debug(f"Loaded environment file {self.env_file}")

    @staticmethod
    def _integer(name: str, default: str) -> int:
        raw = os.getenv(name, default).strip()
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"{name} must be an integer, got '{raw}'")

    def get_engine_config(self) -> EngineConfig:
        """
        Get the engine configuration with defaults and environment overrides.

        Returns:
            EngineConfig: The engine configuration

        Raises:
            ConfigurationError: If any variable is malformed or out of range
        """
        self._load_env_file()

        field_prime = self._integer('BIPATH_FIELD_PRIME', '2')
        seed = self._integer('BIPATH_SEED', '0')
        trials = self._integer('BIPATH_TRIALS', '100')
        output_format = os.getenv('BIPATH_OUTPUT_FORMAT', 'text').strip().lower()
        log_level = os.getenv('BIPATH_LOG_LEVEL', 'WARNING').strip().upper()
        log_file_path = os.getenv('BIPATH_LOG_FILE') or None

        if not is_prime(field_prime) or field_prime >= MAX_MODULUS:
            raise ConfigurationError(f"BIPATH_FIELD_PRIME must be a prime below {MAX_MODULUS}, got {field_prime}")

        if seed < 0 or seed >= MAX_SEED:
            raise ConfigurationError("BIPATH_SEED must be in [0, 2^64)")

        if trials < 1:
            raise ConfigurationError("BIPATH_TRIALS must be at least 1")

        if trials > MAX_TRIALS:
            raise ConfigurationError(f"BIPATH_TRIALS must be {MAX_TRIALS} or less")

        if output_format not in {f.value for f in OutputFormat}:
            raise ConfigurationError(f"BIPATH_OUTPUT_FORMAT must be 'text' or 'json', got '{output_format}'")

        if log_level not in LOG_LEVELS:
            raise ConfigurationError(f"BIPATH_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got '{log_level}'")

        self._engine_config = EngineConfig(
            field_prime=field_prime,
            seed=seed,
            trials=trials,
            output_format=OutputFormat(output_format),
            log_level=log_level,
            log_file_path=log_file_path
        )

        return self._engine_config

    @property
    def engine_config(self) -> Optional[EngineConfig]:
        """Get cached engine configuration."""
        return self._engine_config
