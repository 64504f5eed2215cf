"""
Unit tests for the ConfigurationManager class.
"""
import os
import tempfile
from unittest.mock import patch

import pytest

from src.config.configuration_manager import MAX_TRIALS, ConfigurationError, ConfigurationManager
from src.models.data_models import EngineConfig, OutputFormat


class TestConfigurationManager:
    """Test cases for ConfigurationManager."""

    def setup_method(self):
        """Set up test fixtures."""
        self.config_manager = ConfigurationManager()

    def test_defaults(self):
        """Test the configuration of an empty environment."""
        with patch.dict(os.environ, {}, clear=True):
            config = self.config_manager.get_engine_config()

            assert isinstance(config, EngineConfig)
            assert config.field_prime == 2
            assert config.seed == 0
            assert config.trials == 100
            assert config.output_format is OutputFormat.TEXT
            assert config.log_level == "WARNING"
            assert config.log_file_path is None
            assert self.config_manager.engine_config is config

    def test_custom_values(self):
        """Test loading every variable."""
        with patch.dict(os.environ, {
            'BIPATH_FIELD_PRIME': '7',
            'BIPATH_SEED': '18446744073709551615',
            'BIPATH_TRIALS': ' 500 ',
            'BIPATH_OUTPUT_FORMAT': 'JSON',
            'BIPATH_LOG_LEVEL': 'debug',
            'BIPATH_LOG_FILE': 'logs/run.log'
        }, clear=True):
            config = self.config_manager.get_engine_config()

            assert config.field_prime == 7
            assert config.seed == 2 ** 64 - 1
            assert config.trials == 500
            assert config.output_format is OutputFormat.JSON
            assert config.log_level == "DEBUG"
            assert config.log_file_path == 'logs/run.log'

    @pytest.mark.parametrize("name,value,message", [
        ('BIPATH_FIELD_PRIME', '4', "BIPATH_FIELD_PRIME must be a prime"),
        ('BIPATH_FIELD_PRIME', '65537', "BIPATH_FIELD_PRIME must be a prime"),
        ('BIPATH_FIELD_PRIME', 'two', "BIPATH_FIELD_PRIME must be an integer"),
        ('BIPATH_SEED', '-1', r"BIPATH_SEED must be in \[0, 2\^64\)"),
        ('BIPATH_SEED', str(2 ** 64), r"BIPATH_SEED must be in \[0, 2\^64\)"),
        ('BIPATH_TRIALS', '0', "BIPATH_TRIALS must be at least 1"),
        ('BIPATH_TRIALS', str(MAX_TRIALS + 1), f"BIPATH_TRIALS must be {MAX_TRIALS} or less"),
        ('BIPATH_OUTPUT_FORMAT', 'yaml', "BIPATH_OUTPUT_FORMAT must be 'text' or 'json'"),
        ('BIPATH_LOG_LEVEL', 'VERBOSE', "BIPATH_LOG_LEVEL must be one of"),
    ])
    def test_invalid_values(self, name, value, message):
        """Test error for each malformed or out-of-range variable."""
        with patch.dict(os.environ, {name: value}, clear=True):
            with pytest.raises(ConfigurationError, match=message):
                self.config_manager.get_engine_config()

    def test_env_file(self):
        """Test loading variables from a .env file."""
        with tempfile.TemporaryDirectory() as temp_dir:
            env_path = os.path.join(temp_dir, '.env')
            with open(env_path, 'w') as f:
                f.write("BIPATH_FIELD_PRIME=5\nBIPATH_TRIALS=12\n")

            with patch.dict(os.environ, {}, clear=True):
                config = ConfigurationManager(env_file=env_path).get_engine_config()

                assert config.field_prime == 5
                assert config.trials == 12

    def test_environment_overrides_env_file(self):
        """Test that variables already set take precedence over the file."""
        with tempfile.TemporaryDirectory() as temp_dir:
            env_path = os.path.join(temp_dir, '.env')
            with open(env_path, 'w') as f:
                f.write("BIPATH_FIELD_PRIME=5\n")

            with patch.dict(os.environ, {'BIPATH_FIELD_PRIME': '3'}, clear=True):
                config = ConfigurationManager(env_file=env_path).get_engine_config()

                assert config.field_prime == 3

    def test_missing_env_file(self):
        """Test error for an env file that does not exist."""
        with patch.dict(os.environ, {}, clear=True):
            with pytest.raises(ConfigurationError, match="Environment file not found"):
                ConfigurationManager(env_file='/nonexistent/.env').get_engine_config()

    def test_cached_config_before_load(self):
        """Test that nothing is cached before the first load."""
        assert self.config_manager.engine_config is None
