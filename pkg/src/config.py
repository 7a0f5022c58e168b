"""Configuration management for the forking simulator."""

import os
from pathlib import Path
from typing import List

import yaml
from dotenv import load_dotenv

from src.errors import ValidationError
from src.tensor_core import DimensionLimits, set_dimension_limits

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.yaml"


class Config:
    """Simulator configuration loaded from config.yaml and environment variables."""

    def __init__(self, config_path: str = None):
        """Initialize configuration.

        Args:
            config_path: Path to the YAML configuration file (defaults to the
                repository's config.yaml)
        """
        # Load environment variables from .env file
        load_dotenv()

        config_file = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_file}")

        with open(config_file, 'r') as f:
            try:
                self._config = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ValidationError(f"Invalid YAML in {config_file}: {e}")

        if not isinstance(self._config, dict):
            raise ValidationError(f"Configuration must be a mapping: {config_file}")

        self._validate()

    def _validate(self):
        """Validate that required configuration sections are present."""
        required_sections = ['limits', 'sampling', 'complexity', 'output']
        for section in required_sections:
            if section not in self._config:
                raise ValidationError(f"Missing required configuration section: {section}")

    @staticmethod
    def _env_int(name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw == "":
            return int(default)
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"{name} must be an integer, got '{raw}'")
        if value < 2:
            raise ValidationError(f"{name} must be >= 2, got {value}")
        return value

    # Limits (environment overrides config.yaml)
    @property
    def max_pure_dim(self) -> int:
        return self._env_int('QFS_MAX_PURE_DIM', self._config['limits']['max_pure_dim'])

    @property
    def max_density_dim(self) -> int:
        return self._env_int('QFS_MAX_DENSITY_DIM', self._config['limits']['max_density_dim'])

    def apply_limits(self) -> DimensionLimits:
        """Install the configured dimension caps."""
        return set_dimension_limits(max_pure_dim=self.max_pure_dim, max_density_dim=self.max_density_dim)

    # Sampling properties
    @property
    def default_shots(self) -> int:
        return self._config['sampling']['default_shots']

    @property
    def seed(self) -> int:
        return self._config['sampling']['seed']

    @property
    def chunk_size(self) -> int:
        return self._config['sampling']['chunk_size']

    # Complexity sweep properties
    @property
    def complexity_d(self) -> int:
        return self._config['complexity']['d']

    @property
    def complexity_q(self) -> int:
        return self._config['complexity']['q']

    @property
    def epsilon_grid(self) -> List[float]:
        return [float(e) for e in self._config['complexity']['epsilon_grid']]

    @property
    def delta(self) -> float:
        return float(self._config['complexity']['delta'])

    @property
    def repetitions(self) -> int:
        return self._config['complexity']['repetitions']

    # Output properties
    @property
    def significant_digits(self) -> int:
        return self._config['output']['significant_digits']
