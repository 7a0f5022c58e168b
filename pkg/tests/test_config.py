"""Unit tests for configuration loading."""

import os
import tempfile
import unittest
from unittest.mock import patch
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import Config
from src.errors import ValidationError
from src.tensor_core import get_dimension_limits, set_dimension_limits

ENV_KEYS = ('QFS_MAX_PURE_DIM', 'QFS_MAX_DENSITY_DIM')


def clean_env():
    return {k: v for k, v in os.environ.items() if k not in ENV_KEYS}


@patch('src.config.load_dotenv')
class TestConfig(unittest.TestCase):
    """Test config.yaml loading and environment overrides."""

    def setUp(self):
        self.saved_limits = get_dimension_limits()

    def tearDown(self):
        set_dimension_limits(max_pure_dim=self.saved_limits.max_pure_dim,
                             max_density_dim=self.saved_limits.max_density_dim)

    def test_repository_defaults(self, mock_dotenv):
        """Test the bundled config.yaml values."""
        with patch.dict(os.environ, clean_env(), clear=True):
            config = Config()
            self.assertEqual(config.max_pure_dim, 4096)
            self.assertEqual(config.max_density_dim, 256)
        self.assertEqual(config.default_shots, 8192)
        self.assertEqual(config.seed, 2019)
        self.assertEqual(config.epsilon_grid, [0.2, 0.1, 0.05, 0.025])
        self.assertEqual(config.delta, 0.1)
        self.assertEqual(config.significant_digits, 12)
        mock_dotenv.assert_called_once()

    def test_environment_overrides(self, mock_dotenv):
        """Test QFS_MAX_* variables replace the file values and install the caps."""
        env = dict(clean_env(), QFS_MAX_PURE_DIM='512', QFS_MAX_DENSITY_DIM='64')
        with patch.dict(os.environ, env, clear=True):
            config = Config()
            self.assertEqual(config.max_pure_dim, 512)
            limits = config.apply_limits()
        self.assertEqual(limits.max_density_dim, 64)
        self.assertEqual(get_dimension_limits().max_pure_dim, 512)

    def test_bad_environment_value(self, mock_dotenv):
        """Test non-integer and too-small overrides are rejected."""
        for raw in ('lots', '1'):
            with patch.dict(os.environ, dict(clean_env(), QFS_MAX_PURE_DIM=raw), clear=True):
                with self.assertRaises(ValidationError):
                    Config().max_pure_dim

    def test_missing_file(self, mock_dotenv):
        """Test a missing config file raises FileNotFoundError."""
        with self.assertRaises(FileNotFoundError):
            Config('/nonexistent/config.yaml')

    def test_missing_section(self, mock_dotenv):
        """Test a config without every required section is rejected."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'config.yaml'
            path.write_text('limits:\n  max_pure_dim: 64\n  max_density_dim: 16\n')
            with self.assertRaises(ValidationError) as ctx:
                Config(str(path))
        self.assertIn('sampling', str(ctx.exception))

    def test_malformed_yaml(self, mock_dotenv):
        """Test a YAML syntax error is reported as a validation error."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'config.yaml'
            path.write_text('limits: [1, 2\n')
            with self.assertRaises(ValidationError):
                Config(str(path))


if __name__ == '__main__':
    unittest.main()
