"""Configuration loader for charlab.yaml."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from .models import CharlabConfig

logger = logging.getLogger(__name__)

BUDGET_ENV = "CHARLAB_BUDGET"


class ConfigLoader:
    """Load and validate configuration from charlab.yaml."""

    def __init__(self, config_file: str = "charlab.yaml"):
        """Initialize config loader.

        Args:
            config_file: Path to configuration file (default: charlab.yaml)
        """
        self.config_file = Path(config_file)
        self._config: Optional[CharlabConfig] = None
        self._raw_config: Optional[Dict[str, Any]] = None

    def load_config(
        self,
        profile: str,
        preset: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> CharlabConfig:
        """Load configuration for a profile.

        Args:
            profile: Profile name (desk, ci)
            preset: Optional experiment preset (gauss, elliptic, squares, sqrt2)
            overrides: Optional settings overrides, nested or with dotted keys

        Returns:
            Validated CharlabConfig with the profile, preset and overrides folded into defaults

        Raises:
            FileNotFoundError: If config file doesn't exist
            ValueError: If profile or preset not found or validation fails
        """
        if not self._raw_config:
            self._load_raw_config()

        if not self._config:
            self._validate_config()

        if not self._config:
            raise ValueError("Configuration not loaded")
        return self.select(self._config, profile, preset, overrides)

    @staticmethod
    def select(
        config: CharlabConfig,
        profile: str,
        preset: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> CharlabConfig:
        """Fold a profile, a preset, runtime overrides and the budget environment variable into defaults."""
        if config.get_profile(profile) is None:
            raise ValueError(f"Profile '{profile}' not found in configuration")
        layers = [config.profiles[profile].settings]
        if preset:
            preset_config = config.get_preset(preset)
            if preset_config is None:
                raise ValueError(f"Preset '{preset}' not found in configuration")
            layers.append(preset_config.settings)
        if overrides:
            layers.append(overrides)
        env_budget = os.environ.get(BUDGET_ENV)
        if env_budget:
            try:
                layers.append({"budgets": {"enumeration": int(env_budget)}})
            except ValueError:
                raise ValueError(f"{BUDGET_ENV} must be an integer, got '{env_budget}'")
            logger.debug("Enumeration budget %s taken from %s", env_budget, BUDGET_ENV)

        try:
            settings = config.merged_settings(*layers)
        except ValidationError as e:
            raise ValueError(f"Configuration validation failed: {e}")

        selected = config.model_copy(deep=True)
        selected.defaults = settings
        selected.profile = profile
        selected.preset = preset
        return selected

    def _load_raw_config(self) -> None:
        """Load raw YAML configuration."""
        if not self.config_file.exists():
            # Try to find config file in parent directories
            current = Path.cwd()
            while current != current.parent:
                potential_config = current / self.config_file.name
                if potential_config.exists():
                    self.config_file = potential_config
                    break
                current = current.parent
            else:
                raise FileNotFoundError(f"Configuration file '{self.config_file}' not found")

        with open(self.config_file, "r") as f:
            self._raw_config = yaml.safe_load(f)
        logger.debug("Loaded configuration from %s", self.config_file)

    def _validate_config(self) -> None:
        """Validate configuration against Pydantic models."""
        try:
            if not self._raw_config:
                raise ValueError("No configuration loaded")
            self._config = CharlabConfig.model_validate(self._raw_config)
        except ValidationError as e:
            raise ValueError(f"Configuration validation failed: {e}")

    def get_available_profiles(self) -> list[str]:
        """Get list of available profiles."""
        if not self._config:
            self._load_raw_config()
            self._validate_config()

        return list(self._config.profiles.keys()) if self._config else []

    def get_available_presets(self) -> list[str]:
        """Get list of available experiment presets."""
        if not self._config:
            self._load_raw_config()
            self._validate_config()

        return list(self._config.presets.keys()) if self._config else []

    def validate_config_file(self) -> bool:
        """Validate the configuration file without selecting a profile.

        Returns:
            True if valid, raises exception otherwise
        """
        try:
            self._load_raw_config()
            self._validate_config()
            return True
        except Exception as e:
            raise ValueError(f"Configuration validation failed: {e}")

    @staticmethod
    def generate_example_config(output_path: str = "charlab.yaml.example") -> None:
        """Generate an example configuration file.

        Args:
            output_path: Path to write example configuration
        """
        example_config = {
            "global": {
                "project_name": "charlab",
                "schema_version": 1,
                "tags": {"Purpose": "finite-field character sums"},
            },
            "defaults": {
                "field": {"dlog_cap": 2**22, "scan_cap": 2**20},
                "budgets": {"enumeration": 10**8},
                "characters": {"psi": "standard", "chi": "generator", "order_floor": 1},
                "suite": {"weil": {"gauss": 1.0, "elliptic": 5.0}, "axiom4_k": 1.0},
                "equidist": {"exact_2d_max_points": 1024, "grid_resolution": 32, "independence_height": 2},
                "decomposition": {"max_order": 12},
                "workers": 1,
            },
            "profiles": {
                "desk": {"description": "Interactive runs on one machine", "settings": {}},
                "ci": {
                    "description": "Small budgets for continuous integration",
                    "settings": {"budgets": {"enumeration": 10**6}, "workers": 2},
                },
            },
            "presets": {
                "gauss": {
                    "description": "Gauss sums on the affine line",
                    "subcommand": "weil-scan",
                    "definitions": ["definitions/gauss.cdl"],
                    "primes": "5..199",
                },
                "squares": {
                    "description": "Counting measure of the squares family",
                    "subcommand": "measure-fit",
                    "definitions": ["definitions/squares.cdl"],
                    "primes": "11..97",
                },
            },
        }

        with open(output_path, "w") as f:
            yaml.dump(example_config, f, default_flow_style=False, sort_keys=False)


def get_config(
    profile: str = "desk", preset: Optional[str] = None, config_file: str = "charlab.yaml"
) -> CharlabConfig:
    """Load the named profile, falling back to built-in defaults when no configuration file exists.

    Args:
        profile: Profile name
        preset: Optional experiment preset
        config_file: Configuration file name, searched in parent directories

    Returns:
        Loaded and validated configuration
    """
    loader = ConfigLoader(config_file)
    try:
        return loader.load_config(profile, preset)
    except FileNotFoundError:
        logger.debug("No %s found; using built-in defaults", config_file)
        return ConfigLoader.select(CharlabConfig.default(), profile, preset)
