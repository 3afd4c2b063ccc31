"""Integration tests for the shipped configuration and definitions."""

from pathlib import Path

import pytest

from charlab.config import ConfigLoader, Subcommand
from charlab.core.primes import parse_primes
from charlab.dsl.parser import parse_file
from charlab.experiments import EXPERIMENTS

ROOT = Path(__file__).resolve().parents[2]
LOADER = ConfigLoader(str(ROOT / "charlab.yaml"))


@pytest.mark.integration
class TestConfigValidation:
    """Integration tests for configuration validation."""

    def test_config_file_is_valid(self):
        assert LOADER.validate_config_file()

    @pytest.mark.parametrize("profile", ["desk", "ci"])
    def test_profiles_load(self, profile):
        config = LOADER.load_config(profile)
        assert config.profile == profile
        assert config.defaults.suite.weil_constant("gauss") == 1.0

    def test_ci_profile_is_smaller(self):
        ci, desk = LOADER.load_config("ci"), LOADER.load_config("desk")
        assert ci.defaults.budgets.enumeration < desk.defaults.budgets.enumeration
        assert ci.defaults.workers == 2

    @pytest.mark.parametrize("preset", LOADER.get_available_presets())
    def test_preset_definitions_parse(self, preset):
        config = LOADER.load_config("desk", preset)
        preset_config = config.get_preset(preset)
        assert preset_config.subcommand in EXPERIMENTS
        assert preset_config.definitions
        for path in preset_config.definitions:
            program = parse_file(str(ROOT / path))
            assert program.declarations

    @pytest.mark.parametrize("preset", ["gauss", "elliptic", "squares"])
    def test_preset_prime_ranges(self, preset):
        primes = parse_primes(LOADER.load_config("desk", preset).get_preset(preset).primes)
        assert len(primes) >= 4

    def test_weil_presets_name_suite_constants(self):
        config = LOADER.load_config("desk")
        for name in ("gauss", "elliptic"):
            preset = config.get_preset(name)
            assert preset.subcommand == Subcommand.WEIL_SCAN
            assert config.defaults.suite.weil_constant(preset.arguments["constant"]) is not None

    def test_every_definitions_file_parses(self):
        files = sorted((ROOT / "definitions").glob("*.cdl"))
        assert files
        for path in files:
            assert parse_file(str(path)).declarations
