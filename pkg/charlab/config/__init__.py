"""Configuration management for charlab experiments."""

from .config_loader import ConfigLoader, get_config
from .models import (
    BudgetSettings,
    CharacterSettings,
    CharlabConfig,
    EquidistSettings,
    FieldSettings,
    PresetConfig,
    ProfileConfig,
    RunConfig,
    Settings,
    Subcommand,
)

__all__ = [
    "ConfigLoader",
    "get_config",
    "CharlabConfig",
    "Settings",
    "FieldSettings",
    "BudgetSettings",
    "CharacterSettings",
    "EquidistSettings",
    "ProfileConfig",
    "PresetConfig",
    "RunConfig",
    "Subcommand",
]
