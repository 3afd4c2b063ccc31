"""Pydantic models for configuration validation."""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.characters import validate_chi_rule, validate_psi_rule


class Subcommand(str, Enum):
    """Experiments the command line runs."""

    SUM = "sum"
    WEIL_SCAN = "weil-scan"
    AXIOM4 = "axiom4"
    DENSITY = "density"
    THETA = "theta"
    MEASURE_FIT = "measure-fit"
    INTEGRATE = "integrate"
    FUBINI = "fubini"
    DECOMPOSE = "decompose"
    DISCREPANCY = "discrepancy"
    ETK_SEARCH = "etk-search"
    WITNESS = "witness"


class ReportFormat(str, Enum):
    """Report file formats."""

    CSV = "csv"
    JSON = "json"


class FieldSettings(BaseModel):
    """Finite-field caps."""

    dlog_cap: int = Field(2**22, gt=0, description="Largest q with a full log/antilog table")
    scan_cap: int = Field(2**20, gt=0, description="Largest q scanned by an existential atom")


class BudgetSettings(BaseModel):
    """Enumeration budgets."""

    enumeration: int = Field(10**8, gt=0, description="Largest q^n enumerated by one scan")


class CharacterSettings(BaseModel):
    """Character rules applied in every field."""

    psi: str = "standard"
    chi: str = "generator"
    order_floor: int = Field(1, ge=1)

    @field_validator("psi")
    @classmethod
    def validate_psi(cls, rule: str) -> str:
        return validate_psi_rule(rule)

    @field_validator("chi")
    @classmethod
    def validate_chi(cls, rule: str) -> str:
        return validate_chi_rule(rule)


class SuiteConstants(BaseModel):
    """Frozen constants for regression checks."""

    weil: Dict[str, float] = Field(default_factory=lambda: {"gauss": 1.0, "elliptic": 5.0})
    axiom4_k: float = Field(1.0, gt=0)
    fit_min_fields: int = Field(4, ge=4)

    def weil_constant(self, name: str) -> Optional[float]:
        return self.weil.get(name)


class EquidistSettings(BaseModel):
    """Discrepancy and exponent-search settings."""

    c_d: Optional[float] = Field(None, gt=0, description="ETK constant; (3/2)^d when unset")
    exact_2d_max_points: int = Field(1024, ge=1)
    grid_resolution: int = Field(32, ge=2)
    independence_height: int = Field(2, ge=1)


class DecompositionSettings(BaseModel):
    """Case decomposition settings."""

    max_order: int = Field(12, ge=1)


class Settings(BaseModel):
    """Effective experiment settings after profile, preset and override merging."""

    field: FieldSettings = Field(default_factory=FieldSettings)
    budgets: BudgetSettings = Field(default_factory=BudgetSettings)
    characters: CharacterSettings = Field(default_factory=CharacterSettings)
    suite: SuiteConstants = Field(default_factory=SuiteConstants)
    equidist: EquidistSettings = Field(default_factory=EquidistSettings)
    decomposition: DecompositionSettings = Field(default_factory=DecompositionSettings)
    formula_max_depth: int = Field(64, ge=1)
    workers: int = Field(1, ge=1)


class ProfileConfig(BaseModel):
    """Named bundle of settings overrides."""

    description: Optional[str] = None
    settings: Dict[str, Any] = Field(default_factory=dict)


class PresetConfig(BaseModel):
    """Named experiment: a subcommand, its definitions and settings overrides."""

    description: str
    subcommand: Subcommand
    definitions: List[str] = Field(default_factory=list)
    primes: Optional[str] = None
    arguments: Dict[str, Any] = Field(default_factory=dict)
    settings: Dict[str, Any] = Field(default_factory=dict)


class GlobalConfig(BaseModel):
    """Global project configuration."""

    project_name: str = "charlab"
    schema_version: int = 1
    tags: Optional[Dict[str, str]] = None

    @field_validator("schema_version")
    @classmethod
    def validate_schema_version(cls, version: int) -> int:
        if version != 1:
            raise ValueError(f"Unsupported schema_version {version}; this release reads schema 1")
        return version


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge overrides into a copy of base; dotted keys address nested sections."""
    merged = dict(base)
    for key, value in overrides.items():
        if "." in key:
            head, rest = key.split(".", 1)
            value = {rest: value}
            key = head
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class CharlabConfig(BaseModel):
    """Root configuration model."""

    model_config = ConfigDict(populate_by_name=True)

    global_config: GlobalConfig = Field(default_factory=GlobalConfig, alias="global")
    defaults: Settings = Field(default_factory=Settings)
    profiles: Dict[str, ProfileConfig] = Field(default_factory=dict)
    presets: Dict[str, PresetConfig] = Field(default_factory=dict)
    profile: Optional[str] = None
    preset: Optional[str] = None

    @classmethod
    def default(cls) -> "CharlabConfig":
        """Built-in configuration used when no charlab.yaml exists."""
        return cls.model_validate(
            {
                "global": {},
                "profiles": {
                    "desk": {"description": "Interactive runs on one machine"},
                    "ci": {"description": "Small budgets", "settings": {"budgets": {"enumeration": 10**6}}},
                },
            }
        )

    @model_validator(mode="after")
    def validate_profile_settings(self) -> "CharlabConfig":
        for name, profile in self.profiles.items():
            try:
                self.merged_settings(profile.settings)
            except ValueError as e:
                raise ValueError(f"Profile '{name}' has invalid settings: {e}")
        return self

    def get_profile(self, name: str) -> Optional[ProfileConfig]:
        return self.profiles.get(name)

    def get_preset(self, name: str) -> Optional[PresetConfig]:
        return self.presets.get(name)

    def merged_settings(self, *layers: Dict[str, Any]) -> Settings:
        """Defaults with each override layer applied in order."""
        data = self.defaults.model_dump()
        for layer in layers:
            data = deep_merge(data, layer)
        return Settings.model_validate(data)


class RunConfig(BaseModel):
    """Validated command-line run."""

    subcommand: Subcommand
    definitions: List[str] = Field(default_factory=list)
    primes: List[int] = Field(default_factory=list)
    field_sizes: List[Tuple[int, int]] = Field(default_factory=list)
    prime_low: Optional[int] = Field(None, ge=2)
    prime_high: Optional[int] = Field(None, ge=2)
    psi_rule: str = "standard"
    chi_rule: str = "generator"
    order_floor: int = Field(1, ge=1)
    budget: int = Field(10**8, gt=0)
    scan_cap: int = Field(2**20, gt=0)
    dlog_cap: int = Field(2**22, gt=0)
    workers: int = Field(1, ge=1)
    out: Optional[str] = None
    report_format: Optional[ReportFormat] = None
    expectations: Optional[str] = None
    arguments: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("psi_rule")
    @classmethod
    def validate_psi(cls, rule: str) -> str:
        return validate_psi_rule(rule)

    @field_validator("chi_rule")
    @classmethod
    def validate_chi(cls, rule: str) -> str:
        return validate_chi_rule(rule)

    @model_validator(mode="after")
    def validate_prime_range(self) -> "RunConfig":
        if self.prime_low is not None and self.prime_high is not None and self.prime_low > self.prime_high:
            raise ValueError(f"prime range bounds out of order: {self.prime_low} > {self.prime_high}")
        return self

    @property
    def resolved_format(self) -> ReportFormat:
        """Explicit format, else inferred from the output suffix; JSON by default."""
        if self.report_format is not None:
            return self.report_format
        if self.out and self.out.lower().endswith(".csv"):
            return ReportFormat.CSV
        return ReportFormat.JSON
