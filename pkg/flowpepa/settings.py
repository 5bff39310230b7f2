# flowpepa/settings.py
"""
Run settings, loaded from config/defaults.yaml.

Settings groups the simulation, signalling and logging sections into
frozen dataclasses. Every field has a built-in default, so a YAML file
only needs the keys it changes.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar, Union

import yaml

from flowpepa.errors import ConfigError

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "defaults.yaml"

METHODS = ("direct", "gibson-bruck", "ode")

T = TypeVar("T")

# ============================================================
# Sections
# ============================================================


@dataclass(frozen=True)
class SimulationSettings:
    method: str = "gibson-bruck"
    seed: int = 1
    replicas: int = 1
    t_end: float = 100.0
    dt: float = 0.01
    output_interval: float = 1.0
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"simulation.method must be one of {', '.join(METHODS)}, got {self.method!r}")
        if self.seed < 0:
            raise ConfigError(f"simulation.seed must be >= 0, got {self.seed}")
        for name in ("replicas", "t_end", "dt", "output_interval", "jobs"):
            value = getattr(self, name)
            if value <= 0:
                raise ConfigError(f"simulation.{name} must be > 0, got {value}")


@dataclass(frozen=True)
class SignallingSettings:
    species: str = "m_MAPK_PP"
    ode_fraction: float = 0.99
    ssa_fraction: float = 1.0
    horizon_factor: float = 10.0
    pilot_t_end: float = 100.0
    pilot_dt: float = 0.01

    def __post_init__(self) -> None:
        for name in ("ode_fraction", "ssa_fraction"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ConfigError(f"signalling.{name} must be in (0, 1], got {value}")
        for name in ("horizon_factor", "pilot_t_end", "pilot_dt"):
            value = getattr(self, name)
            if value <= 0:
                raise ConfigError(f"signalling.{name} must be > 0, got {value}")


@dataclass(frozen=True)
class LoggingSettings:
    level: str = "WARNING"

    def __post_init__(self) -> None:
        if not isinstance(logging.getLevelName(self.level), int):
            raise ConfigError(f"logging.level must be a logging level name, got {self.level!r}")


# ============================================================
# Settings
# ============================================================


@dataclass(frozen=True)
class Settings:
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    signalling: SignallingSettings = field(default_factory=SignallingSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)

    @classmethod
    def from_yaml(cls, config_path: Union[str, Path]) -> "Settings":
        """Load settings from a YAML file.

        Args:
            config_path: Path to YAML config file

        Raises:
            FileNotFoundError: If config file does not exist
            ConfigError: If the file is not valid YAML, has unknown keys or bad values
        """
        path = Path(config_path)
        with path.open("r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"{path}: unknown sections {sorted(unknown)}")
        return cls(
            simulation=_section(SimulationSettings, data.get("simulation"), "simulation"),
            signalling=_section(SignallingSettings, data.get("signalling"), "signalling"),
            logging=_section(LoggingSettings, data.get("logging"), "logging"),
        )

    @classmethod
    def load(cls, config_path: Optional[Union[str, Path]] = None) -> "Settings":
        """Explicit path, else the repository defaults file when present, else built-in defaults."""
        if config_path is not None:
            return cls.from_yaml(config_path)
        if DEFAULT_CONFIG.is_file():
            return cls.from_yaml(DEFAULT_CONFIG)
        return cls()

    def with_simulation(self, **changes: Any) -> "Settings":
        """Copy with simulation fields replaced; None values are ignored."""
        updates = {k: v for k, v in changes.items() if v is not None}
        return replace(self, simulation=replace(self.simulation, **updates))


def _section(kind: Type[T], data: Optional[Dict[str, Any]], name: str) -> T:
    if data is None:
        return kind()
    if not isinstance(data, dict):
        raise ConfigError(f"section {name} must be a mapping")
    unknown = set(data) - {f.name for f in fields(kind)}  # type: ignore[arg-type]
    if unknown:
        raise ConfigError(f"section {name}: unknown keys {sorted(unknown)}")
    try:
        return kind(**data)
    except TypeError as exc:
        raise ConfigError(f"section {name}: {exc}") from exc
