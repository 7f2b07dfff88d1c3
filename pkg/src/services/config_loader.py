from pathlib import Path
from typing import Any, Callable, Dict, Optional, TextIO, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.channel.scenario import ScenarioConfig, db_to_linear, dbm_to_watts
from src.config.settings import (
    DEFAULT_GRID_STEP_DEG,
    DEFAULT_SEED,
    DEFAULT_SNR_ENHANCEMENT_DB,
    DEFAULT_TRIALS,
    EXHAUSTIVE_ANGULAR_STEPS,
    EXHAUSTIVE_RADIAL_STEPS,
    LOCATION_RANGE_M,
    LOCATION_STEPS,
    NY_VALUES,
    SNR_ENHANCEMENT_VALUES_DB,
    SWEEP_WORKERS
)
from src.services.experiment import METHODS, Estimator, ExperimentSpec, Method, SweepName
from src.utils.logging import logger

ConfigSource = Union[str, Path, TextIO]


class ConfigParseError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line_no: Optional[int] = None):
        self.key = key
        self.line_no = line_no
        location = []
        if key is not None:
            location.append(f"key '{key}'")
        if line_no is not None:
            location.append(f"line {line_no}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


def _triple(text: str) -> Tuple[float, float, float]:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(float(part) for part in parts)


def _number_list(text: str) -> Tuple[float, ...]:
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if not parts:
        raise ValueError("expected at least one number")
    return tuple(float(part) for part in parts)


def _integer(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


# config key -> (model field, converter)
_SCENARIO_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "pos_dfbs": ("pos_dfbs", _triple),
    "pos_user": ("pos_user", _triple),
    "pos_is": ("pos_is", _triple),
    "m_antennas": ("m_antennas", _integer),
    "ny": ("ny", _integer),
    "nz": ("nz", _integer),
    "wavelength_m": ("wavelength", float),
    "spacing_ra_m": ("spacing_ra", float),
    "spacing_is_m": ("spacing_is", float),
    "tx_power_dbm": ("tx_power", lambda text: dbm_to_watts(float(text))),
    "noise_power_dbm": ("noise_power", lambda text: dbm_to_watts(float(text))),
    "snr_floor_db": ("snr_floor", lambda text: db_to_linear(float(text))),
    "block_length": ("block_length", _integer),
    "rcs_coeff_re": ("rcs_coeff_re", float),
    "rcs_coeff_im": ("rcs_coeff_im", float),
}

_HARNESS_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "snr_enhancement_db": ("snr_enhancement_db", float),
    "grid_step_deg": ("grid_step_deg", float),
    "trials": ("trials", _integer),
    "seed": ("seed", _integer),
    "estimator": ("estimator", str),
    "exhaustive_radial_steps": ("exhaustive_radial_steps", _integer),
    "exhaustive_angular_steps": ("exhaustive_angular_steps", _integer),
    "location_min_m": ("location_min_m", float),
    "location_max_m": ("location_max_m", float),
    "location_steps": ("location_steps", _integer),
    "ny_values": ("ny_values", lambda text: tuple(_integer(part) for part in text.split(",") if part.strip())),
    "snr_enhancement_values_db": ("snr_enhancement_values_db", _number_list),
    "workers": ("workers", _integer),
}


class HarnessConfig(BaseModel):
    """Parsed config file: the base scenario plus run and sweep settings"""
    model_config = ConfigDict(frozen=True)

    scenario: ScenarioConfig = ScenarioConfig()
    snr_floor_given: bool = False
    snr_enhancement_db: Optional[float] = None
    grid_step_deg: float = Field(DEFAULT_GRID_STEP_DEG, gt=0)
    trials: int = Field(DEFAULT_TRIALS, ge=1)
    seed: int = DEFAULT_SEED
    estimator: Estimator = "asymptotic"
    exhaustive_radial_steps: int = Field(EXHAUSTIVE_RADIAL_STEPS, ge=2)
    exhaustive_angular_steps: int = Field(EXHAUSTIVE_ANGULAR_STEPS, ge=2)
    location_min_m: float = LOCATION_RANGE_M[0]
    location_max_m: float = LOCATION_RANGE_M[1]
    location_steps: int = Field(LOCATION_STEPS, ge=1)
    ny_values: Tuple[int, ...] = Field(NY_VALUES, min_length=1)
    snr_enhancement_values_db: Tuple[float, ...] = Field(SNR_ENHANCEMENT_VALUES_DB, min_length=1)
    workers: int = Field(SWEEP_WORKERS, ge=1)

    @field_validator("location_max_m")
    @classmethod
    def _check_location_range(cls, value: float, info) -> float:
        lower = info.data.get("location_min_m")
        if lower is not None and value < lower:
            raise ValueError(f"location_max_m must not be below location_min_m ({lower})")
        return value

    @field_validator("ny_values")
    @classmethod
    def _check_ny_values(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(ny < 1 for ny in value):
            raise ValueError("ny_values must all be at least 1")
        return value

    @model_validator(mode="after")
    def _check_snr_settings(self) -> "HarnessConfig":
        if self.snr_floor_given and self.snr_enhancement_db is not None:
            raise ValueError("snr_floor_db and snr_enhancement_db are mutually exclusive")
        return self

    @property
    def enhancement_db(self) -> Optional[float]:
        """SNR enhancement applied per point; None when an absolute floor was given"""
        if self.snr_floor_given:
            return None
        return self.snr_enhancement_db if self.snr_enhancement_db is not None else DEFAULT_SNR_ENHANCEMENT_DB

    def resolved_scenario(self) -> ScenarioConfig:
        """Scenario with the SNR floor in effect for a single solve"""
        enhancement = self.enhancement_db
        if enhancement is None:
            return self.scenario
        return self.scenario.with_snr_enhancement(enhancement)

    def location_values(self) -> Tuple[float, ...]:
        if self.location_steps == 1:
            return (float(self.location_min_m),)
        return tuple(float(v) for v in np.linspace(self.location_min_m, self.location_max_m, self.location_steps))

    def experiment(
        self,
        sweep: SweepName,
        values: Optional[Tuple[float, ...]] = None,
        methods: Tuple[Method, ...] = METHODS,
        **overrides: Any
    ) -> ExperimentSpec:
        """
        Build the ExperimentSpec of one sweep from this config

        Args:
            sweep: Sweep name
            values: Sweep values; defaults to the configured axis of the sweep
            methods: Methods run at each point
            overrides: ExperimentSpec fields replacing the configured ones (seed, trials, estimator)

        Returns:
            Validated ExperimentSpec
        """
        if values is None:
            if sweep in ("is_location_y", "is_location_x"):
                values = self.location_values()
            elif sweep == "ny":
                values = tuple(float(v) for v in self.ny_values)
            else:
                values = self.snr_enhancement_values_db

        fields = {
            "base": self.scenario,
            "sweep": sweep,
            "values": values,
            "estimator": self.estimator,
            "trials": self.trials,
            "seed": self.seed,
            "grid_step_deg": self.grid_step_deg,
            "methods": methods,
            "snr_enhancement_db": self.enhancement_db,
            "exhaustive_radial_steps": self.exhaustive_radial_steps,
            "exhaustive_angular_steps": self.exhaustive_angular_steps,
            "workers": self.workers,
        }
        fields.update({key: value for key, value in overrides.items() if value is not None})
        return ExperimentSpec(**fields)


def _read_lines(source: Optional[ConfigSource]) -> Tuple[str, list]:
    if source is None:
        return "<defaults>", []
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as handle:
                return str(source), handle.read().splitlines()
        except OSError as e:
            logger.error(f"Error reading config: {str(e)}", {"path": str(source)})
            raise
    if hasattr(source, "read"):
        return getattr(source, "name", "<stream>"), source.read().splitlines()
    raise TypeError(f"Unsupported config source: {type(source).__name__}")


def _first_error_field(error: ValidationError) -> Optional[str]:
    for detail in error.errors():
        if detail.get("loc"):
            return str(detail["loc"][0])
    return None


_POSITION_KEYS = ("pos_dfbs", "pos_user", "pos_is")


def _check_positions(scenario_fields: Dict[str, Any], origins: Dict[str, Tuple[str, int]]) -> None:
    # Coincident nodes are reported against the later of the two keys
    positions = {
        name: scenario_fields.get(name, ScenarioConfig.model_fields[name].default)
        for name in _POSITION_KEYS
    }
    for index, first in enumerate(_POSITION_KEYS):
        for second in _POSITION_KEYS[index + 1:]:
            if np.linalg.norm(np.subtract(positions[first], positions[second])) > 0:
                continue
            given = [origins[name] for name in (first, second) if name in origins]
            key, line_no = max(given, key=lambda origin: origin[1])
            raise ConfigParseError(f"{first} and {second} coincide; distances must be strictly positive",
                                   key=key, line_no=line_no)


def parse_config(source: Optional[ConfigSource] = None) -> HarnessConfig:
    """
    Parse a flat `key = value` config file

    Args:
        source: Path, open text stream, or None for the defaults

    Returns:
        HarnessConfig; unspecified keys keep their defaults

    Raises:
        ConfigParseError: Malformed line, unknown or repeated key, or invalid value
    """
    name, lines = _read_lines(source)
    scenario_fields: Dict[str, Any] = {}
    harness_fields: Dict[str, Any] = {}
    # field name -> (config key, line number) for error reporting
    origins: Dict[str, Tuple[str, int]] = {}

    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError("expected 'key = value'", line_no=line_no)

        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if not key:
            raise ConfigParseError("missing key", line_no=line_no)
        if key in _SCENARIO_KEYS:
            field, convert = _SCENARIO_KEYS[key]
            target = scenario_fields
        elif key in _HARNESS_KEYS:
            field, convert = _HARNESS_KEYS[key]
            target = harness_fields
        else:
            raise ConfigParseError("unknown key", key=key, line_no=line_no)
        if field in origins:
            raise ConfigParseError(f"repeated key (first set on line {origins[field][1]})", key=key, line_no=line_no)

        try:
            target[field] = convert(text)
        except ValueError as e:
            raise ConfigParseError(f"invalid value {text!r}: {str(e)}", key=key, line_no=line_no) from e
        origins[field] = (key, line_no)

    if "snr_floor" in origins and "snr_enhancement_db" in origins:
        key, line_no = origins["snr_enhancement_db"]
        raise ConfigParseError("snr_floor_db and snr_enhancement_db are mutually exclusive", key=key, line_no=line_no)
    _check_positions(scenario_fields, origins)

    try:
        scenario = ScenarioConfig(**scenario_fields)
        config = HarnessConfig(
            scenario=scenario,
            snr_floor_given="snr_floor" in scenario_fields,
            **harness_fields
        )
    except ValidationError as e:
        field = _first_error_field(e)
        key, line_no = origins.get(field, (field, None))
        logger.error("Invalid config value", {"source": name, "key": key, "line": line_no})
        raise ConfigParseError(e.errors()[0]["msg"], key=key, line_no=line_no) from e

    logger.debug("Parsed config", {"source": name, "keys": len(origins)})
    return config
