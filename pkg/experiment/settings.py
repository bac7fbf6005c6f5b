"""
Experiment configuration documents.

An experiment file is JSON with the fields of ExperimentConfig; missing
fields take their defaults and an empty file means "all defaults".
"""
import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import get_config
from errors import ConfigError
from gmam import GmamConfig
from stochastic import SimConfig

logger = logging.getLogger(__name__)


class ScanSettings(BaseModel):
    """c_x grid for the regime scan."""
    model_config = ConfigDict(extra="forbid")

    cx_min: float = Field(default=40.0, gt=0)
    cx_max: float = Field(default=80.0, gt=0)
    steps: int = Field(default=41, ge=2)
    export_cycles: bool = True

    @model_validator(mode="after")
    def _check_range(self):
        if self.cx_min >= self.cx_max:
            raise ValueError(f"cx_min ({self.cx_min}) must be below cx_max ({self.cx_max})")
        return self

    def values(self) -> List[float]:
        return [float(v) for v in np.round(np.linspace(self.cx_min, self.cx_max, self.steps), 10)]


class BundleSettings(BaseModel):
    """Transition-bundle statistics."""
    model_config = ConfigDict(extra="forbid")

    bins: int = Field(default=60, ge=2)
    min_transitions: int = Field(default=20, ge=1)
    adaptive_epsilon: bool = True
    max_doublings: int = Field(default=6, ge=0)


class ComposeSettings(BaseModel):
    """Durations of the composed time series (nondimensional time)."""
    model_config = ConfigDict(extra="forbid")

    pre_duration: float = Field(default=5.0, gt=0)
    display_duration: float = Field(default=5.0, gt=0)
    post_duration: float = Field(default=5.0, gt=0)


class ExperimentConfig(BaseModel):
    """Everything a run needs besides the model parameters."""
    model_config = ConfigDict(extra="forbid")

    params_file: str = Field(default_factory=lambda: get_config().params_file)
    c_x: float = Field(default=62.0, gt=0)
    nu_min: float = Field(default=0.0, ge=0)
    nu_max: float = Field(default=0.9, ge=0)
    nu_step: float = Field(default=0.01, gt=0)
    output_dir: Optional[str] = None

    gmam: GmamConfig = Field(default_factory=GmamConfig)
    sim: SimConfig = Field(default_factory=SimConfig)
    scan: ScanSettings = Field(default_factory=ScanSettings)
    bundle: BundleSettings = Field(default_factory=BundleSettings)
    compose: ComposeSettings = Field(default_factory=ComposeSettings)

    n_candidates: int = Field(default=36, ge=1)
    refine_candidates: bool = True
    warm_start: bool = False
    length_metric: Literal["euclidean", "action"] = "euclidean"
    cycle_points: int = Field(default=512, ge=64)

    @model_validator(mode="after")
    def _check_grid(self):
        if self.nu_min > self.nu_max:
            raise ValueError(f"nu_min ({self.nu_min}) must not exceed nu_max ({self.nu_max})")
        return self

    def nu_values(self) -> List[float]:
        """The nu grid nu_min, nu_min + nu_step, ..., <= nu_max (rounded to 10 decimals)."""
        n = int(np.floor((self.nu_max - self.nu_min) / self.nu_step + 1e-9))
        return [round(self.nu_min + k * self.nu_step, 10) for k in range(n + 1)]

    def echo(self) -> dict:
        """Configuration as recorded in the manifest (no output location)."""
        return self.model_dump(mode="json", exclude={"output_dir"})


def _format_error(exc: ValidationError) -> ConfigError:
    parts, first_field = [], None
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        first_field = first_field or loc
        parts.append(f"{loc}: {err['msg']}")
    return ConfigError("; ".join(parts), field=first_field)


def parse_config(data: dict, source: str = "<dict>") -> ExperimentConfig:
    """Validate a mapping into ExperimentConfig (ConfigError on failure)."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: experiment document must be a JSON object")
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        err = _format_error(e)
        raise ConfigError(f"{source}: {err}", field=err.field) from e


def load_config(path: Union[str, Path, None]) -> ExperimentConfig:
    """
    Load an experiment configuration.

    Args:
        path: JSON file; None returns the defaults

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: missing file, invalid JSON or failed validation (the
            message names the field)
    """
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}", field="config")

    text = path.read_text(encoding="utf-8")
    if not text.strip():
        logger.info(f"{path} is empty, using defaults")
        return ExperimentConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})", field="config") from e
    return parse_config(data, source=str(path))
