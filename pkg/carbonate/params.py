"""
Model parameters and phase-plane state for the carbonate system.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import ConfigError

logger = logging.getLogger(__name__)


class ModelParams(BaseModel):
    """
    Constants of the carbonate model.

    Concentrations are in umol/kg; rates and sharpness indexes are
    dimensionless. Time in every equation is nondimensional, so
    ``tau_w_years`` is informational only.
    """
    model_config = ConfigDict(extra="forbid", frozen=True, strict=True, allow_inf_nan=False)

    mu: float = Field(gt=0, description="characteristic concentration")
    b: float = Field(description="max CaCO3 burial rate")
    theta: float = Field(description="max respiration feedback rate")
    nu: float = Field(default=0.0, ge=0, description="external CO2 injection rate")
    c_p: float = Field(gt=0, description="burial crossover concentration")
    c_x: float = Field(gt=0, description="respiration crossover concentration")
    c_f: float = Field(gt=0, description="buffering crossover concentration")
    f0: float = Field(gt=0, description="max buffer factor")
    w0: float = Field(description="reference dissolved inorganic carbon")
    gamma: float = Field(gt=0, description="sigmoid sharpness")
    beta: float = Field(gt=0, description="buffer sharpness")
    tau_w_years: float = Field(default=1e5, gt=0, description="timescale metadata")

    def with_updates(self, **changes) -> "ModelParams":
        """Return a validated copy with some fields replaced (e.g. c_x, nu)."""
        data = self.model_dump()
        data.update(changes)
        return ModelParams(**data)


@dataclass(frozen=True)
class State:
    """A point (c, w) in the phase plane."""
    c: float  # carbonate ion CO3^2- (umol/kg)
    w: float  # total dissolved inorganic carbon (umol/kg)

    def as_array(self) -> np.ndarray:
        return np.array([self.c, self.w], dtype=float)

    @classmethod
    def from_array(cls, x) -> "State":
        return cls(c=float(x[0]), w=float(x[1]))


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_params(data: dict, source: str = "<dict>") -> ModelParams:
    """
    Validate a flat key-value mapping into ModelParams.

    Args:
        data: Mapping with exactly the ModelParams field names
        source: Label used in error messages

    Returns:
        Validated ModelParams

    Raises:
        ConfigError: unknown keys, missing keys or non-finite values
    """
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: parameter document must be a JSON object")
    try:
        return ModelParams(**data)
    except ValidationError as e:
        first = e.errors()[0]["loc"]
        field = str(first[0]) if first else None
        raise ConfigError(f"{source}: {_format_validation_error(e)}", field=field) from e


def load_params(path: Union[str, Path]) -> ModelParams:
    """
    Load ModelParams from a JSON parameter file.

    Args:
        path: Path to the parameter file

    Returns:
        Validated ModelParams
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Parameter file not found: {path}", field="params_file")

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})", field="params_file") from e

    params = parse_params(data, source=str(path))
    logger.debug(f"Loaded model parameters from {path}")
    return params
