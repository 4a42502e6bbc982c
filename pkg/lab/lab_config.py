import os
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from errors import ParamsError

load_dotenv()

ENV_PREFIX = "LAB_"


class LabSettings(BaseModel):
    """Numerical defaults shared by the CLI and the library entry points."""

    log_level: str = "INFO"
    log_file: Optional[str] = None
    quad_tol: float = Field(default=1e-10, gt=0)
    quad_max_levels: int = Field(default=24, ge=2)
    r_min: float = Field(default=1e-6, gt=0)
    r_max: float = Field(default=50.0, gt=0)
    grid_m: int = Field(default=2000, ge=16)
    dt: float = Field(default=1e-4, gt=0)
    t_final: float = Field(default=0.1, gt=0)
    workers: int = Field(default=1, ge=1)

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Invalid log level: {value}")
        return level


@lru_cache(maxsize=1)
def get_settings() -> LabSettings:
    """Read LAB_* variables from the environment (after .env is loaded).

    Cached; call get_settings.cache_clear() after changing the environment.

    Raises:
        ParamsError: if a variable cannot be parsed, naming the variable.
    """
    raw = {}
    for name in LabSettings.model_fields:
        value = os.getenv(ENV_PREFIX + name.upper())
        if value not in (None, ""):
            raw[name] = value
    try:
        return LabSettings(**raw)
    except ValidationError as e:
        bad = ", ".join(ENV_PREFIX + str(err["loc"][0]).upper() for err in e.errors())
        raise ParamsError(f"Invalid environment configuration: {bad}") from e
