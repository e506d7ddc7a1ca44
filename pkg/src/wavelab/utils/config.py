"""
Experiment configuration for wavelab.

A config file is UTF-8 text with one ``section.key=value`` assignment per
line; ``#`` starts a comment. Sections map onto the pydantic models below,
which reject unknown keys and out-of-range values. Every error names the
dotted key and, when it came from a file, the line it was found on.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from wavelab.utils.errors import ConfigurationError
from wavelab.utils.schemas import InitFamily


logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class ModelSection(_Section):
    nu: float = Field(default=1.0, gt=0.0)
    b: float = Field(default=2.0, gt=0.0)
    a: float = Field(default=0.25, gt=0.0, lt=1.0)
    m_factor: float = Field(default=2.0, ge=1.0)
    delta: float = Field(default=0.5, gt=0.0, lt=1.0)


class GridSection(_Section):
    L_factor: float = Field(default=40.0, gt=0.0, description="Half width in units of 1/k")
    n: int = Field(default=4001, ge=3)

    @field_validator("n")
    @classmethod
    def _odd(cls, n: int) -> int:
        if n % 2 == 0:
            raise ValueError("n must be odd so that x = 0 is a grid point")
        return n


class TimeSection(_Section):
    dt: Optional[float] = Field(default=None, gt=0.0, description="Default 1e-3 min(1, 1/(b eta))")
    T_end: float = Field(default=50.0, gt=0.0)
    T_max: float = Field(default=50.0, gt=0.0)
    sample_every: int = Field(default=100, ge=1)


class InitSection(_Section):
    family: InitFamily = "bump"
    amplitude: float = 1e-3
    center: float = 0.0
    width: float = Field(default=1.0, gt=0.0)
    y0: float = 0.0
    norm_fraction: Optional[float] = Field(
        default=None,
        gt=0.0,
        description="Rescale the bump to this fraction of delta kappa* / (b (4 + a))",
    )


class NoiseSection(_Section):
    epsilon_Q: float = Field(default=1.0, ge=0.0)
    ell: Optional[float] = Field(default=None, gt=0.0, description="Default 1/k")
    epsilon_sigma: float = Field(default=0.0, ge=0.0)


class McSection(_Section):
    n_trials: int = Field(default=200, ge=1)
    master_seed: int = Field(default=20130512, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)


class VerifySection(_Section):
    n_random: int = Field(default=1000, ge=1)
    rel_tol: float = Field(default=1e-6, gt=0.0)


class OutputSection(_Section):
    directory: Optional[str] = None


class ExperimentConfig(_Section):
    """Complete, validated experiment configuration."""

    model: ModelSection = Field(default_factory=ModelSection)
    grid: GridSection = Field(default_factory=GridSection)
    time: TimeSection = Field(default_factory=TimeSection)
    init: InitSection = Field(default_factory=InitSection)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    mc: McSection = Field(default_factory=McSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _shifted_wave_needs_shift(self) -> "ExperimentConfig":
        if self.init.family == "shifted-wave" and self.init.y0 == 0.0:
            logger.warning("init.family=shifted-wave with y0=0 starts on the wave itself")
        return self

    @property
    def sections_set(self) -> List[str]:
        """Sections that were explicitly provided (in file order of the model)."""
        return [name for name in type(self).model_fields if name in self.model_fields_set]


SECTIONS = tuple(ExperimentConfig.model_fields)


def _split_line(raw: str, line_no: int) -> Optional[Tuple[str, str, str]]:
    text = raw.split("#", 1)[0].strip()
    if not text:
        return None
    if "=" not in text:
        raise ConfigurationError("expected 'section.key=value'", line=line_no)
    key, value = (part.strip() for part in text.split("=", 1))
    if key.count(".") != 1:
        raise ConfigurationError("key must have the form section.key", key=key, line=line_no)
    section, field = key.split(".")
    if section not in SECTIONS:
        raise ConfigurationError(f"unknown section '{section}'", key=key, line=line_no)
    if not value:
        raise ConfigurationError("empty value", key=key, line=line_no)
    return section, field, value


def _coerce(value: str) -> Any:
    lowered = value.lower()
    if lowered in ("none", "null"):
        return None
    return value


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse and validate a key=value experiment config.

    Args:
        text: Config file contents

    Returns:
        Validated ExperimentConfig with defaults filled in

    Raises:
        ConfigurationError: unknown key, type mismatch or range violation,
            naming the offending key and line
    """
    data: Dict[str, Dict[str, Any]] = {}
    lines: Dict[str, int] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        parsed = _split_line(raw, line_no)
        if parsed is None:
            continue
        section, field, value = parsed
        key = f"{section}.{field}"
        if key in lines:
            raise ConfigurationError(
                f"duplicate key (first set on line {lines[key]})", key=key, line=line_no
            )
        lines[key] = line_no
        data.setdefault(section, {})[field] = _coerce(value)

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        loc = [str(part) for part in err["loc"]]
        key = ".".join(loc[:2]) if len(loc) >= 2 else (loc[0] if loc else None)
        message = err["msg"]
        if err["type"] == "extra_forbidden":
            message = "unknown key"
        raise ConfigurationError(message, key=key, line=lines.get(key or "")) from e


def config_to_text(config: ExperimentConfig) -> str:
    """
    Canonical key=value rendering of a config.

    ``parse_config(config_to_text(c))`` reproduces ``c``.
    """
    out = []
    for section in SECTIONS:
        values = getattr(config, section).model_dump()
        for field, value in values.items():
            if value is None:
                out.append(f"{section}.{field}=none")
            elif isinstance(value, float):
                out.append(f"{section}.{field}={value!r}")
            else:
                out.append(f"{section}.{field}={value}")
    return "\n".join(out) + "\n"
