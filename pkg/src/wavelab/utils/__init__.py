"""
Utilities package for wavelab

This package provides:
- Errors: WaveLabError hierarchy
- Schemas: Pydantic models for parameters, reports and run records
- Config: key=value experiment config parser and environment defaults
- Serialization: NDJSON / JSON writers with full float precision
"""

from .errors import (
    WaveLabError,
    ConfigurationError,
    ShapeError,
    PreconditionError,
    BlowUpError,
)

from .schemas import (
    ModelParams,
    IneqReport,
    TestFunctionSpec,
    DetTrajectory,
    TrialRecord,
    ExitStats,
    RunManifest,
)

from .config import (
    ExperimentConfig,
    parse_config,
    config_to_text,
)

__all__ = [
    # Errors
    "WaveLabError",
    "ConfigurationError",
    "ShapeError",
    "PreconditionError",
    "BlowUpError",
    # Schemas
    "ModelParams",
    "IneqReport",
    "TestFunctionSpec",
    "DetTrajectory",
    "TrialRecord",
    "ExitStats",
    "RunManifest",
    # Config
    "ExperimentConfig",
    "parse_config",
    "config_to_text",
]
