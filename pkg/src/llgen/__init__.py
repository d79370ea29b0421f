"""Light-like generators for OTOCs in brick-wall unitary circuits."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DimensionMismatch,
    LLGenError,
    NumericalError,
    ResourceGuard,
)
from .gates import GateEnsembleSpec, GateSource  # noqa: E402
from .llg import LEFT, RIGHT, LLGOperator  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "DimensionMismatch",
    "LLGenError",
    "NumericalError",
    "ResourceGuard",
    "GateEnsembleSpec",
    "GateSource",
    "LEFT",
    "RIGHT",
    "LLGOperator",
]
