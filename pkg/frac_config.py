"""
FracSeries Configuration and Core Constants
Central defaults, structured logging and error types for the fractional
derivative series toolkit.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional
import hashlib


class FracConfig:
    """Core configuration for the fractional series toolkit."""

    # Versions
    FRACSERIES_VERSION = "v1.0.0"
    CSV_SCHEMA_VERSION = "1"

    # Function catalog
    CATALOG_TAGS = ["sech", "tanh", "sin", "cos", "gaussian", "exp", "power", "constant"]

    # File Paths
    BASE_DIR = Path.cwd()
    LOGS_DIR = BASE_DIR / "logs"

    # Special function tolerances
    POLE_TOLERANCE = 1e-12
    INTEGER_TOLERANCE = 1e-12
    SERIES_RTOL = 1e-16
    SERIES_MAX_TERMS = 10_000
    SERIES_SMALL_STREAK = 3  # consecutive small terms before stopping
    ML_CANCELLATION_THRESHOLD = 30.0
    ML_MAX_SHIFT = 8  # largest m tried for an integer alpha*m term recurrence
    GAMMA_MAX_ARG = 171.6  # Gamma(z) overflows a double beyond this
    LOG_FLOAT_MAX = 709.78

    # Jet and series limits
    MAX_JET_ORDER = 200
    MAX_SERIES_TERMS = 160  # factorials overflow past k ~ 170

    # Sweep defaults
    SWEEP_DOMAIN = (0.1, 5.0)
    SWEEP_POINTS = 512
    REFERENCE_TERMS = 40
    ROOT_WINDOW = 1e-3
    GL_REFERENCE_GRID = 100_000
    AVERAGE_ERROR_DOMAIN = (0.1, 1.0)
    AVERAGE_ERROR_POINTS = 200

    # FDE defaults
    FDE_LAMBDA = 1.0
    FDE_ORDER = 0.5
    FDE_TERMS = 3
    FDE_EPS = 1e-4
    FDE_XMAX = 20.0
    FDE_STEPS = 4000
    FDE_TAIL_BRACKET = (-1e3, 1e3)  # far value f(x_max) searched by bisection
    FDE_BISECTION_MAX_ITER = 200
    FDE_Y_START = 1e-3
    FDE_RESIDUAL_X = 2.0  # where the exact variable solution is plugged into the truncated ODE
    FDE_GRID = (0.1, 10.0, 200)

    # Integrator
    SINGULAR_COEFFICIENT_TOL = 1e-14

    # Output
    CSV_FLOAT_FORMAT = "%.17g"
    CSV_LINE_TERMINATOR = "\n"

    @classmethod
    def ensure_directories(cls) -> None:
        """Ensure the log directory exists."""
        cls.LOGS_DIR.mkdir(parents=True, exist_ok=True)

    @classmethod
    def get_run_fingerprint(cls, config: Dict[str, Any]) -> str:
        """Stable hash of a resolved run configuration."""
        state = {
            "version": cls.FRACSERIES_VERSION,
            "schema": cls.CSV_SCHEMA_VERSION,
            "config": config
        }
        state_json = json.dumps(state, sort_keys=True, default=str)
        return hashlib.sha256(state_json.encode()).hexdigest()


class FracLogger:
    """JSON-lines logging for toolkit operations."""

    def __init__(self, component: str):
        self.component = component
        self.log_file = FracConfig.LOGS_DIR / f"{component}.log"
        FracConfig.ensure_directories()

    def log(self, level: str, message: str, metadata: Optional[Dict] = None) -> None:
        """Log message with timestamp and metadata."""
        log_entry = {
            "timestamp": datetime.utcnow().isoformat(),
            "component": self.component,
            "level": level,
            "message": message,
            "metadata": metadata or {}
        }

        with open(self.log_file, 'a') as f:
            f.write(json.dumps(log_entry, default=str) + "\n")

    def info(self, message: str, metadata: Optional[Dict] = None) -> None:
        self.log("INFO", message, metadata)

    def warning(self, message: str, metadata: Optional[Dict] = None) -> None:
        self.log("WARNING", message, metadata)

    def error(self, message: str, metadata: Optional[Dict] = None) -> None:
        self.log("ERROR", message, metadata)

    def debug(self, message: str, metadata: Optional[Dict] = None) -> None:
        self.log("DEBUG", message, metadata)


# Error types

class FracSeriesError(Exception):
    """Base class for toolkit failures."""


class DomainError(FracSeriesError, ValueError):
    """Argument outside the domain of an operation."""


class PoleError(DomainError):
    """Gamma function evaluated at a pole."""


class ConfigurationError(FracSeriesError, ValueError):
    """Unsupported combination of parameters."""


class NumericalError(FracSeriesError, ArithmeticError):
    """A numerical procedure failed to produce a result."""


class SeriesConvergenceError(NumericalError):
    """Series did not meet its stopping rule within the term cap."""


class BracketError(NumericalError):
    """Shooting bracket does not enclose a sign change."""


class SingularCoefficientError(NumericalError):
    """Leading ODE coefficient vanishes on the integration interval."""


class WeightOverflowError(NumericalError):
    """Log-magnitude of a weight exceeds the double range."""


class GammaOverflowError(NumericalError):
    """Gamma (or its reciprocal) exceeds the double range."""
