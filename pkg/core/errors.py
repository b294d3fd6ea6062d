"""
Error hierarchy for the illumination toolkit
Config-type errors map to CLI exit status 2, numeric failures to exit status 3
"""
from typing import Optional


class IlluminationError(Exception):
    """Base class for every error raised by the toolkit"""


class ConfigError(IlluminationError):
    """Malformed scenario, preset or command-line input"""


class StateError(ConfigError):
    """A probe state cannot be built from the given parameters"""


class ScenarioError(ConfigError):
    """Mode roles or channel parameters do not describe a valid illumination scenario"""


class NumericError(IlluminationError):
    """A numerical routine failed or its input violated a numerical precondition"""


class TensorError(NumericError):
    """Invalid operand for the dense tensor substrate"""


class RegionError(NumericError):
    """An operator or closed form is undefined in the requested parameter region"""

    def __init__(self, message: str, region: Optional[str] = None):
        super().__init__(message)
        self.region = region


class QuadratureError(NumericError):
    """Adaptive quadrature stopped before reaching the requested tolerance"""

    def __init__(self, message: str, best_estimate: float, error_estimate: float, evaluations: int):
        super().__init__(f"{message} (best estimate {best_estimate:.8f} ± {error_estimate:.2e}, {evaluations} evaluations)")
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
        self.evaluations = evaluations
