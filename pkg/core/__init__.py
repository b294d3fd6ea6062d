from .errors import ConfigError, IlluminationError, NumericError
from .scenario import Scenario, build_hypotheses
from .states import Family, PureState, Role

__all__ = ["ConfigError", "IlluminationError", "NumericError", "Scenario", "build_hypotheses", "Family", "PureState", "Role"]
