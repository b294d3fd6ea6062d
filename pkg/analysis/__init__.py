from .helstrom import HelstromOutcome, RegionKind, RegionTag, helstrom_bound, omega_operator
from .infotheory import HolevoResult, holevo, linear_entropy
from .metrics import StateMetrics, evaluate_state, mean_over_square, ranking_check

__all__ = [
    "HelstromOutcome", "RegionKind", "RegionTag", "helstrom_bound", "omega_operator",
    "HolevoResult", "holevo", "linear_entropy",
    "StateMetrics", "evaluate_state", "mean_over_square", "ranking_check",
]
