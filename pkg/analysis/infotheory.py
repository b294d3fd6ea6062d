"""
Holevo information and entanglement diagnostics
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from config import config
from core.errors import ScenarioError
from core.scenario import HypothesisPair, LossExpansion
from core.states import PureState
from core.tensor import ComplexMatrix, eigvalsh_batch, entropy_from_eigenvalues, partial_trace, purity, vn_entropy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HolevoResult:
    chi: float
    commutator_norm: float
    log_base: float

    @property
    def commuting(self) -> bool:
        return self.commutator_norm <= config.commutator_tol


def commutator_norm(a: ComplexMatrix, b: ComplexMatrix) -> float:
    """‖ab − ba‖_F"""
    return float(np.linalg.norm(a.data @ b.data - b.data @ a.data))


def holevo(h: HypothesisPair, p0: float, log_base: float = None) -> HolevoResult:
    """χ = S(p0ρ0 + p1ρ1) − p0·S(ρ0) − p1·S(ρ1)"""
    log_base = config.log_base if log_base is None else log_base
    if not 0.0 <= p0 <= 1.0:
        raise ScenarioError(f"Prior p0={p0} outside [0, 1]")
    p1 = 1.0 - p0
    mixture = h.rho0 * p0 + h.rho1 * p1
    chi = vn_entropy(mixture, log_base) - p0 * vn_entropy(h.rho0, log_base) - p1 * vn_entropy(h.rho1, log_base)
    return HolevoResult(chi=float(chi), commutator_norm=commutator_norm(h.rho0, h.rho1), log_base=log_base)


def holevo_batch(expansion: LossExpansion, p0s: np.ndarray, etas: np.ndarray, log_base: float = None) -> np.ndarray:
    """χ at many (p0, η) points"""
    log_base = config.log_base if log_base is None else log_base
    p0s = np.asarray(p0s, dtype=float)
    s_mixture = entropy_from_eigenvalues(eigvalsh_batch(expansion.mixture_stack(p0s, etas)), log_base)
    s_present = entropy_from_eigenvalues(eigvalsh_batch(expansion.rho1_stack(etas)), log_base)
    s_absent = float(entropy_from_eigenvalues(eigvalsh_batch(expansion.rho0()), log_base))
    return s_mixture - p0s * s_absent - (1.0 - p0s) * s_present


def classical_mutual_information(p0: float, dist0: Sequence[float], dist1: Sequence[float], log_base: float = None) -> float:
    """I(X;K) for a binary prior and two outcome distributions over a shared alphabet"""
    log_base = config.log_base if log_base is None else log_base
    dist0 = np.asarray(dist0, dtype=float)
    dist1 = np.asarray(dist1, dtype=float)
    p1 = 1.0 - p0
    mixture = p0 * dist0 + p1 * dist1
    return float(
        entropy_from_eigenvalues(mixture, log_base)
        - p0 * entropy_from_eigenvalues(dist0, log_base)
        - p1 * entropy_from_eigenvalues(dist1, log_base)
    )


def linear_entropy(psi: PureState, traced: Iterable[int]) -> float:
    """1 − Tr(ρ²) of the state left after tracing out `traced`"""
    traced = set(int(i) for i in traced)
    kept = [i for i in range(psi.n_modes) if i not in traced]
    return 1.0 - purity(partial_trace(psi.projector(), kept))
