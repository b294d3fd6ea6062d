"""
Helstrom bound
Minimum single-shot error for deciding target absent/present, the optimal projector
and the region tag read off the spectrum of the decision operator p1·ρ1 − p0·ρ0.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from config import config
from core.errors import RegionError, ScenarioError
from core.scenario import HypothesisPair, LossExpansion, gamma
from core.tensor import ComplexMatrix, eigh, eigvalsh, eigvalsh_batch

logger = logging.getLogger(__name__)


class RegionKind(str, Enum):
    GUESS_PRESENT = "NonIlluminableGuessPresent"
    GUESS_ABSENT = "NonIlluminableGuessAbsent"
    ILLUMINABLE = "Illuminable"


@dataclass(frozen=True)
class RegionTag:
    kind: RegionKind
    rank: Optional[int] = None

    def __str__(self) -> str:
        if self.kind == RegionKind.ILLUMINABLE:
            return f"{self.kind.value}({self.rank})"
        return self.kind.value

    @property
    def illuminable(self) -> bool:
        return self.kind == RegionKind.ILLUMINABLE


@dataclass(frozen=True, eq=False)
class HelstromOutcome:
    p_err: float
    pi1: ComplexMatrix
    spectrum: np.ndarray
    region: RegionTag

    @property
    def rank(self) -> int:
        return int(round(np.real(np.trace(self.pi1.data))))

    def to_dict(self) -> dict:
        return {
            "p_err": self.p_err,
            "region": str(self.region),
            "rank": self.rank,
            "spectrum": [float(x) for x in self.spectrum],
        }


def _check_prior(p0: float):
    if not 0.0 <= p0 <= 1.0:
        raise ScenarioError(f"Prior p0={p0} outside [0, 1]")


def decision_operator(h: HypothesisPair, p0: float) -> ComplexMatrix:
    _check_prior(p0)
    return h.rho1 * (1.0 - p0) - h.rho0 * p0


def tag_from_rank(rank: int, full_rank: int) -> RegionTag:
    """Zero rank guesses absent, a Π1 covering the whole support guesses present"""
    if rank == 0:
        return RegionTag(RegionKind.GUESS_ABSENT)
    if rank >= full_rank:
        return RegionTag(RegionKind.GUESS_PRESENT)
    return RegionTag(RegionKind.ILLUMINABLE, rank)


def classify_spectrum(eigenvalues: np.ndarray, tie_tol: float = None, full_rank: int = None) -> RegionTag:
    """
    Region tag from the rank of the positive part. full_rank is the dimension of the
    hypotheses' joint support and defaults to the whole space.
    """
    tie_tol = config.tie_tol if tie_tol is None else tie_tol
    full_rank = len(eigenvalues) if full_rank is None else full_rank
    return tag_from_rank(int(np.sum(eigenvalues > tie_tol)), full_rank)


def support_rank(h: HypothesisPair, tie_tol: float = None) -> int:
    """Dimension of supp(ρ0 + ρ1); Π1 outside it never changes p_err"""
    tie_tol = config.tie_tol if tie_tol is None else tie_tol
    return int(np.sum(eigvalsh(h.rho0 + h.rho1) > tie_tol))


def helstrom_bound(h: HypothesisPair, p0: float, tie_tol: float = None) -> HelstromOutcome:
    tie_tol = config.tie_tol if tie_tol is None else tie_tol
    spectrum = eigh(decision_operator(h, p0))
    p_err = 0.5 * (1.0 - float(np.sum(np.abs(spectrum.eigenvalues))))
    pi1 = ComplexMatrix(h.dims, spectrum.support_projector(tie_tol))
    rank = int(round(np.real(np.trace(pi1.data))))
    region = tag_from_rank(rank, support_rank(h, tie_tol))
    return HelstromOutcome(max(p_err, 0.0), pi1, spectrum.eigenvalues, region)


def error_probability(pi1: ComplexMatrix, h: HypothesisPair, p0: float) -> float:
    """p0·Tr(Π1ρ0) + p1·Tr((I − Π1)ρ1) for any projector Π1"""
    _check_prior(p0)
    false_alarm = np.real(np.trace(pi1.data @ h.rho0.data))
    miss = 1.0 - np.real(np.trace(pi1.data @ h.rho1.data))
    return float(p0 * false_alarm + (1.0 - p0) * miss)


def omega_operator(h: HypothesisPair, p0: float) -> Tuple[ComplexMatrix, float]:
    """Ω = (p1ρ1 − p0ρ0)/γ with γ = p1(1−η)^k − p0, defined only for γ < 0"""
    g = gamma(p0, h.eta, h.n_signals)
    if g >= 0:
        raise RegionError(
            f"γ = {g:.3e} >= 0 at p0={p0}, eta={h.eta}: Ω is undefined",
            region=RegionKind.GUESS_PRESENT.value,
        )
    return decision_operator(h, p0) * (1.0 / g), g


def helstrom_batch(expansion: LossExpansion, p0s: np.ndarray, etas: np.ndarray) -> np.ndarray:
    """Helstrom bound at many (p0, η) points"""
    eigenvalues = eigvalsh_batch(expansion.decision_stack(p0s, etas))
    return 0.5 * (1.0 - np.sum(np.abs(eigenvalues), axis=-1))
