"""
Hypothesis construction for quantum illumination
ρ0 (target absent) and ρ1 (target present) for any mix of signal and idler modes,
each signal reflected independently with probability η and replaced in place by
noise when lost.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ScenarioError, TensorError
from core.states import PureState
from core.tensor import ComplexMatrix, embed_in_place, eigvalsh, partial_trace

logger = logging.getLogger(__name__)

DENSITY_TOL = 1e-10


def white_noise(d: int) -> ComplexMatrix:
    if d < 2:
        raise ScenarioError(f"Noise dimension must be >= 2, got {d}")
    return ComplexMatrix((d,), np.eye(d) / d)


def diagonal_noise(lambdas: Sequence[float]) -> ComplexMatrix:
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or len(lambdas) < 2:
        raise ScenarioError("Noise spectrum needs at least two eigenvalues")
    if np.any(lambdas <= 0) or abs(lambdas.sum() - 1.0) > 1e-12:
        raise ScenarioError(f"Noise eigenvalues must be positive and sum to 1, got {lambdas.tolist()}")
    return ComplexMatrix((len(lambdas),), np.diag(lambdas))


@dataclass(frozen=True, eq=False)
class Scenario:
    probe: PureState
    eta: float
    p0: float
    noise: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ScenarioError(f"Reflectivity eta={self.eta} outside [0, 1]")
        if not 0.0 <= self.p0 <= 1.0:
            raise ScenarioError(f"Prior p0={self.p0} outside [0, 1]")
        if self.noise is not None:
            object.__setattr__(self, "noise", tuple(float(x) for x in self.noise))

    @property
    def p1(self) -> float:
        return 1.0 - self.p0

    @property
    def d(self) -> int:
        return self.probe.dims[self.probe.signal_modes[0]] if self.probe.signal_modes else self.probe.dims[0]


@dataclass(frozen=True, eq=False)
class HypothesisPair:
    rho0: ComplexMatrix
    rho1: ComplexMatrix
    eta: float
    n_signals: int

    def __post_init__(self):
        if self.rho0.dims != self.rho1.dims:
            raise TensorError(f"Hypotheses live on different spaces: {self.rho0.dims} vs {self.rho1.dims}")
        for name, rho in (("rho0", self.rho0), ("rho1", self.rho1)):
            if abs(rho.trace() - 1.0) > DENSITY_TOL:
                raise TensorError(f"{name} has trace {rho.trace().real:.12f}")
            lowest = eigvalsh(rho)[-1]
            if lowest < -DENSITY_TOL:
                raise TensorError(f"{name} is not positive semidefinite (eigenvalue {lowest:.3e})")

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.rho0.dims


def _noise_for(probe: PureState, noise: Optional[Sequence[float]]) -> ComplexMatrix:
    signal_dims = {probe.dims[i] for i in probe.signal_modes}
    if len(signal_dims) != 1:
        raise ScenarioError(f"Signal modes must share one dimension, got {sorted(signal_dims)}")
    d = signal_dims.pop()
    if noise is None:
        return white_noise(d)
    if len(probe.signal_modes) != 1 or len(probe.idler_modes) > 1:
        raise ScenarioError("Non-white noise is supported for one signal and at most one idler only")
    if len(noise) != d:
        raise ScenarioError(f"Noise spectrum of length {len(noise)} does not match signal dimension {d}")
    return diagonal_noise(noise)


def loss_components(probe: PureState, noise: Optional[Sequence[float]] = None) -> List[ComplexMatrix]:
    """
    A_j = Σ over signal subsets U with |U| = j of |ψ⟩⟨ψ| with the modes in U traced
    out and replaced in place by noise. Then ρ1(η) = Σⱼ η^{k−j}(1−η)^j A_j and ρ0 = A_k.
    """
    signals = probe.signal_modes
    if not signals:
        raise ScenarioError("Probe has no signal mode - nothing to illuminate")
    rho_e = _noise_for(probe, noise)
    full = probe.projector()
    components = []
    for size in range(len(signals) + 1):
        total = None
        for lost in itertools.combinations(signals, size):
            kept = [i for i in range(probe.n_modes) if i not in lost]
            term = embed_in_place(partial_trace(full, kept), {i: rho_e for i in lost}, probe.dims)
            total = term if total is None else total + term
        components.append(total)
    logger.debug("Built %d loss components for %s probe on dims %s", len(components), probe.configuration, probe.dims)
    return components


def mix_components(components: Sequence[ComplexMatrix], eta: float) -> ComplexMatrix:
    k = len(components) - 1
    rho = components[0] * (eta ** k)
    for j in range(1, k + 1):
        rho = rho + components[j] * ((eta ** (k - j)) * ((1.0 - eta) ** j))
    return rho


def build_hypotheses(s: Scenario) -> HypothesisPair:
    components = loss_components(s.probe, s.noise)
    return HypothesisPair(
        rho0=components[-1],
        rho1=mix_components(components, s.eta),
        eta=s.eta,
        n_signals=len(components) - 1,
    )


class LossExpansion:
    """
    Stacked loss components for batched evaluation over many (p0, η) points.
    Real-valued probes keep real arithmetic so the batched eigensolver runs on real matrices.
    """

    def __init__(self, components: Sequence[ComplexMatrix]):
        stack = np.stack([c.data for c in components])
        if np.max(np.abs(stack.imag)) == 0.0:
            stack = stack.real
        self.stack = np.ascontiguousarray(stack)
        self.dims = components[0].dims
        self.components = list(components)

    @classmethod
    def from_probe(cls, probe: PureState, noise: Optional[Sequence[float]] = None) -> "LossExpansion":
        return cls(loss_components(probe, noise))

    @property
    def n_signals(self) -> int:
        return len(self.components) - 1

    @property
    def size(self) -> int:
        return self.stack.shape[-1]

    def weights(self, etas: np.ndarray) -> np.ndarray:
        """Binomial loss weights η^{k−j}(1−η)^j, shape (N, k+1)"""
        etas = np.asarray(etas, dtype=float)[:, None]
        j = np.arange(self.n_signals + 1)[None, :]
        return etas ** (self.n_signals - j) * (1.0 - etas) ** j

    def rho0(self) -> np.ndarray:
        return self.stack[-1]

    def rho1_stack(self, etas: np.ndarray) -> np.ndarray:
        return np.einsum("nj,jab->nab", self.weights(etas), self.stack)

    def decision_stack(self, p0s: np.ndarray, etas: np.ndarray) -> np.ndarray:
        """p1·ρ1(η) − p0·ρ0 for every point"""
        p0s = np.asarray(p0s, dtype=float)
        coeffs = (1.0 - p0s)[:, None] * self.weights(etas)
        coeffs[:, -1] -= p0s
        return np.einsum("nj,jab->nab", coeffs, self.stack)

    def mixture_stack(self, p0s: np.ndarray, etas: np.ndarray) -> np.ndarray:
        """p0·ρ0 + p1·ρ1(η) for every point"""
        p0s = np.asarray(p0s, dtype=float)
        coeffs = (1.0 - p0s)[:, None] * self.weights(etas)
        coeffs[:, -1] += p0s
        return np.einsum("nj,jab->nab", coeffs, self.stack)

    @cached_property
    def max_commutator(self) -> float:
        """max_j ‖[A_k, A_j]‖_F, zero iff ρ0 and ρ1(η) commute for every η"""
        rho0 = self.stack[-1]
        return max(
            (float(np.linalg.norm(rho0 @ a - a @ rho0)) for a in self.stack[:-1]),
            default=0.0,
        )


def gamma(p0: float, eta: float, k: int) -> float:
    """γ_k = p1(1−η)^k − p0"""
    return (1.0 - p0) * (1.0 - eta) ** k - p0
