"""
Probe state constructors
Product, GHZ and bipartite θ-families, the W family, block-wise maximal qudit
superpositions and the d-partite cyclic state.
"""
import itertools
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import StateError
from core.tensor import ComplexMatrix, ket_projector

NORM_TOL = 1e-12
MAX_DIM = 4
MAX_MODES = 4


class Role(str, Enum):
    SIGNAL = "S"
    IDLER = "I"


class Family(str, Enum):
    SEPARABLE = "separable"
    PAIR = "pair"
    GHZ = "ghz"
    W = "w"
    CYCLIC = "cyclic"
    BLOCKS = "blocks"
    CUSTOM = "custom"


def parse_roles(roles: Sequence) -> Tuple[Role, ...]:
    try:
        return tuple(r if isinstance(r, Role) else Role(str(r).upper()) for r in roles)
    except ValueError as e:
        raise StateError(f"Unknown mode role in {list(roles)}: {e}") from e


def parse_configuration(name: str) -> Tuple[Role, ...]:
    """'2S1I' -> (S, S, I); '3S' -> (S, S, S)"""
    match = re.fullmatch(r"(\d)S(?:(\d)I)?", name.strip().upper())
    if not match:
        raise StateError(f"Configuration '{name}' is not of the form nS or nSmI")
    signals = int(match.group(1))
    idlers = int(match.group(2) or 0)
    if signals < 1:
        raise StateError(f"Configuration '{name}' has no signal mode")
    return (Role.SIGNAL,) * signals + (Role.IDLER,) * idlers


def configuration_name(roles: Sequence[Role]) -> str:
    signals = sum(1 for r in roles if r == Role.SIGNAL)
    idlers = len(roles) - signals
    return f"{signals}S{idlers}I" if idlers else f"{signals}S"


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector on labeled qudit modes"""
    dims: Tuple[int, ...]
    roles: Tuple[Role, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        roles = parse_roles(self.roles)
        amps = np.array(self.amps, dtype=complex).ravel()
        if len(roles) != len(dims):
            raise StateError(f"{len(roles)} roles given for {len(dims)} modes")
        if amps.size != math.prod(dims):
            raise StateError(f"{amps.size} amplitudes given for dims {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"State is not normalized (norm {norm:.15f})")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "amps", amps)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def signal_modes(self) -> Tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == Role.SIGNAL)

    @property
    def idler_modes(self) -> Tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == Role.IDLER)

    @property
    def configuration(self) -> str:
        return configuration_name(self.roles)

    def projector(self) -> ComplexMatrix:
        return ket_projector(self.amps, self.dims)


@dataclass(frozen=True, eq=False)
class ProbeSpec:
    family: Family
    dims: Tuple[int, ...]
    roles: Tuple[Role, ...]
    theta: float = math.pi / 2
    weights: Optional[Tuple[float, float, float]] = None
    pair: Optional[Tuple[int, int]] = None
    blocks: Optional[Tuple[Tuple[int, ...], ...]] = None
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "roles", parse_roles(self.roles))
        if len(self.dims) != len(self.roles):
            raise StateError(f"{len(self.roles)} roles given for {len(self.dims)} modes")
        if self.family == Family.CYCLIC and len(set(self.dims)) == 1 and len(self.dims) != self.dims[0]:
            raise StateError(f"Cyclic state needs as many modes as levels, got {len(self.dims)} modes of dimension {self.dims[0]}")
        if self.family == Family.W and len(self.dims) != 3:
            raise StateError("W state is defined for three modes only")

    @property
    def d(self) -> int:
        if len(set(self.dims)) != 1:
            raise StateError(f"Family {self.family.value} needs equal mode dimensions, got {self.dims}")
        return self.dims[0]


def _basis_index(digits: Sequence[int], dims: Sequence[int]) -> int:
    return int(np.ravel_multi_index(tuple(digits), tuple(dims)))


def _default_roles(n: int) -> Tuple[Role, ...]:
    return (Role.SIGNAL,) * n


def build_blocks(d: int, n: int, blocks: Sequence[Sequence[int]], roles: Sequence[Role] = None) -> PureState:
    """
    Product of uniform maximal superpositions (1/√d)Σₖ|k…k⟩, one per block of modes;
    modes outside every block are |0⟩.
    """
    if not 2 <= d <= MAX_DIM:
        raise StateError(f"Mode dimension {d} outside 2..{MAX_DIM}")
    if not 1 <= n <= MAX_MODES:
        raise StateError(f"Mode count {n} outside 1..{MAX_MODES}")
    blocks = [tuple(int(i) for i in block) for block in blocks]
    seen = set()
    for block in blocks:
        if len(block) < 2:
            raise StateError(f"Block {block} needs at least two modes")
        for i in block:
            if not 0 <= i < n:
                raise StateError(f"Mode index {i} out of range for {n} modes")
            if i in seen:
                raise StateError(f"Mode {i} appears in more than one block")
            seen.add(i)
    dims = (d,) * n
    amps = np.zeros(d ** n, dtype=complex)
    amplitude = d ** (-len(blocks) / 2)
    for levels in itertools.product(range(d), repeat=len(blocks)):
        digits = [0] * n
        for block, k in zip(blocks, levels):
            for i in block:
                digits[i] = k
        amps[_basis_index(digits, dims)] = amplitude
    return PureState(dims, tuple(roles) if roles is not None else _default_roles(n), amps)


def build_maximal_qudit(family: Family, d: int, n: int, pair: Optional[Tuple[int, int]] = None,
                        roles: Sequence[Role] = None) -> PureState:
    family = Family(family)
    if not 2 <= d <= MAX_DIM or not 2 <= n <= MAX_MODES:
        raise StateError(f"Maximal qudit state needs 2 <= d <= {MAX_DIM} and 2 <= n <= {MAX_MODES}, got d={d}, n={n}")
    if family == Family.GHZ:
        return build_blocks(d, n, [tuple(range(n))], roles)
    if family == Family.PAIR:
        _check_pair(pair, n)
        return build_blocks(d, n, [tuple(pair)], roles)
    raise StateError(f"No maximal qudit construction for family {family.value}")


def _check_pair(pair, n: int):
    if pair is None or len(pair) != 2:
        raise StateError(f"Bipartite pair must name two modes, got {pair}")
    i, j = pair
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise StateError(f"Invalid bipartite pair {pair} for {n} modes")


def build_theta_family(spec: ProbeSpec) -> PureState:
    """cos(θ/2)|0…0⟩ + sin(θ/2)|…1…⟩ over all modes (GHZ) or a chosen pair; separable ignores θ"""
    n = len(spec.dims)
    if spec.family == Family.SEPARABLE:
        amps = np.zeros(math.prod(spec.dims), dtype=complex)
        amps[0] = 1.0
        return PureState(spec.dims, spec.roles, amps)
    if spec.family not in (Family.GHZ, Family.PAIR):
        raise StateError(f"Family {spec.family.value} is not a θ-family")
    if spec.family == Family.PAIR:
        _check_pair(spec.pair, n)
    if spec.d != 2:
        if not math.isclose(spec.theta, math.pi / 2, abs_tol=1e-12):
            raise StateError(f"θ = {spec.theta} is only defined for qubit modes")
        return build_maximal_qudit(spec.family, spec.d, n, spec.pair, spec.roles)
    excited = list(range(n)) if spec.family == Family.GHZ else list(spec.pair)
    digits = [1 if i in excited else 0 for i in range(n)]
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = math.cos(spec.theta / 2)
    amps[_basis_index(digits, spec.dims)] = math.sin(spec.theta / 2)
    return PureState(spec.dims, spec.roles, amps)


def build_w(weights: Sequence[float], roles: Sequence[Role] = (Role.SIGNAL, Role.SIGNAL, Role.IDLER)) -> PureState:
    """x₁|001⟩ + x₂|010⟩ + x₃|100⟩"""
    x1, x2, x3 = (float(x) for x in weights)
    if abs(x1 ** 2 + x2 ** 2 + x3 ** 2 - 1.0) > NORM_TOL:
        raise StateError(f"W weights {tuple(weights)} are not normalized")
    amps = np.zeros(8, dtype=complex)
    amps[0b001] = x1
    amps[0b010] = x2
    amps[0b100] = x3
    return PureState((2, 2, 2), tuple(roles), amps)


def build_cyclic(d: int, roles: Sequence[Role] = None) -> PureState:
    """(1/√d!) Σ_σ |σ(0)…σ(d−1)⟩, the expansion of the permanent of the creation-operator matrix"""
    if not 2 <= d <= MAX_DIM:
        raise StateError(f"Cyclic state dimension {d} outside 2..{MAX_DIM}")
    dims = (d,) * d
    amps = np.zeros(d ** d, dtype=complex)
    amplitude = 1.0 / math.sqrt(math.factorial(d))
    for sigma in itertools.permutations(range(d)):
        amps[_basis_index(sigma, dims)] = amplitude
    return PureState(dims, tuple(roles) if roles is not None else _default_roles(d), amps)


def build_noise_matched_pair(lambdas: Sequence[float]) -> PureState:
    """Σᵢ c_i|ii⟩ with c_i ∝ 1/√λᵢ, the signal-idler probe attaining λ_h under diagonal noise"""
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas <= 0):
        raise StateError("Noise eigenvalues must be positive")
    d = len(lambdas)
    harmonic = 1.0 / np.sum(1.0 / lambdas)
    amps = np.zeros(d * d, dtype=complex)
    for i, lam in enumerate(lambdas):
        amps[i * d + i] = math.sqrt(harmonic / lam)
    return PureState((d, d), (Role.SIGNAL, Role.IDLER), amps)


def build_noise_matched_signal(lambdas: Sequence[float]) -> PureState:
    """Single signal mode prepared in the least-noisy level |i_min⟩"""
    lambdas = np.asarray(lambdas, dtype=float)
    amps = np.zeros(len(lambdas), dtype=complex)
    amps[int(np.argmin(lambdas))] = 1.0
    return PureState((len(lambdas),), (Role.SIGNAL,), amps)


def build_custom(spec: ProbeSpec) -> PureState:
    if spec.amplitudes is None:
        raise StateError("Custom probe needs an amplitude vector")
    return PureState(spec.dims, spec.roles, spec.amplitudes)


def with_relative_phase(psi: PureState, phase: float) -> PureState:
    """Multiply every amplitude except the |0…0⟩ one by e^{iφ}"""
    amps = np.array(psi.amps)
    amps[1:] *= np.exp(1j * phase)
    return PureState(psi.dims, psi.roles, amps)


def build_probe(spec: ProbeSpec) -> PureState:
    if spec.family in (Family.SEPARABLE, Family.GHZ, Family.PAIR):
        return build_theta_family(spec)
    if spec.family == Family.W:
        if set(spec.dims) != {2}:
            raise StateError("W state is defined for qubit modes only")
        weights = spec.weights if spec.weights is not None else (1 / math.sqrt(3),) * 3
        return build_w(weights, spec.roles)
    if spec.family == Family.CYCLIC:
        return build_cyclic(spec.d, spec.roles)
    if spec.family == Family.BLOCKS:
        if not spec.blocks:
            raise StateError("Block probe needs at least one block")
        return build_blocks(spec.d, len(spec.dims), spec.blocks, spec.roles)
    return build_custom(spec)
