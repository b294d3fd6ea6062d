"""
Closed-form Helstrom bounds
Piecewise solutions over (p0, η) for the two-qudit benchmark and for the three-qubit
probes with known spectra, with their optimal projectors. Used as oracles for the
numeric path and for region maps.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import config
from analysis.helstrom import RegionKind, RegionTag, helstrom_bound, tag_from_rank
from analysis.infotheory import linear_entropy
from core.errors import ConfigError, RegionError
from core.scenario import Scenario, build_hypotheses
from core.states import Family, ProbeSpec, PureState, Role, build_probe, build_w
from core.tensor import ComplexMatrix

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# three-qubit basis labels, first mode most significant
THREE_QUBIT_LABELS = tuple(format(i, "03b") for i in range(8))
# supp ρ0 when the last idler mode is left in |0⟩
IDLER_GROUND = tuple(label for label in THREE_QUBIT_LABELS if label[-1] == "0")


class ClosedFormState(str, Enum):
    S_S_I = "S-S-I"
    GHZ = "GHZ"
    W = "W"
    S_SI = "S-SI"
    SS_I = "SS-I"
    SI_I = "SI-I"
    S_S_S = "S-S-S"


TWO_SIGNAL_ONE_IDLER = (
    ClosedFormState.S_S_I,
    ClosedFormState.GHZ,
    ClosedFormState.W,
    ClosedFormState.S_SI,
    ClosedFormState.SS_I,
)


@dataclass(frozen=True)
class RegionParameters:
    p0: float
    eta: float
    gamma1: float
    gamma2: float
    gamma3: float
    alpha1: float
    alpha2: float

    @classmethod
    def from_point(cls, p0: float, eta: float) -> "RegionParameters":
        p1 = 1.0 - p0
        gamma1 = p1 * (1.0 - eta) ** 2 - p0
        if gamma1 < 0:
            alpha1 = p1 * eta * (1.0 - eta) / (-gamma1)
            alpha2 = p1 * eta ** 2 / (-gamma1)
        else:
            alpha1 = alpha2 = math.nan
        return cls(
            p0=p0,
            eta=eta,
            gamma1=gamma1,
            gamma2=p1 * (1.0 - eta) - p0,
            gamma3=p1 * (1.0 - eta) ** 3 - p0,
            alpha1=alpha1,
            alpha2=alpha2,
        )

    @property
    def p1(self) -> float:
        return 1.0 - self.p0


@dataclass(frozen=True)
class NoiseSpectrum:
    lambdas: Tuple[float, ...]

    def __post_init__(self):
        lambdas = tuple(float(x) for x in self.lambdas)
        if len(lambdas) < 2 or any(x <= 0 for x in lambdas) or abs(sum(lambdas) - 1.0) > 1e-12:
            raise ConfigError(f"Noise spectrum must be positive and sum to 1, got {list(lambdas)}")
        object.__setattr__(self, "lambdas", lambdas)

    @classmethod
    def white(cls, d: int) -> "NoiseSpectrum":
        return cls((1.0 / d,) * d)

    @property
    def lambda_h(self) -> float:
        return 1.0 / sum(1.0 / x for x in self.lambdas)

    @property
    def lambda_min(self) -> float:
        return min(self.lambdas)


def _two_qudit(p0: float, eta: float, lam: float) -> float:
    p1 = 1.0 - p0
    gamma = p1 * (1.0 - eta) - p0
    if gamma >= 0:
        return p0
    if p1 * eta / abs(gamma) >= lam:
        return p0 + gamma * (1.0 - lam)
    return p1


def hb_two_qudit_qi(p0: float, eta: float, noise: NoiseSpectrum) -> float:
    """Signal-idler probe matched to the noise: the harmonic eigenvalue λ_h sets the bound"""
    return _two_qudit(p0, eta, noise.lambda_h)


def hb_two_qudit_ci(p0: float, eta: float, noise: NoiseSpectrum) -> float:
    """Best unentangled single-mode probe: the smallest noise eigenvalue sets the bound"""
    return _two_qudit(p0, eta, noise.lambda_min)


# Region descriptions ------------------------------------------------------

Margin = Callable[[RegionParameters], float]
AT_LEAST = "ge"
BELOW = "lt"


@dataclass(frozen=True)
class Region:
    region_id: int
    conditions: Tuple[Tuple[Margin, str], ...]
    p_err: Callable[[RegionParameters], float]
    povm: str
    rank: Optional[int]
    vectors: Optional[Callable[[RegionParameters], List[np.ndarray]]] = None

    def matches(self, g: RegionParameters, tol: float = 0.0) -> bool:
        for margin, kind in self.conditions:
            value = margin(g)
            if math.isnan(value):
                return False
            if kind == AT_LEAST and not value >= -tol:
                return False
            if kind == BELOW and not value < tol:
                return False
        return True


@dataclass(frozen=True)
class AnalyticOutcome:
    p_err: float
    region_id: Optional[int]
    povm: str
    matched: Tuple[int, ...]
    ambiguous: bool = False


@dataclass(frozen=True)
class PiecewiseHB:
    state_id: ClosedFormState
    configuration: str
    regions: Tuple[Region, ...] = field(default_factory=tuple)
    support: Tuple[str, ...] = THREE_QUBIT_LABELS

    @property
    def full_rank(self) -> int:
        return len(self.support)

    def region(self, region_id: int) -> Region:
        for region in self.regions:
            if region.region_id == region_id:
                return region
        raise ConfigError(f"{self.state_id.value} has no region {region_id}")

    def evaluate(self, p0: float, eta: float, boundary_tol: float = None) -> AnalyticOutcome:
        """
        Closed form of the matching region. Points within boundary_tol of a boundary take
        the lowest-numbered matching region; no match, or several strict matches, is flagged.
        """
        boundary_tol = config.boundary_tol if boundary_tol is None else boundary_tol
        g = RegionParameters.from_point(p0, eta)
        strict = tuple(r.region_id for r in self.regions if r.matches(g))
        relaxed = [r for r in self.regions if r.matches(g, boundary_tol)]
        if not relaxed:
            logger.warning("No region of %s matches p0=%s eta=%s", self.state_id.value, p0, eta)
            return AnalyticOutcome(math.nan, None, "", strict, ambiguous=True)
        chosen = min(relaxed, key=lambda r: r.region_id)
        return AnalyticOutcome(chosen.p_err(g), chosen.region_id, chosen.povm, strict, ambiguous=len(strict) != 1)


def _gamma1_nonneg() -> Tuple[Margin, str]:
    return (lambda g: g.gamma1, AT_LEAST)


def _gamma1_neg() -> Tuple[Margin, str]:
    return (lambda g: g.gamma1, BELOW)


def _omega_error(total: Callable[[RegionParameters], float]) -> Callable[[RegionParameters], float]:
    """½(1 − (−γ1)·Σ|ω|) for a region where Σ|ω| = total(g)"""
    return lambda g: 0.5 * (1.0 - (-g.gamma1) * total(g))


def _guess_regions(gamma_margin: Callable[[RegionParameters], float],
                   absent: Sequence[Tuple[Margin, str]],
                   present_povm: str = "Π1 = I") -> Tuple[Region, Region]:
    present = Region(1, ((gamma_margin, AT_LEAST),), lambda g: g.p0, present_povm, None)
    guess_absent = Region(2, ((gamma_margin, BELOW),) + tuple(absent), lambda g: g.p1, "Π1 = 0", 0)
    return present, guess_absent


# |abc⟩ with the first mode most significant
def _ket(label: str) -> np.ndarray:
    vector = np.zeros(2 ** len(label))
    vector[int(label, 2)] = 1.0
    return vector


def _kets(*labels: str) -> Callable[[RegionParameters], List[np.ndarray]]:
    return lambda g: [_ket(label) for label in labels]


def _sum(*labels: str, signs: Sequence[float] = None) -> np.ndarray:
    signs = signs or [1.0] * len(labels)
    vector = sum(s * _ket(label) for s, label in zip(signs, labels))
    return vector / np.linalg.norm(vector)


# Three-qubit Ω spectra (2S1I) ---------------------------------------------

def _w_radicals(g: RegionParameters) -> Tuple[float, float]:
    a1, a2 = g.alpha1, g.alpha2
    root_a = math.sqrt(1.0 - 4.0 * a1 + 36.0 * a1 ** 2)
    delta = 1.0 + 32.0 * a1 ** 2 - 8.0 * a2 + 128.0 * a1 * a2 + 144.0 * a2 ** 2
    return root_a, math.sqrt(max(delta, 0.0))


def omega_eigenvalues(state_id: ClosedFormState, g: RegionParameters) -> np.ndarray:
    """Spectrum of Ω = (p1ρ1 − p0ρ0)/γ1 for the 2S1I closed-form probes, descending"""
    a1, a2 = g.alpha1, g.alpha2
    if math.isnan(a1):
        raise RegionError(f"γ1 = {g.gamma1:.3e} >= 0: Ω is undefined", region=RegionKind.GUESS_PRESENT.value)
    if state_id == ClosedFormState.S_S_I:
        values = [0, 0, 0, 0, 0.25, 0.25 - a1 / 2, 0.25 - a1 / 2, 0.25 - a1 - a2]
    elif state_id == ClosedFormState.GHZ:
        values = [1 / 8, 1 / 8] + [1 / 8 - a1 / 4] * 4 + [1 / 8 - a1 / 2, 1 / 8 - a1 / 2 - a2]
    elif state_id == ClosedFormState.S_SI:
        values = [1 / 8] * 3 + [1 / 8 - a1 / 4] * 3 + [1 / 8 - a1 / 2, 1 / 8 - 3 * a1 / 4 - a2]
    elif state_id == ClosedFormState.SS_I:
        values = [0] * 4 + [0.25 - a1 / 2] * 3 + [0.25 - a1 / 2 - a2]
    elif state_id == ClosedFormState.W:
        root_a, root_d = _w_radicals(g)
        values = [
            1 / 12,
            1 / 12 - a1 / 6,
            1 / 6 - a1 / 3,
            1 / 6 - a1 / 3,
            (3 - 6 * a1 + root_a) / 24,
            (3 - 6 * a1 - root_a) / 24,
            (3 - 8 * a1 - 12 * a2 + root_d) / 24,
            (3 - 8 * a1 - 12 * a2 - root_d) / 24,
        ]
    else:
        raise ConfigError(f"No Ω spectrum for {state_id.value}")
    return np.sort(np.asarray(values, dtype=float))[::-1]


def decision_eigenvalues(state_id: ClosedFormState, g: RegionParameters) -> np.ndarray:
    """Spectrum of p1ρ1 − p0ρ0 for the 1S2I SI-I and 3S S-S-S probes, descending"""
    p1, eta = g.p1, g.eta
    if state_id == ClosedFormState.SI_I:
        values = [p1 * eta + g.gamma2 / 4] + [g.gamma2 / 4] * 3 + [0.0] * 4
    elif state_id == ClosedFormState.S_S_S:
        values = []
        for excitations, multiplicity in zip(range(4), (1, 3, 3, 1)):
            value = (p1 * (1 - eta) ** excitations * (1 + eta) ** (3 - excitations) - g.p0) / 8
            values += [value] * multiplicity
    else:
        raise ConfigError(f"No decision spectrum for {state_id.value}")
    return np.sort(np.asarray(values, dtype=float))[::-1]


def _w_vectors(g: RegionParameters) -> Dict[str, np.ndarray]:
    """
    Eigenvectors of the W-probe Ω. phi5 belongs to (3−8α1−12α2−√Δ)/24 and phi6 to the
    +√Δ root, so phi5 enters Π1 before phi6 as α grows.
    """
    a1, a2 = g.alpha1, g.alpha2
    root_a, root_d = _w_radicals(g)
    x4 = -1.0 + 2.0 * a1 + root_a
    phi4 = (4 * a1 * (_ket("011") + _ket("101")) + x4 * _ket("110"))
    y5 = 1.0 - 4.0 * a2 + root_d
    y6 = 1.0 - 4.0 * a2 - root_d
    pair = _ket("010") + _ket("100")
    phi5 = y5 * _ket("001") + 4 * (a1 + 2 * a2) * pair
    phi6 = y6 * _ket("001") + 4 * (a1 + 2 * a2) * pair
    return {
        "phi1": _sum("011", "101", signs=[1.0, -1.0]),
        "phi2": _sum("010", "100", signs=[1.0, -1.0]),
        "phi3": _ket("000"),
        "phi4": phi4 / np.linalg.norm(phi4),
        "phi5": phi5 / np.linalg.norm(phi5),
        "phi6": phi6 / np.linalg.norm(phi6),
    }


def _w_pick(*names: str) -> Callable[[RegionParameters], List[np.ndarray]]:
    return lambda g: [_w_vectors(g)[name] for name in names]


def _build_two_signal_one_idler() -> Dict[ClosedFormState, PiecewiseHB]:
    tables = {}

    # S-S-I: |000⟩
    e_mid = lambda g: 0.25 - g.alpha1 / 2
    e_low = lambda g: 0.25 - g.alpha1 - g.alpha2
    present, absent = _guess_regions(lambda g: g.gamma1, [(e_low, AT_LEAST)], "Π1 = I ⊗ |0⟩⟨0|")
    tables[ClosedFormState.S_S_I] = PiecewiseHB(ClosedFormState.S_S_I, "2S1I", (
        present,
        absent,
        Region(3, (_gamma1_neg(), (e_mid, BELOW)),
               _omega_error(lambda g: 2 * g.alpha1 + g.alpha2 - 0.5),
               "Π1 = |000⟩⟨000| + |010⟩⟨010| + |100⟩⟨100|", 3, _kets("000", "010", "100")),
        Region(4, (_gamma1_neg(), (e_mid, AT_LEAST), (e_low, BELOW)),
               _omega_error(lambda g: g.alpha2 + 0.5),
               "Π1 = |000⟩⟨000|", 1, _kets("000")),
    ), support=IDLER_GROUND)

    # GHZ: (|000⟩ + |111⟩)/√2
    e_a = lambda g: 1 / 8 - g.alpha1 / 4
    e_b = lambda g: 1 / 8 - g.alpha1 / 2
    e_c = lambda g: 1 / 8 - g.alpha1 / 2 - g.alpha2
    ghz = lambda g: _sum("000", "111")
    phi1 = lambda g: _sum("000", "111", signs=[1.0, -1.0])
    present, absent = _guess_regions(lambda g: g.gamma1, [(e_c, AT_LEAST)])
    tables[ClosedFormState.GHZ] = PiecewiseHB(ClosedFormState.GHZ, "2S1I", (
        present,
        absent,
        Region(3, (_gamma1_neg(), (e_a, BELOW)),
               _omega_error(lambda g: 2 * g.alpha1 + g.alpha2 - 0.5),
               "Π1 = |GHZ⟩⟨GHZ| + |φ1⟩⟨φ1| + |010⟩⟨010| + |011⟩⟨011| + |100⟩⟨100| + |101⟩⟨101|", 6,
               lambda g: [ghz(g), phi1(g)] + _kets("010", "011", "100", "101")(g)),
        Region(4, (_gamma1_neg(), (e_a, AT_LEAST), (e_b, BELOW)),
               _omega_error(lambda g: g.alpha2 + 0.5),
               "Π1 = |GHZ⟩⟨GHZ| + |φ1⟩⟨φ1|, φ1 = (|000⟩ − |111⟩)/√2", 2,
               lambda g: [ghz(g), phi1(g)]),
        Region(5, (_gamma1_neg(), (e_b, AT_LEAST), (e_c, BELOW)),
               _omega_error(lambda g: -g.alpha1 + g.alpha2 + 0.75),
               "Π1 = |GHZ⟩⟨GHZ|", 1, lambda g: [ghz(g)]),
    ))

    # S-SI: (|000⟩ + |011⟩)/√2
    e_a = lambda g: 1 / 8 - g.alpha1 / 4
    e_b = lambda g: 1 / 8 - g.alpha1 / 2
    e_c = lambda g: 1 / 8 - 3 * g.alpha1 / 4 - g.alpha2
    s_si = lambda g: _sum("000", "011")
    present, absent = _guess_regions(lambda g: g.gamma1, [(e_c, AT_LEAST)])
    tables[ClosedFormState.S_SI] = PiecewiseHB(ClosedFormState.S_SI, "2S1I", (
        present,
        absent,
        Region(3, (_gamma1_neg(), (e_a, BELOW)),
               _omega_error(lambda g: 2 * g.alpha1 + g.alpha2 - 0.25),
               "Π1 = |S-SI⟩⟨S-SI| + |φ1⟩⟨φ1| + |φ2⟩⟨φ2| + |001⟩⟨001| + |010⟩⟨010|", 5,
               lambda g: [s_si(g), _sum("100", "111"), _sum("000", "011", signs=[1.0, -1.0])]
               + _kets("001", "010")(g)),
        Region(4, (_gamma1_neg(), (e_a, AT_LEAST), (e_b, BELOW)),
               _omega_error(lambda g: g.alpha1 / 2 + g.alpha2 + 0.5),
               "Π1 = |S-SI⟩⟨S-SI| + |φ1⟩⟨φ1|, φ1 = (|100⟩ + |111⟩)/√2", 2,
               lambda g: [s_si(g), _sum("100", "111")]),
        Region(5, (_gamma1_neg(), (e_b, AT_LEAST), (e_c, BELOW)),
               _omega_error(lambda g: -g.alpha1 / 2 + g.alpha2 + 0.75),
               "Π1 = |S-SI⟩⟨S-SI|", 1, lambda g: [s_si(g)]),
    ))

    # SS-I: (|000⟩ + |110⟩)/√2
    e_a = lambda g: 0.25 - g.alpha1 / 2
    e_b = lambda g: 0.25 - g.alpha1 / 2 - g.alpha2
    ss_i = lambda g: _sum("000", "110")
    present, absent = _guess_regions(lambda g: g.gamma1, [(e_b, AT_LEAST)], "Π1 = I ⊗ |0⟩⟨0|")
    tables[ClosedFormState.SS_I] = PiecewiseHB(ClosedFormState.SS_I, "2S1I", (
        present,
        absent,
        Region(3, (_gamma1_neg(), (e_a, BELOW)),
               _omega_error(lambda g: -1 + 2 * g.alpha1 + g.alpha2),
               "Π1 = |SS-I⟩⟨SS-I| + |φ1⟩⟨φ1| + |010⟩⟨010| + |100⟩⟨100|", 4,
               lambda g: [ss_i(g), _sum("000", "110", signs=[1.0, -1.0])] + _kets("010", "100")(g)),
        Region(4, (_gamma1_neg(), (e_a, AT_LEAST), (e_b, BELOW)),
               _omega_error(lambda g: -g.alpha1 + g.alpha2 + 0.5),
               "Π1 = |SS-I⟩⟨SS-I|", 1, lambda g: [ss_i(g)]),
    ), support=IDLER_GROUND)

    # W: (|001⟩ + |010⟩ + |100⟩)/√3, classified along the sign chain of its spectrum
    w_a = lambda g: 1 / 6 - g.alpha1 / 3
    w_b = lambda g: (3 - 6 * g.alpha1 - _w_radicals(g)[0]) / 24
    w_plus = lambda g: (3 - 8 * g.alpha1 - 12 * g.alpha2 + _w_radicals(g)[1]) / 24
    w_minus = lambda g: (3 - 8 * g.alpha1 - 12 * g.alpha2 - _w_radicals(g)[1]) / 24
    present, absent = _guess_regions(lambda g: g.gamma1, [(w_minus, AT_LEAST)])
    tables[ClosedFormState.W] = PiecewiseHB(ClosedFormState.W, "2S1I", (
        present,
        absent,
        Region(3, (_gamma1_neg(), (w_plus, BELOW)),
               _omega_error(lambda g: (-7 + 18 * g.alpha1 + 12 * g.alpha2 + _w_radicals(g)[0]) / 12),
               "Π1 = |φ1⟩⟨φ1| + … + |φ6(η,p0)⟩⟨φ6(η,p0)|", 6,
               _w_pick("phi1", "phi2", "phi3", "phi4", "phi5", "phi6")),
        Region(4, (_gamma1_neg(), (w_plus, AT_LEAST), (w_a, BELOW)),
               _omega_error(lambda g: (-4 + 10 * g.alpha1 + sum(_w_radicals(g))) / 12),
               "Π1 = |φ1⟩⟨φ1| + |φ2⟩⟨φ2| + |φ3⟩⟨φ3| + |φ4⟩⟨φ4| + |φ5⟩⟨φ5|", 5,
               _w_pick("phi1", "phi2", "phi3", "phi4", "phi5")),
        Region(5, (_gamma1_neg(), (w_a, AT_LEAST), (w_b, BELOW)),
               _omega_error(lambda g: (6 - 10 * g.alpha1 + sum(_w_radicals(g))) / 12),
               "Π1 = |φ4(η,p0)⟩⟨φ4(η,p0)| + |φ5(η,p0)⟩⟨φ5(η,p0)|", 2,
               _w_pick("phi4", "phi5")),
        Region(6, (_gamma1_neg(), (w_b, AT_LEAST), (w_minus, BELOW)),
               _omega_error(lambda g: (9 - 16 * g.alpha1 + _w_radicals(g)[1]) / 12),
               "Π1 = |φ5(η,p0)⟩⟨φ5(η,p0)|", 1, _w_pick("phi5")),
    ))
    return tables


def _build_single_signal() -> PiecewiseHB:
    # SI-I: Bell pair on (S, I1) with I2 in |0⟩
    boundary = lambda g: g.p0 - (1.0 - 1.0 / (3.0 * g.eta + 2.0))
    si_i = lambda g: [_sum("000", "110")]
    return PiecewiseHB(ClosedFormState.SI_I, "1S2I", (
        Region(1, ((lambda g: g.gamma2, AT_LEAST),), lambda g: g.p0, "Π1 = I ⊗ |0⟩⟨0|", None),
        Region(2, ((lambda g: g.gamma2, BELOW), (boundary, AT_LEAST)), lambda g: g.p1, "Π1 = 0", 0),
        Region(3, ((lambda g: g.gamma2, BELOW), (boundary, BELOW)),
               lambda g: g.p0 + 0.75 * g.gamma2, "Π1 = |SI-I⟩⟨SI-I|", 1, si_i),
    ), support=IDLER_GROUND)


def _build_three_signal() -> PiecewiseHB:
    # S-S-S: |000⟩, every loss pattern keeps the spectrum diagonal
    to_absent = lambda g: g.p0 - (1.0 - 1.0 / (g.eta ** 3 + 3.0 * g.eta ** 2 + 3.0 * g.eta + 2.0))
    to_rank4 = lambda g: g.p0 - (1.0 - 1.0 / (g.eta ** 3 - g.eta ** 2 - g.eta + 2.0))
    to_rank1 = lambda g: g.p0 - (1.0 - 1.0 / (-g.eta ** 3 - g.eta ** 2 + g.eta + 2.0))
    below_gamma3 = (lambda g: g.gamma3, BELOW)
    return PiecewiseHB(ClosedFormState.S_S_S, "3S", (
        Region(1, ((lambda g: g.gamma3, AT_LEAST),), lambda g: g.p0, "Π1 = I", None),
        Region(2, (below_gamma3, (to_absent, AT_LEAST)), lambda g: g.p1, "Π1 = 0", 0),
        Region(3, (below_gamma3, (to_rank4, BELOW)),
               lambda g: g.p0 + g.gamma3 / 8,
               "Π1 = |ψ⟩⟨ψ| + I − |000⟩⟨000| − |111⟩⟨111|", 7,
               _kets("000", "001", "010", "011", "100", "101", "110")),
        Region(4, (below_gamma3, (to_rank4, AT_LEAST), (to_rank1, BELOW)),
               lambda g: 0.25 * (2.0 - 3.0 * g.p1 * g.eta + g.p1 * g.eta ** 3),
               "Π1 = |000⟩⟨000| + |001⟩⟨001| + |010⟩⟨010| + |100⟩⟨100|", 4,
               _kets("000", "001", "010", "100")),
        Region(5, (below_gamma3, (to_rank1, AT_LEAST), (to_absent, BELOW)),
               lambda g: (1.0 + g.p1 * (6.0 - 3.0 * g.eta - 3.0 * g.eta ** 2 - g.eta ** 3)) / 8.0,
               "Π1 = |000⟩⟨000|", 1, _kets("000")),
    ))


PIECEWISE: Dict[ClosedFormState, PiecewiseHB] = {
    **_build_two_signal_one_idler(),
    ClosedFormState.SI_I: _build_single_signal(),
    ClosedFormState.S_S_S: _build_three_signal(),
}


def piecewise(state_id) -> PiecewiseHB:
    try:
        return PIECEWISE[ClosedFormState(state_id)]
    except ValueError as e:
        raise ConfigError(f"No closed form for state '{state_id}'") from e


def hb_2s1i(state_id, p0: float, eta: float) -> AnalyticOutcome:
    state_id = ClosedFormState(state_id)
    if state_id not in TWO_SIGNAL_ONE_IDLER:
        raise ConfigError(f"{state_id.value} is not a 2S1I closed-form probe")
    return PIECEWISE[state_id].evaluate(p0, eta)


def hb_1s2i_sii(p0: float, eta: float) -> AnalyticOutcome:
    return PIECEWISE[ClosedFormState.SI_I].evaluate(p0, eta)


def hb_3s_sss(p0: float, eta: float) -> AnalyticOutcome:
    return PIECEWISE[ClosedFormState.S_S_S].evaluate(p0, eta)


def expected_region_tag(state_id, region_id: int) -> RegionTag:
    """Numeric tag a closed-form region should produce away from its boundaries"""
    table = piecewise(state_id)
    region = table.region(region_id)
    rank = table.full_rank if region.rank is None else region.rank
    return tag_from_rank(rank, table.full_rank)


def analytic_pi1(state_id, p0: float, eta: float) -> ComplexMatrix:
    """Closed-form optimal projector at a point (supp ρ0 or zero in the guessing regions)"""
    table = piecewise(state_id)
    outcome = table.evaluate(p0, eta)
    if outcome.region_id is None:
        raise RegionError(f"No region of {table.state_id.value} contains p0={p0}, eta={eta}")
    region = table.region(outcome.region_id)
    dims = (2, 2, 2)
    if region.rank is None:
        vectors = [_ket(label) for label in table.support]
    elif region.rank == 0:
        return ComplexMatrix(dims, np.zeros((8, 8)))
    else:
        vectors = region.vectors(RegionParameters.from_point(p0, eta))
    return ComplexMatrix(dims, sum(np.outer(v, v.conj()) for v in vectors))


def closed_form_probe(state_id) -> PureState:
    """The qubit probe each closed form was derived for"""
    state_id = ClosedFormState(state_id)
    ssi = (Role.SIGNAL, Role.SIGNAL, Role.IDLER)
    if state_id == ClosedFormState.W:
        return build_w((1 / math.sqrt(3),) * 3, ssi)
    specs = {
        ClosedFormState.S_S_I: ProbeSpec(Family.SEPARABLE, (2, 2, 2), ssi),
        ClosedFormState.GHZ: ProbeSpec(Family.GHZ, (2, 2, 2), ssi),
        ClosedFormState.S_SI: ProbeSpec(Family.PAIR, (2, 2, 2), ssi, pair=(1, 2)),
        ClosedFormState.SS_I: ProbeSpec(Family.PAIR, (2, 2, 2), ssi, pair=(0, 1)),
        ClosedFormState.SI_I: ProbeSpec(Family.PAIR, (2, 2, 2), (Role.SIGNAL, Role.IDLER, Role.IDLER), pair=(0, 1)),
        ClosedFormState.S_S_S: ProbeSpec(Family.SEPARABLE, (2, 2, 2), (Role.SIGNAL,) * 3),
    }
    return build_probe(specs[state_id])


def error_decomposition_2s1i(probe: PureState, p0: float, eta: float) -> float:
    """
    p1(1−η) + (γ1/4)(S_L^{I} − 1) + (p1η(1−η)/2)(S_L^{S1} + S_L^{S2}), valid where the
    optimal projector is the probe itself.
    """
    if probe.roles != (Role.SIGNAL, Role.SIGNAL, Role.IDLER) or probe.dims != (2, 2, 2):
        raise ConfigError(f"Bipartition decomposition needs a qubit 2S1I probe, got {probe.configuration} on {probe.dims}")
    h = build_hypotheses(Scenario(probe, eta, p0))
    outcome = helstrom_bound(h, p0)
    if outcome.region != RegionTag(RegionKind.ILLUMINABLE, 1) or \
            np.linalg.norm(outcome.pi1.data - probe.projector().data) > 1e-6:
        raise RegionError(
            f"Optimal projector at p0={p0}, eta={eta} is {outcome.region}, not the probe itself",
            region=str(outcome.region),
        )
    g = RegionParameters.from_point(p0, eta)
    s_idler = linear_entropy(probe, traced=(0, 1))
    s_first = linear_entropy(probe, traced=(1, 2))
    s_second = linear_entropy(probe, traced=(0, 2))
    return g.p1 * (1 - eta) + g.gamma1 / 4 * (s_idler - 1) + g.p1 * eta * (1 - eta) / 2 * (s_first + s_second)


def region_table(state_id, resolution: int = None) -> List[dict]:
    """Region id and closed-form p_err on a resolution × resolution grid over [0, 1]²"""
    resolution = config.resolution if resolution is None else resolution
    if resolution < 2:
        raise ConfigError("Region grid resolution must be at least 2")
    table = piecewise(state_id)
    rows = []
    grid = np.linspace(0.0, 1.0, resolution)
    for p0 in grid:
        for eta in grid:
            outcome = table.evaluate(float(p0), float(eta))
            rows.append({
                "p0": float(p0),
                "eta": float(eta),
                "region_id": outcome.region_id,
                "p_err": outcome.p_err,
            })
    ambiguous = sum(1 for r in rows if r["region_id"] is None)
    if ambiguous:
        logger.warning("%d grid points of %s matched no region", ambiguous, table.state_id.value)
    return rows


def closed_form_for(configuration: str, label: str, d: int = 2) -> Optional[ClosedFormState]:
    """The closed form matching a tabulated qubit probe, if one exists"""
    if d != 2:
        return None
    configuration = configuration.upper()
    for state_id, table in PIECEWISE.items():
        if table.configuration == configuration and state_id.value == label:
            return state_id
    return None
