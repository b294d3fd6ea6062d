"""
Mean performance over the (p0, η) square
Adaptive quad-tree quadrature of the Helstrom bound and Holevo information,
table builders, low-η sweeps and ranking checks.
"""
import heapq
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import config
from analysis.helstrom import helstrom_batch
from analysis.infotheory import holevo_batch
from core.errors import ConfigError, QuadratureError
from core.scenario import LossExpansion
from core.presets import ProbeConfig

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(3)
_UNIT_NODES = 0.5 * (_NODES + 1.0)
_UNIT_WEIGHTS = np.outer(_WEIGHTS, _WEIGHTS).ravel() / 4.0
_INITIAL_DEPTH = 2
_MAX_CELLS_PER_ROUND = 4096


@dataclass
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    leaves: int


@dataclass
class MeanMetrics:
    mean_hb: float
    mean_holevo: Optional[float]
    abs_error_estimate: float
    evaluations: int


@dataclass
class _Cell:
    x: float
    y: float
    depth: int
    value: float = 0.0
    refined: float = 0.0
    children: List[float] = field(default_factory=list)

    @property
    def size(self) -> float:
        return 0.5 ** self.depth

    @property
    def error(self) -> float:
        return abs(self.value - self.refined)

    def split(self) -> List["_Cell"]:
        half = self.size / 2
        return [
            _Cell(self.x + dx * half, self.y + dy * half, self.depth + 1)
            for dx, dy in ((0, 0), (0, 1), (1, 0), (1, 1))
        ]


def vectorize(f: Callable[[float, float], float]) -> Integrand:
    """Lift a scalar integrand to the array form the quadrature evaluates"""
    def lifted(p0s: np.ndarray, etas: np.ndarray) -> np.ndarray:
        return np.array([f(float(p), float(e)) for p, e in zip(p0s, etas)], dtype=float)
    return lifted


class _PointEvaluator:
    """Evaluates an integrand on point batches, in fixed-order chunks on a thread pool"""

    def __init__(self, f: Integrand, threads: int, chunk: int):
        self.f = f
        self.threads = max(1, threads)
        self.chunk = max(1, chunk)
        self.evaluations = 0

    def __call__(self, p0s: np.ndarray, etas: np.ndarray, executor: Optional[ThreadPoolExecutor]) -> np.ndarray:
        self.evaluations += len(p0s)
        bounds = range(0, len(p0s), self.chunk)
        pieces = [(p0s[i:i + self.chunk], etas[i:i + self.chunk]) for i in bounds]
        if executor is None or len(pieces) == 1:
            results = [self.f(p, e) for p, e in pieces]
        else:
            results = list(executor.map(lambda piece: self.f(*piece), pieces))
        return np.concatenate(results) if results else np.empty(0)


def _cell_values(cells: Sequence[_Cell], evaluate: _PointEvaluator, executor) -> np.ndarray:
    """3×3 Gauss–Legendre estimate for each cell"""
    if not cells:
        return np.empty(0)
    xs = np.array([c.x for c in cells])[:, None]
    ys = np.array([c.y for c in cells])[:, None]
    sizes = np.array([c.size for c in cells])[:, None]
    grid_x = np.repeat(_UNIT_NODES, 3)[None, :]
    grid_y = np.tile(_UNIT_NODES, 3)[None, :]
    p0s = (xs + sizes * grid_x).ravel()
    etas = (ys + sizes * grid_y).ravel()
    values = evaluate(p0s, etas, executor).reshape(len(cells), 9)
    return (values @ _UNIT_WEIGHTS) * sizes[:, 0] ** 2


def _prepare(cells: List[_Cell], evaluate: _PointEvaluator, executor) -> None:
    """Attach each cell's own estimate and its four children's estimates"""
    children = [child for cell in cells for child in cell.split()]
    own = _cell_values(cells, evaluate, executor)
    sub = _cell_values(children, evaluate, executor).reshape(len(cells), 4)
    for cell, value, parts in zip(cells, own, sub):
        cell.value = float(value)
        cell.children = [float(v) for v in parts]
        cell.refined = math.fsum(cell.children)


def mean_over_square(f: Integrand, tol: float = None, threads: int = None, max_depth: int = None,
                     max_evaluations: int = None, chunk: int = 4096) -> QuadratureResult:
    """
    Adaptive integral of f over [0, 1]² (the mean, since the area is 1).
    Leaves with the largest refinement error are split in batches until the summed
    error estimate drops to tol.
    """
    tol = config.tolerance if tol is None else tol
    threads = config.threads if threads is None else threads
    max_depth = config.max_depth if max_depth is None else max_depth
    max_evaluations = config.max_evaluations if max_evaluations is None else max_evaluations
    if tol <= 0:
        raise ConfigError(f"Quadrature tolerance must be positive, got {tol}")

    evaluate = _PointEvaluator(f, threads, chunk)
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        side = 2 ** _INITIAL_DEPTH
        leaves = [_Cell(i / side, j / side, _INITIAL_DEPTH) for i in range(side) for j in range(side)]
        _prepare(leaves, evaluate, executor)
        rounds = 0
        while True:
            total_error = math.fsum(c.error for c in leaves)
            estimate = math.fsum(c.refined for c in leaves)
            if total_error <= tol:
                logger.debug("Converged after %d rounds: %d leaves, error %.3e, %d evaluations",
                             rounds, len(leaves), total_error, evaluate.evaluations)
                return QuadratureResult(estimate, total_error, evaluate.evaluations, len(leaves))

            order = itertools.count()
            heap = [(-c.error, next(order), index) for index, c in enumerate(leaves) if c.depth < max_depth]
            if not heap:
                raise QuadratureError("Depth cap reached before tolerance", estimate, total_error, evaluate.evaluations)
            if evaluate.evaluations >= max_evaluations:
                raise QuadratureError("Evaluation cap reached before tolerance", estimate, total_error, evaluate.evaluations)
            heapq.heapify(heap)

            selected = []
            covered = 0.0
            target = 0.5 * (total_error - tol)
            while heap and len(selected) < _MAX_CELLS_PER_ROUND and (not selected or covered < target):
                negative_error, _, index = heapq.heappop(heap)
                selected.append(index)
                covered += -negative_error

            replaced = set(selected)
            children = []
            for index in selected:
                parent = leaves[index]
                for child, value in zip(parent.split(), parent.children):
                    child.value = value
                    children.append(child)
            _prepare_children(children, evaluate, executor)
            leaves = [c for i, c in enumerate(leaves) if i not in replaced] + children
            rounds += 1
            logger.debug("Round %d: split %d cells, %d leaves, error %.3e, %d evaluations",
                         rounds, len(selected), len(leaves), total_error, evaluate.evaluations)
    finally:
        if executor is not None:
            executor.shutdown()


def _prepare_children(cells: List[_Cell], evaluate: _PointEvaluator, executor) -> None:
    """Children already carry their own estimate from the parent; only grandchildren are new"""
    grandchildren = [g for cell in cells for g in cell.split()]
    sub = _cell_values(grandchildren, evaluate, executor).reshape(len(cells), 4)
    for cell, parts in zip(cells, sub):
        cell.children = [float(v) for v in parts]
        cell.refined = math.fsum(cell.children)


def midpoint_oracle(f: Integrand, n: int = 1024, chunk: int = 65536) -> float:
    """n × n midpoint rule over [0, 1]²"""
    centers = (np.arange(n) + 0.5) / n
    rows_per_chunk = max(1, chunk // n)
    partial = []
    for start in range(0, n, rows_per_chunk):
        p0s = np.repeat(centers[start:start + rows_per_chunk], n)
        etas = np.tile(centers, len(centers[start:start + rows_per_chunk]))
        partial.append(float(np.sum(f(p0s, etas))))
    total = math.fsum(partial)
    return total / (n * n)


# Tables --------------------------------------------------------------------

@dataclass
class StateMetrics:
    configuration: str
    label: str
    d: int
    mean_hb: float
    mean_holevo: Optional[float]
    err_estimate: float
    evaluations: int
    commutator_norm: float
    holevo_skipped: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _chunk_for(expansion: LossExpansion) -> int:
    # keep each batched eigensolve around 32 MB of matrices
    return max(8, (1 << 22) // (expansion.size * expansion.size))


def evaluate_state(entry: ProbeConfig, tol: float = None, log_base: float = None, with_holevo: bool = True,
                   threads: int = None) -> StateMetrics:
    """Mean HB and, for commuting hypotheses, mean Holevo information of one probe"""
    tol = config.tolerance if tol is None else tol
    log_base = config.log_base if log_base is None else log_base
    expansion = LossExpansion.from_probe(entry.build(), entry.noise)
    chunk = _chunk_for(expansion)
    hb = mean_over_square(lambda p, e: helstrom_batch(expansion, p, e), tol=tol, threads=threads, chunk=chunk)
    logger.info("%s %s: mean HB %.6f ± %.1e (%d evaluations)",
                entry.configuration, entry.label, hb.value, hb.abs_error_estimate, hb.evaluations)

    commutator = expansion.max_commutator
    chi = None
    skipped = False
    error = hb.abs_error_estimate
    evaluations = hb.evaluations
    if with_holevo:
        if commutator > config.commutator_tol:
            skipped = True
            logger.warning("%s %s: ρ0 and ρ1 do not commute (‖[ρ0, ρ1]‖ = %.2e), Holevo value excluded",
                           entry.configuration, entry.label, commutator)
        else:
            result = mean_over_square(lambda p, e: holevo_batch(expansion, p, e, log_base),
                                      tol=tol, threads=threads, chunk=chunk)
            chi = result.value
            error = max(error, result.abs_error_estimate)
            evaluations += result.evaluations
            logger.info("%s %s: mean Holevo %.6f ± %.1e", entry.configuration, entry.label, chi, result.abs_error_estimate)
    return StateMetrics(
        configuration=entry.configuration,
        label=entry.label,
        d=entry.d,
        mean_hb=hb.value,
        mean_holevo=chi,
        err_estimate=error,
        evaluations=evaluations,
        commutator_norm=commutator,
        holevo_skipped=skipped,
    )


def table_mean_hb(entries: Sequence[ProbeConfig], tol: float = None, threads: int = None) -> List[StateMetrics]:
    return [evaluate_state(e, tol=tol, with_holevo=False, threads=threads) for e in entries]


def table_mean_holevo(entries: Sequence[ProbeConfig], tol: float = None, log_base: float = None,
                      threads: int = None) -> List[StateMetrics]:
    return [evaluate_state(e, tol=tol, log_base=log_base, with_holevo=True, threads=threads) for e in entries]


def mean_metrics(row: StateMetrics) -> MeanMetrics:
    return MeanMetrics(row.mean_hb, row.mean_holevo, row.err_estimate, row.evaluations)


# Sweeps and rankings -------------------------------------------------------

@dataclass
class SweepTable:
    p0: float
    etas: np.ndarray
    values: Dict[str, np.ndarray]

    def ordering_at(self, eta: float, tie_tol: float = 1e-10) -> List[List[str]]:
        """Labels grouped by HB at the grid point nearest eta, best (lowest) first"""
        index = int(np.argmin(np.abs(self.etas - eta)))
        return group_by_value({label: float(v[index]) for label, v in self.values.items()}, tie_tol)

    def order_string(self, eta: float, tie_tol: float = 1e-10) -> str:
        return "<".join("=".join(group) for group in self.ordering_at(eta, tie_tol))

    def to_rows(self) -> List[dict]:
        rows = []
        for i, eta in enumerate(self.etas):
            row = {"p0": self.p0, "eta": float(eta)}
            row.update({label: float(v[i]) for label, v in self.values.items()})
            rows.append(row)
        return rows


def group_by_value(values: Dict[str, float], tie_tol: float) -> List[List[str]]:
    """Sort ascending; neighbours closer than tie_tol share a group (labels sorted inside)"""
    groups: List[List[Tuple[str, float]]] = []
    for label, value in sorted(values.items(), key=lambda kv: (kv[1], kv[0])):
        if groups and abs(value - groups[-1][-1][1]) <= tie_tol:
            groups[-1].append((label, value))
        else:
            groups.append([(label, value)])
    return [sorted(label for label, _ in group) for group in groups]


def low_eta_sweep(entries: Sequence[ProbeConfig], p0: float = 0.5, eta_max: float = 0.01, n_points: int = 101) -> SweepTable:
    """HB of each probe on a uniform η grid in [0, eta_max] at fixed p0"""
    if not 0.0 < eta_max <= 1.0:
        raise ConfigError(f"eta_max={eta_max} outside (0, 1]")
    if n_points < 2:
        raise ConfigError("A sweep needs at least two points")
    etas = np.linspace(0.0, eta_max, n_points)
    p0s = np.full(n_points, float(p0))
    values = {}
    for entry in entries:
        expansion = LossExpansion.from_probe(entry.build(), entry.noise)
        values[entry.label] = helstrom_batch(expansion, p0s, etas)
    return SweepTable(p0=float(p0), etas=etas, values=values)


@dataclass
class RankingReport:
    hb_order: List[List[str]]
    holevo_order: List[List[str]]
    inversions: List[Tuple[str, str]]
    expected_mismatches: List[Tuple[str, str]]

    @property
    def consistent(self) -> bool:
        return not self.inversions and not self.expected_mismatches

    def to_dict(self) -> dict:
        return asdict(self)


def ranking_check(table: Sequence[StateMetrics], expected_order: Sequence[str] = None,
                  tie_tol: float = None) -> RankingReport:
    """
    Lower mean HB should come with higher mean Holevo information. Every pair where both
    are lower is an inversion. With expected_order (best first), pairs whose mean HB
    ordering disagrees with it are reported too.
    """
    tie_tol = config.ranking_tie_tol if tie_tol is None else tie_tol
    rows = [r for r in table if r.mean_holevo is not None]
    inversions = []
    for a, b in itertools.combinations(rows, 2):
        lower, upper = (a, b) if a.mean_hb <= b.mean_hb else (b, a)
        if upper.mean_hb - lower.mean_hb > tie_tol and upper.mean_holevo - lower.mean_holevo > tie_tol:
            inversions.append((lower.label, upper.label))

    mismatches = []
    if expected_order:
        by_label = {r.label: r for r in table}
        missing = [label for label in expected_order if label not in by_label]
        if missing:
            raise ConfigError(f"Expected order names unknown states: {missing}")
        for first, second in itertools.combinations(expected_order, 2):
            if by_label[first].mean_hb - by_label[second].mean_hb > tie_tol:
                mismatches.append((first, second))

    return RankingReport(
        hb_order=group_by_value({r.label: r.mean_hb for r in table}, tie_tol),
        holevo_order=group_by_value({r.label: -r.mean_holevo for r in rows}, tie_tol),
        inversions=inversions,
        expected_mismatches=mismatches,
    )
