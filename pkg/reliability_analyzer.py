"""Exact P_miss / P_hit over all node pairs.

The denominator sums every geometric minimal path between two healthy nodes;
the numerator sums, over pairs of nodes outside the obstacle region, the paths
that avoid it. The obstacle region is FR by default, or F alone when a path
only counts as a hit once it crosses a faulty node.

Per-source partial sums are computed independently (optionally in a process
pool) and reduced in source order, so the result never depends on the number
of workers.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from multiprocessing import Pool
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

import config
from errors import BudgetExceededError, CrossCheckError, ReliabilityError
from fault_model import FaultClass, FaultComplex, Obstacle
from mesh import Coord, MeshShape
from path_counter import avoid_count_det, avoid_count_dp, avoid_counts_from, lt, restriction

logger = logging.getLogger(__name__)


class Engine(str, Enum):
    DETERMINANT = "det"
    DP = "dp"


class CrossCheck(str, Enum):
    OFF = "off"
    SAMPLE = "sample"
    FULL = "full"


class PairConvention(str, Enum):
    UNORDERED = "unordered"
    ORDERED = "ordered"

    @property
    def descriptor(self) -> str:
        return "unordered distinct pairs" if self is PairConvention.UNORDERED else "ordered distinct pairs"

    @property
    def multiplier(self) -> int:
        return 1 if self is PairConvention.UNORDERED else 2


@dataclass(frozen=True)
class CostEstimate:
    det_cost: float
    dp_cost: float

    @property
    def cheapest(self) -> float:
        return min(self.det_cost, self.dp_cost)


@dataclass(frozen=True)
class EngineChoice:
    engine: Engine
    cross_check: CrossCheck
    cost: CostEstimate
    reason: str


@dataclass(frozen=True)
class ReliabilityResult:
    total_paths: int
    miss_paths: int
    p_miss: Fraction
    p_hit: Fraction
    engine: Engine
    cross_check: CrossCheck
    checked_pairs: int
    pair_convention: PairConvention
    classification: FaultClass
    obstacle: Obstacle = Obstacle.RING


@dataclass(frozen=True)
class PairHit:
    a: Coord
    b: Coord
    paths: int
    avoiding: int

    @property
    def p_hit(self) -> Fraction:
        return 1 - Fraction(self.avoiding, self.paths)


def render_decimal(value: Fraction, precision: int = None) -> str:
    """Exact rational rounded half-to-even to ``precision`` decimals."""
    precision = config.PRECISION if precision is None else precision
    scaled = round(Fraction(value) * 10 ** precision)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled))
    if precision == 0:
        return sign + digits
    digits = digits.rjust(precision + 1, "0")
    return f"{sign}{digits[:-precision]}.{digits[-precision:]}"


def _pair_ordinal(i: int, count: int) -> int:
    """Ordinal of pair (i, i + 1) in the row-major listing of pairs i < j."""
    return i * (2 * count - i - 1) // 2


def _strided_pairs(count: int, limit: int) -> Iterator[Tuple[int, int]]:
    """At most ``limit`` evenly strided pairs (i, j), i < j, of the row-major listing."""
    pairs = count * (count - 1) // 2
    stride = max(1, -(-pairs // max(1, limit)))
    i, row_start = 0, 0
    for ordinal in range(0, pairs, stride):
        while ordinal >= row_start + count - i - 1:
            row_start += count - i - 1
            i += 1
        yield i, i + 1 + ordinal - row_start


def restriction_sizes(complex_: FaultComplex, obstacle: Obstacle = Obstacle.RING,
                      limit: int = None) -> Tuple[int, List[int]]:
    """Pair count outside the obstacle region and the restriction-set size of
    every pair, or of a strided sample of ``limit`` pairs when there are more."""
    limit = config.COST_SAMPLE_PAIRS if limit is None else limit
    region = complex_.obstacle_nodes(obstacle)
    nodes = complex_.outside_nodes(obstacle)
    count = len(nodes)
    pairs = count * (count - 1) // 2
    if not region:
        return pairs, [0] * min(pairs, limit)
    points = np.array(sorted(region), dtype=np.int64)
    coords = np.array(nodes, dtype=np.int64)
    sizes = []
    for i, j in _strided_pairs(count, limit):
        lo, hi = np.minimum(coords[i], coords[j]), np.maximum(coords[i], coords[j])
        sizes.append(int(np.all((points >= lo) & (points <= hi), axis=1).sum()))
    return pairs, sizes


def predict_cost(complex_: FaultComplex, obstacle: Obstacle = Obstacle.RING) -> CostEstimate:
    """Rough operation counts for the two exact engines.

    Determinant: (m+1)^3 per pair, m being the pair's own restriction-set size,
    summed exactly or scaled up from a strided sample. DP: one orthant sweep of
    prod(R_i + 1) cells per source, n additions per cell.
    """
    shape = complex_.shape
    pairs, sizes = restriction_sizes(complex_, obstacle)
    det_cost = float(pairs) * sum((m + 1) ** 3 for m in sizes) / len(sizes) if sizes else 0.0
    outside = shape.node_count - len(complex_.obstacle_nodes(obstacle))
    dp_cost = float(outside) * math.prod(r + 1 for r in shape.radices) * shape.n
    return CostEstimate(det_cost, dp_cost)


def check_budget(complex_: FaultComplex, budget: float, obstacle: Obstacle = Obstacle.RING) -> CostEstimate:
    cost = predict_cost(complex_, obstacle)
    if cost.cheapest > budget:
        raise BudgetExceededError(f"predicted cost {cost.cheapest:.3g} > budget {budget:.3g}")
    return cost


def engine_select(complex_: FaultComplex, policy: str = "auto", det_budget: float = None,
                  cross_check: Optional[str] = None, obstacle: Obstacle = Obstacle.RING) -> EngineChoice:
    det_budget = config.DET_BUDGET if det_budget is None else det_budget
    cost = predict_cost(complex_, obstacle)
    policy = (policy or "auto").lower()
    if policy in (Engine.DETERMINANT.value, Engine.DP.value):
        engine, reason = Engine(policy), "explicit override"
        check = CrossCheck.SAMPLE
    elif policy == "auto":
        if cost.det_cost > det_budget:
            engine, check = Engine.DP, CrossCheck.SAMPLE
            reason = f"predicted determinant cost {cost.det_cost:.3g} exceeds {det_budget:.3g}"
        else:
            engine = Engine.DETERMINANT
            check = CrossCheck.FULL if len(complex_.fr) <= 10 else CrossCheck.SAMPLE
            reason = f"predicted determinant cost {cost.det_cost:.3g} within {det_budget:.3g}"
    else:
        raise ValueError(f"unknown engine policy '{policy}'")
    if cross_check is not None:
        check = CrossCheck(cross_check)
    logger.info("engine %s, cross-check %s (%s)", engine.value, check.value, reason)
    return EngineChoice(engine, check, cost, reason)


# Per-process state for pool workers; filled by _init_worker.
_STATE: Dict = {}


def _init_worker(state: Dict):
    _STATE.clear()
    _STATE.update(state)


def _total_from_source(i: int) -> int:
    nodes = _STATE["nodes"]
    a = nodes[i]
    return sum(lt(a, b) for b in nodes[i + 1:])


def _miss_from_source(i: int) -> Tuple[int, int, Optional[Tuple]]:
    shape, region, nodes = _STATE["shape"], _STATE["region"], _STATE["nodes"]
    engine, check, stride = _STATE["engine"], _STATE["check"], _STATE["stride"]
    a = nodes[i]
    base = _pair_ordinal(i, len(nodes))
    sweep = avoid_counts_from(shape, a, region) if engine is Engine.DP else None
    subtotal, checked = 0, 0
    for offset, b in enumerate(nodes[i + 1:]):
        if sweep is not None:
            value = sweep[b]
        else:
            value = avoid_count_det(a, b, restriction(shape, a, b, region))
        if check is CrossCheck.FULL or (check is CrossCheck.SAMPLE and (base + offset) % stride == 0):
            checked += 1
            if engine is Engine.DP:
                det, dp = avoid_count_det(a, b, restriction(shape, a, b, region)), value
            else:
                det, dp = value, avoid_count_dp(shape, a, b, region)
            if det != dp:
                return subtotal, checked, ((a, b), det, dp)
        subtotal += value
    return subtotal, checked, None


def _pairs_from_source(i: int) -> List[Tuple[Coord, Coord, int, int]]:
    shape, region, nodes, engine = _STATE["shape"], _STATE["region"], _STATE["nodes"], _STATE["engine"]
    a = nodes[i]
    if a in region:
        return [(a, b, lt(a, b), 0) for b in nodes[i + 1:]]
    sweep = avoid_counts_from(shape, a, region) if engine is Engine.DP else None
    rows = []
    for b in nodes[i + 1:]:
        if b in region:
            avoiding = 0
        elif sweep is not None:
            avoiding = sweep[b]
        else:
            avoiding = avoid_count_det(a, b, restriction(shape, a, b, region))
        rows.append((a, b, lt(a, b), avoiding))
    return rows


class ReliabilityAnalyzer:
    def __init__(self, workers: int = None, progress: bool = False,
                 pair_convention: PairConvention = PairConvention.UNORDERED,
                 cross_check_pairs: int = None, obstacle: Obstacle = Obstacle.RING):
        self.workers = config.WORKERS if workers is None else max(1, int(workers))
        self.progress = progress
        self.pair_convention = PairConvention(pair_convention)
        self.cross_check_pairs = config.CROSS_CHECK_PAIRS if cross_check_pairs is None else cross_check_pairs
        self.obstacle = Obstacle(obstacle)

    def _per_source(self, task: Callable, count: int, state: Dict, desc: str) -> List:
        if count <= 0:
            return []
        bar = tqdm(total=count, desc=desc, disable=not self.progress, leave=False)
        try:
            if self.workers <= 1 or count < 2 * self.workers:
                _init_worker(state)
                results = []
                for i in range(count):
                    results.append(task(i))
                    bar.update(1)
                return results
            chunksize = max(1, count // (self.workers * 8))
            with Pool(processes=self.workers, initializer=_init_worker, initargs=(state,)) as pool:
                results = []
                for result in pool.imap(task, range(count), chunksize=chunksize):
                    results.append(result)
                    bar.update(1)
                return results
        finally:
            bar.close()

    def _obstacle(self, obstacle: Optional[Obstacle]) -> Obstacle:
        return self.obstacle if obstacle is None else Obstacle(obstacle)

    def total_paths(self, shape: MeshShape, faulty) -> int:
        faulty = set(faulty)
        nodes = [v for v in shape.nodes() if v not in faulty]
        if len(nodes) < 2:
            raise ReliabilityError("fewer than two healthy nodes; no source-destination pairs exist")
        partial = self._per_source(_total_from_source, len(nodes) - 1, {"nodes": nodes}, "total paths")
        return sum(partial) * self.pair_convention.multiplier

    def miss_paths(self, complex_: FaultComplex, engine: Engine = Engine.DP,
                   cross_check: CrossCheck = CrossCheck.OFF,
                   obstacle: Optional[Obstacle] = None) -> Tuple[int, int]:
        """Avoiding paths summed over pairs outside the obstacle region, and the
        number of cross-checked pairs."""
        engine, cross_check = Engine(engine), CrossCheck(cross_check)
        obstacle = self._obstacle(obstacle)
        nodes = complex_.outside_nodes(obstacle)
        if len(nodes) < 2:
            return 0, 0
        pairs = len(nodes) * (len(nodes) - 1) // 2
        state = {
            "shape": complex_.shape,
            "region": complex_.obstacle_nodes(obstacle),
            "nodes": nodes,
            "engine": engine,
            "check": cross_check,
            "stride": max(1, pairs // max(1, self.cross_check_pairs)),
        }
        partial = self._per_source(_miss_from_source, len(nodes) - 1, state, f"miss paths ({engine.value})")
        total, checked = 0, 0
        for subtotal, count, mismatch in partial:
            if mismatch is not None:
                pair, det, dp = mismatch
                raise CrossCheckError(pair, det, dp)
            total += subtotal
            checked += count
        return total * self.pair_convention.multiplier, checked

    def analyze(self, complex_: FaultComplex, policy: str = "auto", cross_check: Optional[str] = None,
                obstacle: Optional[Obstacle] = None) -> ReliabilityResult:
        obstacle = self._obstacle(obstacle)
        choice = engine_select(complex_, policy, cross_check=cross_check, obstacle=obstacle)
        total = self.total_paths(complex_.shape, complex_.faulty)
        if total == 0:
            raise ReliabilityError("no minimal paths between healthy nodes")
        miss, checked = self.miss_paths(complex_, choice.engine, choice.cross_check, obstacle)
        p_miss = Fraction(miss, total)
        logger.info("P_miss = %s/%s over %s (%s)", miss, total, self.pair_convention.descriptor,
                    obstacle.descriptor)
        return ReliabilityResult(
            total_paths=total,
            miss_paths=miss,
            p_miss=p_miss,
            p_hit=1 - p_miss,
            engine=choice.engine,
            cross_check=choice.cross_check,
            checked_pairs=checked,
            pair_convention=self.pair_convention,
            classification=complex_.classification,
            obstacle=obstacle,
        )

    def pair_breakdown(self, complex_: FaultComplex, policy: str = "auto",
                       obstacle: Optional[Obstacle] = None) -> List[PairHit]:
        """Minimal paths, avoiding paths and P_hit of every unordered healthy pair."""
        obstacle = self._obstacle(obstacle)
        choice = engine_select(complex_, policy, cross_check="off", obstacle=obstacle)
        nodes = complex_.healthy_nodes()
        state = {
            "shape": complex_.shape,
            "region": complex_.obstacle_nodes(obstacle),
            "nodes": nodes,
            "engine": choice.engine,
        }
        partial = self._per_source(_pairs_from_source, len(nodes) - 1, state, "pairs")
        return [PairHit(*row) for rows in partial for row in rows]


def total_paths(shape: MeshShape, faulty, workers: int = 1) -> int:
    return ReliabilityAnalyzer(workers=workers).total_paths(shape, faulty)


def miss_paths(shape: MeshShape, complex_: FaultComplex, engine: Engine = Engine.DP,
               cross_check: CrossCheck = CrossCheck.OFF, workers: int = 1,
               obstacle: Obstacle = Obstacle.RING) -> int:
    if complex_.shape != shape:
        raise ReliabilityError(f"complex was built for mesh {complex_.shape.label()}, not {shape.label()}")
    return ReliabilityAnalyzer(workers=workers, obstacle=obstacle).miss_paths(complex_, engine, cross_check)[0]


def p_miss(shape: MeshShape, complex_: FaultComplex, engine: str = "auto",
           cross_check: Optional[str] = None, workers: int = 1,
           obstacle: Obstacle = Obstacle.RING) -> ReliabilityResult:
    if complex_.shape != shape:
        raise ReliabilityError(f"complex was built for mesh {complex_.shape.label()}, not {shape.label()}")
    return ReliabilityAnalyzer(workers=workers, obstacle=obstacle).analyze(complex_, engine, cross_check)
