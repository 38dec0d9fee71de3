"""Monte-Carlo estimate of P_hit.

Each sample draws an unordered pair of distinct healthy nodes, then one minimal
path between them uniformly at random, and records whether the path touches
the obstacle region (FR by default, or F alone).
Hits are weighted by lt(a, b) so the ratio estimates the path-uniform P_hit.

Sample ``i`` always draws from its own counter-based stream (Philox keyed by the
seed, counter block ``i``), so results do not depend on how samples are split
across workers.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

import config
from errors import ReliabilityError
from fault_model import FaultComplex, Obstacle
from mesh import Coord, MeshShape
from path_counter import lt
from reliability_analyzer import ReliabilityAnalyzer

logger = logging.getLogger(__name__)

ESTIMATOR = "lt-weighted ratio"


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int = config.SEED
    workers: int = 1
    block: int = config.MC_BLOCK

    def __post_init__(self):
        if int(self.samples) < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if int(self.workers) < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_error: float
    samples: int
    seed: int
    hit_weight: int
    total_weight: int
    sum_w2: int
    sum_w2_hit: int
    estimator: str = ESTIMATOR

    def ratio(self) -> Fraction:
        return Fraction(self.hit_weight, self.total_weight)


@dataclass(frozen=True)
class McComparison:
    exact_p_hit: Fraction
    estimate: McEstimate
    z: float
    passed: bool
    threshold: float = 4.0


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 128))


def sample_minimal_path(rng: np.random.Generator, a: Coord, b: Coord) -> List[Coord]:
    """Uniform draw over all minimal a->b paths: each hop picks dimension i with
    probability remaining_i / remaining_total."""
    remaining = [abs(y - x) for x, y in zip(a, b)]
    steps = [1 if y >= x else -1 for x, y in zip(a, b)]
    total = sum(remaining)
    current = list(a)
    path = [tuple(current)]
    while total:
        r = int(rng.integers(total))
        i = 0
        while r >= remaining[i]:
            r -= remaining[i]
            i += 1
        remaining[i] -= 1
        total -= 1
        current[i] += steps[i]
        path.append(tuple(current))
    return path


_STATE: Dict = {}


def _init_worker(state: Dict):
    _STATE.clear()
    _STATE.update(state)


def _run_block(block_index: int) -> Tuple[int, int, int, int]:
    nodes, region = _STATE["nodes"], _STATE["region"]
    seed, samples, block = _STATE["seed"], _STATE["samples"], _STATE["block"]
    count = len(nodes)
    sum_w = sum_wh = sum_w2 = sum_w2h = 0
    for index in range(block_index * block, min((block_index + 1) * block, samples)):
        rng = sample_rng(seed, index)
        i = int(rng.integers(count))
        j = int(rng.integers(count - 1))
        if j >= i:
            j += 1
        a, b = nodes[i], nodes[j]
        w = lt(a, b)
        if not region:
            hit = False
        elif a in region or b in region:
            hit = True
        else:
            hit = not region.isdisjoint(sample_minimal_path(rng, a, b))
        sum_w += w
        sum_w2 += w * w
        if hit:
            sum_wh += w
            sum_w2h += w * w
    return sum_w, sum_wh, sum_w2, sum_w2h


def _std_error(samples: int, sum_w: int, sum_wh: int, sum_w2: int, sum_w2h: int) -> float:
    """Delta-method standard error of the ratio sum(w*h) / sum(w)."""
    if samples < 2 or sum_w == 0:
        return 0.0
    r = Fraction(sum_wh, sum_w)
    residual = sum_w2h * (1 - 2 * r) + r * r * sum_w2
    variance = residual * samples / ((samples - 1) * sum_w * sum_w)
    return math.sqrt(max(0.0, float(variance)))


class MonteCarloSimulator:
    def __init__(self, progress: bool = False, obstacle: Obstacle = Obstacle.RING):
        self.progress = progress
        self.obstacle = Obstacle(obstacle)

    def estimate(self, complex_: FaultComplex, cfg: McConfig) -> McEstimate:
        nodes = complex_.healthy_nodes()
        if len(nodes) < 2:
            raise ReliabilityError("fewer than two healthy nodes; nothing to sample")
        blocks = -(-cfg.samples // cfg.block)
        state = {
            "nodes": nodes,
            "region": complex_.obstacle_nodes(self.obstacle),
            "seed": int(cfg.seed),
            "samples": int(cfg.samples),
            "block": int(cfg.block),
        }
        bar = tqdm(total=blocks, desc="monte-carlo", disable=not self.progress, leave=False)
        partial = []
        try:
            if cfg.workers <= 1 or blocks < 2:
                _init_worker(state)
                for k in range(blocks):
                    partial.append(_run_block(k))
                    bar.update(1)
            else:
                # contiguous block ranges per worker; imap keeps block order
                chunksize = -(-blocks // cfg.workers)
                with Pool(processes=cfg.workers, initializer=_init_worker, initargs=(state,)) as pool:
                    for result in pool.imap(_run_block, range(blocks), chunksize=chunksize):
                        partial.append(result)
                        bar.update(1)
        finally:
            bar.close()

        sum_w = sum(p[0] for p in partial)
        sum_wh = sum(p[1] for p in partial)
        sum_w2 = sum(p[2] for p in partial)
        sum_w2h = sum(p[3] for p in partial)
        estimate = McEstimate(
            p_hat=float(Fraction(sum_wh, sum_w)),
            std_error=_std_error(cfg.samples, sum_w, sum_wh, sum_w2, sum_w2h),
            samples=cfg.samples,
            seed=cfg.seed,
            hit_weight=sum_wh,
            total_weight=sum_w,
            sum_w2=sum_w2,
            sum_w2_hit=sum_w2h,
        )
        logger.info("p_hat=%.6f se=%.6f after %d samples (seed %d)", estimate.p_hat,
                    estimate.std_error, cfg.samples, cfg.seed)
        return estimate

    def compare(self, complex_: FaultComplex, cfg: McConfig, engine: str = "auto",
                exact_p_hit: Optional[Fraction] = None, threshold: float = 4.0) -> McComparison:
        if exact_p_hit is None:
            analyzer = ReliabilityAnalyzer(workers=cfg.workers, obstacle=self.obstacle)
            exact_p_hit = analyzer.analyze(complex_, engine).p_hit
        estimate = self.estimate(complex_, cfg)
        if estimate.std_error == 0.0:
            z = 0.0 if estimate.ratio() == exact_p_hit else math.inf
        else:
            z = abs(estimate.p_hat - float(exact_p_hit)) / estimate.std_error
        return McComparison(exact_p_hit, estimate, z, z <= threshold, threshold)


def estimate_p_hit(shape: MeshShape, complex_: FaultComplex, cfg: McConfig,
                   obstacle: Obstacle = Obstacle.RING) -> McEstimate:
    if complex_.shape != shape:
        raise ReliabilityError(f"complex was built for mesh {complex_.shape.label()}, not {shape.label()}")
    return MonteCarloSimulator(obstacle=obstacle).estimate(complex_, cfg)


def mc_vs_exact(shape: MeshShape, complex_: FaultComplex, cfg: McConfig, engine: str = "auto",
                obstacle: Obstacle = Obstacle.RING) -> McComparison:
    if complex_.shape != shape:
        raise ReliabilityError(f"complex was built for mesh {complex_.shape.label()}, not {shape.label()}")
    return MonteCarloSimulator(obstacle=obstacle).compare(complex_, cfg, engine)
