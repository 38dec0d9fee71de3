"""Fault regions, their rings and the checks a scenario has to pass before analysis."""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from errors import FaultSpecError, MeshError
from mesh import Coord, MeshShape, connectivity_check, is_boundary

logger = logging.getLogger(__name__)


class FaultClass(str, Enum):
    RING = "ring"
    CHAIN = "chain"
    NONE = "none"


class Obstacle(str, Enum):
    """Node set a minimal path has to touch to count as a hit."""
    RING = "fr"
    FAULT = "fault"

    @property
    def descriptor(self) -> str:
        if self is Obstacle.RING:
            return "a path hits when it touches a faulty or ring node"
        return "a path hits only when it crosses a faulty node"

    def other(self) -> "Obstacle":
        return Obstacle.FAULT if self is Obstacle.RING else Obstacle.RING


@dataclass(frozen=True)
class RectangularFault:
    origin: Coord
    extents: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(int(x) for x in self.origin))
        object.__setattr__(self, "extents", tuple(int(l) for l in self.extents))

    def nodes(self, shape: MeshShape) -> Set[Coord]:
        return expand_rectangular(shape, self.origin, self.extents)

    def span(self) -> Tuple[Coord, Coord]:
        return self.origin, tuple(o + l - 1 for o, l in zip(self.origin, self.extents))

    def describe(self) -> str:
        return "×".join(str(l) for l in self.extents)


@dataclass(frozen=True)
class OverlappingFault:
    rects: Tuple[RectangularFault, ...]

    def __post_init__(self):
        object.__setattr__(self, "rects", tuple(self.rects))
        if len(self.rects) < 2:
            raise FaultSpecError("an overlapping fault needs at least two rectangles", "rects")

    def nodes(self, shape: MeshShape) -> Set[Coord]:
        result = set()
        for k, rect in enumerate(self.rects):
            try:
                result |= rect.nodes(shape)
            except FaultSpecError as e:
                raise FaultSpecError(str(e), f"rects[{k}]") from e
        return result

    def describe(self) -> str:
        return " ∪ ".join(rect.describe() for rect in self.rects)


@dataclass(frozen=True)
class ArbitraryFault:
    """Faulty node set with no particular shape (the "x-shape" case)."""
    points: FrozenSet[Coord]

    def __post_init__(self):
        object.__setattr__(self, "points", frozenset(tuple(int(x) for x in v) for v in self.points))
        if not self.points:
            raise FaultSpecError("an arbitrary fault needs at least one node", "nodes")

    def nodes(self, shape: MeshShape) -> Set[Coord]:
        for k, v in enumerate(sorted(self.points)):
            if not shape.contains(v):
                raise FaultSpecError(f"{v} is outside mesh {shape.label()}", f"nodes[{k}]")
        return set(self.points)

    def describe(self) -> str:
        return f"x-shape({len(self.points)})"


FaultSpec = Union[RectangularFault, OverlappingFault, ArbitraryFault]


@dataclass(frozen=True)
class FaultComplex:
    shape: MeshShape
    faulty: FrozenSet[Coord]
    ring: FrozenSet[Coord]
    classification: FaultClass
    spec: Optional[FaultSpec] = None

    @property
    def fr(self) -> FrozenSet[Coord]:
        return self.faulty | self.ring

    @classmethod
    def empty(cls, shape: MeshShape) -> "FaultComplex":
        return cls(shape, frozenset(), frozenset(), FaultClass.NONE, None)

    def healthy_nodes(self) -> List[Coord]:
        return [v for v in self.shape.nodes() if v not in self.faulty]

    def obstacle_nodes(self, obstacle: Obstacle = Obstacle.RING) -> FrozenSet[Coord]:
        return self.fr if Obstacle(obstacle) is Obstacle.RING else self.faulty

    def outside_nodes(self, obstacle: Obstacle = Obstacle.RING) -> List[Coord]:
        region = self.obstacle_nodes(obstacle)
        return [v for v in self.shape.nodes() if v not in region]

    def describe(self) -> str:
        return self.spec.describe() if self.spec is not None else "-"

    def origin_label(self) -> str:
        if isinstance(self.spec, RectangularFault):
            return coord_label(self.spec.origin)
        if isinstance(self.spec, OverlappingFault):
            return " ".join(coord_label(r.origin) for r in self.spec.rects)
        if isinstance(self.spec, ArbitraryFault):
            return coord_label(tuple(min(v[i] for v in self.faulty) for i in range(self.shape.n)))
        return "-"


def coord_label(v: Coord) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def expand_rectangular(shape: MeshShape, origin: Sequence[int], extents: Sequence[int]) -> Set[Coord]:
    """Block of prod(extents) nodes whose componentwise-minimum corner is ``origin``."""
    origin, extents = tuple(origin), tuple(extents)
    if len(origin) != shape.n:
        raise FaultSpecError(f"expected {shape.n} components, got {len(origin)}", "origin")
    if len(extents) != shape.n:
        raise FaultSpecError(f"expected {shape.n} components, got {len(extents)}", "extents")
    for i, (o, l, r) in enumerate(zip(origin, extents, shape.radices)):
        if not 0 <= o < r:
            raise FaultSpecError(f"origin {o} is outside dimension {i} (radix {r})", f"origin[{i}]")
        if l < 1:
            raise FaultSpecError(f"extent {l} in dimension {i} must be at least 1", f"extents[{i}]")
        if l > r - 1 or o + l - 1 > r - 1:
            raise FaultSpecError(
                f"block spans {o}..{o + l - 1} in dimension {i} but the mesh allows 0..{r - 1} "
                f"with at most {r - 1} faulty nodes", f"extents[{i}]")
    ranges = [range(o, o + l) for o, l in zip(origin, extents)]
    return set(itertools.product(*ranges))


def ring_of(shape: MeshShape, faulty: Iterable[Coord]) -> Set[Coord]:
    """Healthy nodes at Chebyshev distance exactly 1 from the fault set."""
    faulty = set(faulty)
    offsets = [d for d in itertools.product((-1, 0, 1), repeat=shape.n) if any(d)]
    ring = set()
    for f in faulty:
        for d in offsets:
            v = tuple(x + dx for x, dx in zip(f, d))
            if v not in faulty and shape.contains(v):
                ring.add(v)
    return ring


def classify(shape: MeshShape, faulty: Iterable[Coord]) -> FaultClass:
    faulty = list(faulty)
    if not faulty:
        return FaultClass.NONE
    return FaultClass.CHAIN if any(is_boundary(shape, f) for f in faulty) else FaultClass.RING


def build_complex(shape: MeshShape, spec: Optional[FaultSpec]) -> FaultComplex:
    if spec is None:
        return FaultComplex.empty(shape)
    faulty = frozenset(spec.nodes(shape))
    ring = frozenset(ring_of(shape, faulty))
    complex_ = FaultComplex(shape, faulty, ring, classify(shape, faulty), spec)
    logger.debug("built %s: |F|=%d |R|=%d class=%s", spec.describe(), len(faulty), len(ring),
                 complex_.classification.value)
    return complex_


def extent_choices(shape: MeshShape, faulty_nodes: int) -> List[Tuple[int, ...]]:
    """Every block shape of exactly ``faulty_nodes`` nodes that fits the mesh."""
    return [extents for extents in itertools.product(*(range(1, r) for r in shape.radices))
            if math.prod(extents) == faulty_nodes]


def random_rectangular_fault(shape: MeshShape, rng: np.random.Generator, faulty_nodes: Optional[int] = None,
                             attempts: int = 100) -> RectangularFault:
    """A convex block placed uniformly at random, redrawn until the healthy nodes stay connected.

    With ``faulty_nodes`` the block shape is drawn among the shapes of that size,
    otherwise every extent is drawn from 1..radix-1.
    """
    choices = None
    if faulty_nodes is not None:
        choices = extent_choices(shape, faulty_nodes)
        if not choices:
            raise FaultSpecError(f"no block of {faulty_nodes} node(s) fits mesh {shape.label()}", "faulty_nodes")
    for _ in range(attempts):
        if choices is None:
            extents = tuple(int(rng.integers(1, r)) for r in shape.radices)
        else:
            extents = choices[int(rng.integers(len(choices)))]
        origin = tuple(int(rng.integers(0, r - l + 1)) for r, l in zip(shape.radices, extents))
        spec = RectangularFault(origin, extents)
        if connectivity_check(shape, spec.nodes(shape)):
            return spec
        logger.debug("discarded %s at %s: it disconnects the mesh", spec.describe(), coord_label(origin))
    raise FaultSpecError(f"no connected placement found in {attempts} attempts", "faulty_nodes")


def random_faults(shape: MeshShape, runs: int, seed: int,
                  faulty_nodes: Optional[int] = None) -> List[RectangularFault]:
    rng = np.random.default_rng(seed)
    return [random_rectangular_fault(shape, rng, faulty_nodes) for _ in range(runs)]


@dataclass(frozen=True)
class Violation:
    code: str
    severity: str  # "error" or "info"
    message: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(v.severity == "error" for v in self.violations)

    def codes(self) -> List[str]:
        return [v.code for v in self.violations]

    def add(self, code: str, severity: str, message: str):
        self.violations.append(Violation(code, severity, message))


def _blocks_touch(first: RectangularFault, second: RectangularFault) -> bool:
    (lo1, hi1), (lo2, hi2) = first.span(), second.span()
    gaps = (max(0, l2 - h1, l1 - h2) for l1, h1, l2, h2 in zip(lo1, hi1, lo2, hi2))
    return all(g <= 1 for g in gaps)


def validate(shape: MeshShape, complex_: FaultComplex) -> ValidationReport:
    report = ValidationReport()

    out_of_mesh = sorted(f for f in complex_.faulty if not shape.contains(f))
    if out_of_mesh:
        report.add("OUT_OF_MESH", "error", f"{len(out_of_mesh)} faulty node(s) outside the mesh, e.g. {out_of_mesh[0]}")

    if not complex_.faulty:
        report.add("EMPTY_FAULT_SET", "info", "no faulty nodes; every path misses")

    if len(complex_.faulty) >= shape.node_count:
        report.add("ALL_NODES_FAULTY", "error", "every node of the mesh is faulty")
    elif not out_of_mesh:
        try:
            if not connectivity_check(shape, complex_.faulty):
                report.add("DISCONNECTED", "error", "the fault set disconnects the healthy nodes")
        except MeshError as e:
            report.add("ALL_NODES_FAULTY", "error", str(e))

    outside = shape.node_count - len(complex_.fr)
    if complex_.faulty and outside == 0:
        report.add("FR_COVERS_MESH", "info", "FR covers all nodes; P_miss is 0 and P_hit is 1")
    elif complex_.faulty and outside == 1:
        report.add("FR_COVERS_MESH", "info", "only one node lies outside FR; P_miss is 0 and P_hit is 1")

    spec = complex_.spec
    if isinstance(spec, RectangularFault):
        report.add("CONVEX_BY_CONSTRUCTION", "info", "rectangular fault region is convex")
    elif isinstance(spec, OverlappingFault):
        for i, j in itertools.combinations(range(len(spec.rects)), 2):
            if not _blocks_touch(spec.rects[i], spec.rects[j]):
                report.add("DISJOINT_RECTANGLES", "error",
                           f"rectangles {i} and {j} neither intersect nor touch; they need separate rings")
    return report
