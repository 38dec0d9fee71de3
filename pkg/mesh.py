"""Geometry of an n-D mesh: coordinates, node and link counts, neighborhoods,
bounding boxes, deltas and connectivity of the fault-free part.

Coordinates are 0-based tuples, ``0 <= x[i] <= R[i] - 1``.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Set, Tuple

import networkx as nx

from errors import MeshError

logger = logging.getLogger(__name__)

Coord = Tuple[int, ...]


@dataclass(frozen=True)
class MeshShape:
    radices: Tuple[int, ...]

    def __post_init__(self):
        radices = tuple(int(r) for r in self.radices)
        object.__setattr__(self, "radices", radices)
        if len(radices) < 1:
            raise MeshError("a mesh needs at least one dimension")
        for i, r in enumerate(radices):
            if r < 2:
                raise MeshError(f"radix R_{i} = {r} is below 2")

    @property
    def n(self) -> int:
        return len(self.radices)

    @property
    def node_count(self) -> int:
        return math.prod(self.radices)

    def contains(self, v: Coord) -> bool:
        return len(v) == self.n and all(0 <= x < r for x, r in zip(v, self.radices))

    def require(self, v: Coord) -> Coord:
        v = tuple(v)
        if not self.contains(v):
            raise MeshError(f"{v} is not a node of mesh {self.label()}")
        return v

    def nodes(self) -> Iterator[Coord]:
        """All nodes in lexicographic order."""
        return itertools.product(*(range(r) for r in self.radices))

    def label(self) -> str:
        return "×".join(str(r) for r in self.radices)


@dataclass(frozen=True)
class Box:
    """Sub-mesh spanned by two corners; every minimal path between the corners stays inside it."""
    lo: Coord
    hi: Coord

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(l > h for l, h in zip(self.lo, self.hi)):
            raise MeshError(f"box corners {self.lo}, {self.hi} are not ordered")

    @property
    def volume(self) -> int:
        return math.prod(h - l + 1 for l, h in zip(self.lo, self.hi))

    def contains(self, v: Coord) -> bool:
        return all(l <= x <= h for x, l, h in zip(v, self.lo, self.hi))

    def nodes(self) -> Iterator[Coord]:
        return itertools.product(*(range(l, h + 1) for l, h in zip(self.lo, self.hi)))


def node_count(shape: MeshShape) -> int:
    return shape.node_count


def _elementary_symmetric(values: Tuple[int, ...], k: int) -> int:
    return sum(math.prod(c) for c in itertools.combinations(values, k))


def link_count_formula(shape: MeshShape) -> int:
    """Link count from the inclusion-exclusion over radix products.

    Every node offers n link slots (n * e_n); each dimension loses one slot per
    node on its upper face, which is the e_{n-1} term.
    """
    n = shape.n
    return n * _elementary_symmetric(shape.radices, n) - _elementary_symmetric(shape.radices, n - 1)


def link_count_printed_series(shape: MeshShape) -> int:
    """The full alternating series with every lower-order term kept.

    Agrees with the real link count only for n == 2; kept so the gap stays measurable.
    """
    n = shape.n
    total = n * _elementary_symmetric(shape.radices, n)
    for k in range(1, n):
        total += (-1) ** (n - k) * _elementary_symmetric(shape.radices, k)
    return total


def link_count_direct(shape: MeshShape) -> int:
    total = 0
    for i, r in enumerate(shape.radices):
        others = math.prod(shape.radices[:i] + shape.radices[i + 1:])
        total += (r - 1) * others
    return total


def neighbors(shape: MeshShape, v: Coord) -> Set[Coord]:
    v = shape.require(v)
    result = set()
    for i, r in enumerate(shape.radices):
        for step in (-1, 1):
            x = v[i] + step
            if 0 <= x < r:
                result.add(v[:i] + (x,) + v[i + 1:])
    return result


def is_boundary(shape: MeshShape, v: Coord) -> bool:
    return any(x == 0 or x == r - 1 for x, r in zip(v, shape.radices))


def bounding_box(a: Coord, b: Coord) -> Box:
    if len(a) != len(b):
        raise MeshError(f"dimensionality mismatch: {a} vs {b}")
    return Box(tuple(map(min, a, b)), tuple(map(max, a, b)))


def delta(a: Coord, b: Coord) -> Tuple[int, ...]:
    if len(a) != len(b):
        raise MeshError(f"dimensionality mismatch: {a} vs {b}")
    return tuple(abs(y - x) for x, y in zip(a, b))


def _surviving_graph(shape: MeshShape, faulty: Iterable[Coord]) -> nx.Graph:
    faulty = set(faulty)
    graph = nx.Graph()
    for v in shape.nodes():
        if v in faulty:
            continue
        graph.add_node(v)
        for i, r in enumerate(shape.radices):
            if v[i] + 1 < r:
                u = v[:i] + (v[i] + 1,) + v[i + 1:]
                if u not in faulty:
                    graph.add_edge(v, u)
    return graph


def connectivity_check(shape: MeshShape, faulty: Iterable[Coord]) -> bool:
    """True when the nodes left after removing ``faulty`` still form one component."""
    graph = _surviving_graph(shape, faulty)
    if graph.number_of_nodes() == 0:
        raise MeshError("every node of the mesh is faulty")
    connected = nx.is_connected(graph)
    if not connected:
        logger.debug("fault set splits %s into %d components", shape.label(),
                     nx.number_connected_components(graph))
    return connected
