"""Exact minimal-path counting with and without forbidden nodes.

Three independent engines count the minimal a->b paths that avoid a node set:
the forbidden-point determinant, a dynamic program over the bounding box and a
plain enumerator. All arithmetic is on Python ints.
"""
import functools
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import config
from errors import EnumerationCapError, RestrictionError
from mesh import Coord, MeshShape, bounding_box, delta

logger = logging.getLogger(__name__)


@functools.lru_cache(maxsize=None)
def _multinomial_sorted(deltas: Tuple[int, ...]) -> int:
    total, result = 0, 1
    for d in deltas:
        total += d
        result *= math.comb(total, d)
    return result


def multinomial(deltas: Iterable[int]) -> int:
    """(sum d)! / prod d!, or 0 as soon as one component is negative."""
    deltas = tuple(deltas)
    if any(d < 0 for d in deltas):
        return 0
    return _multinomial_sorted(tuple(sorted(d for d in deltas if d)))


def lt(a: Coord, b: Coord) -> int:
    return multinomial(delta(a, b))


def signed_delta(a: Coord, b: Coord, source: Coord, target: Coord) -> Tuple[int, ...]:
    """Per-dimension move counts from ``source`` to ``target``, negated where the
    move runs against the a->b direction."""
    values = []
    for xa, xb, xs, xt in zip(a, b, source, target):
        forward = xb - xa >= 0
        move = xt - xs
        collinear = (forward and move >= 0) or (not forward and move < 0)
        values.append(abs(move) if collinear else -abs(move))
    return tuple(values)


def lm(a: Coord, b: Coord, source: Coord, target: Coord) -> int:
    return multinomial(signed_delta(a, b, source, target))


@dataclass(frozen=True)
class RestrictionSet:
    a: Coord
    b: Coord
    points: Tuple[Coord, ...]

    def __post_init__(self):
        box = bounding_box(self.a, self.b)
        if len(set(self.points)) != len(self.points):
            raise RestrictionError("restriction set contains duplicate points")
        for p in self.points:
            if p == self.a or p == self.b:
                raise RestrictionError(f"restriction point {p} coincides with an endpoint")
            if not box.contains(p):
                raise RestrictionError(f"restriction point {p} lies outside the box of {self.a} -> {self.b}")

    def __len__(self):
        return len(self.points)


def restriction(shape: MeshShape, a: Coord, b: Coord, fr: Iterable[Coord]) -> RestrictionSet:
    """FR nodes inside the bounding box of a and b, in lexicographic order."""
    a, b = shape.require(a), shape.require(b)
    fr = fr if isinstance(fr, (set, frozenset)) else set(fr)
    if a in fr or b in fr:
        raise RestrictionError(f"endpoint of {a} -> {b} lies in FR")
    box = bounding_box(a, b)
    return RestrictionSet(a, b, tuple(sorted(p for p in fr if box.contains(p))))


def _cofactor_det(matrix: List[List[int]]) -> int:
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    if size == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = 0
    for col, entry in enumerate(matrix[0]):
        if entry == 0:
            continue
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        total += (-1) ** col * entry * _cofactor_det(minor)
    return total


def _bareiss_det(matrix: List[List[int]]) -> int:
    m = [list(row) for row in matrix]
    size = len(m)
    sign, previous = 1, 1
    for k in range(size - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, size):
            row, head = m[i], m[i][k]
            for j in range(k + 1, size):
                row[j] = (row[j] * pivot - head * m[k][j]) // previous
        previous = pivot
    return sign * m[size - 1][size - 1]


def determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant: cofactor expansion up to 4x4, Bareiss beyond."""
    matrix = [list(row) for row in matrix]
    if not matrix:
        return 1
    if len(matrix) <= 4:
        return _cofactor_det(matrix)
    return _bareiss_det(matrix)


def avoid_matrix(a: Coord, b: Coord, points: Sequence[Coord]) -> List[List[int]]:
    nodes = [a] + list(points)
    rows = [[lm(a, b, c, b) for c in nodes]]
    for target in nodes[1:]:
        rows.append([lm(a, b, c, target) for c in nodes])
    return rows


def avoid_count_det(a: Coord, b: Coord, points: Union[RestrictionSet, Sequence[Coord]]) -> int:
    """Minimal a->b paths that visit none of ``points``, as one determinant."""
    if isinstance(points, RestrictionSet):
        points = points.points
    value = determinant(avoid_matrix(a, b, points))
    if value < 0:
        raise RestrictionError(f"negative determinant {value} for {a} -> {b}; restriction set is malformed")
    return value


def _sweep(a: Coord, signs: Sequence[int], extents: Sequence[int],
           forbidden) -> Dict[Tuple[int, ...], int]:
    """Avoid counts from ``a`` to every node of one orthant, keyed by offset.

    Offsets are visited in lexicographic order, so each predecessor is final
    before its successors read it.
    """
    counts: Dict[Tuple[int, ...], int] = {}
    for offset in itertools.product(*(range(e + 1) for e in extents)):
        v = tuple(x + s * o for x, s, o in zip(a, signs, offset))
        if v in forbidden:
            counts[offset] = 0
            continue
        total = 0
        for i, o in enumerate(offset):
            if o:
                total += counts[offset[:i] + (o - 1,) + offset[i + 1:]]
        counts[offset] = total if any(offset) else 1
    return counts


def avoid_count_dp(shape: MeshShape, a: Coord, b: Coord, forbidden: Iterable[Coord]) -> int:
    a, b = shape.require(a), shape.require(b)
    forbidden = forbidden if isinstance(forbidden, (set, frozenset)) else set(forbidden)
    if a in forbidden or b in forbidden:
        raise RestrictionError(f"endpoint of {a} -> {b} is forbidden")
    signs = tuple(1 if xb >= xa else -1 for xa, xb in zip(a, b))
    extents = delta(a, b)
    return _sweep(a, signs, extents, forbidden)[extents]


def avoid_counts_from(shape: MeshShape, a: Coord, forbidden: Iterable[Coord]) -> Dict[Coord, int]:
    """Avoid counts from ``a`` to every node of the mesh, one orthant sweep per sign pattern."""
    a = shape.require(a)
    forbidden = forbidden if isinstance(forbidden, (set, frozenset)) else set(forbidden)
    result: Dict[Coord, int] = {}
    for signs in itertools.product((1, -1), repeat=shape.n):
        extents = [r - 1 - x if s > 0 else x for x, r, s in zip(a, shape.radices, signs)]
        for offset, count in _sweep(a, signs, extents, forbidden).items():
            result[tuple(x + s * o for x, s, o in zip(a, signs, offset))] = count
    return result


def enumerate_minimal_paths(a: Coord, b: Coord) -> Iterator[Tuple[Coord, ...]]:
    """Every minimal a->b path, depth first, as a tuple of nodes from a to b."""
    steps = [1 if xb >= xa else -1 for xa, xb in zip(a, b)]
    path = [tuple(a)]

    def extend(current: Coord):
        if current == tuple(b):
            yield tuple(path)
            return
        for i, (x, target) in enumerate(zip(current, b)):
            if x != target:
                nxt = current[:i] + (x + steps[i],) + current[i + 1:]
                path.append(nxt)
                yield from extend(nxt)
                path.pop()

    yield from extend(tuple(a))


def brute_force_avoid(shape: MeshShape, a: Coord, b: Coord, forbidden: Iterable[Coord],
                      cap: Optional[int] = None) -> int:
    a, b = shape.require(a), shape.require(b)
    cap = config.ENUMERATION_CAP if cap is None else cap
    total = lt(a, b)
    if total > cap:
        raise EnumerationCapError(f"{total} minimal paths from {a} to {b} exceed the enumeration cap {cap}")
    logger.debug("enumerating %d minimal paths from %s to %s", total, a, b)
    forbidden = set(forbidden)
    return sum(1 for path in enumerate_minimal_paths(a, b) if forbidden.isdisjoint(path))
