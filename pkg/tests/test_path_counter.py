import itertools
import math
import random
import unittest

import pytest
import sympy

from errors import EnumerationCapError, RestrictionError
from mesh import MeshShape, bounding_box
from path_counter import (RestrictionSet, avoid_count_det, avoid_count_dp, avoid_counts_from, avoid_matrix,
                          brute_force_avoid, determinant, enumerate_minimal_paths, lm, lt, multinomial,
                          restriction, signed_delta)


def _random_case(rng: random.Random, max_volume: int = 60):
    """Random mesh, endpoint pair and forbidden set inside the pair's box."""
    while True:
        n = rng.choice((2, 3))
        shape = MeshShape(tuple(rng.randint(2, 5) for _ in range(n)))
        a = tuple(rng.randrange(r) for r in shape.radices)
        b = tuple(rng.randrange(r) for r in shape.radices)
        box = bounding_box(a, b)
        if box.volume > max_volume:
            continue
        inner = [v for v in box.nodes() if v != a and v != b]
        forbidden = rng.sample(inner, min(len(inner), rng.randint(0, 5)))
        return shape, a, b, forbidden


class MultinomialTest(unittest.TestCase):
    def test_values(self):
        self.assertEqual(lt((0, 0), (2, 2)), 6)
        self.assertEqual(lt((1, 2, 3), (1, 2, 3)), 1)
        self.assertEqual(lt((0, 0, 0), (2, 2, 2)), 90)
        self.assertEqual(lt((3, 0), (0, 3)), 20)
        self.assertEqual(multinomial([2, 2]), 6)
        self.assertEqual(multinomial([0, 0]), 1)

    def test_negative_component_gives_zero(self):
        self.assertEqual(multinomial([2, -1]), 0)

    def test_large_values_stay_exact(self):
        expected = math.factorial(60) // math.factorial(20) ** 3
        self.assertGreater(expected, 2 ** 64)
        self.assertEqual(lt((0, 0, 0), (20, 20, 20)), expected)

    def test_signed_delta(self):
        a, b = (0, 0), (3, 3)
        self.assertEqual(signed_delta(a, b, (2, 1), (1, 2)), (-1, 1))
        self.assertEqual(lm(a, b, (2, 1), (1, 2)), 0)
        self.assertEqual(signed_delta((3, 3), (0, 0), (2, 2), (1, 0)), (1, 2))
        self.assertEqual(lm((3, 3), (0, 0), (2, 2), (1, 0)), 3)


class DeterminantTest(unittest.TestCase):
    def test_small_matrices(self):
        self.assertEqual(determinant([]), 1)
        self.assertEqual(determinant([[7]]), 7)
        self.assertEqual(determinant([[6, 2], [2, 1]]), 2)
        self.assertEqual(determinant([[0, 1], [1, 0]]), -1)

    def test_matches_sympy_bareiss(self):
        rng = random.Random(3)
        for _ in range(60):
            size = rng.randint(1, 8)
            matrix = [[rng.randint(-9, 9) for _ in range(size)] for _ in range(size)]
            expected = int(sympy.Matrix(matrix).det(method="bareiss"))
            self.assertEqual(determinant(matrix), expected, matrix)

    def test_zero_pivot_needs_row_swap(self):
        matrix = [[0, 1, 2, 3, 4], [1, 0, 1, 2, 3], [2, 1, 0, 1, 2], [3, 2, 1, 0, 1], [4, 3, 2, 1, 0]]
        self.assertEqual(determinant(matrix), int(sympy.Matrix(matrix).det(method="bareiss")))


class AvoidCountTest(unittest.TestCase):
    def test_single_center_point(self):
        self.assertEqual(avoid_count_det((0, 0), (2, 2), [(1, 1)]), 2)
        self.assertEqual(avoid_matrix((0, 0), (2, 2), [(1, 1)]), [[6, 2], [2, 1]])

    def test_two_blocking_points(self):
        a, b = (0, 0), (2, 2)
        self.assertEqual(avoid_count_det(a, b, [(1, 0), (1, 1)]), 1)
        self.assertEqual(avoid_count_dp(MeshShape((3, 3)), a, b, {(1, 0), (1, 1)}), 1)

    def test_cube_center(self):
        shape = MeshShape((3, 3, 3))
        a, b = (0, 0, 0), (2, 2, 2)
        self.assertEqual(avoid_count_det(a, b, [(1, 1, 1)]), 54)
        self.assertEqual(avoid_count_dp(shape, a, b, {(1, 1, 1)}), 54)
        self.assertEqual(brute_force_avoid(shape, a, b, {(1, 1, 1)}), 54)

    def test_no_points_gives_lt(self):
        self.assertEqual(avoid_count_det((4, 0), (0, 3), []), lt((4, 0), (0, 3)))

    def test_three_engines_agree_on_random_cases(self):
        rng = random.Random(2024)
        for _ in range(500):
            shape, a, b, forbidden = _random_case(rng)
            det = avoid_count_det(a, b, restriction(shape, a, b, forbidden))
            dp = avoid_count_dp(shape, a, b, forbidden)
            brute = brute_force_avoid(shape, a, b, forbidden)
            self.assertEqual(det, dp, (shape.radices, a, b, forbidden))
            self.assertEqual(dp, brute, (shape.radices, a, b, forbidden))

    def test_relabeling_invariance(self):
        rng = random.Random(5)
        for _ in range(200):
            shape, a, b, forbidden = _random_case(rng)
            expected = avoid_count_det(a, b, sorted(forbidden))
            shuffled = list(forbidden)
            rng.shuffle(shuffled)
            self.assertEqual(avoid_count_det(a, b, shuffled), expected)

    def test_out_of_box_points_do_not_change_the_count(self):
        rng = random.Random(6)
        for _ in range(200):
            shape, a, b, forbidden = _random_case(rng)
            box = bounding_box(a, b)
            outside = [v for v in shape.nodes() if not box.contains(v)]
            extra = rng.sample(outside, min(len(outside), rng.randint(1, 4)))
            expected = avoid_count_det(a, b, forbidden)
            self.assertEqual(avoid_count_det(a, b, list(forbidden) + extra), expected)

    def test_more_forbidden_points_never_add_paths(self):
        rng = random.Random(7)
        for _ in range(200):
            shape, a, b, forbidden = _random_case(rng)
            box = [v for v in bounding_box(a, b).nodes() if v != a and v != b and v not in forbidden]
            larger = list(forbidden) + rng.sample(box, min(len(box), rng.randint(1, 3)))
            smaller = avoid_count_dp(shape, a, b, forbidden)
            self.assertLessEqual(avoid_count_dp(shape, a, b, larger), smaller)
            self.assertLessEqual(avoid_count_det(a, b, restriction(shape, a, b, larger)), smaller)
            self.assertLessEqual(smaller, lt(a, b))
            self.assertGreaterEqual(smaller, 0)


class RestrictionTest(unittest.TestCase):
    def test_only_points_in_box_sorted(self):
        shape = MeshShape((5, 5))
        fr = {(3, 2), (1, 1), (4, 0), (2, 1)}
        result = restriction(shape, (0, 0), (3, 3), fr)
        self.assertEqual(result.points, ((1, 1), (2, 1), (3, 2)))
        self.assertEqual(len(result), 3)

    def test_endpoint_in_fr(self):
        with self.assertRaises(RestrictionError):
            restriction(MeshShape((5, 5)), (1, 1), (3, 3), {(1, 1)})

    def test_malformed_sets(self):
        with self.assertRaises(RestrictionError):
            RestrictionSet((0, 0), (2, 2), ((1, 1), (1, 1)))
        with self.assertRaises(RestrictionError):
            RestrictionSet((0, 0), (2, 2), ((2, 2),))
        with self.assertRaises(RestrictionError):
            RestrictionSet((0, 0), (2, 2), ((3, 1),))

    def test_forbidden_endpoint_in_dp(self):
        with self.assertRaises(RestrictionError):
            avoid_count_dp(MeshShape((3, 3)), (0, 0), (2, 2), {(2, 2)})


def test_sweep_from_source_matches_per_pair_dp():
    rng = random.Random(9)
    for _ in range(20):
        shape = MeshShape(tuple(rng.randint(2, 4) for _ in range(rng.choice((2, 3)))))
        nodes = list(shape.nodes())
        a = rng.choice(nodes)
        others = [v for v in nodes if v != a]
        forbidden = set(rng.sample(others, min(len(others), rng.randint(0, 4))))
        counts = avoid_counts_from(shape, a, forbidden)
        assert set(counts) == set(nodes)
        for b in nodes:
            if b in forbidden:
                assert counts[b] == 0
            else:
                assert counts[b] == avoid_count_dp(shape, a, b, forbidden)


@pytest.mark.parametrize("a, b", [((0, 0), (2, 2)), ((3, 0, 1), (0, 2, 2)), ((1, 1), (1, 1))])
def test_enumeration_matches_lt(a, b):
    paths = list(enumerate_minimal_paths(a, b))
    assert len(paths) == lt(a, b)
    assert len(set(paths)) == len(paths)
    for path in paths:
        assert path[0] == a and path[-1] == b
        for u, v in zip(path, path[1:]):
            assert sum(abs(x - y) for x, y in zip(u, v)) == 1


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        brute_force_avoid(MeshShape((3, 3)), (0, 0), (2, 2), set(), cap=5)
    assert brute_force_avoid(MeshShape((3, 3)), (0, 0), (2, 2), set(), cap=6) == 6


def test_every_point_blocks_a_corridor():
    shape = MeshShape((2, 5))
    a, b = (0, 0), (0, 4)
    assert avoid_count_dp(shape, a, b, {(0, 2)}) == 0
    assert avoid_count_det(a, b, [(0, 2)]) == 0
    assert list(itertools.islice(enumerate_minimal_paths(a, b), 2)) == [tuple((0, y) for y in range(5))]
