import math
import random
import unittest

import numpy as np
import pytest

from errors import FaultSpecError
from fault_model import (ArbitraryFault, FaultClass, FaultComplex, Obstacle, OverlappingFault, RectangularFault,
                         build_complex, classify, expand_rectangular, extent_choices, random_faults,
                         random_rectangular_fault, ring_of, validate)
from mesh import MeshShape
from scenario_loader import table2_row


class RectangularExpansionTest(unittest.TestCase):
    def test_block_size(self):
        nodes = expand_rectangular(MeshShape((7, 8, 11)), (2, 2, 2), (2, 1, 3))
        self.assertEqual(len(nodes), 6)
        self.assertIn((3, 2, 4), nodes)
        self.assertNotIn((4, 2, 2), nodes)

    def test_extent_too_large_names_dimension(self):
        with self.assertRaises(FaultSpecError) as ctx:
            expand_rectangular(MeshShape((7, 8, 11)), (0, 0, 0), (9, 1, 1))
        self.assertEqual(ctx.exception.field, "extents[0]")

    def test_block_running_past_the_edge(self):
        with self.assertRaises(FaultSpecError) as ctx:
            expand_rectangular(MeshShape((5, 5)), (3, 0), (3, 1))
        self.assertEqual(ctx.exception.field, "extents[0]")

    def test_zero_extent(self):
        with self.assertRaises(FaultSpecError):
            expand_rectangular(MeshShape((5, 5)), (1, 1), (0, 1))

    def test_origin_outside(self):
        with self.assertRaises(FaultSpecError) as ctx:
            expand_rectangular(MeshShape((5, 5)), (1, 5), (1, 1))
        self.assertEqual(ctx.exception.field, "origin[1]")

    def test_wrong_dimensionality(self):
        with self.assertRaises(FaultSpecError):
            expand_rectangular(MeshShape((5, 5)), (1, 1, 1), (1, 1, 1))


class RingTest(unittest.TestCase):
    def test_single_interior_fault_has_eight_ring_nodes(self):
        ring = ring_of(MeshShape((5, 5)), {(2, 2)})
        self.assertEqual(ring, {(x, y) for x in (1, 2, 3) for y in (1, 2, 3)} - {(2, 2)})

    def test_ring_includes_diagonals_in_3d(self):
        ring = ring_of(MeshShape((5, 5, 5)), {(2, 2, 2)})
        self.assertEqual(len(ring), 26)
        self.assertIn((1, 1, 1), ring)

    def test_ring_is_clipped_at_the_boundary(self):
        ring = ring_of(MeshShape((4, 4)), {(0, 0)})
        self.assertEqual(ring, {(1, 0), (0, 1), (1, 1)})

    def test_ring_and_fault_are_disjoint(self):
        shape = MeshShape((6, 6, 6))
        faulty = expand_rectangular(shape, (1, 2, 1), (2, 2, 3))
        self.assertTrue(ring_of(shape, faulty).isdisjoint(faulty))


@pytest.mark.parametrize("row, expected", [
    (1, FaultClass.CHAIN),
    (2, FaultClass.RING),
    (3, FaultClass.RING),
    (4, FaultClass.CHAIN),
    (7, FaultClass.CHAIN),
    (8, FaultClass.RING),
    (9, FaultClass.CHAIN),
    (10, FaultClass.RING),
])
def test_classification_of_published_rows(row, expected):
    assert table2_row(row).scenario().build().classification is expected


def test_classify_empty_set():
    assert classify(MeshShape((3, 3)), set()) is FaultClass.NONE


class FaultComplexTest(unittest.TestCase):
    def test_fr_of_single_fault(self):
        complex_ = build_complex(MeshShape((4, 4)), RectangularFault((1, 1), (1, 1)))
        self.assertEqual(len(complex_.fr), 9)
        self.assertEqual(len(complex_.outside_nodes()), 7)
        self.assertEqual(len(complex_.healthy_nodes()), 15)
        self.assertIs(complex_.classification, FaultClass.RING)

    def test_empty_complex(self):
        complex_ = build_complex(MeshShape((3, 3)), None)
        self.assertEqual(complex_, FaultComplex.empty(MeshShape((3, 3))))
        self.assertEqual(complex_.fr, frozenset())
        self.assertEqual(complex_.describe(), "-")

    def test_labels(self):
        complex_ = build_complex(MeshShape((7, 8, 11)), RectangularFault((2, 2, 2), (2, 1, 3)))
        self.assertEqual(complex_.describe(), "2×1×3")
        self.assertEqual(complex_.origin_label(), "(2,2,2)")

    def test_arbitrary_fault_labels(self):
        spec = ArbitraryFault(frozenset({(1, 3), (2, 2), (3, 1)}))
        complex_ = build_complex(MeshShape((5, 5)), spec)
        self.assertEqual(complex_.describe(), "x-shape(3)")
        self.assertEqual(complex_.origin_label(), "(1,1)")

    def test_arbitrary_fault_outside_mesh(self):
        with self.assertRaises(FaultSpecError):
            build_complex(MeshShape((3, 3)), ArbitraryFault(frozenset({(3, 3)})))

    def test_overlapping_fault_is_union(self):
        spec = OverlappingFault((RectangularFault((1, 1), (2, 2)), RectangularFault((2, 2), (2, 2))))
        complex_ = build_complex(MeshShape((6, 6)), spec)
        self.assertEqual(len(complex_.faulty), 7)

    def test_overlapping_fault_needs_two_rectangles(self):
        with self.assertRaises(FaultSpecError):
            OverlappingFault((RectangularFault((1, 1), (1, 1)),))

    def test_overlapping_fault_reports_member(self):
        spec = OverlappingFault((RectangularFault((1, 1), (1, 1)), RectangularFault((1, 1), (5, 1))))
        with self.assertRaises(FaultSpecError) as ctx:
            build_complex(MeshShape((5, 5)), spec)
        self.assertTrue(ctx.exception.field.startswith("rects[1]"))


class ValidateTest(unittest.TestCase):
    def test_interior_block_passes(self):
        report = validate(MeshShape((7, 8, 11)), table2_row(2).scenario().build())
        self.assertTrue(report.passed)
        self.assertIn("CONVEX_BY_CONSTRUCTION", report.codes())

    def test_disconnecting_fault_fails(self):
        shape = MeshShape((3, 3))
        report = validate(shape, build_complex(shape, ArbitraryFault(frozenset({(0, 1), (1, 0)}))))
        self.assertFalse(report.passed)
        self.assertIn("DISCONNECTED", report.codes())

    def test_fr_covering_mesh_is_informational(self):
        report = validate(MeshShape((3, 2, 2)), table2_row(1).scenario().build())
        self.assertTrue(report.passed)
        self.assertIn("FR_COVERS_MESH", report.codes())

    def test_empty_fault_set(self):
        shape = MeshShape((3, 3))
        report = validate(shape, FaultComplex.empty(shape))
        self.assertTrue(report.passed)
        self.assertEqual(report.codes(), ["EMPTY_FAULT_SET"])

    def test_all_nodes_faulty(self):
        shape = MeshShape((2, 2))
        report = validate(shape, build_complex(shape, ArbitraryFault(frozenset(shape.nodes()))))
        self.assertFalse(report.passed)
        self.assertIn("ALL_NODES_FAULTY", report.codes())

    def test_disjoint_rectangles(self):
        shape = MeshShape((8, 8))
        spec = OverlappingFault((RectangularFault((1, 1), (1, 1)), RectangularFault((5, 5), (1, 1))))
        report = validate(shape, build_complex(shape, spec))
        self.assertFalse(report.passed)
        self.assertIn("DISJOINT_RECTANGLES", report.codes())

    def test_touching_rectangles(self):
        shape = MeshShape((8, 8))
        spec = OverlappingFault((RectangularFault((1, 1), (1, 1)), RectangularFault((2, 2), (1, 1))))
        report = validate(shape, build_complex(shape, spec))
        self.assertTrue(report.passed)


def _chebyshev(u, v) -> int:
    return max(abs(x - y) for x, y in zip(u, v))


class RingPropertyTest(unittest.TestCase):
    def test_ring_is_exactly_the_chebyshev_shell(self):
        rng = random.Random(7)
        for _ in range(40):
            shape = MeshShape(tuple(rng.randint(2, 5) for _ in range(rng.randint(1, 3))))
            nodes = list(shape.nodes())
            faulty = set(rng.sample(nodes, rng.randint(1, max(1, len(nodes) // 4))))
            ring = ring_of(shape, faulty)
            for v in nodes:
                if v in faulty:
                    self.assertNotIn(v, ring)
                    continue
                near = min(_chebyshev(v, f) for f in faulty) == 1
                self.assertEqual(v in ring, near, (shape.radices, v))

    def test_interior_block_sizes(self):
        rng = random.Random(8)
        for _ in range(40):
            n = rng.randint(1, 4)
            extents = tuple(rng.randint(1, 3) for _ in range(n))
            radices = tuple(l + rng.randint(2, 4) for l in extents)
            origin = tuple(rng.randint(1, r - l - 1) for r, l in zip(radices, extents))
            complex_ = build_complex(MeshShape(radices), RectangularFault(origin, extents))
            outer, inner = math.prod(l + 2 for l in extents), math.prod(extents)
            self.assertEqual(len(complex_.fr), outer)
            self.assertEqual(len(complex_.ring), outer - inner)
            self.assertIs(complex_.classification, FaultClass.RING)

    def test_build_does_not_depend_on_input_order(self):
        rng = random.Random(9)
        shape = MeshShape((7, 6, 5))
        for _ in range(20):
            rects = [RectangularFault(tuple(rng.randint(1, 3) for _ in range(3)),
                                      tuple(rng.randint(1, 2) for _ in range(3))) for _ in range(3)]
            shuffled = rects[:]
            rng.shuffle(shuffled)
            first = build_complex(shape, OverlappingFault(tuple(rects)))
            second = build_complex(shape, OverlappingFault(tuple(shuffled)))
            self.assertEqual((first.faulty, first.ring, first.classification),
                             (second.faulty, second.ring, second.classification))

            points = sorted(first.faulty)
            rng.shuffle(points)
            third = build_complex(shape, ArbitraryFault(frozenset(points)))
            self.assertEqual((third.faulty, third.ring), (first.faulty, first.ring))


class ObstacleTest(unittest.TestCase):
    def test_regions(self):
        complex_ = build_complex(MeshShape((4, 4)), RectangularFault((1, 1), (1, 1)))
        self.assertEqual(complex_.obstacle_nodes(Obstacle.RING), complex_.fr)
        self.assertEqual(complex_.obstacle_nodes("fault"), complex_.faulty)
        self.assertEqual(complex_.outside_nodes(Obstacle.FAULT), complex_.healthy_nodes())
        self.assertIs(Obstacle.RING.other(), Obstacle.FAULT)
        self.assertIs(Obstacle.FAULT.other(), Obstacle.RING)


class RandomFaultTest(unittest.TestCase):
    def test_extent_choices(self):
        self.assertEqual(extent_choices(MeshShape((3, 3)), 2), [(1, 2), (2, 1)])
        self.assertEqual(extent_choices(MeshShape((3, 3)), 5), [])

    def test_requested_size_and_connectivity(self):
        shape = MeshShape((6, 5, 4))
        rng = np.random.default_rng(3)
        for size in (1, 2, 4, 6, 12):
            spec = random_rectangular_fault(shape, rng, size)
            complex_ = build_complex(shape, spec)
            self.assertEqual(len(complex_.faulty), size)
            self.assertTrue(validate(shape, complex_).passed)

    def test_random_shapes_fit_the_mesh(self):
        shape = MeshShape((4, 7))
        for spec in random_faults(shape, 30, seed=11):
            self.assertTrue(validate(shape, build_complex(shape, spec)).passed)

    def test_same_seed_same_faults(self):
        shape = MeshShape((7, 8, 11))
        first = random_faults(shape, 5, seed=2, faulty_nodes=6)
        self.assertEqual(first, random_faults(shape, 5, seed=2, faulty_nodes=6))
        self.assertNotEqual(random_faults(shape, 5, seed=2), random_faults(shape, 5, seed=3))

    def test_impossible_size(self):
        with self.assertRaises(FaultSpecError) as ctx:
            random_rectangular_fault(MeshShape((3, 3)), np.random.default_rng(0), 5)
        self.assertEqual(ctx.exception.field, "faulty_nodes")
