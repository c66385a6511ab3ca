"""Tests for closure_util."""

from itertools import product

import random
import unittest

from simplex_dilation_utils import closure_util, coverage_util, strategy_util
from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    DegenerateSimplexError,
    PreconditionError,
)
from simplex_dilation_utils.lattice_util import LatticeSimplex
from simplex_dilation_utils.strategy_util import CaseTag, StrategyReport
from tests.simplex_fixtures import EXPENSIVE, edge5_simplex, unit_simplex


def reeve_simplex():
    """
    Builds the height 3 Reeve tetrahedron, which is not integrally closed.
    """
    return LatticeSimplex(((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 3)))


def random_simplex(rng, dim, high, scales=(1,)):
    """
    Draws a full-dimensional simplex with coordinates in [0, high], scaled
    by a random element of scales.
    """
    while True:
        scale = rng.choice(scales)
        vertices = [
            tuple(scale * rng.randint(0, high) for _ in range(dim))
            for _ in range(dim + 1)
        ]
        try:
            return LatticeSimplex(vertices)
        except DegenerateSimplexError:
            continue


class ClosureCheckTest(unittest.TestCase):
    """Tests for the brute-force closure check."""

    def test_unit_tetrahedron(self):
        """Twice the unit tetrahedron is closed."""

        report = closure_util.is_integrally_closed_up_to(unit_simplex(3, 2), 3)
        self.assertTrue(report.closed)
        self.assertEqual(report.counts, (10, 35, 84, 165))

        df = report.to_dataframe()
        self.assertEqual(list(df["r"]), [1, 2, 3, 4])
        self.assertEqual(list(df["failures"]), [0, 0, 0, 0])

    def test_reeve_fails(self):
        """The Reeve tetrahedron misses points of its second dilate."""

        report = closure_util.is_integrally_closed_up_to(reeve_simplex(), 1)
        self.assertFalse(report.closed)
        self.assertEqual(report.counts[0], 4)
        self.assertIn((1, (1, 1, 1)), report.failures)
        self.assertIn((1, (1, 1, 2)), report.failures)
        self.assertEqual(
            report.to_dataframe()["failures"].iloc[1], len(report.failures)
        )

    def test_triangles_are_closed(self):
        """Lattice triangles are closed up to r = 4."""

        rng = random.Random(5)
        for _ in range(50):
            simplex = random_simplex(rng, 2, 12)
            report = closure_util.is_integrally_closed_up_to(
                simplex, 4, workers=2
            )
            self.assertTrue(report.closed, msg=str(simplex.vertices))
            self.assertEqual(len(report.counts), 5)

    def test_budget(self):
        """Dilates with too many points are rejected."""

        with self.assertRaises(BudgetExceededError):
            closure_util.is_integrally_closed_up_to(
                unit_simplex(3, 10), 2, max_points=100
            )

    def test_invalid_r_max(self):
        """r_max must be positive."""

        with self.assertRaises(ValueError):
            closure_util.is_integrally_closed_up_to(unit_simplex(2), 0)

    @unittest.skipUnless(EXPENSIVE, "set SIMPLEX_DILATION_EXPENSIVE=1")
    def test_edge5_first_dilate(self):
        """The edge 5 simplex passes the r = 1 check."""

        report = closure_util.is_integrally_closed_up_to(
            edge5_simplex(), 1, workers=4
        )
        self.assertTrue(report.closed)


class CoveredImpliesClosedTest(unittest.TestCase):
    """Tests for the closure check of covered reports."""

    def test_covered_report(self):
        """Three times the unit tetrahedron is closed."""

        report = strategy_util.cover_dim3(unit_simplex(3, 3))
        result = closure_util.covered_implies_closed_check(report, 2)
        self.assertTrue(result.closed)

    def test_random_covered_tetrahedra(self):
        """Covered tetrahedra with even or triple edges are closed."""

        rng = random.Random(13)
        trials = 20 if EXPENSIVE else 3
        for _ in range(trials):
            simplex = random_simplex(rng, 3, 3, scales=(2, 3))
            report = strategy_util.cover_dim3(simplex)
            self.assertEqual(
                report.case_tag.name, strategy_util.ALL_NON_NEGATIVE
            )
            self.assertTrue(report.covered)
            result = closure_util.covered_implies_closed_check(report, 2)
            self.assertTrue(result.closed, msg=str(simplex.vertices))

    def test_uncovered_report(self):
        """Uncovered reports are rejected."""

        cover = strategy_util.apex_cover(unit_simplex(3, 3), 2)
        certificate = coverage_util.certify(cover)
        report = StrategyReport(
            CaseTag(strategy_util.UNSUPPORTED), cover, certificate
        )
        with self.assertRaises(PreconditionError):
            closure_util.covered_implies_closed_check(report, 1)

    def test_small_moduli(self):
        """Covers with moduli below n - 1 are rejected."""

        cover = strategy_util.apex_cover(unit_simplex(4, 2), 2)
        certificate = coverage_util.certify(cover)
        self.assertTrue(certificate.covered)
        report = StrategyReport(
            CaseTag(strategy_util.ALL_NON_NEGATIVE, {"k": 2}),
            cover,
            certificate,
        )
        with self.assertRaises(PreconditionError):
            closure_util.covered_implies_closed_check(report, 1)


class SumsetTest(unittest.TestCase):
    """Tests for sumsets of lattice points."""

    def test_matches_brute_force(self):
        """Encoded sums agree with pairwise tuple sums."""

        rng = random.Random(9)
        for _ in range(10):
            first = {
                tuple(rng.randint(-5, 5) for _ in range(3)) for _ in range(20)
            }
            second = {
                tuple(rng.randint(-3, 7) for _ in range(3)) for _ in range(30)
            }
            expected = {
                tuple(a + b for a, b in zip(p, q))
                for p, q in product(first, second)
            }
            self.assertEqual(closure_util.sumset(first, second), expected)
            self.assertEqual(
                closure_util.sumset(first, second, workers=3), expected
            )

    def test_large_coordinates(self):
        """Wide bounding boxes fall back to tuple sums."""

        big = 2**25
        points = {(0, 0, 0), (big, big, big)}
        self.assertEqual(
            closure_util.sumset(points, points),
            {(0, 0, 0), (big, big, big), (2 * big, 2 * big, 2 * big)},
        )

    def test_huge_coordinates(self):
        """Coordinates beyond 64-bit keys are summed exactly."""

        big = 2**61
        points = {(big, 0), (big + 1, 0)}
        self.assertEqual(
            closure_util.sumset(points, points),
            {(2 * big, 0), (2 * big + 1, 0), (2 * big + 2, 0)},
        )
        self.assertEqual(closure_util.max_abs({(1, -7), (3, 2)}), 7)


if __name__ == "__main__":
    unittest.main()
