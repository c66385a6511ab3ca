"""Tests for coverage_util."""

from fractions import Fraction as F

import random
import unittest

import numpy as np

from simplex_dilation_utils import coverage_util, dilation_util
from simplex_dilation_utils.coverage_util import Cover
from simplex_dilation_utils.dilation_util import NonMembershipCondition
from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    DegenerateSimplexError,
    PreconditionError,
)
from simplex_dilation_utils.lattice_util import LatticeSimplex
from simplex_dilation_utils.lp_util import StrictInequality
from tests.simplex_fixtures import (
    EDGE5_BASE_ROWS,
    EDGE5_EXTRA_ROWS,
    EDGE5_SUPPLEMENTS,
    EXPENSIVE,
    edge5_simplex,
    mixed_residue_simplex,
    short_edge_simplex,
    unit_simplex,
)

# Uncovered by the apex and supplementary 3-dilations of the edge 5 simplex
SUPPLEMENTED_GAP = (
    F(1051, 4144),
    F(961, 4144),
    F(15, 259),
    F(961, 4144),
    F(133, 592),
)


def apex_cover(simplex, k):
    """
    Builds the cover by all apex k-dilations of a simplex.
    """
    return Cover(
        [
            dilation_util.build_apex_dilation(simplex, i, k)
            for i in range(len(simplex))
        ]
    )


def edge5_base_cover():
    """
    Builds the apex 3-dilation cover of the edge 5 simplex.
    """
    return apex_cover(edge5_simplex(), 3)


def edge5_supplemented_cover():
    """
    Builds the apex 3-dilation cover of the edge 5 simplex extended by the
    three supplementary 3-dilations.
    """
    simplex = edge5_simplex()
    supplements = [
        dilation_util.explicit_dilation(simplex, vertices, 3)
        for vertices in EDGE5_SUPPLEMENTS
    ]
    return edge5_base_cover().extended(supplements)


class CoverTest(unittest.TestCase):
    """Tests for the Cover container."""

    def test_invalid(self):
        """Empty covers and mixed parents are rejected."""

        with self.assertRaises(ValueError):
            Cover(())
        first = dilation_util.build_apex_dilation(unit_simplex(2, 4), 0, 2)
        second = dilation_util.build_apex_dilation(unit_simplex(2, 6), 0, 2)
        with self.assertRaises(ValueError):
            Cover((first, second))

    def test_extended(self):
        """Extending keeps the parent and appends dilations."""

        cover = edge5_supplemented_cover()
        self.assertEqual(len(cover), 8)
        self.assertEqual(cover.moduli(), [3] * 8)
        self.assertEqual(cover.parent, edge5_simplex())


class ACoefficientsTest(unittest.TestCase):
    """Tests for the A coefficient table."""

    def test_edge5(self):
        """Coefficients of the edge 5 simplex for k=3."""

        table = coverage_util.a_coefficients(edge5_simplex(), 3)
        self.assertEqual(table.values, (F(-2, 3), 0, 0, F(-1, 3), 0))
        self.assertEqual(table.negative_indices(), [0, 3])
        self.assertFalse(table.all_nonnegative)
        self.assertEqual(table.formatted(), ["-2/3", "0", "0", "-1/3", "0"])

    def test_mixed_residues(self):
        """Coefficients with every residue class present."""

        table = coverage_util.a_coefficients(mixed_residue_simplex(), 2)
        self.assertEqual(
            table.values, (F(13, 14), F(1, 2), F(5, 28), F(3, 4))
        )
        self.assertTrue(table.all_nonnegative)

    def test_short_edge(self):
        """Coefficients of a simplex with an edge of length 2."""

        table = coverage_util.a_coefficients(short_edge_simplex(), 2)
        self.assertEqual(
            table.values, (F(-1, 4), 0, F(-1, 6), F(7, 12))
        )

    def test_modulus_out_of_range(self):
        """Moduli outside [2, l(P)] are rejected."""

        with self.assertRaises(PreconditionError):
            coverage_util.a_coefficients(edge5_simplex(), 4)
        with self.assertRaises(PreconditionError):
            coverage_util.a_coefficients(edge5_simplex(), 1)


class NoncoverageDnfTest(unittest.TestCase):
    """Tests for the expanded branch systems."""

    def test_apex_cover_is_single_system(self):
        """Apex dilations contribute one branch each."""

        systems = coverage_util.noncoverage_dnf(
            apex_cover(short_edge_simplex(), 2)
        )
        self.assertEqual(len(systems), 1)
        self.assertEqual(len(systems[0]), 4)

    def test_whole_parent_gives_no_system(self):
        """A dilation equal to the parent leaves no system."""

        simplex = unit_simplex(2, 3)
        cover = Cover(
            (dilation_util.explicit_dilation(simplex, simplex.vertices, 3),)
        )
        self.assertEqual(coverage_util.noncoverage_dnf(cover), [])

    def test_budget(self):
        """Unpruned expansion of the supplemented cover has 125 systems."""

        with self.assertRaises(BudgetExceededError) as ctx:
            coverage_util.noncoverage_dnf(
                edge5_supplemented_cover(), max_branches=100, prune=False
            )
        self.assertEqual(ctx.exception.required, 125)


class CertifyTest(unittest.TestCase):
    """Tests for the exact certificate."""

    def test_whole_parent(self):
        """A dilation equal to the parent covers without LP decisions."""

        simplex = unit_simplex(2, 3)
        cover = Cover(
            (dilation_util.explicit_dilation(simplex, simplex.vertices, 3),)
        )
        certificate = coverage_util.certify(cover)
        self.assertTrue(certificate.covered)
        self.assertEqual(certificate.branches_checked, 0)

    def test_nonnegative_coefficients(self):
        """Nonnegative A coefficients certify the apex cover."""

        certificate = coverage_util.certify(
            apex_cover(mixed_residue_simplex(), 2)
        )
        self.assertTrue(certificate.covered)
        self.assertIsNone(certificate.witness)

    def test_edge5_base_cover_witness(self):
        """The apex cover of the edge 5 simplex has a verified witness."""

        cover = edge5_base_cover()
        certificate = coverage_util.certify(cover)
        self.assertEqual(certificate.status, coverage_util.WITNESS)
        self.assertEqual(certificate.branch, (0, 0, 0, 0, 0))
        self.assertEqual(certificate.branches_checked, 5)
        self.assertGreater(certificate.epsilon, 0)

        witness = certificate.witness.values
        self.assertEqual(sum(witness), 1)
        self.assertTrue(all(x > 0 for x in witness))
        for row in EDGE5_BASE_ROWS:
            self.assertTrue(row.holds(witness))
        for d in cover:
            self.assertFalse(dilation_util.dilation_contains(d, witness))

    def test_edge5_supplemented_cover(self):
        """The three supplementary dilations leave a gap."""

        cover = edge5_supplemented_cover()
        certificate = coverage_util.certify(cover)
        self.assertEqual(certificate.status, coverage_util.WITNESS)
        self.assertGreater(certificate.branches_checked, 5)

        witness = certificate.witness.values
        self.assertEqual(sum(witness), 1)
        self.assertTrue(all(x > 0 for x in witness))
        for d in cover:
            self.assertFalse(dilation_util.dilation_contains(d, witness))

    def test_supplemented_gap(self):
        """The gap lies beyond the facet lambda_1 = 4 lambda_2."""

        cover = edge5_supplemented_cover()
        self.assertEqual(sum(SUPPLEMENTED_GAP), 1)
        for d in cover:
            self.assertFalse(
                dilation_util.dilation_contains(d, SUPPLEMENTED_GAP)
            )

        # Simplified rows alone place the point inside the first supplement
        first = cover.dilations[5]
        self.assertFalse(EDGE5_EXTRA_ROWS[0].holds(SUPPLEMENTED_GAP))
        facet = StrictInequality((0, -1, 4, 0, 0))
        self.assertEqual(facet.value(SUPPLEMENTED_GAP), F(-1, 4144))
        holding = [
            b for b in first.condition.branches if b.holds(SUPPLEMENTED_GAP)
        ]
        self.assertEqual(len(holding), 1)
        self.assertTrue(holding[0].is_proportional_to(facet))

    def test_unpruned_agrees(self):
        """Pruned and unpruned search agree on the outcome."""

        cover = edge5_supplemented_cover()
        pruned = coverage_util.certify(cover)
        unpruned = coverage_util.certify(cover, prune=False)
        self.assertFalse(pruned.covered)
        self.assertFalse(unpruned.covered)
        self.assertLessEqual(unpruned.branches_checked, 125)
        for d in cover:
            self.assertFalse(
                dilation_util.dilation_contains(d, unpruned.witness)
            )

        cover = apex_cover(unit_simplex(3, 3), 2)
        pruned = coverage_util.certify(cover)
        unpruned = coverage_util.certify(cover, prune=False)
        self.assertFalse(pruned.covered)
        self.assertFalse(unpruned.covered)

    def test_budget(self):
        """Certification stops at the LP decision budget."""

        with self.assertRaises(BudgetExceededError):
            coverage_util.certify(edge5_base_cover(), max_branches=2)

    def test_nonnegative_coefficients_imply_cover(self):
        """Random simplices with A >= 0 are covered by apex dilations."""

        rng = random.Random(11)
        checked = 0
        while checked < 15:
            vertices = [
                tuple(3 * rng.randint(0, 4) for _ in range(3))
                for _ in range(4)
            ]
            try:
                simplex = LatticeSimplex(vertices)
            except (DegenerateSimplexError, ValueError):
                continue
            table = coverage_util.a_coefficients(simplex, 2)
            if not table.all_nonnegative:
                continue
            certificate = coverage_util.certify(apex_cover(simplex, 2))
            self.assertTrue(certificate.covered, msg=str(vertices))
            checked += 1


class InteriorWitnessTest(unittest.TestCase):
    """Tests for moving witnesses into the interior."""

    def test_boundary_witness(self):
        """Witnesses with zero entries move toward the barycenter."""

        rows = [StrictInequality((1, -1, 0))]
        witness = coverage_util.interior_witness(rows, (0, 1, 0), F(1))
        self.assertEqual(witness, (F(1, 6), F(2, 3), F(1, 6)))
        self.assertTrue(rows[0].holds(witness))

    def test_positive_witness(self):
        """Interior witnesses are returned unchanged."""

        point = (F(1, 2), F(1, 4), F(1, 4))
        rows = [StrictInequality((-1, 1, 0))]
        witness = coverage_util.interior_witness(rows, point, F(1, 4))
        self.assertEqual(witness, point)


class MonteCarloTest(unittest.TestCase):
    """Tests for the Monte Carlo estimate."""

    def test_base_cover_leaves_gap(self):
        """The apex cover of the edge 5 simplex leaves a small gap."""

        estimate = coverage_util.monte_carlo_uncovered(
            edge5_base_cover(), 50000, seed=1
        )
        self.assertEqual(estimate.samples, 50000)
        self.assertEqual(estimate.sampler, coverage_util.UNIFORM)
        self.assertGreater(estimate.rate, 0)
        self.assertLess(estimate.rate, 0.005)
        self.assertGreater(estimate.stderr, 0)

    def test_cube_sampler(self):
        """Normalized cube samples weight the gap more heavily."""

        estimate = coverage_util.monte_carlo_uncovered(
            edge5_base_cover(), 50000, seed=1, sampler=coverage_util.CUBE
        )
        self.assertEqual(estimate.sampler, coverage_util.CUBE)
        self.assertAlmostEqual(estimate.rate, 0.0113, delta=0.003)

    def test_supplemented_cover_gap(self):
        """The supplemented cover leaves a gap of order 1e-4."""

        estimate = coverage_util.monte_carlo_uncovered(
            edge5_supplemented_cover(), 100000, seed=2
        )
        self.assertGreater(estimate.uncovered, 0)
        self.assertLess(estimate.uncovered, 100)

    def test_deterministic(self):
        """Counts do not depend on the number of workers."""

        cover = edge5_base_cover()
        first = coverage_util.monte_carlo_uncovered(
            cover, 30000, seed=5, chunk_size=7000
        )
        second = coverage_util.monte_carlo_uncovered(
            cover, 30000, seed=5, chunk_size=7000, workers=2
        )
        self.assertEqual(first, second)

    def test_chunk_size_independent(self):
        """Counts do not depend on the chunk size."""

        cover = edge5_base_cover()
        counts = set()
        for chunk_size in (3000, 7000, 30000):
            for sampler in coverage_util.SAMPLERS:
                estimate = coverage_util.monte_carlo_uncovered(
                    cover,
                    30000,
                    seed=5,
                    chunk_size=chunk_size,
                    sampler=sampler,
                )
                counts.add((sampler, estimate.samples, estimate.uncovered))
        self.assertEqual(len(counts), 2)

    def test_running(self):
        """The running table has one row per chunk."""

        estimate = coverage_util.monte_carlo_uncovered(
            edge5_base_cover(), 25000, seed=0, chunk_size=10000
        )
        df = estimate.running()
        self.assertEqual(
            list(df.columns), ["samples", "uncovered_count", "rate"]
        )
        self.assertEqual(list(df["samples"]), [10000, 20000, 25000])
        self.assertEqual(df["uncovered_count"].iloc[-1], estimate.uncovered)

    def test_invalid(self):
        """Sample counts, seeds and sampler names are validated."""

        cover = edge5_base_cover()
        with self.assertRaises(ValueError):
            coverage_util.monte_carlo_uncovered(cover, 0, 0)
        with self.assertRaises(ValueError):
            coverage_util.monte_carlo_uncovered(cover, 10, -1)
        with self.assertRaises(ValueError):
            coverage_util.monte_carlo_uncovered(cover, 10, 2**64)
        with self.assertRaises(ValueError):
            coverage_util.monte_carlo_uncovered(cover, 10, 0, sampler="ball")

    @unittest.skipUnless(EXPENSIVE, "set SIMPLEX_DILATION_EXPENSIVE=1")
    def test_base_cover_rate(self):
        """Uncovered fraction of the apex cover under both samplers."""

        cube = coverage_util.monte_carlo_uncovered(
            edge5_base_cover(),
            10**6,
            seed=0,
            workers=4,
            sampler=coverage_util.CUBE,
        )
        self.assertAlmostEqual(cube.rate, 0.011, delta=0.002)
        uniform = coverage_util.monte_carlo_uncovered(
            edge5_base_cover(), 10**6, seed=0, workers=4
        )
        self.assertAlmostEqual(uniform.rate, 0.0018, delta=0.0005)


class SampleTest(unittest.TestCase):
    """Tests for the counter-based sample stream."""

    def test_shape(self):
        """Samples are nonnegative with positive row sums."""

        for sampler in coverage_util.SAMPLERS:
            e = coverage_util.draw_samples(3, 0, 100, 4, sampler)
            self.assertEqual(e.shape, (100, 5))
            self.assertTrue((e >= 0).all())
            self.assertTrue((e.sum(axis=1) > 0).all())
        cube = coverage_util.draw_samples(3, 0, 100, 4, coverage_util.CUBE)
        self.assertTrue((cube < 1).all())

    def test_global_index(self):
        """Each sample depends only on the seed and its index."""

        e = coverage_util.draw_samples(3, 0, 100, 4)
        again = coverage_util.draw_samples(3, 0, 100, 4)
        self.assertTrue(np.array_equal(e, again))
        tail = coverage_util.draw_samples(3, 40, 60, 4)
        self.assertTrue(np.array_equal(e[40:], tail))
        other = coverage_util.draw_samples(4, 0, 100, 4)
        self.assertFalse(np.array_equal(e, other))

    def test_samplers_share_stream(self):
        """Both samplers transform the same uniform words."""

        u = coverage_util.draw_samples(8, 10, 50, 3, coverage_util.CUBE)
        e = coverage_util.draw_samples(8, 10, 50, 3, coverage_util.UNIFORM)
        self.assertTrue(np.allclose(e, -np.log1p(-u)))

    def test_words_per_sample(self):
        """Samples occupy whole Philox blocks."""

        self.assertEqual(coverage_util.words_per_sample(2), 4)
        self.assertEqual(coverage_util.words_per_sample(3), 4)
        self.assertEqual(coverage_util.words_per_sample(4), 8)


class OutsideMaskTest(unittest.TestCase):
    """Tests for the vectorized non-membership predicate."""

    def test_exact_fallback_on_boundary(self):
        """Points on a branch boundary are decided exactly."""

        condition = NonMembershipCondition((StrictInequality((1, -1, 0)),))
        e = np.array([[1.0, 1.0, 1.0], [1.0, 2.0, 1.0], [2.0, 1.0, 1.0]])
        mask = coverage_util.outside_mask(condition, e)
        self.assertEqual(list(mask), [False, True, False])

    def test_never_satisfied(self):
        """Conditions without branches flag nothing."""

        mask = coverage_util.outside_mask(
            NonMembershipCondition(()), np.ones((4, 3))
        )
        self.assertFalse(mask.any())

    def test_uncovered_mask(self):
        """A sample is uncovered iff every condition holds."""

        conditions = [
            NonMembershipCondition((StrictInequality((1, -1, 0)),)),
            NonMembershipCondition((StrictInequality((0, 1, -1)),)),
        ]
        e = np.array([[1.0, 2.0, 3.0], [1.0, 3.0, 2.0], [3.0, 2.0, 1.0]])
        mask = coverage_util.uncovered_mask(conditions, e)
        self.assertEqual(list(mask), [True, False, False])


if __name__ == "__main__":
    unittest.main()
