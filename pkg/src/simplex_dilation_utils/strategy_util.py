"""
Created on Thu Oct 9 11:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Constructive covering strategies. Each strategy classifies a lattice simplex
by its edge lengths, builds a cover by dilations of modulus at least n - 1
and certifies it exactly before returning.

    Dimension 3:
        Apex 2-dilations when all A_i >= 0 for k = 2, otherwise apex
        3-dilations at the vertices opposite a short edge plus one apex
        2-dilation.

    Dimension 4 (no edge of length 5):
        Apex 3-dilations when all A_i >= 0 for k = 3, otherwise one of three
        cases read off the edges of lengths 4 and 8.

    Dimension 4 (some edge of length 5):
        Apex 3-dilations completed by a witness-guided search for explicit
        3-dilations.

"""

from dataclasses import dataclass, field
from itertools import combinations, permutations
from math import gcd
from sympy.ntheory.modular import solve_congruence
from tqdm import tqdm

import logging
import numpy as np

from simplex_dilation_utils import config_util, coverage_util, lattice_util
from simplex_dilation_utils.dilation_util import (
    EXPLICIT,
    build_apex_dilation,
    explicit_dilation,
    translate_dilation,
    translation_valid,
)
from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    CertificationError,
    ClassificationError,
    PreconditionError,
)
from simplex_dilation_utils.lp_util import convex_combination

logger = logging.getLogger(__name__)

ALL_NON_NEGATIVE = "AllNonNegative"
DIM3_SPECIAL = "Dim3Special"
CASE_A = "CaseA"
CASE_B = "CaseB"
CASE_C = "CaseC"
SUPPLEMENTARY_SEARCH = "SupplementarySearch"
UNSUPPORTED = "Unsupported"

CASE_C_TRANSLATIONS = ((0, 0, 0, 1), (0, 0, 1, 0))
FLOAT_TOLERANCE = 1e-12


# --- Domain Types ---
@dataclass(frozen=True)
class CaseTag:
    """
    Name of the strategy branch taken, with its parameters.
    """

    name: str
    details: dict = field(default_factory=dict)

    def __str__(self):
        """
        Formats the tag as "Name(key=value, ...)".
        """
        if not self.details:
            return self.name
        args = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.name}({args})"


@dataclass(frozen=True)
class StrategyReport:
    """
    Result of a covering strategy.

    Attributes
    ----------
    case_tag : CaseTag
        Strategy branch taken.
    cover : Cover
        Cover of the input simplex.
    certificate : Certificate
        Exact certificate of the cover.
    a_table : ACoefficients
        Coefficients used for the classification.
    """

    case_tag: CaseTag
    cover: coverage_util.Cover
    certificate: coverage_util.Certificate
    a_table: coverage_util.ACoefficients = None

    @property
    def covered(self):
        """
        Indication of whether the cover is certified complete.
        """
        return self.case_tag.name != UNSUPPORTED and self.certificate.covered

    @property
    def dilation_count(self):
        """
        Number of dilations in the cover.
        """
        return len(self.cover)


@dataclass(frozen=True)
class SearchBudget:
    """
    Limits of the supplementary dilation search.

    Attributes
    ----------
    max_rounds : int
        Maximum number of dilations added.
    max_candidates_per_round : int
        Maximum number of lattice points per residue class passed to the
        convex combination LP.
    residue_class_cap : int
        Maximum number of residue classes tried per round.
    pool_samples : int
        Number of samples drawn to rank candidates by the uncovered volume
        they contain.
    """

    max_rounds: int = 40
    max_candidates_per_round: int = 64
    residue_class_cap: int = 27
    pool_samples: int = 200000

    def __post_init__(self):
        """
        Checks that every limit is positive.
        """
        for name, value in vars(self).items():
            if value < 1:
                raise ValueError(f"Budget is invalid - {name}={value}")


# --- Dispatch ---
def cover_simplex(simplex, budget=None, seeds=(), max_branches=None, seed=0):
    """
    Covers a lattice simplex of dimension 3 or 4 by dilations of modulus at
    least n - 1.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex to be covered.
    budget : SearchBudget, optional
        Budget of the supplementary search used for dimension 4 simplices
        with an edge of length 5. Default is SearchBudget().
    seeds : Sequence[Dilation], optional
        Dilations tried before searching. Default is an empty tuple.
    max_branches : int, optional
        Maximum number of LP decisions per certificate. Default is the
        configured "max_branches".
    seed : int, optional
        Seed of the samples that rank search candidates. Default is 0.

    Returns
    -------
    StrategyReport
        Certified report, or an "Unsupported" report when the search budget
        runs out.
    """
    if simplex.dim == 3:
        return cover_dim3(simplex, max_branches=max_branches)
    if simplex.dim != 4:
        raise PreconditionError(
            f"Dimension is unsupported - {simplex.dim} not in (3, 4)"
        )
    if not has_edge_of_length(simplex, 5):
        return cover_dim4(simplex, max_branches=max_branches)

    # Edge of length 5
    check_min_length(simplex, 3)
    logger.warning("Simplex has an edge of length 5 - falling back to search")
    a_table = coverage_util.a_coefficients(simplex, 3)
    base = apex_cover(simplex, 3)
    if a_table.all_nonnegative:
        tag = CaseTag(ALL_NON_NEGATIVE, {"k": 3})
        return certified_report(tag, base, a_table, max_branches)
    return search_supplementary(
        simplex,
        3,
        base,
        budget,
        seeds=seeds,
        max_branches=max_branches,
        seed=seed,
    )


def cover_dim3(simplex, max_branches=None):
    """
    Covers a dimension 3 lattice simplex with l(P) >= 2.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex to be covered.
    max_branches : int, optional
        Maximum number of LP decisions. Default is the configured
        "max_branches".

    Returns
    -------
    StrategyReport
        Certified report tagged "AllNonNegative" or "Dim3Special".
    """
    # Check preconditions
    if simplex.dim != 3:
        raise PreconditionError(f"Dimension is invalid - {simplex.dim} != 3")
    check_min_length(simplex, 2)
    a_table = coverage_util.a_coefficients(simplex, 2)
    if a_table.all_nonnegative:
        tag = CaseTag(ALL_NON_NEGATIVE, {"k": 2})
        cover = apex_cover(simplex, 2)
        return certified_report(tag, cover, a_table, max_branches)

    # Classify negative vertex
    v = a_table.negative_indices()[0]
    incident = simplex.edge_lengths.incident(v)
    threes = [j for j, l in incident.items() if l == 3]
    if len(threes) < 2 or any(l % 2 == 0 for l in incident.values()):
        raise ClassificationError(
            f"Classification Failed - vertex {v} has A < 0 but edge "
            f"lengths {incident}",
            diagnostics(simplex, a_table),
        )
    w = max(incident, key=lambda j: (incident[j], -j))
    a, b = sorted(j for j in incident if j != w)
    perm = (v, a, b, w)
    relabeled = lattice_util.relabel(simplex, perm)

    # Build cover
    lengths = relabeled.edge_lengths
    if lengths[1, 2] % 3 != 0:
        raise ClassificationError(
            f"Classification Failed - 3 does not divide l12={lengths[1, 2]}",
            diagnostics(simplex, a_table),
        )
    subset = [i for i in range(3) if lengths[3, i] != 2]
    dilations = [build_apex_dilation(relabeled, i, 3) for i in subset]
    dilations.append(build_apex_dilation(relabeled, 3, 2))
    cover = map_cover(simplex, perm, dilations)
    tag = CaseTag(DIM3_SPECIAL, {"relabeling": perm, "S": tuple(subset)})
    logger.info("Dimension 3 special case %s", tag)
    return certified_report(tag, cover, a_table, max_branches)


def cover_dim4(simplex, max_branches=None):
    """
    Covers a dimension 4 lattice simplex with l(P) >= 3 and no edge of
    length 5.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex to be covered.
    max_branches : int, optional
        Maximum number of LP decisions. Default is the configured
        "max_branches".

    Returns
    -------
    StrategyReport
        Certified report tagged "AllNonNegative", "CaseA", "CaseB" or
        "CaseC".
    """
    # Check preconditions
    if simplex.dim != 4:
        raise PreconditionError(f"Dimension is invalid - {simplex.dim} != 4")
    check_min_length(simplex, 3)
    if has_edge_of_length(simplex, 5):
        raise PreconditionError("Simplex is invalid - has an edge of length 5")

    a_table = coverage_util.a_coefficients(simplex, 3)
    if a_table.all_nonnegative:
        tag = CaseTag(ALL_NON_NEGATIVE, {"k": 3})
        cover = apex_cover(simplex, 3)
        return certified_report(tag, cover, a_table, max_branches)

    # Case A: P is a 4-dilation
    lengths = simplex.edge_lengths
    for u in range(len(simplex)):
        if all(l % 4 == 0 for l in lengths.incident(u).values()):
            tag = CaseTag(CASE_A, {"vertex": u})
            dilation = explicit_dilation(simplex, simplex.vertices, 4)
            cover = coverage_util.Cover((dilation,))
            logger.info("Dimension 4 %s", tag)
            return certified_report(tag, cover, a_table, max_branches)

    # Classify negative vertex
    v = a_table.negative_indices()[0]
    incident = lengths.incident(v)
    fours = sorted(j for j, l in incident.items() if l in (4, 8))
    rest = sorted(j for j in incident if j not in fours)
    if len(fours) == 3:
        return case_b(simplex, v, fours, rest, a_table, max_branches)
    if len(fours) == 2:
        return case_c(simplex, v, fours, rest, a_table, max_branches)
    raise ClassificationError(
        f"Classification Failed - vertex {v} has {len(fours)} edges of "
        f"length 4 or 8",
        diagnostics(simplex, a_table),
    )


def case_b(simplex, v, fours, rest, a_table, max_branches):
    """
    Covers a simplex whose negative vertex has three edges of length 4 or 8.
    """
    perm = (v, *fours, *rest)
    relabeled = lattice_util.relabel(simplex, perm)
    lengths = relabeled.edge_lengths
    check_divisible_by_four(simplex, lengths, (1, 2, 3), a_table)

    subset = [i for i in range(4) if lengths[i, 4] != 3]
    dilations = [build_apex_dilation(relabeled, i, 4) for i in subset]
    dilations.append(build_apex_dilation(relabeled, 4, 3))
    cover = map_cover(simplex, perm, dilations)
    tag = CaseTag(CASE_B, {"relabeling": perm, "S": tuple(subset)})
    logger.info("Dimension 4 %s", tag)
    return certified_report(tag, cover, a_table, max_branches)


def case_c(simplex, v, fours, rest, a_table, max_branches):
    """
    Covers a simplex whose negative vertex has two edges of length 4 or 8.
    """
    incident = simplex.edge_lengths.incident(v)
    elevens = [j for j in rest if incident[j] == 11]
    if not elevens:
        raise ClassificationError(
            f"Classification Failed - vertex {v} has no edge of length 11",
            diagnostics(simplex, a_table),
        )
    third = elevens[0]
    fourth = [j for j in rest if j != third][0]
    perm = (v, *fours, third, fourth)
    relabeled = lattice_util.relabel(simplex, perm)
    lengths = relabeled.edge_lengths
    if lengths[0, 4] not in (7, 11, 14, 17):
        raise ClassificationError(
            f"Classification Failed - l04={lengths[0, 4]} not in "
            f"(7, 11, 14, 17)",
            diagnostics(simplex, a_table),
        )
    check_divisible_by_four(simplex, lengths, (1, 2), a_table)

    # Build cover
    dilations = [build_apex_dilation(relabeled, i, 3) for i in range(5)]
    dilations.append(build_apex_dilation(relabeled, 0, 4))
    for t in CASE_C_TRANSLATIONS:
        if not translation_valid(relabeled, 0, 3, t):
            raise ClassificationError(
                f"Classification Failed - translation {t} is invalid",
                diagnostics(simplex, a_table),
            )
        dilations.append(translate_dilation(relabeled, 0, 3, t))
    cover = map_cover(simplex, perm, dilations)
    tag = CaseTag(CASE_C, {"relabeling": perm})
    logger.info("Dimension 4 %s", tag)
    return certified_report(tag, cover, a_table, max_branches)


# --- Supplementary search ---
def search_supplementary(
    simplex,
    k,
    base,
    budget=None,
    seeds=(),
    max_branches=None,
    max_cells=None,
    progress=False,
    seed=0,
):
    """
    Completes a cover by adding explicit k-dilations around uncovered
    witnesses.

    Each round converts the current witness to a point x of P and looks
    for simplices with vertices in one residue class of P's lattice points
    modulo k whose hull contains x. Such a simplex is a k-dilation inside
    P. Candidates are ranked by the number of uncovered samples of P they
    contain, then by how deep x lies inside them. The best one is added
    and the cover is certified again.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex to be covered.
    k : int
        Modulus of the added dilations.
    base : Cover
        Initial cover of the simplex.
    budget : SearchBudget, optional
        Limits of the search. Default is SearchBudget().
    seeds : Sequence[Dilation], optional
        Dilations added before searching. Default is an empty tuple.
    max_branches : int, optional
        Maximum number of LP decisions per certificate. Default is the
        configured "max_branches".
    max_cells : int, optional
        Maximum number of cells scanned when enumerating the lattice points
        of P. Default is the configured "max_cells".
    progress : bool, optional
        Indication of whether to display a progress bar. Default is False.
    seed : int, optional
        Seed of the uncovered samples used to rank candidates. Default is
        0.

    Returns
    -------
    StrategyReport
        Report tagged "SupplementarySearch" with the number of rounds, or
        "Unsupported" with the last witness when the budget runs out.

    Raises
    ------
    BudgetExceededError
        If a certificate needs more than max_branches LP decisions. The
        report of the last certified round is attached as "report".
    """
    # Initializations
    budget = budget or SearchBudget()
    a_table = safe_a_coefficients(simplex, k)
    cover = base
    for dilation in seeds:
        if dilation.parent != simplex or dilation.modulus < k:
            raise PreconditionError(
                f"Seed is invalid - {dilation.label()} for modulus {k}"
            )
    if seeds:
        cover = cover.extended(seeds)
    certificate = coverage_util.certify(cover, max_branches=max_branches)
    if certificate.covered:
        tag = CaseTag(SUPPLEMENTARY_SEARCH, {"rounds": 0})
        return StrategyReport(tag, cover, certificate, a_table)

    # Main
    max_cells = max_cells or config_util.load_settings().max_cells
    classes = residue_classes(simplex, k, max_cells)
    pool = UncoveredPool.sample(cover, budget.pool_samples, seed)
    logger.info("Search starts with %d uncovered samples", len(pool))
    pbar = tqdm(total=budget.max_rounds, desc="Search", disable=not progress)
    for rounds in range(1, budget.max_rounds + 1):
        x = lattice_util.from_barycentric(simplex, certificate.witness)
        dilation = best_dilation(simplex, k, x, classes, budget, pool)
        pbar.update(1)
        if dilation is None:
            logger.warning("No %d-dilation contains %s", k, x)
            break

        cover = cover.extended([dilation])
        pool = pool.without(dilation)
        try:
            certificate = coverage_util.certify(
                cover, max_branches=max_branches
            )
        except BudgetExceededError as e:
            pbar.close()
            tag = CaseTag(UNSUPPORTED, {"reason": "branch budget exceeded"})
            e.report = StrategyReport(tag, cover, certificate, a_table)
            raise
        logger.info(
            "Search round %d: %d dilations, %d uncovered samples, "
            "covered=%s",
            rounds,
            len(cover),
            len(pool),
            certificate.covered,
        )
        if certificate.covered:
            pbar.close()
            tag = CaseTag(SUPPLEMENTARY_SEARCH, {"rounds": rounds})
            return StrategyReport(tag, cover, certificate, a_table)
    pbar.close()

    logger.warning("Search budget exhausted after %d dilations", len(cover))
    tag = CaseTag(UNSUPPORTED, {"reason": "search budget exhausted"})
    return StrategyReport(tag, cover, certificate, a_table)


class UncoveredPool:
    """
    Samples of a simplex that lie outside every dilation of a cover, kept in
    barycentric and in Cartesian form.
    """

    def __init__(self, simplex, coords):
        """
        Instantiates an UncoveredPool.

        Parameters
        ----------
        simplex : LatticeSimplex
            Parent simplex of the samples.
        coords : numpy.ndarray
            Barycentric coordinates of the samples, shape (m, n + 1).

        Returns
        -------
        None
        """
        self.simplex = simplex
        self.coords = coords
        self.points = coords @ np.array(simplex.vertices, dtype=float)

    @classmethod
    def sample(cls, cover, size, seed):
        """
        Draws uniform samples of the parent simplex of a cover and keeps the
        uncovered ones.

        Parameters
        ----------
        cover : Cover
            Current cover.
        size : int
            Number of samples drawn.
        seed : int
            Seed of the counter-based generator.

        Returns
        -------
        UncoveredPool
            Uncovered samples.
        """
        e = coverage_util.draw_samples(seed, 0, size, cover.parent.dim)
        mask = coverage_util.uncovered_mask([d.condition for d in cover], e)
        e = e[mask]
        return cls(cover.parent, e / e.sum(axis=1, keepdims=True))

    def __len__(self):
        """
        Returns the number of samples in the pool.
        """
        return len(self.coords)

    def without(self, dilation):
        """
        Returns the pool of samples that also lie outside a new dilation.
        """
        mask = coverage_util.outside_mask(dilation.condition, self.coords)
        return UncoveredPool(self.simplex, self.coords[mask])

    def count_inside(self, vertices):
        """
        Counts the samples inside the simplex with the given vertices.
        """
        if len(self) == 0:
            return 0
        mu = float_barycentric(vertices, self.points)
        return int((mu >= -FLOAT_TOLERANCE).all(axis=1).sum())


def residue_classes(simplex, k, max_cells):
    """
    Buckets the lattice points of a simplex by residue class modulo k.

    Returns
    -------
    Dict[Tuple[int], List[Tuple[int]]]
        Lattice points of each nonempty residue class.
    """
    classes = dict()
    for p in lattice_util.lattice_points(simplex.vertices, max_cells):
        classes.setdefault(tuple(c % k for c in p), list()).append(p)
    return classes


def best_dilation(simplex, k, x, classes, budget, pool=None):
    """
    Finds the simplex containing x with vertices in a single residue class
    that contains the most uncovered samples, over the residue classes
    closest to x.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    k : int
        Modulus.
    x : Tuple[Fraction]
        Point of P to be covered.
    classes : dict
        Lattice points of P by residue class modulo k.
    budget : SearchBudget
        Limits of the search.
    pool : UncoveredPool, optional
        Uncovered samples used to rank the candidates. Default is None,
        which ranks by depth only.

    Returns
    -------
    Dilation or None
        Explicit k-dilation containing x, or None if no tried class
        surrounds x.
    """
    best, best_score = None, None
    for residue in ordered_classes(x, k, classes, budget.residue_class_cap):
        points = sorted(classes[residue], key=lambda p: l1_distance(p, x))
        points = points[: budget.max_candidates_per_round]
        for vertices in candidate_simplices(points, x, simplex.dim):
            score = rank_simplex(vertices, x, pool)
            if best_score is None or score > best_score:
                best, best_score = vertices, score
    if best is None:
        return None
    logger.debug("Best %d-dilation %s with score %s", k, best, best_score)
    return explicit_dilation(simplex, best, k)


def ordered_classes(x, k, classes, cap):
    """
    Orders residue classes with the class of the lattice point nearest to x
    first, then by the distance from x to the nearest point of the class.
    """
    nearest = tuple(round(c) % k for c in x)

    def key(residue):
        """
        Sort key of a residue class.
        """
        distance = min(l1_distance(p, x) for p in classes[residue])
        return (residue != nearest, distance, residue)

    return sorted(classes, key=key)[:cap]


def candidate_simplices(points, x, n):
    """
    Generates distinct simplices spanned by the given points whose hulls
    contain x: one favoring far points, one from the first feasible basis
    and one favoring near points.

    Returns
    -------
    List[List[Tuple[int]]]
        Vertices of each candidate; empty if x is outside the hull of the
        points.
    """
    far = [sq_distance(p, x) for p in points]
    variants = (far, [0] * len(points), [-w for w in far])
    candidates, seen = list(), set()
    for weights in variants:
        vertices = surrounding_simplex(points, x, n, weights)
        if vertices is None:
            break
        if frozenset(vertices) not in seen:
            seen.add(frozenset(vertices))
            candidates.append(vertices)
    return candidates


def surrounding_simplex(candidates, x, n, weights=None):
    """
    Selects n + 1 affinely independent candidates whose hull contains x.

    The convex combination LP maximizes the total weight of its support,
    so the default weights, the squared distances to x, favor far
    candidates. The support is completed with the nearest candidates that
    raise the affine rank.

    Returns
    -------
    List[Tuple[int]] or None
        Vertices of the simplex, or None if x is outside the hull of the
        candidates or the candidates do not span the space.
    """
    if len(candidates) < n + 1:
        return None
    if weights is None:
        weights = [sq_distance(p, x) for p in candidates]
    outcome = convex_combination(candidates, x, weights)
    if not outcome.is_optimal:
        return None

    vertices = [p for p, mu in zip(candidates, outcome.point) if mu > 0]
    for p in sorted(candidates, key=lambda q: sq_distance(q, x)):
        if len(vertices) == n + 1:
            break
        if p in vertices:
            continue
        if lattice_util.affine_rank(vertices + [p]) == len(vertices):
            vertices.append(p)
    return vertices if len(vertices) == n + 1 else None


def rank_simplex(vertices, x, pool=None):
    """
    Scores a candidate simplex containing x.

    Returns
    -------
    Tuple[int, float]
        Number of uncovered samples inside the simplex, then the smallest
        barycentric coordinate of x scaled by the n-th root of the volume.
    """
    hits = pool.count_inside(vertices) if pool is not None else 0
    v = np.array(vertices, dtype=float)
    volume = abs(np.linalg.det(v[1:] - v[0]))
    mu = float_barycentric(vertices, np.array([x], dtype=float))[0]
    depth = max(float(mu.min()), 0.0) * volume ** (1 / (len(vertices) - 1))
    return (hits, depth)


def float_barycentric(vertices, points):
    """
    Computes approximate barycentric coordinates of points w.r.t. a
    full-dimensional simplex.

    Parameters
    ----------
    vertices : Sequence[Sequence[int]]
        The n + 1 vertices of the simplex.
    points : numpy.ndarray
        Points of shape (m, n).

    Returns
    -------
    numpy.ndarray
        Coordinates of shape (m, n + 1).
    """
    v = np.array(vertices, dtype=float)
    basis = (v[1:] - v[0]).T
    mu = np.linalg.solve(basis, (points - v[0]).T).T
    return np.hstack([1 - mu.sum(axis=1, keepdims=True), mu])


def l1_distance(p, x):
    """
    Computes the l1 distance between two points.
    """
    return sum(abs(a - b) for a, b in zip(p, x))


def sq_distance(p, x):
    """
    Computes the squared Euclidean distance between two points.
    """
    return sum((a - b) ** 2 for a, b in zip(p, x))


# --- Edge profiles ---
def profile_consistent(lengths):
    """
    Checks the necessary condition gcd(l_ij, l_ik) | l_jk for every triple
    of distinct vertices.
    """
    for i, j, k in permutations(range(lengths.size), 3):
        if j < k and lengths[j, k] % gcd(lengths[i, j], lengths[i, k]):
            return False
    return True


def realize_edge_profile(lengths, dim, trials=200, seed=0, spread=2):
    """
    Searches for a lattice simplex with a prescribed edge-length matrix.

    Vertex u_0 is the origin. Each following vertex solves the congruences
    u_j = u_i (mod l_ij) for i < j coordinatewise with the Chinese remainder
    theorem and adds a random multiple of the combined modulus.

    Parameters
    ----------
    lengths : EdgeLengthMatrix
        Requested edge lengths.
    dim : int
        Dimension n of the simplex; the matrix must have size n + 1.
    trials : int, optional
        Number of random candidates. Default is 200.
    seed : int, optional
        Seed of the random lifts. Default is 0.
    spread : int, optional
        Random multiples are drawn from [-spread, spread]. Default is 2.

    Returns
    -------
    LatticeSimplex or None
        Simplex whose edge-length matrix equals the request, or None if
        none was found.
    """
    if lengths.size != dim + 1:
        raise ValueError(f"Edge lengths are invalid - size != {dim + 1}")
    if not profile_consistent(lengths):
        logger.debug("Profile fails the gcd triangle condition")
        return None

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        vertices = lift_vertices(lengths, dim, rng, spread)
        if vertices is None or lattice_util.affine_rank(vertices) < dim:
            continue
        simplex = lattice_util.LatticeSimplex(vertices)
        if simplex.edge_lengths == lengths:
            return simplex
    logger.debug("No realization found after %d trials", trials)
    return None


def lift_vertices(lengths, dim, rng, spread):
    """
    Lifts the vertices one at a time, solving the congruences modulo the edge
    lengths to earlier vertices per axis. Returns None if some congruences are
    incompatible.
    """
    vertices = [(0,) * dim]
    for j in range(1, dim + 1):
        vertex = list()
        for axis in range(dim):
            pairs = [
                (vertices[i][axis] % lengths[i, j], lengths[i, j])
                for i in range(j)
                if lengths[i, j] > 1
            ]
            solution = solve_congruence(*pairs) if pairs else (0, 1)
            if solution is None:
                return None
            r, modulus = int(solution[0]), int(solution[1])
            lift = int(rng.integers(-spread, spread + 1))
            vertex.append(r + modulus * lift)
        vertices.append(tuple(vertex))
    return vertices


# --- Helpers ---
def apex_cover(simplex, k):
    """
    Builds the cover by the apex k-dilations at every vertex.
    """
    dilations = [
        build_apex_dilation(simplex, i, k) for i in range(len(simplex))
    ]
    return coverage_util.Cover(dilations)


def map_cover(simplex, perm, dilations):
    """
    Rebuilds dilations of a relabeled simplex on the original simplex.

    Parameters
    ----------
    simplex : LatticeSimplex
        Original simplex P.
    perm : Sequence[int]
        Relabeling; vertex m of the relabeled simplex is vertex perm[m] of P.
    dilations : Sequence[Dilation]
        Dilations of the relabeled simplex.

    Returns
    -------
    Cover
        Same dilations with apex and translation indices of P.
    """
    mapped = list()
    for d in dilations:
        spec = d.spec
        if spec.kind == EXPLICIT:
            rebuilt = explicit_dilation(simplex, d.vertices, spec.modulus)
        else:
            translation = [0] * len(simplex)
            for m, t in enumerate(spec.translation):
                translation[perm[m]] = t
            rebuilt = translate_dilation(
                simplex, perm[spec.apex], spec.modulus, translation
            )
        if set(rebuilt.vertices) != set(d.vertices):
            raise ClassificationError(
                f"Relabeling Failed - {d.label()} changed under {perm}"
            )
        mapped.append(rebuilt)
    return coverage_util.Cover(mapped)


def certified_report(tag, cover, a_table, max_branches):
    """
    Certifies a constructed cover and checks the modulus bound.
    """
    certificate = coverage_util.certify(cover, max_branches=max_branches)
    if not certificate.covered:
        raise CertificationError(
            f"Certification Failed - {tag} leaves "
            f"{certificate.witness.formatted()} uncovered",
            certificate,
        )
    n = cover.parent.dim
    if min(cover.moduli()) < n - 1:
        raise CertificationError(
            f"Certification Failed - {tag} uses moduli {cover.moduli()}",
            certificate,
        )
    return StrategyReport(tag, cover, certificate, a_table)


def check_min_length(simplex, bound):
    """
    Raises PreconditionError if an edge is shorter than bound.
    """
    shortest = simplex.edge_lengths.min_lattice_length
    if shortest < bound:
        raise PreconditionError(
            f"Simplex is invalid - l(P)={shortest} < {bound}"
        )


def check_divisible_by_four(simplex, lengths, indices, a_table):
    """
    Raises ClassificationError unless 4 divides every edge between the given
    vertices.
    """
    for i, j in combinations(indices, 2):
        if lengths[i, j] % 4 != 0:
            raise ClassificationError(
                f"Classification Failed - 4 does not divide "
                f"l{i}{j}={lengths[i, j]}",
                diagnostics(simplex, a_table),
            )


def has_edge_of_length(simplex, length):
    """
    Checks whether some edge has the given lattice length.
    """
    lengths = simplex.edge_lengths
    return any(
        lengths[i, j] == length
        for i, j in combinations(range(len(simplex)), 2)
    )


def safe_a_coefficients(simplex, k):
    """
    Computes the A coefficients, or None if an edge is shorter than k.
    """
    try:
        return coverage_util.a_coefficients(simplex, k)
    except PreconditionError:
        return None


def diagnostics(simplex, a_table):
    """
    Collects the data attached to classification errors.
    """
    return {
        "vertices": simplex.vertices,
        "edge_lengths": simplex.edge_lengths.lengths,
        "A": a_table.formatted(),
    }
