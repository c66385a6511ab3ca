"""
Created on Tue Oct 7 14:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Construction of k-dilations inside a lattice simplex P = Conv(u_0, ..., u_n)
and their membership predicates in barycentric form.

Apex dilation P_{i,k}:
    Sub-simplex anchored at u_i whose edge towards u_j has lattice length
    l_ij - r_ij, where r_ij is the residue of l_ij modulo k. Its vertices
    are u_i and u_i + (l_ij - r_ij) * w_ij, where w_ij is the primitive
    direction of the edge u_i u_j.

Translated dilation P_{i,k,t}:
    P_{i,k} shifted by sum_j t_j * w_ij for nonnegative integers t_j.

Explicit dilation:
    Any lattice simplex inside P whose pairwise vertex differences are
    divisible by k.

Dilations are closed sets: membership conditions are non-strict and
non-membership conditions are disjunctions of strict inequalities.

"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Tuple

import logging

from simplex_dilation_utils import lattice_util
from simplex_dilation_utils.exceptions import (
    InvalidTranslationError,
    PreconditionError,
)
from simplex_dilation_utils.lp_util import (
    StrictInequality,
    inequality_satisfiable,
)

logger = logging.getLogger(__name__)

APEX = "apex"
EXPLICIT = "explicit"


# --- Domain Types ---
@dataclass(frozen=True)
class DilationSpec:
    """
    Provenance of a dilation.

    Attributes
    ----------
    kind : str
        Either "apex" or "explicit".
    modulus : int
        Dilation factor k >= 2.
    apex : int, optional
        Index i of the apex vertex (apex dilations only).
    translation : Tuple[int], optional
        Translation t of length n + 1 with t[apex] = 0 (apex dilations only).
    vertices : Tuple[Tuple[int]], optional
        Vertices of the dilation (explicit dilations only).
    """

    kind: str
    modulus: int
    apex: Optional[int] = None
    translation: Optional[Tuple[int, ...]] = None
    vertices: Optional[Tuple[Tuple[int, ...], ...]] = None

    @property
    def is_translated(self):
        """
        Indication of whether the apex dilation is translated.
        """
        return self.kind == APEX and any(self.translation)

    def compact_translation(self):
        """
        Returns the translation indexed by j != apex, in increasing j.
        """
        return tuple(
            t for j, t in enumerate(self.translation) if j != self.apex
        )


@dataclass(frozen=True, eq=False)
class Dilation:
    """
    k-dilation contained in a parent lattice simplex.

    Attributes
    ----------
    spec : DilationSpec
        Provenance of the dilation.
    vertices : Tuple[Tuple[int]]
        Integer vertices of the dilation.
    parent : LatticeSimplex
        Simplex that contains the dilation.
    """

    spec: DilationSpec
    vertices: tuple
    parent: lattice_util.LatticeSimplex

    @property
    def modulus(self):
        """
        Returns the modulus k.
        """
        return self.spec.modulus

    @cached_property
    def facets(self):
        """
        Facet functionals of the dilation.
        """
        return lattice_util.facet_system(self.vertices)

    @cached_property
    def condition(self):
        """
        Non-membership condition w.r.t. the parent simplex.
        """
        return nonmembership(self)

    def contains_point(self, point):
        """
        Checks membership of an ambient rational point with the facet
        system of the dilation.
        """
        return self.facets.contains(point)

    def label(self):
        """
        Short human-readable description.
        """
        k = self.modulus
        if self.spec.kind == EXPLICIT:
            return f"explicit(k={k})"
        if self.spec.is_translated:
            t = ",".join(map(str, self.spec.compact_translation()))
            return f"P_{{{self.spec.apex},{k},({t})}}"
        return f"P_{{{self.spec.apex},{k}}}"

    def __eq__(self, other):
        """
        Compares spec, vertices and parent.
        """
        if not isinstance(other, Dilation):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.vertices == other.vertices
            and self.parent == other.parent
        )

    def __hash__(self):
        """
        Hashes spec, vertices and parent.
        """
        return hash((self.spec, self.vertices, self.parent))


@dataclass(frozen=True)
class NonMembershipCondition:
    """
    Disjunction of strict inequalities in barycentric coordinates: a point
    lies outside the dilation iff at least one branch holds. An empty list
    of branches means the condition is never satisfied, i.e. the dilation
    is the whole parent simplex.
    """

    branches: tuple

    @property
    def never_satisfied(self):
        """
        Indication of whether the condition has no branches.
        """
        return len(self.branches) == 0

    def holds(self, coords):
        """
        Checks whether any branch holds at the coordinates.
        """
        return any(branch.holds(coords) for branch in self.branches)


# --- Residues ---
def residue(length, k):
    """
    Computes the least nonnegative integer r congruent to length mod k.
    """
    return length % k


def edge_fraction(length, k):
    """
    Computes r / (l - r) for r = residue(l, k), the coefficient appearing in
    the apex membership inequality.
    """
    r = residue(length, k)
    if r == length:
        raise PreconditionError(
            f"Modulus is invalid - k={k} exceeds edge length {length}"
        )
    return Fraction(r, length - r)


def check_apex_modulus(simplex, i, k):
    """
    Checks that 2 <= k <= min_j l_ij so that every l_ij - r_ij is positive.
    """
    if not 0 <= i < len(simplex):
        raise ValueError(f"Apex is invalid - {i}")
    shortest = min(simplex.edge_lengths.incident(i).values())
    if k < 2 or k > shortest:
        raise PreconditionError(
            f"Modulus is invalid - k={k} not in [2, {shortest}] at apex {i}"
        )


def expand_translation(simplex, i, translation):
    """
    Converts a translation indexed by j != i (length n) to one indexed by
    all vertices (length n + 1) with a 0 at the apex.
    """
    translation = tuple(lattice_util.to_integer(t) for t in translation)
    if len(translation) == len(simplex):
        if translation[i] != 0:
            raise ValueError(f"Translation is invalid - t[{i}] must be 0")
        full = translation
    elif len(translation) == simplex.dim:
        full = translation[:i] + (0,) + translation[i:]
    else:
        raise ValueError(f"Translation is invalid - {translation}")
    if any(t < 0 for t in full):
        raise ValueError(f"Translation is invalid - negative entry {full}")
    return full


# --- Constructors ---
def build_apex_dilation(simplex, i, k):
    """
    Constructs the apex dilation P_{i,k}.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    i : int
        Index of the apex vertex.
    k : int
        Dilation factor with 2 <= k <= min_j l_ij.

    Returns
    -------
    Dilation
        Simplex with vertices u_i and u_i + (l_ij - r_ij) * w_ij for j != i.
    """
    return translate_dilation(simplex, i, k, (0,) * simplex.dim)


def translate_dilation(simplex, i, k, translation):
    """
    Constructs the translated dilation P_{i,k,t} = P_{i,k} + sum_j t_j w_ij.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    i : int
        Index of the apex vertex.
    k : int
        Dilation factor with 2 <= k <= min_j l_ij.
    translation : Sequence[int]
        Nonnegative integers indexed by j != i (length n), or by all
        vertices with a 0 at the apex (length n + 1).

    Returns
    -------
    Dilation
        Translated dilation, contained in P.
    """
    check_apex_modulus(simplex, i, k)
    full = expand_translation(simplex, i, translation)
    if not translation_valid(simplex, i, k, full):
        raise InvalidTranslationError(
            f"Translation is invalid - P_{{{i},{k}}} + {full} leaves the "
            f"parent simplex"
        )

    # Shift vector
    shift = [0] * simplex.dim
    for j, t in enumerate(full):
        if t:
            w = lattice_util.primitive_direction(simplex, i, j)
            shift = [s + t * c for s, c in zip(shift, w)]

    # Vertices
    vertices = list()
    for j in range(len(simplex)):
        if j == i:
            vertices.append(tuple(a + s for a, s in zip(simplex[i], shift)))
        else:
            length = simplex.edge_lengths[i, j]
            steps = length - residue(length, k)
            w = lattice_util.primitive_direction(simplex, i, j)
            vertices.append(
                tuple(
                    a + steps * c + s
                    for a, c, s in zip(simplex[i], w, shift)
                )
            )
    spec = DilationSpec(APEX, k, apex=i, translation=full)
    return Dilation(spec, tuple(vertices), simplex)


def explicit_dilation(simplex, vertices, k):
    """
    Wraps an explicit list of vertices as a k-dilation of a parent simplex.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    vertices : Sequence[Sequence[int]]
        The n + 1 integer vertices of the dilation.
    k : int
        Dilation factor; every pairwise vertex difference must be divisible
        by k.

    Returns
    -------
    Dilation
        Validated explicit dilation.
    """
    vertices = tuple(
        tuple(lattice_util.to_integer(c) for c in v) for v in vertices
    )
    if k < 2:
        raise PreconditionError(f"Modulus is invalid - k={k}")
    if len(vertices) != len(simplex):
        raise ValueError(
            f"Dilation is invalid - expected {len(simplex)} vertices"
        )
    lattice_util.LatticeSimplex(vertices)
    if not lattice_util.is_k_dilation(vertices, k):
        raise PreconditionError(
            f"Dilation is invalid - vertex differences not divisible by {k}"
        )
    for v in vertices:
        if not simplex.facets.contains(v):
            raise PreconditionError(
                f"Dilation is invalid - vertex {v} is outside the parent"
            )
    spec = DilationSpec(EXPLICIT, k, vertices=vertices)
    return Dilation(spec, vertices, simplex)


def translation_valid(simplex, i, k, translation):
    """
    Decides whether P_{i,k} + sum_j t_j w_ij stays inside P.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    i : int
        Index of the apex vertex.
    k : int
        Dilation factor with 2 <= k <= min_j l_ij.
    translation : Sequence[int]
        Nonnegative integers indexed by j != i (or by all vertices).

    Returns
    -------
    bool
        True iff sum_j t_j / l_ij <= min_s r_is / l_is.
    """
    check_apex_modulus(simplex, i, k)
    full = expand_translation(simplex, i, translation)
    lengths = simplex.edge_lengths.incident(i)
    total = sum(Fraction(full[j], l) for j, l in lengths.items())
    bound = min(Fraction(residue(l, k), l) for l in lengths.values())
    return total <= bound


# --- Non-membership conditions ---
def apex_nonmembership(simplex, i, k):
    """
    Builds the strict inequality characterizing points outside P_{i,k}.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    i : int
        Index of the apex vertex.
    k : int
        Dilation factor.

    Returns
    -------
    StrictInequality
        lambda_i - sum_{j != i} r_ij / (l_ij - r_ij) * lambda_j < 0.
    """
    check_apex_modulus(simplex, i, k)
    coeffs = [Fraction(0)] * len(simplex)
    coeffs[i] = Fraction(1)
    for j, length in simplex.edge_lengths.incident(i).items():
        coeffs[j] = -edge_fraction(length, k)
    return StrictInequality(tuple(coeffs), Fraction(0))


def translated_nonmembership(simplex, i, k, translation):
    """
    Builds the disjunction characterizing points outside P_{i,k,t}.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    i : int
        Index of the apex vertex.
    k : int
        Dilation factor.
    translation : Sequence[int]
        Valid translation indexed by j != i (or by all vertices).

    Returns
    -------
    NonMembershipCondition
        One branch lambda_j < t_j / l_ij per j with t_j > 0, followed by the
        branch lambda_i + sum_j t_j / (l_ij - r_ij)
        < sum_j r_ij / (l_ij - r_ij) * lambda_j.
    """
    full = expand_translation(simplex, i, translation)
    if not translation_valid(simplex, i, k, full):
        raise InvalidTranslationError(f"Translation is invalid - {full}")
    branches = list()
    lengths = simplex.edge_lengths.incident(i)
    for j, length in lengths.items():
        if full[j] > 0:
            coeffs = [Fraction(0)] * len(simplex)
            coeffs[j] = Fraction(1)
            branches.append(
                StrictInequality(tuple(coeffs), Fraction(full[j], length))
            )

    main = apex_nonmembership(simplex, i, k)
    shift = sum(
        Fraction(full[j], length - residue(length, k))
        for j, length in lengths.items()
    )
    branches.append(StrictInequality(main.coefficients, -shift))
    return NonMembershipCondition(tuple(branches))


def explicit_nonmembership(simplex, dilation, prune=True):
    """
    Builds the disjunction characterizing points outside an explicit
    dilation, one branch per facet of the dilation.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P, used for barycentric coordinates.
    dilation : Dilation
        Dilation contained in P.
    prune : bool, optional
        Indication of whether to drop branches that hold nowhere on P.
        Default is True.

    Returns
    -------
    NonMembershipCondition
        Branch m is sum_j f_m(u_j) * lambda_j < 0, where f_m is facet m of
        the dilation.
    """
    facets = dilation.facets
    branches = list()
    for normal, offset in zip(facets.normals, facets.offsets):
        coeffs = tuple(
            Fraction(sum(a * x for a, x in zip(normal, u)) + offset)
            for u in simplex.vertices
        )
        branch = StrictInequality(coeffs, Fraction(0))
        if prune and not inequality_satisfiable(branch):
            logger.debug("Pruned facet branch %s", branch)
            continue
        branches.append(branch)
    return NonMembershipCondition(tuple(branches))


def nonmembership(dilation):
    """
    Returns the non-membership condition of any dilation w.r.t. its parent.
    """
    spec = dilation.spec
    if spec.kind == EXPLICIT:
        return explicit_nonmembership(dilation.parent, dilation)
    if spec.is_translated:
        return translated_nonmembership(
            dilation.parent, spec.apex, spec.modulus, spec.translation
        )
    branch = apex_nonmembership(dilation.parent, spec.apex, spec.modulus)
    return NonMembershipCondition((branch,))


def dilation_contains(dilation, coords):
    """
    Decides membership of a point given by barycentric coordinates w.r.t.
    the parent simplex.

    Parameters
    ----------
    dilation : Dilation
        Dilation to be tested.
    coords : Sequence
        Exact barycentric coordinates in the parent simplex.

    Returns
    -------
    bool
        True iff no branch of the non-membership condition holds.
    """
    coords = lattice_util.rational_point(coords)
    return not dilation.condition.holds(coords)
