"""
Created on Mon Oct 6 10:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Exact integer/rational geometry for full-dimensional lattice simplices. A
lattice simplex in dimension n is stored as its n + 1 integer vertices
u_0, ..., u_n, and the order of the vertices is significant since apex
constructions refer to vertices by index.

Nothing in this module uses floating point: rationals are
fractions.Fraction and exact matrix inversion/nullspaces are delegated to
sympy.

"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import gcd

import logging
import operator
import pandas as pd
import sympy as sp

from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    DegenerateEdgeError,
    DegenerateSimplexError,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_CELLS = 10**7


# --- Conversions ---
def to_fraction(value):
    """
    Converts an int, str, Fraction or sympy Rational to a Fraction.

    Parameters
    ----------
    value : int, str, Fraction or sympy.Rational
        Exact rational value. Strings may be of the form "p/q".

    Returns
    -------
    Fraction
        Reduced exact rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sp.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, float):
        raise TypeError(f"Value is invalid - floats are not exact: {value}")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(operator.index(value))


def to_integer(value):
    """
    Converts an int-like value or decimal string to an int.
    """
    if isinstance(value, str):
        return int(value.strip())
    return operator.index(value)


def rational_point(coords):
    """
    Converts a sequence of exact numbers to a tuple of Fractions.
    """
    return tuple(to_fraction(c) for c in coords)


def to_sympy(value):
    """
    Converts a rational value to a sympy Rational.
    """
    value = to_fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def to_sympy_matrix(rows):
    """
    Converts rows of rational values to a sympy Matrix.
    """
    return sp.Matrix([[to_sympy(v) for v in row] for row in rows])


def format_rational(value):
    """
    Formats an exact rational as "p/q" (or "p" when integral).
    """
    value = to_fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# --- Exact linear algebra ---
def affine_rank(points):
    """
    Computes the dimension of the affine hull of a set of points.

    Parameters
    ----------
    points : Sequence[Sequence]
        Rational points of a common dimension.

    Returns
    -------
    int
        Dimension of the affine hull; -1 for an empty set.
    """
    points = [rational_point(p) for p in points]
    if len(points) == 0:
        return -1
    if len(points) == 1:
        return 0
    base = points[0]
    rows = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return to_sympy_matrix(rows).rank()


def normalized_volume(vertices):
    """
    Computes |det(u_1 - u_0, ..., u_n - u_0)|, i.e. n! times the volume of
    the simplex with the given vertices.
    """
    vertices = [rational_point(v) for v in vertices]
    base = vertices[0]
    rows = [[a - b for a, b in zip(v, base)] for v in vertices[1:]]
    return abs(to_fraction(to_sympy_matrix(rows).det()))


def is_k_dilation(vertices, k):
    """
    Checks whether all pairwise differences of integer vertices are
    divisible by k, i.e. whether the simplex equals kQ + v for some lattice
    simplex Q and lattice vector v.

    Parameters
    ----------
    vertices : Sequence[Sequence[int]]
        Integer vertices.
    k : int
        Dilation factor.

    Returns
    -------
    bool
        Indication of whether the vertices form a k-dilation.
    """
    for a, b in combinations(vertices, 2):
        if any((x - y) % k != 0 for x, y in zip(a, b)):
            return False
    return True


# --- Domain Types ---
@dataclass(frozen=True)
class BarycentricCoords:
    """
    Exact barycentric coordinates (lambda_0, ..., lambda_n) of a point of a
    simplex: every entry is nonnegative and the entries sum to exactly 1.
    """

    values: tuple

    def __post_init__(self):
        """
        Validates the coordinates.
        """
        values = rational_point(self.values)
        object.__setattr__(self, "values", values)
        if any(v < 0 for v in values):
            raise ValueError(f"Barycentric coordinates are invalid - {values}")
        if sum(values) != 1:
            raise ValueError(
                f"Barycentric coordinates do not sum to 1 - {values}"
            )

    @classmethod
    def normalized(cls, weights):
        """
        Builds coordinates proportional to the given nonnegative weights.
        """
        weights = rational_point(weights)
        total = sum(weights)
        return cls(tuple(w / total for w in weights))

    @classmethod
    def vertex(cls, i, size):
        """
        Returns the coordinates of vertex i.
        """
        return cls(tuple(Fraction(int(j == i)) for j in range(size)))

    def __iter__(self):
        """
        Iterates over the coordinates.
        """
        return iter(self.values)

    def __len__(self):
        """
        Returns the number of coordinates.
        """
        return len(self.values)

    def __getitem__(self, i):
        """
        Returns coordinate i.
        """
        return self.values[i]

    def formatted(self):
        """
        Formats the coordinates as exact rational strings.
        """
        return [format_rational(v) for v in self.values]


@dataclass(frozen=True)
class FacetSystem:
    """
    H-representation of a simplex. Facet i is the affine functional
    x -> normals[i] . x + offsets[i], which vanishes on the facet opposite
    vertex i and is nonnegative exactly on the simplex.

    Attributes
    ----------
    normals : Tuple[Tuple[int]]
        Integer normal vectors, one per facet.
    offsets : Tuple[int]
        Integer offsets, one per facet. The coefficients of each facet have
        gcd 1.
    """

    normals: tuple
    offsets: tuple

    def evaluate(self, point):
        """
        Evaluates every facet functional at a rational point.

        Parameters
        ----------
        point : Sequence
            Rational point.

        Returns
        -------
        Tuple[Fraction]
            Value of each functional; all values are nonnegative iff the
            point is in the simplex.
        """
        point = rational_point(point)
        return tuple(
            sum(a * x for a, x in zip(normal, point)) + offset
            for normal, offset in zip(self.normals, self.offsets)
        )

    def contains(self, point):
        """
        Checks whether a point lies in the closed simplex.
        """
        return all(value >= 0 for value in self.evaluate(point))

    def interior_contains(self, point):
        """
        Checks whether a point lies in the interior of the simplex.
        """
        return all(value > 0 for value in self.evaluate(point))


@dataclass(frozen=True)
class EdgeLengthMatrix:
    """
    Symmetric matrix of lattice lengths l_ij of the edges of a simplex. The
    diagonal is unused and stored as 0.
    """

    lengths: tuple

    def __post_init__(self):
        """
        Validates that the matrix is square with positive entries off the
        diagonal.
        """
        lengths = tuple(
            tuple(to_integer(v) for v in row) for row in self.lengths
        )
        object.__setattr__(self, "lengths", lengths)
        size = len(lengths)
        for i, row in enumerate(lengths):
            if len(row) != size:
                raise ValueError("Edge length matrix is invalid - not square")
            for j in range(size):
                if i != j and row[j] < 1:
                    raise ValueError(
                        f"Edge length is invalid - l[{i}][{j}]={row[j]}"
                    )
                if row[j] != lengths[j][i]:
                    raise ValueError(
                        f"Edge length matrix is invalid - asymmetric at "
                        f"{i},{j}"
                    )

    @classmethod
    def from_upper(cls, size, entries):
        """
        Builds a matrix from a dict {(i, j): l_ij} over pairs i < j.
        """
        lengths = [[0] * size for _ in range(size)]
        for (i, j), value in entries.items():
            lengths[i][j] = lengths[j][i] = value
        return cls(tuple(tuple(row) for row in lengths))

    def __getitem__(self, index):
        """
        Returns the length of edge (i, j).
        """
        i, j = index
        if i == j:
            raise ValueError(f"Edge is invalid - ({i}, {j})")
        return self.lengths[i][j]

    @property
    def size(self):
        """
        Returns the number of vertices.
        """
        return len(self.lengths)

    @property
    def min_lattice_length(self):
        """
        Minimum lattice length over all edges, i.e. l(P).
        """
        return min(self[i, j] for i, j in combinations(range(self.size), 2))

    def incident(self, i):
        """
        Returns a dict mapping each j != i to l_ij.
        """
        return {j: self[i, j] for j in range(self.size) if j != i}

    def to_dataframe(self):
        """
        Converts the matrix to a table indexed by vertex labels with an
        empty diagonal.
        """
        labels = [f"u{i}" for i in range(self.size)]
        df = pd.DataFrame(self.lengths, index=labels, columns=labels)
        df = df.astype("Int64")
        for i in range(self.size):
            df.iat[i, i] = pd.NA
        return df


@dataclass(frozen=True)
class LatticeSimplex:
    """
    Full-dimensional lattice simplex Conv(u_0, ..., u_n) in dimension n.

    Attributes
    ----------
    vertices : Tuple[Tuple[int]]
        The n + 1 integer vertices in input order.
    """

    vertices: tuple

    def __post_init__(self):
        """
        Validates that the vertices span a full-dimensional simplex.
        """
        vertices = tuple(
            tuple(to_integer(c) for c in v) for v in self.vertices
        )
        object.__setattr__(self, "vertices", vertices)
        n = len(vertices) - 1
        if n < 1:
            raise ValueError("Simplex is invalid - needs at least 2 vertices")
        for v in vertices:
            if len(v) != n:
                raise ValueError(
                    f"Vertex is invalid - expected dimension {n}, got {v}"
                )
        if affine_rank(vertices) < n:
            raise DegenerateSimplexError(
                f"Simplex is invalid - vertices are not full-dimensional: "
                f"{vertices}"
            )

    def __getitem__(self, i):
        """
        Returns vertex i.
        """
        return self.vertices[i]

    def __len__(self):
        """
        Returns the number of vertices.
        """
        return len(self.vertices)

    @property
    def dim(self):
        """
        Returns the dimension n.
        """
        return len(self.vertices) - 1

    @cached_property
    def edge_lengths(self):
        """
        Lattice lengths of all edges.
        """
        return edge_length_matrix(self)

    @cached_property
    def facets(self):
        """
        Facet functionals of the simplex.
        """
        return facet_system(self.vertices)

    @cached_property
    def barycentric_inverse(self):
        """
        Inverse of the (n+1)x(n+1) matrix whose columns are (u_j, 1), as
        nested tuples of Fractions.
        """
        rows = [[v[c] for v in self.vertices] for c in range(self.dim)]
        rows.append([1] * len(self.vertices))
        inverse = to_sympy_matrix(rows).inv()
        return tuple(
            tuple(to_fraction(inverse[i, j]) for j in range(inverse.cols))
            for i in range(inverse.rows)
        )

    def centroid(self):
        """
        Returns the centroid.
        """
        return from_barycentric(
            self, [Fraction(1, len(self))] * len(self)
        )


# --- Lattice lengths ---
def lattice_length(a, b):
    """
    Computes the lattice length of the segment [a, b], i.e. the number of
    lattice points on the segment minus 1.

    Parameters
    ----------
    a : Sequence[int]
        Integer endpoint.
    b : Sequence[int]
        Integer endpoint of the same dimension.

    Returns
    -------
    int
        gcd of the absolute coordinate differences.
    """
    if len(a) != len(b):
        raise ValueError(f"Dimension mismatch - {a}, {b}")
    diffs = [to_integer(y) - to_integer(x) for x, y in zip(a, b)]
    if not any(diffs):
        raise DegenerateEdgeError(f"Edge is degenerate - {tuple(a)}")
    return gcd(*diffs)


def edge_length_matrix(simplex):
    """
    Computes the matrix of pairwise lattice lengths of a simplex.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex whose edges are measured.

    Returns
    -------
    EdgeLengthMatrix
        Symmetric matrix with l_ij = lattice_length(u_i, u_j).
    """
    size = len(simplex.vertices)
    entries = dict()
    for i, j in combinations(range(size), 2):
        entries[(i, j)] = lattice_length(simplex[i], simplex[j])
    return EdgeLengthMatrix.from_upper(size, entries)


def primitive_direction(simplex, i, j):
    """
    Computes the primitive vector (u_j - u_i) / l_ij along an edge.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex containing the edge.
    i : int
        Index of the start vertex.
    j : int
        Index of the end vertex.

    Returns
    -------
    Tuple[int]
        Integer vector whose coordinates have gcd 1.
    """
    if i == j:
        raise ValueError(f"Edge is invalid - ({i}, {j})")
    length = simplex.edge_lengths[i, j]
    return tuple((b - a) // length for a, b in zip(simplex[i], simplex[j]))


# --- Barycentric coordinates ---
def to_barycentric(simplex, point):
    """
    Solves sum_i lambda_i u_i = p, sum_i lambda_i = 1 exactly.

    Parameters
    ----------
    simplex : LatticeSimplex
        Reference simplex.
    point : Sequence
        Rational point of the ambient space.

    Returns
    -------
    Tuple[Fraction]
        Barycentric coordinates, possibly with negative entries.
    bool
        Indication of whether the point lies in the simplex, i.e. whether
        all coordinates are nonnegative.
    """
    point = rational_point(point)
    if len(point) != simplex.dim:
        raise ValueError(f"Dimension mismatch - {point}")
    rhs = point + (Fraction(1),)
    coords = tuple(
        sum(a * b for a, b in zip(row, rhs))
        for row in simplex.barycentric_inverse
    )
    return coords, all(c >= 0 for c in coords)


def from_barycentric(simplex, coords):
    """
    Computes the point sum_i lambda_i u_i; the exact inverse of
    to_barycentric.
    """
    coords = rational_point(coords)
    if len(coords) != len(simplex):
        raise ValueError(f"Barycentric coordinates are invalid - {coords}")
    if sum(coords) != 1:
        raise ValueError(f"Barycentric coordinates do not sum to 1 - {coords}")
    return tuple(
        sum(c * v[axis] for c, v in zip(coords, simplex.vertices))
        for axis in range(simplex.dim)
    )


# --- Facets ---
def facet_system(vertices):
    """
    Computes the facet functionals of a simplex with rational vertices.

    Parameters
    ----------
    vertices : Sequence[Sequence]
        The n + 1 rational vertices of a full-dimensional simplex.

    Returns
    -------
    FacetSystem
        Facet i vanishes on the facet opposite vertex i and is positive at
        vertex i. Coefficients are integers with gcd 1.
    """
    vertices = [rational_point(v) for v in vertices]
    n = len(vertices) - 1
    normals, offsets = list(), list()
    for i in range(len(vertices)):
        others = vertices[:i] + vertices[i + 1:]
        if n == 1:
            normal = [Fraction(1)]
        else:
            rows = [[a - b for a, b in zip(w, others[0])] for w in others[1:]]
            kernel = to_sympy_matrix(rows).nullspace()
            if len(kernel) != 1:
                raise DegenerateSimplexError(
                    f"Simplex is invalid - facet {i} is degenerate"
                )
            normal = [to_fraction(c) for c in kernel[0]]
        offset = -sum(a * x for a, x in zip(normal, others[0]))

        # Normalize to coprime integers, positive at the opposite vertex
        coeffs = normal + [offset]
        scale = 1
        for c in coeffs:
            scale = scale * c.denominator // gcd(scale, c.denominator)
        ints = [int(c * scale) for c in coeffs]
        divisor = gcd(*ints)
        ints = [c // divisor for c in ints]
        value = sum(a * x for a, x in zip(ints[:-1], vertices[i])) + ints[-1]
        if value == 0:
            raise DegenerateSimplexError(
                f"Simplex is invalid - vertex {i} lies on its opposite facet"
            )
        if value < 0:
            ints = [-c for c in ints]
        normals.append(tuple(ints[:-1]))
        offsets.append(ints[-1])
    return FacetSystem(tuple(normals), tuple(offsets))


# --- Lattice points ---
def lattice_points(vertices, max_cells=DEFAULT_MAX_CELLS):
    """
    Enumerates the integer points of a simplex with rational vertices.

    The first n - 1 coordinates are scanned over the integer bounding box
    and, for each such prefix, the admissible range of the last coordinate
    is read off the facet functionals exactly.

    Parameters
    ----------
    vertices : Sequence[Sequence]
        The n + 1 rational vertices of a full-dimensional simplex.
    max_cells : int, optional
        Maximum number of cells scanned, counting every prefix and every
        candidate of the last coordinate. Default is 10**7.

    Returns
    -------
    List[Tuple[int]]
        Integer points of the simplex sorted lexicographically.

    Raises
    ------
    BudgetExceededError
        If the scan exceeds max_cells.
    """
    vertices = [rational_point(v) for v in vertices]
    if len(vertices) == 2 and len(vertices[0]) > 1:
        return segment_lattice_points(*vertices)

    facets = facet_system(vertices)
    n = len(vertices) - 1
    lows = [min(v[c] for v in vertices) for c in range(n)]
    highs = [max(v[c] for v in vertices) for c in range(n)]
    lows = [-((-lo.numerator) // lo.denominator) for lo in lows]
    highs = [hi.numerator // hi.denominator for hi in highs]

    # Check budget
    ranges = [range(lo, hi + 1) for lo, hi in zip(lows[:-1], highs[:-1])]
    cells = 1
    for r in ranges:
        cells *= len(r)
    if cells > max_cells:
        raise BudgetExceededError(
            "lattice point enumeration", max_cells, cells
        )

    # Main
    points = list()
    for prefix in product(*ranges):
        lo, hi = lows[-1], highs[-1]
        for normal, offset in zip(facets.normals, facets.offsets):
            partial = offset + sum(a * x for a, x in zip(normal, prefix))
            last = normal[-1]
            if last > 0:
                lo = max(lo, -(partial // last))
            elif last < 0:
                hi = min(hi, partial // -last)
            elif partial < 0:
                hi = lo - 1
            if hi < lo:
                break
        cells += max(hi - lo + 1, 0)
        if cells > max_cells:
            raise BudgetExceededError(
                "lattice point enumeration", max_cells, cells
            )
        points.extend(prefix + (x,) for x in range(lo, hi + 1))
    logger.debug("Enumerated %d lattice points (%d cells)", len(points), cells)
    return points


def segment_lattice_points(a, b):
    """
    Enumerates the integer points of a segment with integer endpoints.
    """
    if any(to_fraction(c).denominator != 1 for c in tuple(a) + tuple(b)):
        raise ValueError("Segment is invalid - endpoints must be integral")
    a = tuple(int(c) for c in a)
    b = tuple(int(c) for c in b)
    length = lattice_length(a, b)
    step = tuple((y - x) // length for x, y in zip(a, b))
    points = [
        tuple(x + t * s for x, s in zip(a, step)) for t in range(length + 1)
    ]
    return sorted(points)


# --- Transformations ---
def scale_simplex(simplex, r):
    """
    Returns the dilate r * P of a lattice simplex for a positive integer r.
    """
    if r < 1:
        raise ValueError(f"Scale factor is invalid - {r}")
    return LatticeSimplex(tuple(tuple(r * c for c in v) for v in simplex))


def relabel(simplex, permutation):
    """
    Reorders the vertices of a simplex.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex to be relabeled.
    permutation : Sequence[int]
        New vertex m is old vertex permutation[m].

    Returns
    -------
    LatticeSimplex
        Same point set with reordered vertices.
    """
    if sorted(permutation) != list(range(len(simplex))):
        raise ValueError(f"Permutation is invalid - {permutation}")
    return LatticeSimplex(tuple(simplex[p] for p in permutation))
