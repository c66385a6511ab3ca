"""
Created on Tue Oct 7 09:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Exact rational linear programming. Problems are solved with a two-phase
tableau simplex method over fractions.Fraction using Bland's rule, so every
solve terminates and is deterministic. The solver targets problems
with about ten variables and a few dozen rows.

The main client is strict_feasibility, which decides whether a system of
strict inequalities has a solution on the standard simplex
{lambda >= 0, sum(lambda) = 1} by maximizing a common slack epsilon.

"""

from dataclasses import dataclass
from fractions import Fraction

import logging

from simplex_dilation_utils.exceptions import LpVerificationError
from simplex_dilation_utils.lattice_util import (
    format_rational,
    rational_point,
    to_fraction,
)

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
RELATIONS = ("<=", "=", ">=")


# --- Domain Types ---
@dataclass(frozen=True)
class StrictInequality:
    """
    Strict linear inequality coefficients . lambda < offset.

    Attributes
    ----------
    coefficients : Tuple[Fraction]
        Coefficient of each variable.
    offset : Fraction
        Right-hand side.
    """

    coefficients: tuple
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        """
        Converts the coefficients and offset to fractions.
        """
        object.__setattr__(
            self, "coefficients", rational_point(self.coefficients)
        )
        object.__setattr__(self, "offset", to_fraction(self.offset))

    def __len__(self):
        """
        Returns the number of coefficients.
        """
        return len(self.coefficients)

    def value(self, point):
        """
        Computes coefficients . point - offset, which is negative iff the
        inequality holds.
        """
        point = rational_point(point)
        lhs = sum(a * x for a, x in zip(self.coefficients, point))
        return lhs - self.offset

    def holds(self, point):
        """
        Checks whether the inequality holds strictly at a point.
        """
        return self.value(point) < 0

    def is_proportional_to(self, other):
        """
        Checks whether two inequalities differ by a positive factor.
        """
        mine = self.coefficients + (self.offset,)
        theirs = other.coefficients + (other.offset,)
        if len(mine) != len(theirs):
            return False
        ratio = None
        for a, b in zip(mine, theirs):
            if (a == 0) != (b == 0):
                return False
            if a != 0:
                ratio = a / b if ratio is None else ratio
                if ratio <= 0 or a != ratio * b:
                    return False
        return ratio is not None

    def __str__(self):
        """
        Formats the inequality with variables l0, l1, ...
        """
        terms = list()
        for i, a in enumerate(self.coefficients):
            if a != 0:
                terms.append(f"{format_rational(a)}*l{i}")
        lhs = " + ".join(terms) if terms else "0"
        return f"{lhs} < {format_rational(self.offset)}"


@dataclass(frozen=True)
class Constraint:
    """
    Linear constraint row . x (relation) rhs.
    """
    row: tuple
    relation: str
    rhs: Fraction

    def __post_init__(self):
        """
        Validates the relation and converts the values to fractions.
        """
        if self.relation not in RELATIONS:
            raise ValueError(f"Relation is invalid - {self.relation}")
        object.__setattr__(self, "row", rational_point(self.row))
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    def satisfied_by(self, point):
        """
        Checks whether a point satisfies the constraint.
        """
        lhs = sum(a * x for a, x in zip(self.row, point))
        if self.relation == "<=":
            return lhs <= self.rhs
        if self.relation == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class LpProblem:
    """
    Linear program: maximize objective . x subject to the constraints and
    x >= lower_bounds (all zero by default).
    """

    objective: tuple
    constraints: tuple
    lower_bounds: tuple = None

    def __post_init__(self):
        """
        Converts the objective and the constraints.
        """
        objective = rational_point(self.objective)
        constraints = tuple(
            c if isinstance(c, Constraint) else Constraint(*c)
            for c in self.constraints
        )
        for c in constraints:
            if len(c.row) != len(objective):
                raise ValueError(
                    f"Constraint is invalid - expected {len(objective)} "
                    f"coefficients, got {len(c.row)}"
                )
        if self.lower_bounds is None:
            lower_bounds = (Fraction(0),) * len(objective)
        else:
            lower_bounds = rational_point(self.lower_bounds)
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "lower_bounds", lower_bounds)

    @property
    def n_variables(self):
        """
        Returns the number of variables.
        """
        return len(self.objective)


@dataclass(frozen=True)
class LpOutcome:
    """
    Result of an LP solve. "value" and "point" are only set when the status
    is "optimal".
    """

    status: str
    value: Fraction = None
    point: tuple = None

    @property
    def is_optimal(self):
        """
        Indication of whether an optimum was found.
        """
        return self.status == OPTIMAL


@dataclass(frozen=True)
class SlackSolution:
    """
    Result of strict_feasibility.

    Attributes
    ----------
    epsilon : Fraction or None
        Optimal common slack; None when even the closed system is empty.
    witness : Tuple[Fraction] or None
        Point of the standard simplex attaining epsilon.
    """

    epsilon: Fraction = None
    witness: tuple = None

    @property
    def feasible(self):
        """
        Indication of whether the rows hold strictly at some point.
        """
        return self.epsilon is not None and self.epsilon > 0


# --- Tableau ---
class SimplexTableau:
    """
    Dense tableau in canonical form with respect to the current basis.

    Attributes
    ----------
    rows : List[List[Fraction]]
        Constraint matrix expressed in the current basis.
    rhs : List[Fraction]
        Values of the basic variables.
    basis : List[int]
        Index of the basic column of each row.
    """

    def __init__(self, rows, rhs, basis):
        """
        Instantiates a SimplexTableau.
        """
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.n_pivots = 0

    def pivot(self, i, j):
        """
        Pivots on entry (i, j).
        """
        piv = self.rows[i][j]
        self.rows[i] = [a / piv for a in self.rows[i]]
        self.rhs[i] /= piv
        for k in range(len(self.rows)):
            f = self.rows[k][j]
            if k != i and f != 0:
                row_i = self.rows[i]
                self.rows[k] = [a - f * b for a, b in zip(self.rows[k], row_i)]
                self.rhs[k] -= f * self.rhs[i]
        self.basis[i] = j
        self.n_pivots += 1

    def objective_value(self, cost):
        """
        Computes cost . x at the current basic solution.
        """
        return sum(cost[b] * v for b, v in zip(self.basis, self.rhs))

    def optimize(self, cost, allowed):
        """
        Maximizes cost . x over the current tableau with Bland's rule.

        Parameters
        ----------
        cost : List[Fraction]
            Cost of each column.
        allowed : List[int]
            Columns that may enter the basis, in increasing order.

        Returns
        -------
        str
            Either "optimal" or "unbounded".
        """
        while True:
            # Entering column: smallest index with positive reduced cost
            entering = None
            for j in allowed:
                reduced = cost[j] - sum(
                    cost[b] * row[j] for b, row in zip(self.basis, self.rows)
                )
                if reduced > 0:
                    entering = j
                    break
            if entering is None:
                return OPTIMAL

            # Leaving row: minimum ratio, ties broken by basic index
            candidates = [
                (self.rhs[i] / row[entering], self.basis[i], i)
                for i, row in enumerate(self.rows)
                if row[entering] > 0
            ]
            if not candidates:
                return UNBOUNDED
            self.pivot(min(candidates)[2], entering)

    def drop_row(self, i):
        """
        Removes row i.
        """
        del self.rows[i]
        del self.rhs[i]
        del self.basis[i]


# --- Solvers ---
def solve(problem):
    """
    Solves a linear program exactly.

    Parameters
    ----------
    problem : LpProblem
        Maximization problem with rational data.

    Returns
    -------
    LpOutcome
        Optimal value and point, or the "infeasible"/"unbounded" status.
        Optimal points are re-verified against every constraint.
    """
    n = problem.n_variables
    lower = problem.lower_bounds

    # Shift variables so that all lower bounds are 0, make every rhs >= 0
    normalized = list()
    for c in problem.constraints:
        rhs = c.rhs - sum(a * b for a, b in zip(c.row, lower))
        row, relation = list(c.row), c.relation
        if rhs < 0:
            row, rhs = [-a for a in row], -rhs
            relation = {"<=": ">=", ">=": "<=", "=": "="}[relation]
        normalized.append((row, relation, rhs))

    # Column layout: structural | slack/surplus | artificial
    n_slack = sum(1 for _, rel, _ in normalized if rel != "=")
    n_art = sum(1 for _, rel, _ in normalized if rel != "<=")
    width = n + n_slack + n_art
    rows, rhs, basis = list(), list(), list()
    s, a = n, n + n_slack
    for row, relation, value in normalized:
        full = row + [Fraction(0)] * (n_slack + n_art)
        if relation == "<=":
            full[s] = Fraction(1)
            basis.append(s)
            s += 1
        else:
            if relation == ">=":
                full[s] = Fraction(-1)
                s += 1
            full[a] = Fraction(1)
            basis.append(a)
            a += 1
        rows.append(full)
        rhs.append(value)
    tableau = SimplexTableau(rows, rhs, basis)
    artificial = set(range(n + n_slack, width))
    allowed = list(range(n + n_slack))

    # Phase 1
    if artificial:
        cost = [Fraction(0)] * width
        for j in artificial:
            cost[j] = Fraction(-1)
        tableau.optimize(cost, list(range(width)))
        if tableau.objective_value(cost) < 0:
            logger.debug("LP infeasible after %d pivots", tableau.n_pivots)
            return LpOutcome(INFEASIBLE)

        # Drive remaining artificial columns out of the basis
        i = 0
        while i < len(tableau.rows):
            if tableau.basis[i] in artificial:
                j = next(
                    (j for j in allowed if tableau.rows[i][j] != 0), None
                )
                if j is None:
                    tableau.drop_row(i)
                    continue
                tableau.pivot(i, j)
            i += 1

    # Phase 2
    cost = list(problem.objective) + [Fraction(0)] * (width - n)
    if tableau.optimize(cost, allowed) == UNBOUNDED:
        return LpOutcome(UNBOUNDED)

    point = [Fraction(0)] * n
    for b, value in zip(tableau.basis, tableau.rhs):
        if b < n:
            point[b] = value
    point = tuple(x + lb for x, lb in zip(point, lower))
    verify_point(problem, point)
    value = sum(c * x for c, x in zip(problem.objective, point))
    logger.debug("LP optimum %s after %d pivots", value, tableau.n_pivots)
    return LpOutcome(OPTIMAL, value, point)


def verify_point(problem, point):
    """
    Re-checks a point against every constraint and bound of a problem.
    """
    if any(x < lb for x, lb in zip(point, problem.lower_bounds)):
        raise LpVerificationError(f"Point violates lower bounds - {point}")
    for c in problem.constraints:
        if not c.satisfied_by(point):
            raise LpVerificationError(
                f"Point violates constraint - {c} at {point}"
            )


def strict_feasibility(rows, simplex_dim, epsilon_cap=Fraction(1)):
    """
    Decides whether strict inequalities have a common solution on the
    standard simplex by maximizing a common slack.

    Parameters
    ----------
    rows : Sequence[StrictInequality]
        Inequalities a_m . lambda < c_m over lambda in R^(n+1).
    simplex_dim : int
        Dimension n of the simplex; lambda has n + 1 entries.
    epsilon_cap : Fraction, optional
        Upper bound on epsilon that keeps the problem bounded. Default is 1.

    Returns
    -------
    SlackSolution
        Maximum epsilon with a_m . lambda + epsilon <= c_m for all m,
        lambda >= 0, sum(lambda) = 1 and 0 <= epsilon <= epsilon_cap. The
        open system is feasible iff epsilon > 0, and then the witness
        satisfies every row strictly.
    """
    size = simplex_dim + 1
    constraints = list()
    for row in rows:
        if len(row) != size:
            raise ValueError(
                f"Inequality is invalid - expected {size} coefficients"
            )
        constraints.append(
            Constraint(row.coefficients + (Fraction(1),), "<=", row.offset)
        )
    constraints.append(Constraint((Fraction(1),) * size + (0,), "=", 1))
    constraints.append(Constraint((0,) * size + (1,), "<=", epsilon_cap))
    objective = (0,) * size + (1,)
    outcome = solve(LpProblem(objective, tuple(constraints)))
    if not outcome.is_optimal:
        return SlackSolution()

    witness = outcome.point[:size]
    if outcome.value > 0 and not all(row.holds(witness) for row in rows):
        raise LpVerificationError(f"Witness is invalid - {witness}")
    return SlackSolution(outcome.value, witness)


def inequality_satisfiable(row):
    """
    Checks whether a single strict inequality holds somewhere on the
    standard simplex.
    """
    return strict_feasibility([row], len(row) - 1).feasible


def convex_combination(points, target, weights=None):
    """
    Expresses a target point as a convex combination of candidate points.

    Parameters
    ----------
    points : Sequence[Sequence]
        Candidate points.
    target : Sequence
        Rational point to be expressed.
    weights : Sequence, optional
        Score of each candidate; the combination maximizing the total score
        is returned. Default is all zero.

    Returns
    -------
    LpOutcome
        Optimal outcome whose point holds the convex weights of a basic
        solution (at most dim + 1 nonzero entries), or "infeasible" when the
        target is outside the convex hull of the candidates.
    """
    points = [rational_point(p) for p in points]
    target = rational_point(target)
    weights = [0] * len(points) if weights is None else weights
    constraints = list()
    for axis in range(len(target)):
        row = tuple(p[axis] for p in points)
        constraints.append(Constraint(row, "=", target[axis]))
    constraints.append(Constraint((1,) * len(points), "=", 1))
    return solve(LpProblem(tuple(weights), tuple(constraints)))
