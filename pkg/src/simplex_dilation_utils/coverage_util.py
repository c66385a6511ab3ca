"""
Created on Wed Oct 8 10:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Routines that decide whether a set of dilations covers its parent simplex.

    Exact certificate:
        A point of P is uncovered iff it satisfies the non-membership
        condition of every dilation. Expanding the conjunction of these
        disjunctions gives branch systems of strict inequalities, each of
        which is decided exactly with the max-slack LP. The cover is
        complete iff every branch system is infeasible.

    Monte Carlo estimate:
        Points of P are drawn in barycentric form and tested against the
        same predicates. Uniform samples give the uncovered volume
        fraction; normalized cube samples weight the center of P more
        heavily and give a larger rate for central gaps.

"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from tqdm import tqdm

import logging
import math
import numpy as np
import pandas as pd

from simplex_dilation_utils import config_util, dilation_util, lattice_util
from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    CertificationError,
    PreconditionError,
)
from simplex_dilation_utils.lp_util import (
    inequality_satisfiable,
    strict_feasibility,
)

logger = logging.getLogger(__name__)

COVERED = "covered"
WITNESS = "witness"

UNIFORM = "uniform"
CUBE = "cube"
SAMPLERS = (UNIFORM, CUBE)


# --- Domain Types ---
@dataclass(frozen=True)
class Cover:
    """
    Nonempty set of dilations sharing one parent simplex.

    Attributes
    ----------
    dilations : Tuple[Dilation]
        Dilations in cover order; the order fixes the branch order used by
        certify.
    """

    dilations: tuple

    def __post_init__(self):
        """
        Checks that the dilations share one parent simplex.
        """
        dilations = tuple(self.dilations)
        object.__setattr__(self, "dilations", dilations)
        if not dilations:
            raise ValueError("Cover is invalid - no dilations")
        parent = dilations[0].parent
        for d in dilations:
            if d.parent != parent:
                raise ValueError("Cover is invalid - parents differ")
            for v in d.vertices:
                if not parent.facets.contains(v):
                    raise PreconditionError(
                        f"Cover is invalid - {d.label()} leaves the parent"
                    )

    def __iter__(self):
        """
        Iterates over the dilations.
        """
        return iter(self.dilations)

    def __len__(self):
        """
        Returns the number of dilations.
        """
        return len(self.dilations)

    @property
    def parent(self):
        """
        Returns the simplex covered by the dilations.
        """
        return self.dilations[0].parent

    def moduli(self):
        """
        Returns the modulus of each dilation.
        """
        return [d.modulus for d in self.dilations]

    def extended(self, dilations):
        """
        Returns a new cover with the given dilations appended.
        """
        return Cover(self.dilations + tuple(dilations))


@dataclass(frozen=True)
class ACoefficients:
    """
    Coefficients A_i = 1 - sum_{j != i} r_ij / (l_ij - r_ij) for a modulus k.
    """

    k: int
    values: tuple

    @property
    def all_nonnegative(self):
        """
        Indication of whether every coefficient is nonnegative.
        """
        return all(a >= 0 for a in self.values)

    def negative_indices(self):
        """
        Returns the vertices with a negative coefficient.
        """
        return [i for i, a in enumerate(self.values) if a < 0]

    def formatted(self):
        """
        Formats the coefficients as exact rational strings.
        """
        return [lattice_util.format_rational(a) for a in self.values]


@dataclass(frozen=True)
class Certificate:
    """
    Outcome of certify.

    Attributes
    ----------
    status : str
        Either "covered" or "witness".
    branches_checked : int
        Number of (partial) branch systems decided with the LP.
    witness : BarycentricCoords, optional
        Uncovered point when the status is "witness".
    branch : Tuple[int], optional
        Index of the chosen branch of each dilation's condition.
    epsilon : Fraction, optional
        Slack of the feasible branch system.
    """

    status: str
    branches_checked: int
    witness: lattice_util.BarycentricCoords = None
    branch: tuple = None
    epsilon: Fraction = None

    @property
    def covered(self):
        """
        Indication of whether no witness was found.
        """
        return self.status == COVERED


@dataclass(frozen=True)
class UncoveredEstimate:
    """
    Monte Carlo estimate of the uncovered fraction of a simplex.

    Attributes
    ----------
    samples : int
        Number of samples drawn.
    uncovered : int
        Number of samples outside every dilation.
    seed : int
        Seed of the counter-based generator.
    history : Tuple[Tuple[int, int]]
        Cumulative (samples, uncovered) after each chunk.
    sampler : str
        Distribution of the samples, "uniform" or "cube".
    """

    samples: int
    uncovered: int
    seed: int
    history: tuple = ()
    sampler: str = UNIFORM

    @property
    def rate(self):
        """
        Fraction of uncovered samples.
        """
        return self.uncovered / self.samples

    @property
    def stderr(self):
        """
        Binomial standard error of the rate.
        """
        p = self.rate
        return math.sqrt(p * (1 - p) / self.samples)

    def running(self):
        """
        Returns the running estimate as a table with columns "samples",
        "uncovered_count" and "rate".
        """
        df = pd.DataFrame(
            list(self.history), columns=["samples", "uncovered_count"]
        )
        df["rate"] = df["uncovered_count"] / df["samples"]
        return df


# --- A coefficients ---
def a_coefficients(simplex, k):
    """
    Computes the coefficients A_i of the summed apex non-membership
    inequalities for modulus k.

    Parameters
    ----------
    simplex : LatticeSimplex
        Parent simplex P.
    k : int
        Modulus with 2 <= k <= l(P).

    Returns
    -------
    ACoefficients
        Exact coefficients; if every entry is nonnegative, the apex
        dilations {P_{i,k}} cover P.
    """
    shortest = simplex.edge_lengths.min_lattice_length
    if k < 2 or k > shortest:
        raise PreconditionError(
            f"Modulus is invalid - k={k} not in [2, l(P)={shortest}]"
        )
    values = list()
    for i in range(len(simplex)):
        lengths = simplex.edge_lengths.incident(i).values()
        values.append(
            1 - sum(dilation_util.edge_fraction(l, k) for l in lengths)
        )
    return ACoefficients(k, tuple(values))


# --- Exact certificate ---
def branch_options(cover, prune=True):
    """
    Collects the branches of each dilation's non-membership condition.

    Parameters
    ----------
    cover : Cover
        Cover to be expanded.
    prune : bool, optional
        Indication of whether to drop branches that hold nowhere on P.
        Default is True.

    Returns
    -------
    List[Tuple[StrictInequality]]
        Branches per dilation in cover order.
    """
    options = list()
    for d in cover:
        if d.spec.kind == dilation_util.EXPLICIT:
            condition = dilation_util.explicit_nonmembership(
                d.parent, d, prune=prune
            )
            options.append(condition.branches)
            continue

        branches = d.condition.branches
        if prune:
            branches = tuple(b for b in branches if inequality_satisfiable(b))
        options.append(branches)
    return options


def noncoverage_dnf(cover, max_branches=None, prune=True):
    """
    Expands the conjunction of non-membership conditions into branch
    systems.

    Parameters
    ----------
    cover : Cover
        Cover to be expanded.
    max_branches : int, optional
        Maximum number of branch systems. Default is the configured
        "max_branches".
    prune : bool, optional
        Indication of whether to drop individually unsatisfiable branches.
        Default is True.

    Returns
    -------
    List[List[StrictInequality]]
        Branch systems in itertools.product order, one inequality per
        dilation. The list is empty when some dilation equals P.
    """
    if max_branches is None:
        max_branches = config_util.load_settings().max_branches
    options = branch_options(cover, prune=prune)
    total = math.prod(len(o) for o in options)
    if total > max_branches:
        raise BudgetExceededError("branch systems", max_branches, total)
    return [list(system) for system in product(*options)]


def certify(cover, max_branches=None, prune=True):
    """
    Decides exactly whether a cover is complete.

    Branch systems are explored depth first in itertools.product order. When
    pruning is enabled, every partial system is decided with the LP and an
    infeasible one removes its whole subtree; otherwise every full system is
    decided in turn.

    Parameters
    ----------
    cover : Cover
        Cover to be certified.
    max_branches : int, optional
        Maximum number of LP decisions. Default is the configured
        "max_branches".
    prune : bool, optional
        Indication of whether to prune unsatisfiable branches and subtrees.
        Default is True.

    Returns
    -------
    Certificate
        "covered" iff no branch system is feasible; otherwise the witness of
        the first feasible branch system.
    """
    if max_branches is None:
        max_branches = config_util.load_settings().max_branches
    n = cover.parent.dim
    options = branch_options(cover, prune=prune)
    if any(len(o) == 0 for o in options):
        logger.debug("Cover contains a dilation equal to the parent")
        return Certificate(COVERED, 0)

    if prune:
        found, checked = _search_pruned(options, n, max_branches)
    else:
        found, checked = _search_exhaustive(options, n, max_branches)

    if found is None:
        logger.info("Cover certified after %d LP decisions", checked)
        return Certificate(COVERED, checked)

    choice, rows, solution = found
    witness = interior_witness(rows, solution.witness, solution.epsilon)
    certificate = Certificate(
        WITNESS,
        checked,
        witness=lattice_util.BarycentricCoords(witness),
        branch=choice,
        epsilon=solution.epsilon,
    )
    for d in cover:
        if dilation_util.dilation_contains(d, witness):
            raise CertificationError(
                f"Witness Verification Failed - {d.label()} contains "
                f"{certificate.witness.formatted()}",
                certificate,
            )
    logger.info("Uncovered witness %s", certificate.witness.formatted())
    return certificate


def _search_pruned(options, n, max_branches):
    """
    Depth-first search over branch choices that discards a prefix as soon as
    its rows are infeasible. Returns the first feasible full choice, or None,
    with the number of LP decisions.
    """
    checked = 0
    stack = [()]
    while stack:
        choice = stack.pop()
        rows = [options[d][b] for d, b in enumerate(choice)]
        if choice:
            checked += 1
            if checked > max_branches:
                raise BudgetExceededError(
                    "branch systems", max_branches, checked
                )
            solution = strict_feasibility(rows, n)
            if not solution.feasible:
                logger.debug("Pruned partial branch %s", choice)
                continue
            if len(choice) == len(options):
                return (choice, rows, solution), checked

        # Push children in reverse so that the smallest index pops first
        depth = len(choice)
        for b in reversed(range(len(options[depth]))):
            stack.append(choice + (b,))
    return None, checked


def _search_exhaustive(options, n, max_branches):
    """
    Tests every full choice of branches. Returns the first feasible one, or
    None, with the number of LP decisions.
    """
    total = math.prod(len(o) for o in options)
    if total > max_branches:
        raise BudgetExceededError("branch systems", max_branches, total)
    checked = 0
    ranges = [range(len(o)) for o in options]
    for choice in product(*ranges):
        rows = [options[d][b] for d, b in enumerate(choice)]
        checked += 1
        solution = strict_feasibility(rows, n)
        if solution.feasible:
            return (choice, rows, solution), checked
    return None, checked


def interior_witness(rows, witness, epsilon):
    """
    Moves a witness with zero entries towards the barycenter while keeping
    every strict inequality, so that the result has positive entries.

    Parameters
    ----------
    rows : Sequence[StrictInequality]
        Rows satisfied by the witness with slack at least epsilon.
    witness : Sequence[Fraction]
        Barycentric witness returned by the LP.
    epsilon : Fraction
        Positive slack of the witness.

    Returns
    -------
    Tuple[Fraction]
        The witness itself if all entries are positive, otherwise a point
        on the segment to the barycenter where every row value is at most
        -epsilon / 2.
    """
    witness = lattice_util.rational_point(witness)
    if all(x > 0 for x in witness):
        return witness
    center = [Fraction(1, len(witness))] * len(witness)
    worst = max([Fraction(0)] + [row.value(center) for row in rows])
    delta = epsilon / (2 * (epsilon + worst))
    return tuple((1 - delta) * x + delta * c for x, c in zip(witness, center))


# --- Monte Carlo estimate ---
def monte_carlo_uncovered(
    cover,
    samples,
    seed,
    workers=None,
    chunk_size=None,
    progress=False,
    sampler=UNIFORM,
):
    """
    Estimates the uncovered volume fraction of a cover.

    Parameters
    ----------
    cover : Cover
        Cover to be tested.
    samples : int
        Number of samples.
    seed : int
        Nonnegative seed below 2**64.
    workers : int, optional
        Number of worker processes. Default is the configured "workers".
    chunk_size : int, optional
        Number of samples per chunk. Default is the configured "chunk_size".
    progress : bool, optional
        Indication of whether to display a progress bar. Default is False.
    sampler : str, optional
        Distribution of the barycentric samples, "uniform" or "cube". See
        draw_samples. Default is "uniform".

    Returns
    -------
    UncoveredEstimate
        Estimate whose counts depend only on the seed, the sampler and the
        sample count.
    """
    # Initializations
    if samples < 1:
        raise ValueError(f"Sample count is invalid - {samples}")
    check_sampler_args(seed, sampler)
    settings = config_util.load_settings()
    workers = config_util.resolve_workers(workers)
    chunk_size = chunk_size or settings.chunk_size
    conditions = [d.condition for d in cover]
    n = cover.parent.dim
    starts = list(range(0, samples, chunk_size))
    sizes = [min(chunk_size, samples - start) for start in starts]

    # Main
    counts = dict()
    pbar = tqdm(total=len(sizes), desc="Sample", disable=not progress)
    if workers == 1:
        for idx, (start, size) in enumerate(zip(starts, sizes)):
            counts[idx] = count_uncovered(
                conditions, n, seed, start, size, sampler
            )
            pbar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            # Assign processes
            processes = dict()
            for idx, (start, size) in enumerate(zip(starts, sizes)):
                process = executor.submit(
                    count_uncovered, conditions, n, seed, start, size, sampler
                )
                processes[process] = idx

            # Store results
            for process in as_completed(processes):
                counts[processes[process]] = process.result()
                pbar.update(1)
    pbar.close()

    # Running estimate
    history = list()
    total_samples, total_uncovered = 0, 0
    for idx, size in enumerate(sizes):
        total_samples += size
        total_uncovered += counts[idx]
        history.append((total_samples, total_uncovered))
    logger.info(
        "Uncovered %d of %d %s samples (seed=%d)",
        total_uncovered,
        total_samples,
        sampler,
        seed,
    )
    return UncoveredEstimate(
        total_samples, total_uncovered, seed, tuple(history), sampler
    )


def check_sampler_args(seed, sampler):
    """
    Validates the seed and the sampler name of a Monte Carlo run.

    Parameters
    ----------
    seed : int
        Seed of the counter-based generator.
    sampler : str
        Name of the sample distribution.

    Returns
    -------
    None
    """
    if not 0 <= seed < 2**64:
        raise ValueError(f"Seed is invalid - {seed}")
    if sampler not in SAMPLERS:
        raise ValueError(f"Sampler is invalid - {sampler} not in {SAMPLERS}")


def words_per_sample(n):
    """
    Computes the number of 64-bit words reserved for one sample of an
    n-simplex, rounded up to whole Philox blocks of four words.
    """
    return 4 * math.ceil((n + 1) / 4)


def draw_samples(seed, start, size, n, sampler=UNIFORM):
    """
    Draws unnormalized barycentric samples of an n-simplex; dividing a row
    by its sum gives the sampled point.

    Sample i reads the Philox block stream of the seed from counter
    i * words_per_sample(n) / 4 on, so every sample is a function of the
    seed and its global index alone.

    Parameters
    ----------
    seed : int
        Key of the Philox generator.
    start : int
        Global index of the first sample.
    size : int
        Number of samples.
    n : int
        Dimension of the simplex.
    sampler : str, optional
        "uniform" draws standard exponentials, whose normalized rows are
        uniform on the simplex. "cube" draws i.i.d. U[0, 1) coordinates
        and normalizes them, which weights the center of the simplex more
        heavily. Default is "uniform".

    Returns
    -------
    numpy.ndarray
        Array of shape (size, n + 1) with nonnegative entries and positive
        row sums.
    """
    words = words_per_sample(n)
    bit_generator = np.random.Philox(key=seed, counter=start * (words // 4))
    raw = bit_generator.random_raw(size * words).reshape(size, words)
    u = (raw[:, : n + 1] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    e = -np.log1p(-u) if sampler == UNIFORM else u
    e[e.sum(axis=1) == 0] = 1.0
    return e


def uncovered_mask(conditions, e):
    """
    Flags the samples that lie outside every dilation.

    Parameters
    ----------
    conditions : Sequence[NonMembershipCondition]
        Non-membership condition of each dilation.
    e : numpy.ndarray
        Unnormalized barycentric samples of shape (size, n + 1).

    Returns
    -------
    numpy.ndarray
        Boolean mask of the uncovered samples.
    """
    uncovered = np.ones(len(e), dtype=bool)
    for condition in conditions:
        uncovered &= outside_mask(condition, e)
        if not uncovered.any():
            break
    return uncovered


def count_uncovered(conditions, n, seed, start, size, sampler=UNIFORM):
    """
    Counts the samples of one chunk that lie outside every dilation.

    Parameters
    ----------
    conditions : Sequence[NonMembershipCondition]
        Non-membership condition of each dilation.
    n : int
        Dimension of the parent simplex.
    seed : int
        Seed of the counter-based generator.
    start : int
        Global index of the first sample of the chunk.
    size : int
        Number of samples in the chunk.
    sampler : str, optional
        Name of the sample distribution. Default is "uniform".

    Returns
    -------
    int
        Number of uncovered samples.
    """
    e = draw_samples(seed, start, size, n, sampler)
    return int(uncovered_mask(conditions, e).sum())


def outside_mask(condition, e):
    """
    Evaluates a non-membership condition on unnormalized samples with a
    filtered float predicate and an exact fallback.

    Branch a . lambda < c is tested as a . e - c * sum(e) < 0. Float values
    whose magnitude exceeds a static error bound decide the sign; the others
    are recomputed exactly from the dyadic values of the samples.

    Parameters
    ----------
    condition : NonMembershipCondition
        Condition to be evaluated.
    e : numpy.ndarray
        Samples of shape (size, n + 1).

    Returns
    -------
    numpy.ndarray
        Boolean mask of the samples outside the dilation.
    """
    if condition.never_satisfied:
        return np.zeros(len(e), dtype=bool)

    n = e.shape[1] - 1
    a = np.array(
        [[float(x) for x in b.coefficients] for b in condition.branches]
    )
    c = np.array([float(b.offset) for b in condition.branches])
    s = e.sum(axis=1)
    values = e @ a.T - np.outer(s, c)
    magnitude = e @ np.abs(a).T + np.outer(s, np.abs(c))
    bound = 4 * (n + 3) * 2.0**-52 * magnitude
    holds = values < 0

    # Exact fallback
    undecided = np.abs(values) <= bound
    for row, col in np.argwhere(undecided):
        branch = condition.branches[col]
        exact = [Fraction(float(x)) for x in e[row]]
        value = sum(q * x for q, x in zip(branch.coefficients, exact))
        holds[row, col] = value - branch.offset * sum(exact) < 0
    return holds.any(axis=1)
