"""
Created on Fri Oct 10 15:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Brute-force checks of integral closedness: a lattice polytope P is
integrally closed if

    (P ∩ M) + (rP ∩ M) = (r + 1)P ∩ M    for every r >= 1.

The checks below test this equality for r <= r_max by computing the sumset
on the left and comparing it with the lattice points of (r + 1)P.

"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from math import factorial
from tqdm import tqdm

import logging
import numpy as np
import pandas as pd

from simplex_dilation_utils import config_util, lattice_util
from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    ClosureViolationError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

MAX_KEY_SPACE = 2**62
SUM_BLOCK = 2**22


# --- Domain Types ---
@dataclass(frozen=True)
class ClosureReport:
    """
    Outcome of an integral closure check.

    Attributes
    ----------
    r_max : int
        Largest r tested.
    failures : Tuple[Tuple[int, Tuple[int]]]
        Pairs (r, p) where p is a lattice point of (r + 1)P that is not a
        sum of a lattice point of P and a lattice point of rP.
    counts : Tuple[int]
        Number of lattice points of rP for r = 1, ..., r_max + 1.
    """

    r_max: int
    failures: tuple
    counts: tuple

    @property
    def closed(self):
        """
        Indication of whether every tested dilate was closed.
        """
        return len(self.failures) == 0

    def to_dataframe(self):
        """
        Tabulates lattice point counts and failures per dilate.
        """
        rows = list()
        for r, count in enumerate(self.counts, start=1):
            missing = sum(1 for s, _ in self.failures if s + 1 == r)
            rows.append({"r": r, "lattice_points": count, "failures": missing})
        return pd.DataFrame(rows)


# --- Checks ---
def is_integrally_closed_up_to(
    simplex, r_max, max_points=None, workers=None, progress=False
):
    """
    Checks (P ∩ M) + (rP ∩ M) = (r + 1)P ∩ M for 1 <= r <= r_max.

    Parameters
    ----------
    simplex : LatticeSimplex
        Simplex P to be checked.
    r_max : int
        Largest r tested.
    max_points : int, optional
        Maximum number of lattice points per dilate. Default is the
        configured "max_closure_points".
    workers : int, optional
        Number of threads used to build sumsets. Default is the configured
        "workers".
    progress : bool, optional
        Indication of whether to display a progress bar. Default is False.

    Returns
    -------
    ClosureReport
        Lattice points of each (r + 1)P missing from the sumset.
    """
    # Initializations
    if r_max < 1:
        raise ValueError(f"r_max is invalid - {r_max}")
    settings = config_util.load_settings()
    max_points = max_points or settings.max_closure_points
    workers = config_util.resolve_workers(workers)
    base = dilate_points(simplex, 1, max_points, settings.max_cells)
    current = base
    counts = [len(base)]
    failures = list()

    # Main
    pbar = tqdm(total=r_max, desc="Closure", disable=not progress)
    for r in range(1, r_max + 1):
        target = dilate_points(simplex, r + 1, max_points, settings.max_cells)
        sums = sumset(base, current, workers)
        if not sums <= target:
            raise ClosureViolationError(
                f"Sumset Inclusion Failed - r={r}: "
                f"{sorted(sums - target)[:3]}"
            )
        missing = sorted(target - sums)
        failures.extend((r, p) for p in missing)
        counts.append(len(target))
        current = target
        logger.debug(
            "r=%d: %d points, %d missing", r, len(target), len(missing)
        )
        pbar.update(1)
    pbar.close()
    return ClosureReport(r_max, tuple(failures), tuple(counts))


def covered_implies_closed_check(report, r_max, max_points=None, workers=None):
    """
    Runs the closure check on the parent of a covered strategy report.

    Parameters
    ----------
    report : StrategyReport
        Covered report whose dilations all have modulus at least n - 1.
    r_max : int
        Largest r tested.
    max_points : int, optional
        Maximum number of lattice points per dilate. Default is the
        configured "max_closure_points".
    workers : int, optional
        Number of threads used to build sumsets. Default is the configured
        "workers".

    Returns
    -------
    ClosureReport
        Report without failures.
    """
    simplex = report.cover.parent
    if not report.covered:
        raise PreconditionError(f"Report is not covered - {report.case_tag}")
    if min(report.cover.moduli()) < simplex.dim - 1:
        raise PreconditionError(
            f"Report is invalid - moduli {report.cover.moduli()} < n - 1"
        )
    result = is_integrally_closed_up_to(
        simplex, r_max, max_points=max_points, workers=workers
    )
    if not result.closed:
        raise ClosureViolationError(
            f"Closure Check Failed - covered simplex misses "
            f"{result.failures[:3]}",
            report=result,
        )
    return result


# --- Helpers ---
def dilate_points(simplex, r, max_points, max_cells):
    """
    Enumerates the lattice points of rP within the point budget.
    """
    scaled = lattice_util.scale_simplex(simplex, r)
    volume = lattice_util.normalized_volume(scaled.vertices)
    estimate = int(volume / factorial(simplex.dim))
    if estimate > max_points:
        raise BudgetExceededError("lattice points of rP", max_points, estimate)
    points = lattice_util.lattice_points(scaled.vertices, max_cells)
    if len(points) > max_points:
        raise BudgetExceededError(
            "lattice points of rP", max_points, len(points)
        )
    return set(points)


def sumset(first, second, workers=1):
    """
    Computes {p + q : p in first, q in second} for sets of integer points.

    Points are encoded as integer keys in the bounding box of the sumset,
    so that the pairwise sums reduce to sums of keys. Blocks of the first
    set are processed by a thread pool.

    Parameters
    ----------
    first : Set[Tuple[int]]
        Nonempty set of integer points.
    second : Set[Tuple[int]]
        Nonempty set of integer points of the same dimension.
    workers : int, optional
        Number of threads. Default is 1.

    Returns
    -------
    Set[Tuple[int]]
        Sumset.
    """
    if max_abs(first) + max_abs(second) >= MAX_KEY_SPACE:
        logger.debug("Coordinates too large - summing tuples")
        return tuple_sumset(first, second)

    a = np.array(sorted(first), dtype=np.int64)
    b = np.array(sorted(second), dtype=np.int64)
    lo_a, lo_b = a.min(axis=0), b.min(axis=0)
    widths = (a.max(axis=0) - lo_a) + (b.max(axis=0) - lo_b) + 1
    if np.prod(widths.astype(object)) >= MAX_KEY_SPACE:
        logger.debug("Key space too large - summing tuples")
        return tuple_sumset(first, second)

    # Encode
    strides = np.ones(len(widths), dtype=np.int64)
    for axis in range(len(widths) - 2, -1, -1):
        strides[axis] = strides[axis + 1] * widths[axis + 1]
    keys_a = (a - lo_a) @ strides
    keys_b = (b - lo_b) @ strides

    # Sum blocks
    step = max(1, SUM_BLOCK // len(keys_b))
    blocks = [keys_a[i:i + step] for i in range(0, len(keys_a), step)]
    uniques = list()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        # Assign threads
        threads = list()
        for block in blocks:
            threads.append(executor.submit(_block_sums, block, keys_b))

        # Store results
        for thread in as_completed(threads):
            uniques.append(thread.result())
    keys = np.unique(np.concatenate(uniques))

    # Decode
    coords = np.empty((len(keys), len(widths)), dtype=np.int64)
    remainder = keys.copy()
    for axis in range(len(widths)):
        coords[:, axis] = remainder // strides[axis]
        remainder -= coords[:, axis] * strides[axis]
    coords += lo_a + lo_b
    return {tuple(int(c) for c in row) for row in coords}


def _block_sums(block, keys):
    """
    Computes the distinct pairwise sums of a block of keys with all keys.
    """
    return np.unique((block[:, None] + keys[None, :]).ravel())


def tuple_sumset(first, second):
    """
    Computes a sumset with Python integers, which cannot overflow.
    """
    return {tuple(x + y for x, y in zip(p, q)) for p in first for q in second}


def max_abs(points):
    """
    Computes the largest absolute coordinate of a set of integer points.
    """
    return max(abs(c) for p in points for c in p)
