"""
Created on Mon Oct 13 10:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Command line interface.

    simplex-dilation analyze  SIMPLEX [--k K]
    simplex-dilation cover    SIMPLEX [--out COVER] [--force]
    simplex-dilation certify  SIMPLEX COVER
    simplex-dilation sample   SIMPLEX COVER [-n N] [--seed S] [--csv PATH]
                              [--sampler {uniform,cube}]
    simplex-dilation closure  SIMPLEX [--rmax R]
    simplex-dilation search   SIMPLEX [-k K] [--budget ROUNDS] [--seed S]
                              [--out COVER]

Exit codes: 0 on success or a complete cover, 1 when the cover is not
complete or a budget runs out, 2 on invalid input. When a search runs out
of LP decisions, the report of its last certified round is printed before
exiting with 1. Bundled files can be passed as "builtin:edge5_simplex",
"builtin:edge5_base_cover" and "builtin:edge5_supplemented_cover".

"""

import argparse
import json
import logging
import sys

from simplex_dilation_utils import (
    __version__,
    closure_util,
    coverage_util,
    io_util,
    lattice_util,
    strategy_util,
)
from simplex_dilation_utils.exceptions import (
    BudgetExceededError,
    PreconditionError,
    SimplexDilationError,
    SimplexFileError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INCOMPLETE = 1
EXIT_INVALID = 2


# --- Commands ---
def cmd_analyze(args):
    """
    Prints the edge lengths, l(P), normalized volume and A coefficients of
    a simplex.
    """
    simplex = io_util.load_simplex(args.simplex)
    lengths = simplex.edge_lengths
    shortest = lengths.min_lattice_length
    k = args.k or max(2, simplex.dim - 1)
    report = {
        "dim": simplex.dim,
        "edge_lengths": [list(row) for row in lengths.lengths],
        "l(P)": shortest,
        "normalized_volume": lattice_util.format_rational(
            lattice_util.normalized_volume(simplex.vertices)
        ),
    }
    if shortest < simplex.dim - 1:
        logger.warning(
            "l(P)=%d < n - 1=%d - covering hypotheses fail",
            shortest,
            simplex.dim - 1,
        )
    if simplex.dim == 4 and strategy_util.has_edge_of_length(simplex, 5):
        logger.warning("Simplex has an edge of length 5")
    if 2 <= k <= shortest:
        a_table = coverage_util.a_coefficients(simplex, k)
        report["k"] = k
        report["A"] = a_table.formatted()
        report["all_nonnegative"] = a_table.all_nonnegative
    else:
        logger.warning("Skipping A coefficients - k=%d not in [2, l(P)]", k)

    if args.json:
        emit_json(report)
    else:
        print(lengths.to_dataframe().to_string())
        print(f"l(P): {shortest}")
        print(f"normalized volume: {report['normalized_volume']}")
        if "A" in report:
            print(f"A (k={k}): ({', '.join(report['A'])})")
    return EXIT_OK


def cmd_cover(args):
    """
    Builds and certifies a cover with the covering strategies.
    """
    simplex = io_util.load_simplex(args.simplex)
    if simplex.dim not in (3, 4):
        logger.error("Dimension is unsupported - %d", simplex.dim)
        return EXIT_INVALID
    shortest = simplex.edge_lengths.min_lattice_length
    if shortest < simplex.dim - 1 and not args.force:
        logger.error(
            "l(P)=%d < n - 1=%d - pass --force to try anyway",
            shortest,
            simplex.dim - 1,
        )
        return EXIT_INVALID

    budget = strategy_util.SearchBudget(max_rounds=args.budget)
    if shortest < simplex.dim - 1:
        # Forced: search with the largest modulus the edges allow
        if shortest < 2:
            logger.error("l(P)=%d admits no dilation with k >= 2", shortest)
            return EXIT_INVALID
        base = strategy_util.apex_cover(simplex, shortest)
        report = strategy_util.search_supplementary(
            simplex,
            shortest,
            base,
            budget,
            max_branches=args.max_branches,
            progress=args.progress,
            seed=args.seed,
        )
    else:
        report = strategy_util.cover_simplex(
            simplex,
            budget=budget,
            max_branches=args.max_branches,
            seed=args.seed,
        )
    if args.out:
        io_util.dump_cover(args.out, report.cover)
    emit_strategy_report(report, args.json)
    return EXIT_OK if report.covered else EXIT_INCOMPLETE


def cmd_certify(args):
    """
    Certifies a cover file exactly.
    """
    simplex = io_util.load_simplex(args.simplex)
    cover = io_util.load_cover(args.cover, simplex)
    certificate = coverage_util.certify(
        cover, max_branches=args.max_branches, prune=not args.no_prune
    )
    emit_certificate(certificate, args.json)
    return EXIT_OK if certificate.covered else EXIT_INCOMPLETE


def cmd_sample(args):
    """
    Estimates the uncovered volume fraction of a cover file.
    """
    simplex = io_util.load_simplex(args.simplex)
    cover = io_util.load_cover(args.cover, simplex)
    estimate = coverage_util.monte_carlo_uncovered(
        cover,
        args.samples,
        args.seed,
        workers=args.threads,
        chunk_size=args.chunk_size,
        progress=args.progress,
        sampler=args.sampler,
    )
    if args.csv:
        estimate.running().to_csv(args.csv, index=False)
        logger.info("Wrote running estimate to %s", args.csv)
    report = {
        "samples": estimate.samples,
        "uncovered_count": estimate.uncovered,
        "rate": estimate.rate,
        "stderr": estimate.stderr,
        "seed": estimate.seed,
        "sampler": estimate.sampler,
    }
    if args.json:
        emit_json(report)
    else:
        print(f"samples: {estimate.samples}")
        print(f"uncovered: {estimate.uncovered}")
        print(f"rate: {estimate.rate:.6f} +/- {estimate.stderr:.6f}")
    return EXIT_OK


def cmd_closure(args):
    """
    Checks integral closedness of a simplex up to a dilation factor.
    """
    simplex = io_util.load_simplex(args.simplex)
    report = closure_util.is_integrally_closed_up_to(
        simplex,
        args.rmax,
        max_points=args.max_points,
        workers=args.threads,
        progress=args.progress,
    )
    if args.json:
        emit_json(
            {
                "r_max": report.r_max,
                "closed": report.closed,
                "counts": list(report.counts),
                "failures": [
                    {"r": r, "point": list(p)} for r, p in report.failures
                ],
            }
        )
    else:
        print(report.to_dataframe().to_string(index=False))
        for r, p in report.failures[:10]:
            print(f"missing at r={r}: {p}")
        print(f"closed up to r={report.r_max}: {report.closed}")
    return EXIT_OK if report.closed else EXIT_INCOMPLETE


def cmd_search(args):
    """
    Completes a cover with the witness-guided supplementary search.
    """
    simplex = io_util.load_simplex(args.simplex)
    k = args.k or simplex.dim - 1
    if args.cover:
        base = io_util.load_cover(args.cover, simplex)
    else:
        base = strategy_util.apex_cover(simplex, k)
    seeds = tuple()
    if args.seed_cover:
        seeds = io_util.load_cover(args.seed_cover, simplex).dilations
    budget = strategy_util.SearchBudget(
        max_rounds=args.budget,
        max_candidates_per_round=args.candidates,
        residue_class_cap=args.classes,
        pool_samples=args.pool_samples,
    )
    report = strategy_util.search_supplementary(
        simplex,
        k,
        base,
        budget,
        seeds=seeds,
        max_branches=args.max_branches,
        progress=args.progress,
        seed=args.seed,
    )
    if args.out:
        io_util.dump_cover(args.out, report.cover)
    emit_strategy_report(report, args.json)
    return EXIT_OK if report.covered else EXIT_INCOMPLETE


# --- Output ---
def certificate_to_dict(certificate):
    """
    Converts a certificate to a JSON-ready dictionary.
    """
    result = {
        "status": certificate.status,
        "branches_checked": certificate.branches_checked,
    }
    if certificate.witness is not None:
        result["witness"] = certificate.witness.formatted()
        result["branch"] = list(certificate.branch)
        result["epsilon"] = lattice_util.format_rational(certificate.epsilon)
    return result


def emit_certificate(certificate, as_json):
    """
    Prints a certificate as JSON or text.
    """
    if as_json:
        emit_json(certificate_to_dict(certificate))
    elif certificate.covered:
        print(f"covered ({certificate.branches_checked} LP decisions)")
    else:
        print(f"witness: ({', '.join(certificate.witness.formatted())})")


def emit_strategy_report(report, as_json):
    """
    Prints a strategy report as JSON or text.
    """
    if as_json:
        emit_json(
            {
                "case": str(report.case_tag),
                "covered": report.covered,
                "moduli": report.cover.moduli(),
                "certificate": certificate_to_dict(report.certificate),
            }
        )
        return
    print(f"case: {report.case_tag}")
    print(f"dilations: {[d.label() for d in report.cover]}")
    emit_certificate(report.certificate, False)


def emit_json(contents):
    """
    Prints contents as indented JSON.
    """
    print(json.dumps(contents, indent=2, default=str))


# --- Parser ---
def build_parser():
    """
    Builds the argument parser of the simplex-dilation command.
    """
    parser = argparse.ArgumentParser(
        prog="simplex-dilation",
        description="Cover lattice simplices by dilations.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v info, -vv debug"
    )
    parser.add_argument(
        "--threads", type=int, default=None, help="number of workers"
    )
    parser.add_argument(
        "--json", action="store_true", help="print a JSON report"
    )
    parser.add_argument(
        "--progress", action="store_true", help="show progress bars"
    )
    parser.add_argument(
        "--max-branches", type=int, default=None, help="LP decision budget"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Commands
    sub = subparsers.add_parser("analyze", help="edge lengths and A table")
    sub.add_argument("simplex")
    sub.add_argument("--k", type=int, default=None)
    sub.set_defaults(func=cmd_analyze)

    sub = subparsers.add_parser("cover", help="build a certified cover")
    sub.add_argument("simplex")
    sub.add_argument("--out", default=None)
    sub.add_argument("--force", action="store_true")
    sub.add_argument("--budget", type=int, default=40, help="search rounds")
    sub.add_argument("--seed", type=int, default=0, help="ranking seed")
    sub.set_defaults(func=cmd_cover)

    sub = subparsers.add_parser("certify", help="certify a cover file")
    sub.add_argument("simplex")
    sub.add_argument("cover")
    sub.add_argument("--no-prune", action="store_true")
    sub.set_defaults(func=cmd_certify)

    sub = subparsers.add_parser("sample", help="Monte Carlo estimate")
    sub.add_argument("simplex")
    sub.add_argument("cover")
    sub.add_argument("-n", "--samples", type=int, default=10**6)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--csv", default=None)
    sub.add_argument("--chunk-size", type=int, default=None)
    sub.add_argument(
        "--sampler", choices=coverage_util.SAMPLERS, default="uniform"
    )
    sub.set_defaults(func=cmd_sample)

    sub = subparsers.add_parser("closure", help="integral closure check")
    sub.add_argument("simplex")
    sub.add_argument("--rmax", type=int, default=2)
    sub.add_argument("--max-points", type=int, default=None)
    sub.set_defaults(func=cmd_closure)

    sub = subparsers.add_parser("search", help="supplementary search")
    sub.add_argument("simplex")
    sub.add_argument("-k", type=int, default=None)
    sub.add_argument("--cover", default=None, help="base cover file")
    sub.add_argument("--seed-cover", default=None, help="seed dilations")
    sub.add_argument("--budget", type=int, default=40, help="search rounds")
    sub.add_argument("--candidates", type=int, default=64)
    sub.add_argument("--classes", type=int, default=27)
    sub.add_argument("--pool-samples", type=int, default=200000)
    sub.add_argument("--seed", type=int, default=0, help="ranking seed")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_search)
    return parser


def main(argv=None):
    """
    Runs the simplex-dilation command.

    Parameters
    ----------
    argv : List[str], optional
        Command line arguments. Default is sys.argv[1:].

    Returns
    -------
    int
        Exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG]
    logging.basicConfig(
        level=level[min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (SimplexFileError, PreconditionError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_INVALID
    except BudgetExceededError as e:
        logger.error("%s", e)
        if e.report is not None:
            emit_strategy_report(e.report, args.json)
        return EXIT_INCOMPLETE
    except SimplexDilationError as e:
        logger.error("%s", e)
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    sys.exit(main())
