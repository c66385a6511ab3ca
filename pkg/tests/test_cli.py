"""Tests for the command line interface."""

from contextlib import redirect_stdout
from fractions import Fraction as F

import io
import json
import os
import tempfile
import unittest

import pandas as pd

from simplex_dilation_utils import cli, io_util
from simplex_dilation_utils.lattice_util import LatticeSimplex
from tests.simplex_fixtures import EXPENSIVE, unit_simplex

SIMPLEX = "builtin:edge5_simplex"
BASE_COVER = "builtin:edge5_base_cover"
SUPPLEMENTED_COVER = "builtin:edge5_supplemented_cover"


class CliTest(unittest.TestCase):
    """Tests for the simplex-dilation subcommands."""

    def setUp(self):
        """Creates a temporary directory."""

        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

    def path(self, name):
        """Returns the path of a file in the temporary directory."""

        return os.path.join(self.tmpdir.name, name)

    def run_cli(self, *argv):
        """Runs the command and captures its exit code and output."""

        out = io.StringIO()
        with redirect_stdout(out):
            code = cli.main(list(argv))
        return code, out.getvalue()

    def run_json(self, *argv):
        """Runs the command with --json and parses its output."""

        code, out = self.run_cli("--json", *argv)
        return code, json.loads(out)

    def simplex_file(self, name, simplex):
        """Writes a simplex file to the temporary directory."""

        io_util.dump_simplex(self.path(name), simplex)
        return self.path(name)

    # --- analyze ---
    def test_analyze(self):
        """Edge lengths and A coefficients of the bundled simplex."""

        code, report = self.run_json("analyze", SIMPLEX)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(report["dim"], 4)
        self.assertEqual(report["l(P)"], 3)
        self.assertEqual(report["k"], 3)
        self.assertEqual(report["A"], ["-2/3", "0", "0", "-1/3", "0"])
        self.assertFalse(report["all_nonnegative"])
        self.assertEqual(report["normalized_volume"], "216000")

    def test_analyze_text(self):
        """Text output lists the A coefficients."""

        code, out = self.run_cli("analyze", SIMPLEX)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("A (k=3): (-2/3, 0, 0, -1/3, 0)", out)

    def test_analyze_short_edges(self):
        """Short edges are reported and A coefficients skipped."""

        simplex = self.simplex_file("simplex.json", unit_simplex(3))
        with self.assertLogs("simplex_dilation_utils.cli", "WARNING"):
            code, report = self.run_json("analyze", simplex)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(report["l(P)"], 1)
        self.assertNotIn("A", report)

    # --- certify ---
    def test_certify_base_cover(self):
        """The apex cover of the bundled simplex has a witness."""

        code, report = self.run_json("certify", SIMPLEX, BASE_COVER)
        self.assertEqual(code, cli.EXIT_INCOMPLETE)
        self.assertEqual(report["status"], "witness")
        self.assertEqual(len(report["witness"]), 5)

    def test_certify_supplemented_cover(self):
        """The supplemented cover still has a witness."""

        code, report = self.run_json("certify", SIMPLEX, SUPPLEMENTED_COVER)
        self.assertEqual(code, cli.EXIT_INCOMPLETE)
        self.assertEqual(report["status"], "witness")
        witness = [F(x) for x in report["witness"]]
        self.assertEqual(sum(witness), 1)
        self.assertGreater(witness[1], 4 * witness[2])

    def test_malformed_file(self):
        """Unparsable files exit with the invalid input code."""

        path = self.path("bad.json")
        with open(path, "w") as f:
            f.write("{not json")
        with self.assertLogs("simplex_dilation_utils.cli", "ERROR"):
            code, _ = self.run_cli("certify", path, SUPPLEMENTED_COVER)
        self.assertEqual(code, cli.EXIT_INVALID)

    # --- cover ---
    def test_cover_round_trip(self):
        """Written covers certify from the file."""

        simplex = self.simplex_file("simplex.json", unit_simplex(3, 2))
        cover = self.path("cover.json")
        code, report = self.run_json("cover", simplex, "--out", cover)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(report["case"], "AllNonNegative(k=2)")
        self.assertEqual(report["moduli"], [2, 2, 2, 2])

        code, _ = self.run_cli("certify", simplex, cover)
        self.assertEqual(code, cli.EXIT_OK)

    def test_cover_unsupported_dimension(self):
        """Dimension 5 is rejected."""

        simplex = self.simplex_file("simplex.json", unit_simplex(5, 4))
        with self.assertLogs("simplex_dilation_utils.cli", "ERROR"):
            code, _ = self.run_cli("cover", simplex)
        self.assertEqual(code, cli.EXIT_INVALID)

    def test_cover_short_edges(self):
        """Edges of length 1 are rejected."""

        simplex = self.simplex_file("simplex.json", unit_simplex(3))
        with self.assertLogs("simplex_dilation_utils.cli", "ERROR"):
            code, _ = self.run_cli("cover", simplex)
        self.assertEqual(code, cli.EXIT_INVALID)

    def test_cover_forced(self):
        """--force covers with the largest modulus the edges allow."""

        simplex = self.simplex_file("simplex.json", unit_simplex(4, 2))
        with self.assertLogs("simplex_dilation_utils.cli", "ERROR"):
            code, _ = self.run_cli("cover", simplex)
        self.assertEqual(code, cli.EXIT_INVALID)

        code, report = self.run_json("cover", simplex, "--force")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(report["case"], "SupplementarySearch(rounds=0)")
        self.assertEqual(report["moduli"], [2, 2, 2, 2, 2])

    # --- sample ---
    def test_sample(self):
        """Running estimates are written per chunk."""

        csv = self.path("running.csv")
        code, report = self.run_json(
            "sample",
            SIMPLEX,
            BASE_COVER,
            "-n",
            "20000",
            "--seed",
            "7",
            "--chunk-size",
            "5000",
            "--csv",
            csv,
        )
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(report["samples"], 20000)
        self.assertEqual(report["seed"], 7)
        self.assertEqual(report["sampler"], "uniform")

        df = pd.read_csv(csv)
        self.assertEqual(len(df), 4)
        self.assertEqual(
            df["uncovered_count"].iloc[-1], report["uncovered_count"]
        )

    def test_sample_cube(self):
        """The cube sampler finds more uncovered points than the uniform."""

        argv = ("sample", SIMPLEX, BASE_COVER, "-n", "20000", "--seed", "3")
        code, uniform = self.run_json(*argv)
        self.assertEqual(code, cli.EXIT_OK)
        code, cube = self.run_json(*argv, "--sampler", "cube")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(cube["sampler"], "cube")
        self.assertGreater(cube["uncovered_count"], 0)
        self.assertGreater(cube["uncovered_count"], uniform["uncovered_count"])

    # --- closure ---
    def test_closure(self):
        """Closure failures are reported with their dilation factor."""

        simplex = self.simplex_file("simplex.json", unit_simplex(3, 2))
        code, report = self.run_json("closure", simplex, "--rmax", "1")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(report["closed"])
        self.assertEqual(report["counts"], [10, 35])

        reeve = LatticeSimplex(((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 3)))
        simplex = self.simplex_file("reeve.json", reeve)
        code, report = self.run_json("closure", simplex, "--rmax", "1")
        self.assertEqual(code, cli.EXIT_INCOMPLETE)
        self.assertIn({"r": 1, "point": [1, 1, 1]}, report["failures"])

    # --- search ---
    def test_search_triangle(self):
        """A seeded search covers a triangle and writes the cover."""

        simplex = self.simplex_file("simplex.json", unit_simplex(2, 5))
        out = self.path("cover.json")
        code, report = self.run_json(
            "search", simplex, "-k", "3", "--seed", "4", "--out", out
        )
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(report["covered"])
        self.assertTrue(report["case"].startswith("SupplementarySearch"))
        self.assertTrue(os.path.exists(out))

    def test_search_branch_budget(self):
        """Running out of LP decisions prints the last certified round."""

        simplex = self.simplex_file("simplex.json", unit_simplex(2, 5))
        with self.assertLogs("simplex_dilation_utils.cli", "ERROR"):
            code, report = self.run_json(
                "--max-branches", "3", "search", simplex, "-k", "3"
            )
        self.assertEqual(code, cli.EXIT_INCOMPLETE)
        self.assertEqual(
            report["case"], "Unsupported(reason=branch budget exceeded)"
        )
        self.assertFalse(report["covered"])
        self.assertEqual(report["moduli"], [3, 3, 3, 3])
        self.assertEqual(report["certificate"]["status"], "witness")

    @unittest.skipUnless(EXPENSIVE, "set SIMPLEX_DILATION_EXPENSIVE=1")
    def test_search_with_seed_cover(self):
        """Searching from the supplemented cover completes it."""

        out = self.path("cover.json")
        code, report = self.run_json(
            "--max-branches",
            str(10**5),
            "search",
            SIMPLEX,
            "--seed-cover",
            SUPPLEMENTED_COVER,
            "--out",
            out,
        )
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(report["case"].startswith("SupplementarySearch"))
        self.assertTrue(report["covered"])
        self.assertGreater(len(report["moduli"]), 8)
        self.assertTrue(os.path.exists(out))


if __name__ == "__main__":
    unittest.main()
