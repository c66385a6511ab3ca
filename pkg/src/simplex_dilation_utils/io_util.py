"""
Created on Wed Oct 8 16:30:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Readers and writers for simplex and cover files.

Simplex file:
    {"dim": 4, "vertices": [[5, 0, 0, 0], [0, 60, 0, 0], ...]}

Cover file:
    {"dim": 4, "dilations": [
        {"kind": "apex", "apex": 0, "modulus": 3, "translation": [0, 0, 0, 0]},
        {"kind": "explicit", "modulus": 3, "vertices": [[2, 0, 0, 0], ...]}
    ]}

Translations list t_j for j != apex in increasing j. Integers beyond 2**53
may be written as decimal strings. Bundled files are addressed as
"builtin:<name>".

"""

from importlib import resources

import json
import logging

from simplex_dilation_utils import dilation_util, lattice_util
from simplex_dilation_utils.coverage_util import Cover
from simplex_dilation_utils.exceptions import (
    SimplexDilationError,
    SimplexFileError,
)

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"
BUILTINS = ("edge5_simplex", "edge5_base_cover", "edge5_supplemented_cover")
MAX_SAFE_INTEGER = 2**53


# --- Read ---
def read_json(path):
    """
    Reads JSON file located at the given path.

    Parameters
    ----------
    path : str
        Path to JSON file to be read, or "builtin:<name>".

    Returns
    -------
    dict
        Contents of JSON file.
    """
    try:
        if path.startswith(BUILTIN_PREFIX):
            with builtin_path(path).open("r") as f:
                return json.load(f)
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SimplexFileError(path, f"line {e.lineno}", e.msg)
    except OSError as e:
        raise SimplexFileError(path, "path", str(e))


def builtin_path(path):
    """
    Resolves "builtin:<name>" to a bundled data file.
    """
    name = path[len(BUILTIN_PREFIX):].removesuffix(".json")
    if name not in BUILTINS:
        raise SimplexFileError(path, "name", f"expected one of {BUILTINS}")
    return resources.files("simplex_dilation_utils").joinpath(
        f"data/{name}.json"
    )


def load_simplex(path):
    """
    Reads a simplex file.

    Parameters
    ----------
    path : str
        Path to simplex file, or "builtin:<name>".

    Returns
    -------
    LatticeSimplex
        Validated simplex.
    """
    contents = read_json(path)
    if not isinstance(contents, dict):
        raise SimplexFileError(path, "root", "expected an object")
    return parse_simplex(contents, path)


def parse_simplex(contents, path="<memory>"):
    """
    Validates the contents of a simplex file.
    """
    vertices = parse_points(contents.get("vertices"), path, "vertices")
    dim = parse_integer(contents.get("dim", len(vertices) - 1), path, "dim")
    if len(vertices) != dim + 1:
        raise SimplexFileError(
            path, "vertices", f"expected {dim + 1} vertices for dim={dim}"
        )
    try:
        return lattice_util.LatticeSimplex(vertices)
    except (ValueError, SimplexDilationError) as e:
        raise SimplexFileError(path, "vertices", str(e))


def load_cover(path, simplex):
    """
    Reads a cover file and validates every entry against a simplex.

    Parameters
    ----------
    path : str
        Path to cover file, or "builtin:<name>".
    simplex : LatticeSimplex
        Simplex that the cover refers to.

    Returns
    -------
    Cover
        Validated cover.
    """
    contents = read_json(path)
    if not isinstance(contents, dict):
        raise SimplexFileError(path, "root", "expected an object")
    if "dim" in contents and contents["dim"] != simplex.dim:
        raise SimplexFileError(path, "dim", f"expected {simplex.dim}")
    entries = contents.get("dilations")
    if not isinstance(entries, list) or not entries:
        raise SimplexFileError(path, "dilations", "expected a nonempty list")

    dilations = list()
    for idx, entry in enumerate(entries):
        field = f"dilations[{idx}]"
        try:
            dilations.append(parse_dilation(entry, simplex, path, field))
        except SimplexFileError:
            raise
        except (ValueError, TypeError, SimplexDilationError) as e:
            raise SimplexFileError(path, field, str(e))
    return Cover(tuple(dilations))


def parse_dilation(entry, simplex, path, field):
    """
    Validates one dilation entry of a cover file.
    """
    if not isinstance(entry, dict):
        raise SimplexFileError(path, field, "expected an object")
    modulus = parse_integer(entry.get("modulus"), path, f"{field}.modulus")
    kind = entry.get("kind")
    if kind == dilation_util.APEX:
        apex = parse_integer(entry.get("apex"), path, f"{field}.apex")
        translation = entry.get("translation") or [0] * simplex.dim
        translation = [
            parse_integer(t, path, f"{field}.translation")
            for t in translation
        ]
        return dilation_util.translate_dilation(
            simplex, apex, modulus, translation
        )
    if kind == dilation_util.EXPLICIT:
        vertices = parse_points(entry.get("vertices"), path, field)
        return dilation_util.explicit_dilation(simplex, vertices, modulus)
    raise SimplexFileError(path, f"{field}.kind", f"unknown kind {kind}")


def parse_points(points, path, field):
    """
    Validates a nonempty list of integer points.
    """
    if not isinstance(points, list) or not points:
        raise SimplexFileError(path, field, "expected a nonempty list")
    parsed = list()
    for idx, p in enumerate(points):
        if not isinstance(p, list):
            raise SimplexFileError(path, f"{field}[{idx}]", "expected a list")
        parsed.append(
            tuple(parse_integer(c, path, f"{field}[{idx}]") for c in p)
        )
    return parsed


def parse_integer(value, path, field):
    """
    Parses a JSON integer, given as a number or a decimal string.
    """
    if isinstance(value, bool):
        raise SimplexFileError(path, field, f"expected an integer: {value}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    raise SimplexFileError(path, field, f"expected an integer: {value}")


# --- Write ---
def write_json(path, contents):
    """
    Writes "contents" to a JSON file at "path".

    Parameters
    ----------
    path : str
        Path that JSON file is written to.
    contents : dict
        Contents to be written to JSON file.

    Returns
    -------
    None
    """
    with open(path, "w") as f:
        json.dump(contents, f, indent=2)


def encode_integer(value):
    """
    Encodes an integer as a JSON number, or as a string beyond 2**53.
    """
    return value if abs(value) <= MAX_SAFE_INTEGER else str(value)


def simplex_to_dict(simplex):
    """
    Serializes a simplex to a JSON-ready dict.
    """
    vertices = [[encode_integer(c) for c in v] for v in simplex.vertices]
    return {"dim": simplex.dim, "vertices": vertices}


def cover_to_dict(cover):
    """
    Converts a cover to the contents of a cover file.
    """
    entries = list()
    for d in cover:
        spec = d.spec
        if spec.kind == dilation_util.EXPLICIT:
            vertices = [[encode_integer(c) for c in v] for v in d.vertices]
            entries.append(
                {
                    "kind": spec.kind,
                    "modulus": spec.modulus,
                    "vertices": vertices,
                }
            )
        else:
            entries.append(
                {
                    "kind": spec.kind,
                    "apex": spec.apex,
                    "modulus": spec.modulus,
                    "translation": list(spec.compact_translation()),
                }
            )
    return {"dim": cover.parent.dim, "dilations": entries}


def dump_simplex(path, simplex):
    """
    Writes a simplex file.
    """
    write_json(path, simplex_to_dict(simplex))
    logger.info("Wrote simplex to %s", path)


def dump_cover(path, cover):
    """
    Writes a cover file.
    """
    write_json(path, cover_to_dict(cover))
    logger.info("Wrote cover with %d dilations to %s", len(cover), path)
