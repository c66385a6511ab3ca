"""
Created on Mon Oct 6 09:30:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Runtime settings shared by the routines in this package. Defaults can be
overridden through environment variables, e.g.

    SIMPLEX_DILATION_THREADS=8 simplex-dilation sample ...

"""

from dataclasses import dataclass, replace

import logging
import os

logger = logging.getLogger(__name__)

ENV_PREFIX = "SIMPLEX_DILATION_"


@dataclass(frozen=True)
class Settings:
    """
    Budgets and worker counts used when the caller does not pass explicit
    values.

    Attributes
    ----------
    workers : int
        Number of workers used by parallel routines. Results never depend
        on this value.
    max_cells : int
        Maximum number of candidate cells scanned by lattice point
        enumeration.
    max_branches : int
        Maximum number of branches explored while certifying a cover.
    max_closure_points : int
        Maximum number of lattice points per dilate in closure checks.
    chunk_size : int
        Number of Monte Carlo samples drawn per chunk.
    """

    workers: int = 1
    max_cells: int = 10**7
    max_branches: int = 10**4
    max_closure_points: int = 2 * 10**5
    chunk_size: int = 10**4

    def __post_init__(self):
        """
        Rejects settings below 1.
        """
        for name, value in vars(self).items():
            if value < 1:
                raise ValueError(f"Setting is invalid - {name}={value}")


def load_settings(environ=None):
    """
    Builds a Settings object from environment variables.

    Parameters
    ----------
    environ : dict, optional
        Mapping to read overrides from. Default is os.environ.

    Returns
    -------
    Settings
        Default settings with every "SIMPLEX_DILATION_<NAME>" override
        applied, where <NAME> is a field name in upper case. The worker
        count is read from "SIMPLEX_DILATION_THREADS".
    """
    environ = os.environ if environ is None else environ
    overrides = dict()
    aliases = {"workers": "THREADS"}
    for name in Settings.__dataclass_fields__:
        key = ENV_PREFIX + aliases.get(name, name.upper())
        if key in environ:
            try:
                overrides[name] = int(environ[key])
            except ValueError:
                raise ValueError(f"Setting is invalid - {key}={environ[key]}")
            logger.debug("Override %s=%s", name, overrides[name])
    return replace(Settings(), **overrides)


def resolve_workers(workers=None):
    """
    Returns the explicit worker count or the configured default.
    """
    return load_settings().workers if workers is None else max(1, workers)
