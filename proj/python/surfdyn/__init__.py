"""Dominated splittings, invariant manifolds and tangencies of surface maps."""

import json as _json

from ._core import (
    Map,
    SurfdynError,
    certify_cones,
    edit_cocycle,
    find_periodic,
    forge_tangency,
    manifolds,
    map_families,
    pliss_times,
    scan_periodic,
)
from ._core import run as _run

__version__ = "0.1.0"


def run(command, config=None, out="out", seed=None):
    """Run a CLI subcommand in-process. Returns (exit_code, report dict)."""
    code, report = _run(command, _json.dumps(config or {}), str(out), seed)
    return code, _json.loads(report)


__all__ = [
    "Map",
    "SurfdynError",
    "certify_cones",
    "edit_cocycle",
    "find_periodic",
    "forge_tangency",
    "manifolds",
    "map_families",
    "pliss_times",
    "run",
    "scan_periodic",
]
