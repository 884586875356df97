"""Layered props: typed string diagrams, rewriting and explanations."""

import json

from ._core import (
    Error,
    bisimilar,
    check_theory,
    congruent,
    isomorphic,
    molecule_formula,
    molecule_splits,
    molecule_valid,
    reductions,
    scalar_impedance,
    series_impedance,
)
from ._core import run as _run

__all__ = [
    "Error",
    "bisimilar",
    "check_theory",
    "congruent",
    "isomorphic",
    "molecule_formula",
    "molecule_splits",
    "molecule_valid",
    "reductions",
    "run",
    "run_json",
    "scalar_impedance",
    "series_impedance",
]


def run(*args):
    """Run the command line in-process; returns (exit code, stdout, stderr)."""
    return _run([str(a) for a in args])


def run_json(*args):
    """Run with --json and return the parsed report."""
    code, out, err = run("--json", *args)
    if not out:
        raise Error(err.strip() or f"no report (exit {code})")
    return json.loads(out)
