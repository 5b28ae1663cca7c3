"""Spectra of damped wave operators on metric graphs."""

import json
import os

from ._dwgraph import (
    IncommensurateError,
    SolverError,
    ValidationError,
    lambda_tilde,
    run_cli,
    secular_determinant as _secular_determinant,
    vertex_coefficient,
)
from . import _dwgraph

__all__ = [
    "IncommensurateError",
    "SolverError",
    "ValidationError",
    "abscissas",
    "lambda_tilde",
    "load",
    "run_cli",
    "secular_determinant",
    "spectrum",
    "verify",
    "vertex_coefficient",
]


def _text(graph):
    if isinstance(graph, dict):
        return json.dumps(graph)
    if isinstance(graph, (str, os.PathLike)) and os.path.exists(graph):
        with open(graph) as fh:
            return fh.read()
    return str(graph)


def load(path):
    """Graph document as a dict."""
    with open(path) as fh:
        return json.load(fh)


def secular_determinant(graph, lam, backend="flower"):
    mantissa, log_scale = _secular_determinant(_text(graph), complex(lam), backend)
    return mantissa, log_scale


def spectrum(graph, re_min, re_max, im_min, im_max, tol=1e-8):
    """Eigenvalues in a window as a list of (lambda, multiplicity)."""
    doc = json.loads(_dwgraph.spectrum_json(_text(graph), re_min, re_max, im_min, im_max, tol))
    return [(complex(r["lambda"]["re"], r["lambda"]["im"]), r["multiplicity"]) for r in doc["roots"]]


def abscissas(graph):
    return json.loads(_dwgraph.abscissas_json(_text(graph)))


def verify(graph, strips=3):
    return json.loads(_dwgraph.verify_json(_text(graph), strips))
