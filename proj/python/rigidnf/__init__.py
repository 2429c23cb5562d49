"""Normal forms of contracting rigid holomorphic germs.

Each command takes a germ document (JSON text, a dict, or a path) and returns
the report as a dict, the same document the command-line tool prints.
Failures raise RigidnfError carrying the tool's exit code.
"""

import hashlib
import json
import os

from . import _rigidnf

__all__ = ["RigidnfError", "check", "resonances", "normalize", "classify", "run", "canonical_series"]

canonical_series = _rigidnf.canonical_series


class RigidnfError(Exception):
    def __init__(self, exit_code, code, message, report):
        super().__init__(f"{code} (exit {exit_code}): {message}")
        self.exit_code = exit_code
        self.code = code
        self.message = message
        self.report = report


def _text_of(germ):
    if isinstance(germ, dict):
        return json.dumps(germ)
    if isinstance(germ, os.PathLike) or (isinstance(germ, str) and not germ.lstrip().startswith("{")):
        with open(germ, encoding="utf-8") as fh:
            return fh.read()
    return germ


def run(command, germ, *, degree=None, mode=None, last_pass="all", tolerances=None, timings=False):
    """Run one command; returns (exit_code, report, error_code, message) and never raises on failure."""
    text = _text_of(germ)
    tol = dict(tolerances or {})
    unknown = set(tol) - {"coeff", "res", "eig", "residual", "series"}
    if unknown:
        raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    code, report, error_code, message = _rigidnf.run(
        command, text, digest, degree, mode, last_pass,
        tol.get("coeff"), tol.get("res"), tol.get("eig"), tol.get("residual"), tol.get("series"), timings)
    return code, json.loads(report), error_code, message


def _checked(command, germ, **kw):
    code, report, error_code, message = run(command, germ, **kw)
    if code:
        raise RigidnfError(code, error_code, message, report)
    return report


def check(germ, **kw):
    return _checked("check", germ, **kw)


def resonances(germ, **kw):
    return _checked("resonances", germ, **kw)


def normalize(germ, **kw):
    return _checked("normalize", germ, **kw)


def classify(germ, **kw):
    return _checked("classify", germ, **kw)
