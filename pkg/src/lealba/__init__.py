"""Sahlqvist and inductive inequalities for normal lattice expansion logics.

The package classifies inequalities over an arbitrary signature, runs the
ALBA rewrite algorithm to obtain pure quasi-inequalities, translates them
into first-order frame conditions and checks input/output equivalence on
finite models.
"""

from .alba import AlbaOptions, AlbaResult, run
from .gentree import classify_inequality, find_inductive, find_sahlqvist
from .signature import Signature, bundled_signature, load_signature, parse_signature
from .syntax import parse_formula, parse_inequality, parse_quasi

__all__ = [
    "AlbaOptions",
    "AlbaResult",
    "Signature",
    "bundled_signature",
    "classify_inequality",
    "find_inductive",
    "find_sahlqvist",
    "load_signature",
    "parse_formula",
    "parse_inequality",
    "parse_quasi",
    "parse_signature",
    "run",
]
