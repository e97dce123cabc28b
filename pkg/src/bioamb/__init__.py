"""BioAmbients: parsing, reduction semantics and control-flow analysis."""

from __future__ import annotations

from .ast import (
    Amb,
    CanonCap,
    CanonicalName,
    Cap,
    Choice,
    Name,
    Par,
    Prefix,
    Process,
    Rec,
    Restrict,
    Site,
    Var,
    Zero,
    alpha_equal,
    canonicalize,
    free_names,
    substitute,
)
from .cfa import TOP, AnalysisResult, analyze, generate_constraints, solve, validate
from .parser import ParseError, SourceSpan, parse, pretty
from .semantics import RULES, Redex, StateSpace, explore, normalize, step
from .verify import PrecisionReport, VerificationReport, check_theorem, measure_precision

__version__ = "0.1.0"

__all__ = [
    "Amb", "CanonCap", "CanonicalName", "Cap", "Choice", "Name", "Par", "Prefix",
    "Process", "Rec", "Restrict", "Site", "Var", "Zero",
    "alpha_equal", "canonicalize", "free_names", "substitute",
    "TOP", "AnalysisResult", "analyze", "generate_constraints", "solve", "validate",
    "ParseError", "SourceSpan", "parse", "pretty",
    "RULES", "Redex", "StateSpace", "explore", "normalize", "step",
    "PrecisionReport", "VerificationReport", "check_theorem", "measure_precision",
]
