"""Structured epsilon-stability radii of Hurwitz matrices.

The structured radius is the largest norm of a structured perturbation
Delta such that the eps-pseudospectrum of A + Delta stays in the closed
left half-plane. It is computed by a rank-1 gradient flow for the
rightmost eigenvalue (inner iteration) wrapped in a Newton/bisection
root finder on the perturbation size (outer iteration).
"""

__version__ = "0.1.0"

from .errors import (
    ContourEscapesWindow,
    DegenerateEigenvalue,
    DimensionMismatch,
    NonConvergence,
    NotHurwitz,
    OpenContour,
    ParseError,
    SizeGuard,
    StabradError,
    StepSizeUnstable,
    UnsupportedField,
    ZeroStructuredGradient,
    ZeroStructuredPart,
)
from .inner import InnerOptions, InnerResult, solve_inner
from .io import grcar, read_matrix_market, toeplitz_band, write_matrix_market
from .linalg import EigenTriple, rightmost_eigentriple, smallest_singular_value
from .outer import OuterConfig, OuterTrace, solve_delta, solve_eps, solve_radius, stability_radius
from .structures import BasisStructure, StructureSpace, project

__all__ = [
    "BasisStructure",
    "ContourEscapesWindow",
    "DegenerateEigenvalue",
    "DimensionMismatch",
    "EigenTriple",
    "InnerOptions",
    "InnerResult",
    "NonConvergence",
    "NotHurwitz",
    "OpenContour",
    "OuterConfig",
    "OuterTrace",
    "ParseError",
    "SizeGuard",
    "StabradError",
    "StepSizeUnstable",
    "StructureSpace",
    "UnsupportedField",
    "ZeroStructuredGradient",
    "ZeroStructuredPart",
    "grcar",
    "project",
    "read_matrix_market",
    "rightmost_eigentriple",
    "smallest_singular_value",
    "solve_delta",
    "solve_eps",
    "solve_inner",
    "solve_radius",
    "stability_radius",
    "toeplitz_band",
    "write_matrix_market",
]
