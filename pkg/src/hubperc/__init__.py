"""hubperc: bond percolation on scale-free rank-1 random graphs.

Simulates the three-regime phase transition (hub stars / critical window /
square-root-of-n giant) of percolated rank-1 graphs with heavy-tailed weights,
and computes the matching analytic objects: the critical intensity, the
limiting hub graph, and the survival fixed point.
"""

from hubperc.constants import (
    CriticalConstants,
    DerivedExponents,
    ModelParams,
    a_alpha,
    derive_exponents,
    lambda_crit,
)

__all__ = [
    "CriticalConstants",
    "DerivedExponents",
    "ModelParams",
    "a_alpha",
    "derive_exponents",
    "lambda_crit",
]

__version__ = "0.1.0"
