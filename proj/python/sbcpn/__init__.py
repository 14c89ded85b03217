"""Stochastic block-coordinate proximal Newton solver (C++ core)."""

from ._sbcpn import (
    TRACE_HEADER,
    ContractViolation,
    ParseError,
    dct2,
    gen_students_t,
    idct2,
    prox,
    run_experiment,
    solve,
    students_t_residual,
)

__all__ = [
    "TRACE_HEADER",
    "ContractViolation",
    "ParseError",
    "dct2",
    "gen_students_t",
    "idct2",
    "prox",
    "run_experiment",
    "solve",
    "students_t_residual",
]
