"""Linear and mixed-binary programming: model container, solvers, LP text I/O."""

from .lpformat import LPNameError, export_lp_text, read_lp_text
from .model import (
    BINARY,
    CONTINUOUS,
    EQ,
    FEASIBILITY_TOL,
    GE,
    INFEASIBLE,
    INTEGRALITY_TOL,
    LE,
    OPTIMAL,
    PRUNING_TOL,
    UNBOUNDED,
    LinearProgram,
    ModelError,
    SolveResult,
    SolverResourceError,
)
from .solve import BACKENDS, solve_lp, solve_milp

__all__ = [
    "BACKENDS", "BINARY", "CONTINUOUS", "EQ", "FEASIBILITY_TOL", "GE", "INFEASIBLE",
    "INTEGRALITY_TOL", "LE", "OPTIMAL", "PRUNING_TOL", "UNBOUNDED", "LPNameError",
    "LinearProgram", "ModelError", "SolveResult", "SolverResourceError", "export_lp_text",
    "read_lp_text", "solve_lp", "solve_milp",
]
