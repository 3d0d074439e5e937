"""Public solve entry points: LP relaxation and binary branch-and-bound."""

from __future__ import annotations

import logging

import numpy as np

from . import highs
from .model import (
    BINARY,
    INFEASIBLE,
    INTEGRALITY_TOL,
    OPTIMAL,
    PRUNING_TOL,
    LinearProgram,
    SolveResult,
    SolverResourceError,
)
from .simplex import dual_bound, solve_dense

log = logging.getLogger(__name__)

BACKENDS = ("auto", "simplex", "highs")

# Dense tableau entries (rows x (cols + rows)) above which "auto" hands the
# model to HiGHS; the tableau is O(rows * cols) per pivot.
SIMPLEX_SIZE_LIMIT = 60_000
# Binary count above which "auto" prefers HiGHS for MILPs.
SIMPLEX_BINARY_LIMIT = 24
DEFAULT_NODE_LIMIT = 200_000


def _pick(lp: LinearProgram, backend: str, milp: bool = False) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend != "auto":
        return backend
    rows, cols = lp.num_constraints, lp.num_vars
    if rows * (cols + rows) > SIMPLEX_SIZE_LIMIT:
        return "highs"
    if milp and len(lp.binaries) > SIMPLEX_BINARY_LIMIT:
        return "highs"
    return "simplex"


def _result(lp: LinearProgram, status: str, x, iterations: int, backend: str, duals=None,
            nodes: int = 0) -> SolveResult:
    if status != OPTIMAL:
        return SolveResult(status, iterations=iterations, nodes=nodes, backend=backend)
    x = np.asarray(x, dtype=float)
    res = SolveResult(
        OPTIMAL,
        objective_value=lp.evaluate(x),
        assignment={v.name: float(x[j]) for j, v in enumerate(lp.variables)},
        iterations=iterations,
        values=x,
        nodes=nodes,
        backend=backend,
    )
    if duals is not None:
        dm = lp.arrays(dense=False)
        sign = 1.0 if lp.direction == "max" else -1.0
        res.duals = sign * duals
        res.reduced_costs = sign * (dm.c - dm.A.T @ duals)
        res.dual_bound = sign * dual_bound(dm.c, dm.A, dm.senses, dm.b, dm.lb, dm.ub, duals)
    return res


def solve_lp(lp: LinearProgram, backend: str = "auto") -> SolveResult:
    """Solve the continuous relaxation of ``lp`` (binaries relaxed to their bounds).

    With the ``simplex`` backend the result is a basic optimal solution
    reached by Bland's rule, so repeated solves return identical
    assignments. Optimal results carry row duals and the dual bound they
    certify.
    """
    lp.validate()
    backend = _pick(lp, backend)
    if backend == "highs":
        status, x, duals, it = highs.solve_lp_highs(lp)
        return _result(lp, status, x, it, backend, duals)
    dm = lp.arrays()
    out = solve_dense(dm.c, dm.A, dm.senses, dm.b, dm.lb, dm.ub)
    return _result(lp, out.status, out.x, out.iterations, backend, out.duals)


def solve_milp(lp: LinearProgram, backend: str = "auto", node_limit: int = DEFAULT_NODE_LIMIT,
               gap: float = PRUNING_TOL) -> SolveResult:
    """Solve ``lp`` with its binary variables enforced.

    The in-repo search is depth-first branch-and-bound: branch on the
    lowest-index fractional binary, dive into the child nearer the
    relaxation value first, prune nodes whose relaxation cannot beat the
    incumbent by more than ``gap``. ``SolverResourceError`` is raised once
    ``node_limit`` relaxations have been solved.

    For the ``highs`` backend ``gap`` is passed on as HiGHS' relative MIP gap.
    """
    lp.validate()
    backend = _pick(lp, backend, milp=True)
    if backend == "highs":
        status, x, nodes = highs.solve_milp_highs(lp, node_limit, gap)
        if status == OPTIMAL:
            x = np.asarray(x, dtype=float)
            for j in lp.binaries:
                x[j] = round(x[j])
            x = _polish(lp, x, "highs")
        return _result(lp, status, x, 0, backend, nodes=nodes)
    return _branch_and_bound(lp, node_limit, gap)


def _polish(lp: LinearProgram, x: np.ndarray, backend: str) -> np.ndarray:
    """Re-solve the continuous part with the binaries fixed at ``x``."""
    bins = lp.binaries
    if not bins:
        return x
    dm = lp.arrays(dense=backend != "highs")
    lb, ub = dm.lb.copy(), dm.ub.copy()
    lb[bins] = x[bins]
    ub[bins] = x[bins]
    if backend == "highs":
        status, xp, _, _ = highs.solve_lp_highs(lp, lb, ub)
    else:
        out = solve_dense(dm.c, dm.A, dm.senses, dm.b, lb, ub)
        status, xp = out.status, out.x
    if status == OPTIMAL and dm.c @ xp >= dm.c @ x - 1e-9:
        return xp
    return x


def _branch_and_bound(lp: LinearProgram, node_limit: int, gap: float) -> SolveResult:
    dm = lp.arrays()
    bins = np.array(lp.binaries, dtype=int)
    best_val = -np.inf
    best_x = None
    nodes = 0
    iterations = 0
    stack: list[tuple[tuple[int, float], ...]] = [()]
    while stack:
        fixes = stack.pop()
        if nodes >= node_limit:
            raise SolverResourceError(f"branch-and-bound node limit {node_limit} exceeded")
        nodes += 1
        lb, ub = dm.lb.copy(), dm.ub.copy()
        for j, v in fixes:
            lb[j] = ub[j] = v
        out = solve_dense(dm.c, dm.A, dm.senses, dm.b, lb, ub)
        iterations += out.iterations
        if out.status != OPTIMAL:
            continue
        if out.objective <= best_val + gap:
            continue
        x = out.x
        frac = bins[np.abs(x[bins] - np.round(x[bins])) > INTEGRALITY_TOL] if bins.size else bins
        if frac.size == 0:
            best_val, best_x = out.objective, x
            continue
        j = int(frac[0])
        near = 1.0 if x[j] >= 0.5 else 0.0
        stack.append(fixes + ((j, 1.0 - near),))
        stack.append(fixes + ((j, near),))

    log.debug("branch-and-bound: %d nodes, %d pivots", nodes, iterations)
    if best_x is None:
        return SolveResult(INFEASIBLE, iterations=iterations, nodes=nodes, backend="simplex")
    x = best_x.copy()
    if bins.size:
        x[bins] = np.round(x[bins])
        x = _polish(lp, x, "simplex")
    return _result(lp, OPTIMAL, x, iterations, "simplex", nodes=nodes)
