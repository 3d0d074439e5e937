"""HiGHS backend (through highspy) for models too large for the dense tableau."""

from __future__ import annotations

import highspy
import numpy as np

from .model import BINARY, EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, LinearProgram, SolverResourceError

_MS = highspy.HighsModelStatus
_LIMITS = (_MS.kSolutionLimit, _MS.kIterationLimit, _MS.kTimeLimit, _MS.kMemoryLimit,
           _MS.kInterrupt, _MS.kHighsInterrupt)


def _solver(lp: LinearProgram, lb, ub, integral: bool) -> highspy.Highs:
    dm = lp.arrays(dense=False)
    A = dm.A.tocsc()
    model = highspy.HighsLp()
    model.num_col_ = lp.num_vars
    model.num_row_ = lp.num_constraints
    # Always minimize -c so row duals follow the minimization convention.
    model.sense_ = highspy.ObjSense.kMinimize
    model.col_cost_ = -dm.c
    model.col_lower_ = np.asarray(dm.lb if lb is None else lb, dtype=float)
    model.col_upper_ = np.asarray(dm.ub if ub is None else ub, dtype=float)
    model.row_lower_ = np.array([-highspy.kHighsInf if s == LE else b for s, b in zip(dm.senses, dm.b)])
    model.row_upper_ = np.array([highspy.kHighsInf if s == GE else b for s, b in zip(dm.senses, dm.b)])
    model.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    model.a_matrix_.start_ = A.indptr.astype(np.int32)
    model.a_matrix_.index_ = A.indices.astype(np.int32)
    model.a_matrix_.value_ = A.data.astype(float)
    if integral:
        model.integrality_ = [highspy.HighsVarType.kInteger if v.kind == BINARY
                              else highspy.HighsVarType.kContinuous for v in lp.variables]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.passModel(model)
    return h


def solve_lp_highs(lp: LinearProgram, lb=None, ub=None):
    """Returns ``(status, x, duals, iterations)`` for the relaxation of ``lp``."""
    if lp.num_vars == 0:
        return OPTIMAL, np.zeros(0), np.zeros(lp.num_constraints), 0
    h = _solver(lp, lb, ub, integral=False)
    h.run()
    status = h.getModelStatus()
    nit = int(h.getInfo().simplex_iteration_count)
    if status == _MS.kInfeasible:
        return INFEASIBLE, None, None, nit
    if status in (_MS.kUnbounded, _MS.kUnboundedOrInfeasible):
        return UNBOUNDED, None, None, nit
    if status != _MS.kOptimal:
        raise SolverResourceError(f"HiGHS LP stopped with status {h.modelStatusToString(status)}")
    sol = h.getSolution()
    duals = -np.asarray(sol.row_dual, dtype=float)
    return OPTIMAL, np.asarray(sol.col_value, dtype=float), duals, nit


def solve_milp_highs(lp: LinearProgram, node_limit: int, rel_gap: float):
    """Returns ``(status, x, nodes)``."""
    if lp.num_vars == 0:
        return OPTIMAL, np.zeros(0), 0
    h = _solver(lp, None, None, integral=True)
    h.setOptionValue("mip_max_nodes", int(node_limit))
    h.setOptionValue("mip_rel_gap", float(rel_gap))
    h.run()
    status = h.getModelStatus()
    nodes = int(h.getInfo().mip_node_count)
    if status == _MS.kInfeasible:
        return INFEASIBLE, None, nodes
    if status in (_MS.kUnbounded, _MS.kUnboundedOrInfeasible):
        return UNBOUNDED, None, nodes
    if status in _LIMITS:
        raise SolverResourceError(f"HiGHS stopped on a limit (node_limit={node_limit}): "
                                  f"{h.modelStatusToString(status)}")
    if status != _MS.kOptimal:
        raise SolverResourceError(f"HiGHS MILP failed: {h.modelStatusToString(status)}")
    return OPTIMAL, np.asarray(h.getSolution().col_value, dtype=float), nodes
