"""Dense bounded-variable primal simplex with Bland's pivoting rule.

All problems are solved in maximization form. Variables are shifted to
``[0, ub - lb]``; inequality rows receive a slack column and rows whose
slack cannot absorb the initial residual receive an artificial column.
Phase one drives the artificials to zero, phase two optimizes the real
objective with the artificials pinned to zero.

The entering variable is the lowest-index eligible column and the leaving
variable the lowest-index basic variable among ratio-test ties, so the
same model always walks the same pivot sequence and ends at the same
vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, SolverResourceError

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass
class SimplexOutcome:
    status: str
    x: np.ndarray | None = None
    objective: float = math.nan
    duals: np.ndarray | None = None
    iterations: int = 0


class _Tableau:
    def __init__(self, A_std: np.ndarray, rhs: np.ndarray, basis: np.ndarray, upper: np.ndarray):
        m = A_std.shape[0]
        scale = A_std[np.arange(m), basis] if m else np.ones(0)
        self.T = A_std / scale[:, None] if m else A_std.copy()
        self.xB = rhs / scale if m else np.zeros(0)
        self.basis = basis.copy()
        self.U = upper
        self.at_upper = np.zeros(A_std.shape[1], dtype=bool)
        self.iterations = 0

    def run(self, cost: np.ndarray, max_iter: int) -> str:
        T, U = self.T, self.U
        m = T.shape[0]
        while True:
            if self.iterations >= max_iter:
                raise SolverResourceError(f"simplex iteration limit {max_iter} exceeded")
            d = cost - cost[self.basis] @ T if m else cost.copy()
            d[self.basis] = 0.0
            eligible = ((~self.at_upper) & (d > COST_TOL) & (U > 0.0)) | (self.at_upper & (d < -COST_TOL))
            eligible[self.basis] = False
            cand = np.flatnonzero(eligible)
            if cand.size == 0:
                return OPTIMAL
            j = int(cand[0])
            step = -1.0 if self.at_upper[j] else 1.0
            col = T[:, j] * step

            ratios = np.full(m, np.inf)
            dec = col > PIVOT_TOL
            ratios[dec] = self.xB[dec] / col[dec]
            uB = U[self.basis]
            inc = (col < -PIVOT_TOL) & np.isfinite(uB)
            ratios[inc] = (uB[inc] - self.xB[inc]) / (-col[inc])
            tmin = ratios.min() if m else np.inf

            self.iterations += 1
            if U[j] <= tmin:
                t = U[j]
                self.xB -= t * col
                self.at_upper[j] = not self.at_upper[j]
                self._clamp()
                continue
            if not np.isfinite(tmin):
                return UNBOUNDED

            ties = np.flatnonzero(ratios <= tmin + TIE_TOL)
            r = int(ties[np.argmin(self.basis[ties])])
            t = max(ratios[r], 0.0)
            self.xB -= t * col
            leaving = self.basis[r]
            self.at_upper[leaving] = col[r] < 0.0
            self.xB[r] = t if step > 0 else U[j] - t
            self.at_upper[j] = False

            pivot_row = T[r] / T[r, j]
            factor = T[:, j].copy()
            factor[r] = 0.0
            T -= np.outer(factor, pivot_row)
            T[r] = pivot_row
            self.basis[r] = j
            self._clamp()

    def _clamp(self) -> None:
        np.clip(self.xB, 0.0, self.U[self.basis], out=self.xB)

    def point(self) -> np.ndarray:
        x = np.where(self.at_upper, self.U, 0.0)
        x[np.isinf(x)] = 0.0
        x[self.basis] = self.xB
        return x


def standard_form(A: np.ndarray, senses: list[str], rhs: np.ndarray):
    """Append slack columns; returns ``(A_with_slacks, slack_column_of_row)``."""
    m, n = A.shape
    rows = [i for i, s in enumerate(senses) if s != EQ]
    S = np.zeros((m, len(rows)))
    slack_of = {}
    for k, i in enumerate(rows):
        S[i, k] = 1.0 if senses[i] == LE else -1.0
        slack_of[i] = n + k
    return np.hstack([A, S]), slack_of


def solve_dense(c, A, senses, b, lb, ub, max_iter: int = 500_000) -> SimplexOutcome:
    """Maximize ``c @ x`` subject to ``A x (senses) b`` and ``lb <= x <= ub``."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    rhs = np.asarray(b, dtype=float) - A @ lb
    A_slack, slack_of = standard_form(A, senses, rhs)
    n_slack = A_slack.shape[1] - n

    basis = np.empty(m, dtype=int)
    art_rows = []
    for i in range(m):
        k = slack_of.get(i)
        if k is not None and A_slack[i, k] * rhs[i] >= 0.0:
            basis[i] = k
        else:
            art_rows.append(i)
    n_art = len(art_rows)
    art = np.zeros((m, n_art))
    for a, i in enumerate(art_rows):
        art[i, a] = 1.0 if rhs[i] >= 0.0 else -1.0
        basis[i] = n + n_slack + a
    A_std = np.hstack([A_slack, art])
    N = A_std.shape[1]
    U = np.concatenate([ub - lb, np.full(n_slack, np.inf), np.full(n_art, np.inf)])

    tab = _Tableau(A_std, rhs, basis, U)
    if n_art:
        cost1 = np.zeros(N)
        cost1[n + n_slack:] = -1.0
        tab.run(cost1, max_iter)
        infeas = tab.point()[n + n_slack:].sum()
        if infeas > 1e-8 * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return SimplexOutcome(INFEASIBLE, iterations=tab.iterations)
        U[n + n_slack:] = 0.0
        tab._clamp()

    cost2 = np.concatenate([c, np.zeros(N - n)])
    status = tab.run(cost2, max_iter)
    if status != OPTIMAL:
        return SimplexOutcome(status, iterations=tab.iterations)

    x_std = tab.point()
    basis = tab.basis
    B = A_std[:, basis]
    duals = None
    if m:
        nonbasic = np.ones(N, dtype=bool)
        nonbasic[basis] = False
        try:
            polished = np.linalg.solve(B, rhs - A_std[:, nonbasic] @ x_std[nonbasic])
            if np.all(polished >= -1e-9) and np.all(polished <= U[basis] + 1e-9):
                x_std[basis] = np.clip(polished, 0.0, U[basis])
            duals = np.linalg.solve(B.T, cost2[basis])
        except np.linalg.LinAlgError:
            duals = None
    x = lb + x_std[:n]
    return SimplexOutcome(OPTIMAL, x=x, objective=float(c @ x), duals=duals, iterations=tab.iterations)


def dual_bound(c, A, senses, b, lb, ub, y) -> float:
    """Weak-duality upper bound on ``max c @ x`` certified by multipliers ``y``.

    Multipliers with the wrong sign for their row are clipped to zero first,
    so the returned value is a valid bound for any input ``y``.
    """
    y = np.array(y, dtype=float)
    for i, s in enumerate(senses):
        if s == LE:
            y[i] = max(y[i], 0.0)
        elif s == GE:
            y[i] = min(y[i], 0.0)
    d = np.asarray(c, dtype=float) - A.T @ y
    return float(np.asarray(b) @ y + np.maximum(d * lb, d * ub).sum())
