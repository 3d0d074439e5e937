"""Sparse model container shared by every solver backend."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import sparse

CONTINUOUS = "continuous"
BINARY = "binary"

LE, GE, EQ = "<=", ">=", "="
SENSES = (LE, GE, EQ)

MAXIMIZE, MINIMIZE = "max", "min"

# Fixed tolerances used across the solver stack.
FEASIBILITY_TOL = 1e-8
INTEGRALITY_TOL = 1e-6
PRUNING_TOL = 1e-9


class ModelError(ValueError):
    """Malformed model (bad bounds, unknown variables, bad sense...)."""


class SolverResourceError(RuntimeError):
    """A solver exhausted a configured resource such as the node limit."""


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    kind: str = CONTINUOUS


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[int, float]
    sense: str
    rhs: float
    name: str


@dataclass
class LinearProgram:
    """Variables, linear constraints and a linear objective.

    Constraint and objective rows are sparse maps from variable index to
    coefficient. Every variable carries finite bounds.
    """

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    direction: str = MAXIMIZE
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, lb: float = 0.0, ub: float = 1.0, kind: str = CONTINUOUS) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"variable {name!r}: unknown kind {kind!r}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), kind))
        return len(self.variables) - 1

    def add_constraint(self, coeffs: Mapping[int, float], sense: str, rhs: float,
                       name: str | None = None) -> int:
        row: dict[int, float] = {}
        for j, a in coeffs.items():
            if a != 0.0:
                row[j] = row.get(j, 0.0) + float(a)
        if name is None:
            name = f"c{len(self.constraints)}"
        self.constraints.append(Constraint(row, sense, float(rhs), name))
        return len(self.constraints) - 1

    def set_objective(self, coeffs: Mapping[int, float], direction: str = MAXIMIZE) -> None:
        self.objective = {j: float(a) for j, a in coeffs.items() if a != 0.0}
        self.direction = direction

    def fix(self, j: int, value: float) -> None:
        """Pin variable ``j`` to ``value`` by collapsing its bounds."""
        v = self.variables[j]
        self.variables[j] = Variable(v.name, float(value), float(value), v.kind)

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def binaries(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.kind == BINARY]

    def validate(self) -> None:
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ModelError(f"objective direction must be 'max' or 'min', got {self.direction!r}")
        n = len(self.variables)
        for v in self.variables:
            if not (math.isfinite(v.lb) and math.isfinite(v.ub)):
                raise ModelError(f"variable {v.name!r} needs finite bounds, got [{v.lb}, {v.ub}]")
            if v.lb > v.ub:
                raise ModelError(f"variable {v.name!r} has lb {v.lb} > ub {v.ub}")
            if v.kind == BINARY and (v.lb < 0.0 or v.ub > 1.0):
                raise ModelError(f"binary variable {v.name!r} has bounds outside [0, 1]")
        for con in self.constraints:
            if con.sense not in SENSES:
                raise ModelError(f"constraint {con.name!r}: unknown sense {con.sense!r}")
            if not math.isfinite(con.rhs):
                raise ModelError(f"constraint {con.name!r}: non-finite rhs")
            for j, a in con.coeffs.items():
                if not 0 <= j < n:
                    raise ModelError(f"constraint {con.name!r} references undeclared variable {j}")
                if not math.isfinite(a):
                    raise ModelError(f"constraint {con.name!r}: non-finite coefficient")
        for j in self.objective:
            if not 0 <= j < n:
                raise ModelError(f"objective references undeclared variable {j}")

    def arrays(self, dense: bool = True) -> "DenseModel":
        """Model arrays in maximization form (minimization objectives are negated).

        ``A`` is a dense ndarray, or a scipy CSR array when ``dense`` is false.
        """
        n, m = len(self.variables), len(self.constraints)
        rows, cols, vals = [], [], []
        for i, con in enumerate(self.constraints):
            for j, a in con.coeffs.items():
                rows.append(i)
                cols.append(j)
                vals.append(a)
        A = sparse.csr_array((vals, (rows, cols)), shape=(m, n))
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] = a
        if self.direction == MINIMIZE:
            c = -c
        return DenseModel(
            c=c,
            A=A.toarray() if dense else A,
            senses=[con.sense for con in self.constraints],
            b=np.array([con.rhs for con in self.constraints], dtype=float),
            lb=np.array([v.lb for v in self.variables], dtype=float),
            ub=np.array([v.ub for v in self.variables], dtype=float),
        )

    def evaluate(self, x) -> float:
        return float(sum(a * x[j] for j, a in self.objective.items()))

    def max_violation(self, x) -> float:
        """Largest bound or constraint violation of the point ``x``."""
        worst = 0.0
        for j, v in enumerate(self.variables):
            worst = max(worst, v.lb - x[j], x[j] - v.ub)
        for con in self.constraints:
            lhs = sum(a * x[j] for j, a in con.coeffs.items())
            if con.sense == LE:
                worst = max(worst, lhs - con.rhs)
            elif con.sense == GE:
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst


@dataclass
class DenseModel:
    c: np.ndarray
    A: np.ndarray
    senses: list[str]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray


OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class SolveResult:
    """Outcome of an LP or MILP solve.

    ``duals`` holds one multiplier per constraint (maximization sign
    convention: nonnegative on ``<=`` rows) and ``dual_bound`` the weak
    duality bound they certify. Both are ``None`` for MILP solves.
    """

    status: str
    objective_value: float = math.nan
    assignment: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    values: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    dual_bound: float | None = None
    nodes: int = 0
    backend: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def __getitem__(self, name: str) -> float:
        return self.assignment[name]
