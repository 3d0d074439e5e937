"""Single-snapshot multi-commodity flow: models, maximum throughput, canonical optima."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .constellation import Edge, StepGraph
from .lp import BINARY, EQ, GE, LE, OPTIMAL, LinearProgram, ModelError, solve_lp, solve_milp

SPLITTABLE = "splittable"
SINGLE_PATH = "single_path"
ROUTING_MODES = (SPLITTABLE, SINGLE_PATH)

# Flow above this counts as using an edge.
FLOW_THRESHOLD = 1e-6
# Slack allowed on the throughput pin of the support-minimizing phase.
THROUGHPUT_PIN_TOL = 1e-8


@dataclass(frozen=True)
class Commodity:
    index: int
    source: int
    sink: int
    demand: float

    def __post_init__(self):
        if self.source == self.sink:
            raise ModelError(f"commodity {self.index}: source equals sink ({self.source})")
        if not self.demand > 0:
            raise ModelError(f"commodity {self.index}: demand must be > 0, got {self.demand}")


@dataclass
class FlowSolution:
    flows: list[dict[Edge, float]]
    delivered: list[float]

    @property
    def throughput(self) -> float:
        return float(sum(self.delivered))

    def support(self, i: int, threshold: float = FLOW_THRESHOLD) -> set[Edge]:
        return {e for e, f in self.flows[i].items() if f > threshold}

    def edge_set(self, threshold: float = FLOW_THRESHOLD) -> set[Edge]:
        """Union of the per-commodity supports."""
        out: set[Edge] = set()
        for i in range(len(self.flows)):
            out |= self.support(i, threshold)
        return out


def check_commodities(num_nodes: int, commodities: Sequence[Commodity]) -> None:
    for c in commodities:
        for node in (c.source, c.sink):
            if not 0 <= node < num_nodes:
                raise ModelError(f"commodity {c.index}: unknown node id {node}")


def flow_name(i: int, e: Edge, step: int | None = None) -> str:
    return f"f_{i}_{e[0]}_{e[1]}" if step is None else f"f_{i}_{step}_{e[0]}_{e[1]}"


def add_conservation(lp: LinearProgram, graph: StepGraph, commodity: Commodity,
                     flow_vars: dict[Edge, int], delivered: int, tag: str) -> None:
    """Net outflow ``F`` at the source, net inflow ``F`` at the sink, zero elsewhere."""
    s, t = commodity.source, commodity.sink
    rows: dict[int, dict[int, float]] = {}
    for (u, v), j in flow_vars.items():
        rows.setdefault(u, {})[j] = 1.0
        rows.setdefault(v, {})[j] = -1.0
    for u in range(graph.num_nodes):
        row = dict(rows.get(u, {}))
        if u == s:
            row[delivered] = -1.0
        elif u == t:
            row[delivered] = 1.0
        elif not row:
            continue
        lp.add_constraint(row, EQ, 0.0, f"cons_{tag}_{u}")


def build_mcf(graph: StepGraph, commodities: Sequence[Commodity],
              routing_mode: str = SPLITTABLE) -> LinearProgram:
    """Maximize total delivered flow on one snapshot."""
    check_commodities(graph.num_nodes, commodities)
    if routing_mode not in ROUTING_MODES:
        raise ModelError(f"unknown routing mode {routing_mode!r}")
    lp = LinearProgram("mcf")
    delivered = [lp.add_var(f"F_{c.index}", 0.0, c.demand) for c in commodities]
    flow_vars: list[dict[Edge, int]] = []
    for c in commodities:
        fv = {e: lp.add_var(flow_name(c.index, e), 0.0, min(cap, c.demand))
              for e, cap in zip(graph.edges, graph.capacity)}
        flow_vars.append(fv)
    for e, cap in zip(graph.edges, graph.capacity):
        lp.add_constraint({fv[e]: 1.0 for fv in flow_vars}, LE, cap, f"cap_{e[0]}_{e[1]}")
    for c, fv, F in zip(commodities, flow_vars, delivered):
        add_conservation(lp, graph, c, fv, F, str(c.index))
    if routing_mode == SINGLE_PATH:
        for c, fv, F in zip(commodities, flow_vars, delivered):
            _single_path(lp, graph, c, fv, F)
    lp.set_objective({F: 1.0 for F in delivered})
    return lp


def _single_path(lp: LinearProgram, graph: StepGraph, c: Commodity,
                 fv: dict[Edge, int], F: int) -> None:
    # Selected edges form one path: at most one selected edge out of and into
    # each node, and every selected edge carries the whole delivered amount.
    sel = {e: lp.add_var(f"x_{c.index}_{e[0]}_{e[1]}", 0.0, 1.0, BINARY) for e in graph.edges}
    big = c.demand
    for e, j in fv.items():
        lp.add_constraint({j: 1.0, sel[e]: -big}, LE, 0.0, f"sel_{c.index}_{e[0]}_{e[1]}")
        lp.add_constraint({j: 1.0, F: -1.0, sel[e]: -big}, GE, -big, f"full_{c.index}_{e[0]}_{e[1]}")
    for u in range(graph.num_nodes):
        outs = {sel[(u, v)]: 1.0 for v in graph.out_neighbors[u]}
        ins = {sel[(w, u)]: 1.0 for w in graph.in_neighbors[u]}
        if len(outs) > 1:
            lp.add_constraint(outs, LE, 1.0, f"outdeg_{c.index}_{u}")
        if len(ins) > 1:
            lp.add_constraint(ins, LE, 1.0, f"indeg_{c.index}_{u}")


def extract_flows(lp: LinearProgram, values, graph: StepGraph, commodities: Sequence[Commodity],
                  step: int | None = None) -> FlowSolution:
    flows, delivered = [], []
    for c in commodities:
        flows.append({e: float(values[lp.index(flow_name(c.index, e, step))]) for e in graph.edges})
        name = f"F_{c.index}" if step is None else f"F_{c.index}_{step}"
        delivered.append(float(values[lp.index(name)]))
    return FlowSolution(flows, delivered)


def solve_mcf(graph: StepGraph, commodities: Sequence[Commodity], routing_mode: str = SPLITTABLE,
              backend: str = "auto") -> FlowSolution:
    lp = build_mcf(graph, commodities, routing_mode)
    res = solve_lp(lp, backend) if routing_mode == SPLITTABLE else solve_milp(lp, backend)
    if res.status != OPTIMAL:
        raise RuntimeError(f"MCF solve returned {res.status}; the zero flow is always feasible")
    return extract_flows(lp, res.values, graph, commodities)


def max_throughput(graph: StepGraph, commodities: Sequence[Commodity], backend: str = "auto") -> float:
    """Maximum total throughput of the snapshot (splittable relaxation)."""
    if not commodities:
        return 0.0
    res = solve_lp(build_mcf(graph, commodities, SPLITTABLE), backend)
    if res.status != OPTIMAL:
        raise RuntimeError(f"max-throughput LP returned {res.status}; the zero flow is always feasible")
    return max(res.objective_value, 0.0)


def canonical_optimum(graph: StepGraph, commodities: Sequence[Commodity], backend: str = "auto",
                      maxtp: float | None = None) -> FlowSolution:
    """A maximum-throughput flow using as few edges as possible.

    Phase one finds the maximum throughput; phase two pins the total
    delivered flow to it and minimizes the number of edges carrying flow
    (one binary per edge, shared by all commodities).
    """
    if maxtp is None:
        maxtp = max_throughput(graph, commodities, backend)
    lp = build_mcf(graph, commodities, SPLITTABLE)
    delivered = [lp.index(f"F_{c.index}") for c in commodities]
    lp.add_constraint({F: 1.0 for F in delivered}, GE, maxtp - THROUGHPUT_PIN_TOL, "pin_throughput")
    used = {}
    for e, cap in zip(graph.edges, graph.capacity):
        y = lp.add_var(f"y_{e[0]}_{e[1]}", 0.0, 1.0, BINARY)
        used[e] = y
        row = {lp.index(flow_name(c.index, e)): 1.0 for c in commodities}
        row[y] = -float(cap)
        lp.add_constraint(row, LE, 0.0, f"use_{e[0]}_{e[1]}")
    lp.set_objective({y: 1.0 for y in used.values()}, "min")
    res = solve_milp(lp, backend)
    if res.status != OPTIMAL:
        raise RuntimeError(f"support-minimizing MILP returned {res.status}")
    chosen = [e for e, y in used.items() if res.values[y] > 0.5]
    # The pin leaves up to THROUGHPUT_PIN_TOL of slack; re-maximizing on the
    # chosen edges restores the exact maximum without enlarging the support.
    sub = graph.restricted(chosen)
    return _zero_dust(solve_mcf(sub, commodities, SPLITTABLE, backend), graph)


def _zero_dust(sol: FlowSolution, graph: StepGraph) -> FlowSolution:
    flows = [{e: (f.get(e, 0.0) if f.get(e, 0.0) > FLOW_THRESHOLD else 0.0) for e in graph.edges}
             for f in sol.flows]
    return FlowSolution(flows, sol.delivered)


def _decompose(flow: dict[Edge, float], source: int, sink: int, tol: float = 1e-9):
    """Split an s-t flow into simple paths and leftover cycles."""
    residual = {e: f for e, f in flow.items() if f > tol}
    out_of: dict[int, list[int]] = {}
    for u, v in sorted(residual):
        out_of.setdefault(u, []).append(v)

    def live(u):
        return [v for v in out_of.get(u, []) if residual.get((u, v), 0.0) > tol]

    paths = []
    while True:
        # Depth-first search for an s-t path over positive residual edges.
        prev = {source: None}
        stack = [source]
        while stack and sink not in prev:
            u = stack.pop()
            for v in reversed(live(u)):
                if v not in prev:
                    prev[v] = u
                    stack.append(v)
        if sink not in prev:
            break
        path = [sink]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        path.reverse()
        amount = min(residual[(a, b)] for a, b in zip(path, path[1:]))
        for a, b in zip(path, path[1:]):
            residual[(a, b)] -= amount
        paths.append((path, amount))

    cycles = []
    for first in sorted(residual):
        while residual[first] > tol:
            walk = list(first)
            pos = {first[0]: 0, first[1]: 1}
            while True:
                nxt = live(walk[-1])
                if not nxt:
                    # dead end: numerical dust, not a cycle
                    residual[first] = 0.0
                    break
                v = nxt[0]
                if v in pos:
                    cyc = walk[pos[v]:] + [v]
                    amount = min(residual[(a, b)] for a, b in zip(cyc, cyc[1:]))
                    for a, b in zip(cyc, cyc[1:]):
                        residual[(a, b)] -= amount
                    cycles.append((cyc, amount))
                    break
                pos[v] = len(walk)
                walk.append(v)
    return paths, cycles


def _check_conservation(solution: FlowSolution, c: Commodity, tol: float = 1e-7) -> int:
    i = _position(solution, c)
    net: dict[int, float] = {}
    for (u, v), f in solution.flows[i].items():
        if f < -tol:
            raise ModelError(f"commodity {c.index}: negative flow {f} on {(u, v)}")
        net[u] = net.get(u, 0.0) + f
        net[v] = net.get(v, 0.0) - f
    F = solution.delivered[i]
    for u, val in net.items():
        want = F if u == c.source else -F if u == c.sink else 0.0
        if abs(val - want) > tol:
            raise ModelError(f"commodity {c.index}: conservation violated at node {u} "
                             f"(net outflow {val}, expected {want})")
    if F > tol and (c.source not in net or c.sink not in net):
        raise ModelError(f"commodity {c.index}: delivered {F} without any flow")
    return i


def _position(solution: FlowSolution, c: Commodity) -> int:
    if 0 <= c.index < len(solution.flows):
        return c.index
    raise ModelError(f"solution has no commodity {c.index}")


def decompose_paths(solution: FlowSolution, commodity: Commodity) -> list[tuple[list[int], float]]:
    """Simple source-to-sink paths whose amounts sum to the delivered flow."""
    i = _check_conservation(solution, commodity)
    paths, _ = _decompose(solution.flows[i], commodity.source, commodity.sink)
    return paths


def decompose_cycles(solution: FlowSolution, commodity: Commodity) -> list[tuple[list[int], float]]:
    """Flow cycles left over once every source-to-sink path is removed."""
    i = _check_conservation(solution, commodity)
    _, cycles = _decompose(solution.flows[i], commodity.source, commodity.sink)
    return cycles
