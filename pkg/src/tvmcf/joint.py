"""One path set for every snapshot: the max-epsilon multi-graph MILP.

For each commodity a binary indicator per directed edge decides whether
the edge belongs to that commodity's path set. The indicator is shared by
all snapshots, and in every snapshot an edge carries at least
``flow_epsilon`` of the commodity when selected and nothing otherwise, so
the positive-flow edge set is identical across snapshots. The objective is
the largest ``epsilon`` such that every snapshot delivers at least
``epsilon`` times its own maximum throughput.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .constellation import Edge, StepGraph, TimeVaryingNetwork, common_support
from .lp import BINARY, GE, LE, OPTIMAL, LinearProgram, ModelError, SolveResult, solve_lp, solve_milp
from .mcf import ROUTING_MODES, SINGLE_PATH, SPLITTABLE, Commodity, add_conservation, check_commodities, \
    flow_name, max_throughput

log = logging.getLogger(__name__)

PER_GRAPH = "per_graph"
AGGREGATE = "aggregate"
DEMAND_MODES = (PER_GRAPH, AGGREGATE)

RATIO = "ratio"


@dataclass(frozen=True)
class JointModelParams:
    big_M: float | None = None
    flow_epsilon: float = 0.000001
    demand_mode: str = PER_GRAPH
    routing_mode: str = SPLITTABLE
    # Relative optimality gap handed to HiGHS; the in-repo search prunes at 1e-9.
    mip_gap: float = 1e-9
    backend: str = "auto"

    def __post_init__(self):
        if not 0.0 < self.flow_epsilon < 1e-2:
            raise ModelError(f"flow_epsilon must lie in (0, 0.01), got {self.flow_epsilon}")
        if self.demand_mode not in DEMAND_MODES:
            raise ModelError(f"demand_mode must be one of {DEMAND_MODES}")
        if self.routing_mode not in ROUTING_MODES:
            raise ModelError(f"routing_mode must be one of {ROUTING_MODES}")

    def resolve_big_m(self, commodities: Sequence[Commodity]) -> float:
        floor = 1.0 + sum(c.demand for c in commodities)
        if self.big_M is None:
            return floor
        if self.big_M < floor:
            raise ModelError(f"big_M={self.big_M} must be at least 1 + total demand = {floor}")
        return float(self.big_M)


@dataclass
class EpsilonResult:
    epsilon: float
    maxtp: list[float]
    achieved: list[float]
    ratios: list[float | None]
    r_min: float
    flows: list[list[dict[Edge, float]]]
    delivered: list[list[float]]
    supports: list[set[Edge]]
    delta: list[dict[Edge, int]]
    notes: list[str] = field(default_factory=list)
    milp: SolveResult | None = None

    @property
    def active_steps(self) -> list[int]:
        return [j for j, tp in enumerate(self.maxtp) if tp > 0]

    def support_at(self, step: int, i: int, threshold: float) -> set[Edge]:
        return {e for e, f in self.flows[step][i].items() if f > threshold}


def delta_name(i: int, e: Edge) -> str:
    return f"delta_{i}_{e[0]}_{e[1]}"


def build_joint(network: TimeVaryingNetwork, commodities: Sequence[Commodity],
                maxtp: Sequence[float], params: JointModelParams = JointModelParams()) -> LinearProgram:
    """Joint model over all snapshots of ``network``.

    Flow and indicator variables exist only for edges in the common support:
    an edge with zero capacity at some step can never carry the minimum flow
    there, so its indicator is zero and all its flows vanish.
    """
    T = network.T
    if T < 1:
        raise ModelError("the network has no steps")
    if len(maxtp) != T:
        raise ModelError(f"maxtp has {len(maxtp)} entries for {T} steps")
    check_commodities(network.num_nodes, commodities)
    M = params.resolve_big_m(commodities)
    eps = params.flow_epsilon
    support = sorted(common_support(network))

    lp = LinearProgram("joint")
    ratio = lp.add_var(RATIO, 0.0, 1.0)
    delta = {(c.index, e): lp.add_var(delta_name(c.index, e), 0.0, 1.0, BINARY)
             for c in commodities for e in support}

    for j in range(T):
        cap = network.capacity_map(j)
        graph = StepGraph(network.num_nodes, tuple(support), tuple(cap[e] for e in support))
        flows = {}
        for c in commodities:
            F = lp.add_var(f"F_{c.index}_{j}", 0.0, c.demand)
            fv = {e: lp.add_var(flow_name(c.index, e, j), 0.0, min(cap[e], c.demand)) for e in support}
            flows[c.index] = fv
            add_conservation(lp, graph, c, fv, F, f"{c.index}_{j}")
            for e, f in fv.items():
                d = delta[(c.index, e)]
                tag = f"{c.index}_{j}_{e[0]}_{e[1]}"
                lp.add_constraint({f: 1.0, d: -M}, GE, eps - M, f"on_{tag}")
                lp.add_constraint({f: 1.0, d: -M}, LE, 0.0, f"off_{tag}")
                if params.routing_mode == SINGLE_PATH:
                    lp.add_constraint({f: 1.0, F: -1.0, d: -M}, GE, -M, f"full_{tag}")
        for e in support:
            lp.add_constraint({flows[c.index][e]: 1.0 for c in commodities}, LE, cap[e],
                              f"cap_{j}_{e[0]}_{e[1]}")
        if maxtp[j] > 0:
            row = {lp.index(f"F_{c.index}_{j}"): 1.0 for c in commodities}
            row[ratio] = -float(maxtp[j])
            lp.add_constraint(row, GE, 0.0, f"level_{j}")

    if params.demand_mode == AGGREGATE:
        for c in commodities:
            lp.add_constraint({lp.index(f"F_{c.index}_{j}"): 1.0 for j in range(T)}, LE, c.demand,
                              f"demand_{c.index}")
    if params.routing_mode == SINGLE_PATH:
        for c in commodities:
            for u in range(network.num_nodes):
                outs = {delta[(c.index, e)]: 1.0 for e in support if e[0] == u}
                ins = {delta[(c.index, e)]: 1.0 for e in support if e[1] == u}
                if len(outs) > 1:
                    lp.add_constraint(outs, LE, 1.0, f"outdeg_{c.index}_{u}")
                if len(ins) > 1:
                    lp.add_constraint(ins, LE, 1.0, f"indeg_{c.index}_{u}")
    lp.set_objective({ratio: 1.0})
    return lp


def step_maxima(network: TimeVaryingNetwork, commodities: Sequence[Commodity],
                backend: str = "auto") -> list[float]:
    return [max_throughput(network.step(j), commodities, backend) for j in range(network.T)]


def _unpack(lp: LinearProgram, values, network: TimeVaryingNetwork, commodities: Sequence[Commodity],
            maxtp: Sequence[float]):
    support = sorted(common_support(network))
    flows, delivered, achieved, ratios = [], [], [], []
    for j in range(network.T):
        fl_j, del_j = [], []
        for c in commodities:
            fl = {e: 0.0 for e in network.edges}
            for e in support:
                fl[e] = float(values[lp.index(flow_name(c.index, e, j))])
            fl_j.append(fl)
            del_j.append(float(values[lp.index(f"F_{c.index}_{j}")]))
        flows.append(fl_j)
        delivered.append(del_j)
        achieved.append(sum(del_j))
        ratios.append(sum(del_j) / maxtp[j] if maxtp[j] > 0 else None)
    in_support = set(support)
    delta = [{e: int(round(values[lp.index(delta_name(c.index, e))])) if e in in_support else 0
              for e in network.edges} for c in commodities]
    return flows, delivered, achieved, ratios, delta


def _fix_supports(lp: LinearProgram, commodities: Sequence[Commodity], network: TimeVaryingNetwork,
                  supports: Sequence[set[Edge]]) -> None:
    for c, chosen in zip(commodities, supports):
        for e in sorted(common_support(network)):
            lp.fix(lp.index(delta_name(c.index, e)), 1.0 if e in chosen else 0.0)


def solve_epsilon(network: TimeVaryingNetwork, commodities: Sequence[Commodity],
                  params: JointModelParams = JointModelParams(),
                  maxtp: Sequence[float] | None = None) -> EpsilonResult:
    """Best guaranteed fraction of per-snapshot maximum throughput for one path set.

    Snapshots with zero maximum throughput impose no constraint and are left
    out of ``r_min``. Once the indicators are optimal, the flows are
    re-maximized with the path set held fixed (keeping ``epsilon``), so each
    ``achieved`` entry is the most the chosen path set delivers in that
    snapshot.
    """
    backend = params.backend
    if maxtp is None:
        maxtp = step_maxima(network, commodities, backend)
    maxtp = [float(v) for v in maxtp]
    notes = []
    if params.demand_mode == AGGREGATE and network.T > 1:
        notes.append("aggregate demand caps delivery summed over all steps while MaxTP is per step")

    T = network.T
    if all(v <= 0 for v in maxtp):
        zero_flows = [[{e: 0.0 for e in network.edges} for _ in commodities] for _ in range(T)]
        return EpsilonResult(1.0, maxtp, [0.0] * T, [None] * T, 1.0, zero_flows,
                             [[0.0] * len(commodities) for _ in range(T)],
                             [set() for _ in commodities],
                             [{e: 0 for e in network.edges} for _ in commodities],
                             notes + ["no step admits positive throughput"])

    lp = build_joint(network, commodities, maxtp, params)
    res = solve_milp(lp, backend, gap=params.mip_gap)
    if res.status != OPTIMAL:
        raise RuntimeError(f"joint MILP returned {res.status}; epsilon = 0 with zero flow is feasible")
    support = sorted(common_support(network))
    chosen = [{e for e in support if res.values[lp.index(delta_name(c.index, e))] > 0.5}
              for c in commodities]

    # Re-solve with the path set fixed: the MILP incumbent may sit inside the
    # solver's feasibility tolerance, the fixed-support LP gives the exact value.
    exact = build_joint(network, commodities, maxtp, params)
    _fix_supports(exact, commodities, network, chosen)
    eres = solve_lp(exact, backend)
    if eres.status == OPTIMAL:
        epsilon = eres.objective_value
        final_lp, values = exact, eres.values
    else:
        epsilon = res.objective_value
        final_lp, values = lp, res.values
        notes.append(f"fixed-support LP returned {eres.status}; using MILP values")
    epsilon = min(max(epsilon, 0.0), 1.0)

    # Re-maximize delivered flow on the chosen path set, holding epsilon.
    polish = build_joint(network, commodities, maxtp, params)
    _fix_supports(polish, commodities, network, chosen)
    polish.add_constraint({polish.index(RATIO): 1.0}, GE, max(epsilon - 1e-9, 0.0), "hold_ratio")
    polish.set_objective({polish.index(f"F_{c.index}_{j}"): 1.0 for c in commodities for j in range(T)})
    pres = solve_lp(polish, backend)
    if pres.status == OPTIMAL:
        final_lp, values = polish, pres.values

    flows, delivered, achieved, ratios, delta = _unpack(final_lp, values, network, commodities, maxtp)
    active = [r for r in ratios if r is not None]
    return EpsilonResult(
        epsilon=epsilon,
        maxtp=maxtp,
        achieved=achieved,
        ratios=ratios,
        r_min=min(active),
        flows=flows,
        delivered=delivered,
        supports=chosen,
        delta=delta,
        notes=notes,
        milp=res,
    )


def evaluate_support(network: TimeVaryingNetwork, commodities: Sequence[Commodity],
                     supports: Sequence[set[Edge]], maxtp: Sequence[float],
                     params: JointModelParams = JointModelParams()) -> float | None:
    """Epsilon achieved by a given per-commodity edge set, or ``None`` if unusable.

    A set is unusable when it contains an edge outside the common support or
    when some snapshot cannot route the minimum flow over every chosen edge.
    """
    allowed = common_support(network)
    if any(not s <= allowed for s in supports):
        return None
    if all(v <= 0 for v in maxtp):
        return 1.0
    lp = build_joint(network, commodities, maxtp, params)
    _fix_supports(lp, commodities, network, supports)
    res = solve_lp(lp, params.backend)
    if res.status != OPTIMAL:
        return None
    return min(max(res.objective_value, 0.0), 1.0)
