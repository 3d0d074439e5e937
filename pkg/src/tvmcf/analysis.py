"""Cost-benefit analysis: path switching avoided vs. throughput given up.

The switching cost of an instance counts the edges that change state
between consecutive steps when every step is routed with its own
support-minimal maximum-throughput flow. The throughput drop measures what
the single fixed path set of the joint model loses against those per-step
maxima.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import ExperimentGrid
from .constellation import Edge, TimeVaryingNetwork, generate_network
from .joint import EpsilonResult, JointModelParams, solve_epsilon, step_maxima
from .mcf import Commodity, canonical_optimum

log = logging.getLogger(__name__)

CSV_HEADER = ("k", "T", "trial", "seed", "epsilon", "mean_drop_pct", "worst_drop_pct",
              "switching_cost_total", "runtime_ms")

# Relative gap for the joint MILP when HiGHS solves it.
SWEEP_MIP_GAP = 1e-6


@dataclass
class SwitchingCostReport:
    edge_sets: list[frozenset[Edge]]
    xor_sizes: list[int]

    @property
    def total(self) -> int:
        return sum(self.xor_sizes)


def xor_sizes(edge_sets: Sequence[frozenset[Edge]]) -> list[int]:
    return [len(a ^ b) for a, b in zip(edge_sets, edge_sets[1:])]


def step_edge_sets(network: TimeVaryingNetwork, commodities: Sequence[Commodity],
                   maxtp: Sequence[float] | None = None, backend: str = "auto") -> list[frozenset[Edge]]:
    """Union of per-commodity support edges of each step's canonical optimum."""
    sets = []
    for j in range(network.T):
        sol = canonical_optimum(network.step(j), commodities, backend,
                                None if maxtp is None else maxtp[j])
        sets.append(frozenset(sol.edge_set()))
    return sets


def switching_cost(network: TimeVaryingNetwork, commodities: Sequence[Commodity],
                   backend: str = "auto") -> SwitchingCostReport:
    sets = step_edge_sets(network, commodities, backend=backend)
    return SwitchingCostReport(sets, xor_sizes(sets))


@dataclass
class DropReport:
    per_step: list[float | None]
    mean: float | None
    worst: float | None


def throughput_drop(result: EpsilonResult) -> DropReport:
    """Percent drop ``100 (1 - r_j)`` per active step, their mean, and the worst case."""
    per_step = [None if r is None else 100.0 * (1.0 - r) for r in result.ratios]
    active = [d for d in per_step if d is not None]
    if not active:
        return DropReport(per_step, None, None)
    return DropReport(per_step, float(np.mean(active)), 100.0 * (1.0 - result.r_min))


@dataclass
class CostBenefitRow:
    k: int
    T: int
    trial: int
    seed: int
    epsilon: float
    mean_drop_pct: float
    worst_drop_pct: float
    switching_cost_total: int
    runtime_ms: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon {self.epsilon} outside [0, 1]")
        for name in ("mean_drop_pct", "worst_drop_pct"):
            val = getattr(self, name)
            if not -1e-6 <= val <= 100.0 + 1e-6:
                raise ValueError(f"{name}={val} outside [0, 100]")
        if self.switching_cost_total < 0:
            raise ValueError("negative switching cost")

    def csv_fields(self) -> list[str]:
        return [str(self.k), str(self.T), str(self.trial), str(self.seed),
                f"{self.epsilon:.6f}", f"{self.mean_drop_pct:.4f}", f"{self.worst_drop_pct:.4f}",
                str(self.switching_cost_total),
                "" if self.runtime_ms is None else f"{self.runtime_ms:.1f}"]


@dataclass
class CellFailure:
    k: int
    T: int
    trial: int
    error: str


@dataclass
class ExperimentReport:
    rows: list[CostBenefitRow] = field(default_factory=list)
    failures: list[CellFailure] = field(default_factory=list)


def trial_seed(master_seed: int, k: int, trial: int) -> int:
    """64-bit seed for one (k, trial) instance family, shared by every horizon T."""
    state = np.random.SeedSequence(master_seed, spawn_key=(k, trial)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def sample_commodities(grid: ExperimentGrid, k: int, seed: int) -> list[Commodity]:
    """``k`` distinct ordered (source, sink) pairs drawn without replacement, with demands."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    N = grid.base.n * grid.base.m
    picks = rng.choice(N * (N - 1), size=k, replace=False)
    demands = grid.demand_for(rng, k)
    out = []
    for i, (idx, d) in enumerate(zip(picks, demands)):
        s, r = divmod(int(idx), N - 1)
        t = r if r < s else r + 1
        out.append(Commodity(i, s, t, d))
    return out


def run_experiment(grid: ExperimentGrid, timings: bool = False, backend: str = "auto",
                   progress=None) -> ExperimentReport:
    """Evaluate every (k, T, trial) cell of ``grid``.

    One network of the longest horizon is generated per (k, trial); shorter
    horizons use its prefixes, so per-step maxima and canonical optima are
    computed once. A failing family or cell is recorded and skipped.
    """
    params = JointModelParams(demand_mode=grid.demand_mode, routing_mode=grid.routing_mode,
                              mip_gap=SWEEP_MIP_GAP, backend=backend)
    report = ExperimentReport()
    T_values = sorted(set(grid.T_values))
    for k in sorted(set(grid.k_values)):
        for trial in range(grid.trials):
            seed = trial_seed(grid.master_seed, k, trial)
            try:
                start = time.perf_counter()
                network = generate_network(grid.base.with_(T=grid.T_max, seed=seed))
                commodities = sample_commodities(grid, k, seed)
                maxtp = step_maxima(network, commodities, backend)
                sets = step_edge_sets(network, commodities, maxtp, backend)
                shared = time.perf_counter() - start
            except Exception as exc:  # noqa: BLE001 - reported per cell
                for T in T_values:
                    report.failures.append(CellFailure(k, T, trial, f"{type(exc).__name__}: {exc}"))
                continue
            for T in T_values:
                try:
                    start = time.perf_counter()
                    res = solve_epsilon(network.prefix(T), commodities, params, maxtp[:T])
                    drop = throughput_drop(res)
                    elapsed = time.perf_counter() - start + shared * T / grid.T_max
                    row = CostBenefitRow(
                        k=k, T=T, trial=trial, seed=seed,
                        epsilon=res.epsilon,
                        mean_drop_pct=0.0 if drop.mean is None else drop.mean,
                        worst_drop_pct=0.0 if drop.worst is None else drop.worst,
                        switching_cost_total=sum(xor_sizes(sets[:T])),
                        runtime_ms=1000.0 * elapsed if timings else None,
                    )
                except Exception as exc:  # noqa: BLE001 - reported per cell
                    report.failures.append(CellFailure(k, T, trial, f"{type(exc).__name__}: {exc}"))
                    continue
                report.rows.append(row)
                if progress is not None:
                    progress(row)
    report.rows.sort(key=lambda r: (r.k, r.T, r.trial))
    return report


def rows_to_csv(rows: Sequence[CostBenefitRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def read_csv(text: str) -> list[CostBenefitRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        rows.append(CostBenefitRow(
            k=int(rec[0]), T=int(rec[1]), trial=int(rec[2]), seed=int(rec[3]),
            epsilon=float(rec[4]), mean_drop_pct=float(rec[5]), worst_drop_pct=float(rec[6]),
            switching_cost_total=int(rec[7]), runtime_ms=float(rec[8]) if rec[8] else None))
    return rows


@dataclass
class CellSummary:
    k: int
    T: int
    trials: int
    mean_drop_pct: float
    worst_drop_pct: float
    switching_cost: float
    epsilon: float


def summarize(rows: Sequence[CostBenefitRow]) -> list[CellSummary]:
    """Average each (k, T) cell over its trials, as in the cost-benefit table."""
    cells: dict[tuple[int, int], list[CostBenefitRow]] = {}
    for r in rows:
        cells.setdefault((r.k, r.T), []).append(r)
    out = []
    for (k, T), rs in sorted(cells.items()):
        out.append(CellSummary(
            k, T, len(rs),
            mean_drop_pct=float(np.mean([r.mean_drop_pct for r in rs])),
            worst_drop_pct=float(np.mean([r.worst_drop_pct for r in rs])),
            switching_cost=float(np.mean([r.switching_cost_total for r in rs])),
            epsilon=float(np.mean([r.epsilon for r in rs])),
        ))
    return out


def format_table(summary: Sequence[CellSummary]) -> str:
    """Plain-text k-by-T table with ``drop% / switching cost`` per cell."""
    ks = sorted({c.k for c in summary})
    Ts = sorted({c.T for c in summary})
    by = {(c.k, c.T): c for c in summary}
    lines = ["k \\ T " + "".join(f"{T:>18}" for T in Ts)]
    for k in ks:
        cells = []
        for T in Ts:
            c = by.get((k, T))
            cells.append(f"{'-':>18}" if c is None else f"{c.mean_drop_pct:7.2f}% / {c.switching_cost:7.1f}")
        lines.append(f"{k:<6}" + "".join(cells))
    return "\n".join(lines) + "\n"
