import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from tvmcf import analysis
from tvmcf.analysis import (
    CSV_HEADER, CostBenefitRow, read_csv, rows_to_csv, run_experiment, sample_commodities,
    summarize, switching_cost, throughput_drop, trial_seed, xor_sizes,
)
from tvmcf.config import DemandPolicy, ExperimentGrid
from tvmcf.constellation import ConstellationConfig, TimeVaryingNetwork
from tvmcf.joint import EpsilonResult
from tvmcf.lp import SolverResourceError
from tvmcf.mcf import Commodity

SMALL = ConstellationConfig(n=3, m=3, p=1, q=1, B_p=3, B_t=2)


def fake_result(ratios, maxtp=None):
    maxtp = maxtp or [1.0] * len(ratios)
    active = [r for r in ratios if r is not None]
    return EpsilonResult(min(active) if active else 1.0, maxtp, [], list(ratios),
                         min(active) if active else 1.0, [], [], [], [])


def test_xor_of_two_sets():
    a, b, c = (0, 1), (1, 2), (2, 3)
    assert xor_sizes([frozenset({a, b}), frozenset({b, c})]) == [2]


def test_identical_steps_cost_nothing():
    step = {(0, 1): 2, (1, 2): 1, (0, 2): 1, (2, 0): 3}
    network = TimeVaryingNetwork.from_steps(3, [step] * 4)
    rep = switching_cost(network, [Commodity(0, 0, 2, 3)])
    assert rep.xor_sizes == [0, 0, 0]
    assert rep.total == 0


def test_single_step_cost_zero():
    network = TimeVaryingNetwork.from_steps(2, [{(0, 1): 1}])
    assert switching_cost(network, [Commodity(0, 0, 1, 1)]).total == 0


def test_drop_arithmetic():
    drop = throughput_drop(fake_result([0.8, 0.6]))
    assert drop.per_step == pytest.approx([20.0, 40.0])
    assert drop.mean == pytest.approx(30.0)
    assert drop.worst == pytest.approx(40.0)


def test_full_ratio_no_drop():
    drop = throughput_drop(fake_result([1.0, 1.0, 1.0]))
    assert drop.per_step == [0.0, 0.0, 0.0] and drop.mean == 0.0 and drop.worst == 0.0


def test_inactive_steps_skipped():
    drop = throughput_drop(fake_result([None, 0.5], [0.0, 2.0]))
    assert drop.per_step == [None, 50.0]
    assert drop.mean == 50.0
    assert throughput_drop(fake_result([None], [0.0])).mean is None


@st.composite
def step_sequences(draw):
    n = draw(st.integers(2, 4))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=6))
    T = draw(st.integers(2, 4))
    steps = [{e: draw(st.integers(0, 3)) for e in edges} for _ in range(T)]
    s, t = draw(st.sampled_from(pairs))
    return TimeVaryingNetwork.from_steps(n, steps), [Commodity(0, s, t, draw(st.integers(1, 3)))]


@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(step_sequences())
def test_switching_cost_prefix_monotone(inst):
    network, comms = inst
    full = switching_cost(network, comms)
    for a, b, size in zip(full.edge_sets, full.edge_sets[1:], full.xor_sizes):
        assert size == len(a | b) - len(a & b) == len(a) + len(b) - 2 * len(a & b)
    assert full.total == sum(full.xor_sizes)
    shorter = switching_cost(network.prefix(network.T - 1), comms)
    assert full.total >= shorter.total


def test_commodity_sampling_distinct_and_seeded():
    grid = ExperimentGrid()
    seed = trial_seed(0, 9, 0)
    comms = sample_commodities(grid, 9, seed)
    pairs = [(c.source, c.sink) for c in comms]
    assert len(set(pairs)) == 9
    assert all(s != t for s, t in pairs)
    assert all(c.demand == 3 for c in comms)
    assert sample_commodities(grid, 9, seed) == comms
    uni = grid.with_(demand_policy=DemandPolicy("uniform", low=2, high=4))
    assert all(2 <= c.demand <= 4 for c in sample_commodities(uni, 9, seed))


def test_trial_seed_stable():
    assert trial_seed(0, 3, 0) == trial_seed(0, 3, 0)
    assert trial_seed(0, 3, 0) != trial_seed(0, 3, 1)
    assert 0 <= trial_seed(5, 9, 4) < 2**64


def test_one_cell_grid_one_row():
    grid = ExperimentGrid(base=SMALL, k_values=(3,), T_values=(4,), trials=1)
    report = run_experiment(grid)
    assert len(report.rows) == 1 and not report.failures
    row = report.rows[0]
    assert (row.k, row.T, row.trial) == (3, 4, 0)
    assert 0 <= row.mean_drop_pct <= row.worst_drop_pct + 1e-9 <= 100 + 1e-9


def test_rows_sorted_and_csv_deterministic():
    grid = ExperimentGrid(base=SMALL, k_values=(2, 1), T_values=(3, 2), trials=2)
    first = rows_to_csv(run_experiment(grid).rows)
    second = rows_to_csv(run_experiment(grid).rows)
    assert first == second
    rows = read_csv(first)
    assert [(r.k, r.T, r.trial) for r in rows] == sorted((r.k, r.T, r.trial) for r in rows)
    assert len(rows) == 8
    assert first.splitlines()[0] == ",".join(CSV_HEADER)
    assert "\r" not in first
    assert rows_to_csv(rows) == first


def test_runtime_column_blank_unless_requested():
    grid = ExperimentGrid(base=SMALL, k_values=(1,), T_values=(2,), trials=1)
    assert run_experiment(grid).rows[0].runtime_ms is None
    assert run_experiment(grid, timings=True).rows[0].runtime_ms >= 0


def test_cell_failures_do_not_abort(monkeypatch):
    real = analysis.solve_epsilon

    def flaky(network, *args, **kwargs):
        if network.T == 3:
            raise SolverResourceError("node limit 1 exceeded")
        return real(network, *args, **kwargs)

    monkeypatch.setattr(analysis, "solve_epsilon", flaky)
    grid = ExperimentGrid(base=SMALL, k_values=(1,), T_values=(2, 3), trials=2)
    report = run_experiment(grid)
    assert [(r.T, r.trial) for r in report.rows] == [(2, 0), (2, 1)]
    assert [(f.T, f.trial) for f in report.failures] == [(3, 0), (3, 1)]
    assert "node limit" in report.failures[0].error


def test_summary_averages_trials():
    rows = [CostBenefitRow(3, 4, t, 0, 1.0, d, d, c) for t, (d, c) in enumerate([(10, 4), (20, 8)])]
    (cell,) = summarize(rows)
    assert cell.mean_drop_pct == 15 and cell.switching_cost == 6 and cell.trials == 2


def test_row_validation():
    with pytest.raises(ValueError):
        CostBenefitRow(1, 1, 0, 0, 1.5, 0, 0, 0)
    with pytest.raises(ValueError):
        CostBenefitRow(1, 1, 0, 0, 1.0, 120, 0, 0)
