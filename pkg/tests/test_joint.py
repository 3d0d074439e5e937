import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from tvmcf.constellation import TimeVaryingNetwork, common_support
from tvmcf.joint import (
    AGGREGATE, JointModelParams, build_joint, evaluate_support, solve_epsilon, step_maxima,
)
from tvmcf.lp import ModelError
from tvmcf.mcf import SINGLE_PATH, Commodity, canonical_optimum

from oracles import joint_epsilon_enum

S, A, B, T = 0, 1, 2, 3
# Oracle values from exhaustive support enumeration (tests/oracles.py), frozen.
SWAPPED_DIAMOND_EPSILON = 1.0
BROKEN_DIAMOND_EPSILON = 1.0 / 3.0


def net(steps, n=None):
    if n is None:
        n = 1 + max(u for s in steps for e in s for u in e)
    return TimeVaryingNetwork.from_steps(n, steps)


@st.composite
def networks(draw, max_nodes=5, max_T=3, max_k=1):
    n = draw(st.integers(2, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=7))
    T = draw(st.integers(1, max_T))
    steps = [{e: draw(st.integers(0, 3)) for e in edges} for _ in range(T)]
    k = draw(st.integers(1, max_k))
    comms = []
    for i in range(k):
        s, t = draw(st.sampled_from(pairs))
        comms.append(Commodity(i, s, t, draw(st.integers(1, 4))))
    return net(steps, n), steps, comms


def check_result(res, network, params=JointModelParams()):
    eps = params.flow_epsilon
    assert 0.0 <= res.epsilon <= 1.0
    for j in res.active_steps:
        assert res.achieved[j] >= res.epsilon * res.maxtp[j] - 1e-8
        assert res.achieved[j] <= res.maxtp[j] + 1e-8
    if res.active_steps:
        assert res.r_min >= res.epsilon - 1e-8
    for i in range(len(res.supports)):
        first = res.support_at(0, i, eps / 2)
        for j in range(1, network.T):
            assert res.support_at(j, i, eps / 2) == first


# ---------------------------------------------------------------- examples

def test_single_step_reaches_one():
    network = net([{(S, A): 2, (A, T): 1, (S, T): 1}])
    res = solve_epsilon(network, [Commodity(0, S, T, 3)])
    assert abs(res.epsilon - 1.0) <= 1e-9
    check_result(res, network)


def test_identical_copies_reach_one():
    step = {(S, A): 2, (S, B): 1, (A, T): 1, (B, T): 2, (A, B): 1}
    network = net([step] * 3)
    res = solve_epsilon(network, [Commodity(0, S, T, 4), Commodity(1, A, T, 1)])
    assert res.epsilon == pytest.approx(1.0, abs=1e-9)
    assert all(r == pytest.approx(1.0, abs=1e-9) for r in res.ratios)


def test_swapped_diamond_matches_oracle():
    s1 = {(S, A): 2, (S, B): 2, (A, T): 1, (B, T): 2}
    s2 = {(S, A): 2, (S, B): 2, (A, T): 2, (B, T): 1}
    res = solve_epsilon(net([s1, s2]), [Commodity(0, S, T, 3)])
    assert res.epsilon == pytest.approx(SWAPPED_DIAMOND_EPSILON, abs=1e-6)


def test_broken_diamond_matches_oracle():
    s1 = {(S, A): 2, (S, B): 2, (A, T): 1, (B, T): 2, (A, B): 1}
    s2 = {(S, A): 2, (S, B): 1, (A, T): 1, (B, T): 0, (A, B): 2}
    network = net([s1, s2])
    res = solve_epsilon(network, [Commodity(0, S, T, 3)])
    assert res.epsilon == pytest.approx(BROKEN_DIAMOND_EPSILON, abs=1e-6)
    assert res.maxtp == pytest.approx([3.0, 1.0])
    check_result(res, network)


def test_no_common_support_gives_zero():
    network = net([{(S, T): 1, (T, S): 0}, {(S, T): 0, (T, S): 1}, {(S, T): 1, (T, S): 0}])
    res = solve_epsilon(network, [Commodity(0, S, T, 1)])
    assert res.epsilon == pytest.approx(0.0, abs=1e-9)
    assert res.ratios[1] is None
    assert res.active_steps == [0, 2]


def test_all_disconnected_defines_one():
    network = net([{(T, S): 1}, {(T, S): 2}])
    res = solve_epsilon(network, [Commodity(0, S, T, 1)])
    assert res.epsilon == 1.0
    assert res.achieved == [0.0, 0.0]
    assert res.r_min == 1.0


def test_maxtp_length_checked():
    network = net([{(S, T): 1}])
    with pytest.raises(ModelError):
        build_joint(network, [Commodity(0, S, T, 1)], [1.0, 1.0])


def test_big_m_floor_enforced():
    with pytest.raises(ModelError):
        JointModelParams(big_M=2.0).resolve_big_m([Commodity(0, 0, 1, 3)])
    with pytest.raises(ModelError):
        JointModelParams(flow_epsilon=0.5)


def test_aggregate_mode_caps_the_period():
    network = net([{(S, T): 2}] * 2)
    res = solve_epsilon(network, [Commodity(0, S, T, 2)], JointModelParams(demand_mode=AGGREGATE))
    assert res.epsilon == pytest.approx(0.5, abs=1e-9)
    assert any("aggregate" in n for n in res.notes)


def test_single_path_mode():
    s1 = {(S, A): 1, (A, T): 1, (S, B): 1, (B, T): 1}
    network = net([s1, s1])
    res = solve_epsilon(network, [Commodity(0, S, T, 2)], JointModelParams(routing_mode=SINGLE_PATH))
    assert res.epsilon == pytest.approx(0.5, abs=1e-9)


# ---------------------------------------------------------------- properties

@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(networks())
def test_matches_support_enumeration(inst):
    network, steps, comms = inst
    c = comms[0]
    oracle = joint_epsilon_enum(steps, c.source, c.sink, c.demand)
    assert solve_epsilon(network, comms).epsilon == pytest.approx(oracle, abs=1e-6)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(networks(max_k=2))
def test_result_invariants(inst):
    network, _, comms = inst
    check_result(solve_epsilon(network, comms), network)


@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(networks(max_T=4, max_k=2))
def test_appending_steps_never_helps(inst):
    network, _, comms = inst
    maxtp = step_maxima(network, comms)
    prev = None
    for T in range(1, network.T + 1):
        eps = solve_epsilon(network.prefix(T), comms, maxtp=maxtp[:T]).epsilon
        if prev is not None:
            assert eps <= prev + 1e-9
        prev = eps


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(networks(max_k=2))
def test_doubling_big_m(inst):
    network, _, comms = inst
    base = JointModelParams()
    doubled = JointModelParams(big_M=2 * base.resolve_big_m(comms))
    assert solve_epsilon(network, comms, doubled).epsilon == pytest.approx(
        solve_epsilon(network, comms, base).epsilon, abs=1e-6)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(networks(max_k=2))
def test_dominates_reused_step_optimum(inst):
    network, _, comms = inst
    maxtp = step_maxima(network, comms)
    best = solve_epsilon(network, comms, maxtp=maxtp).epsilon
    allowed = common_support(network)
    for j in range(network.T):
        sol = canonical_optimum(network.step(j), comms)
        supports = [sol.support(c.index) & allowed for c in comms]
        val = evaluate_support(network, comms, supports, maxtp)
        if val is not None:
            assert best >= val - 1e-9
    assert best >= (evaluate_support(network, comms, [set() for _ in comms], maxtp) or 0.0) - 1e-9
