import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from datagrid.allocation import AllocationPlan, CostModel, plan_cost
from datagrid.analysis import (ThreatModel, availability_exact, available_after, breach_prob_exact,
                               exact_report, monte_carlo, trial_uniforms)
from datagrid.errors import InstanceTooLargeError, ParameterError
from datagrid.instances import random_plan, random_topology
from datagrid.share import ShareParams

from oracles import enum_threshold_prob


def threat(nodes, comp, fail, k):
    return ThreatModel({n: comp for n in nodes}, {n: fail for n in nodes}, k)


def three_on_three():
    return AllocationPlan("o", ShareParams(2, 3), {1: {"a"}, 2: {"b"}, 3: {"c"}})


def test_two_of_three_at_half():
    t = threat("abc", 0.5, 0.5, 2)
    assert breach_prob_exact(three_on_three(), t) == pytest.approx(0.5)
    assert availability_exact(three_on_three(), t) == pytest.approx(0.5)


def test_one_of_two_replicas():
    plan = AllocationPlan("o", ShareParams(1, 1), {1: {"a", "b"}})
    q = 0.3
    t = threat("ab", q, q, 1)
    assert breach_prob_exact(plan, t) == pytest.approx(1 - (1 - q) ** 2)
    assert availability_exact(plan, t) == pytest.approx(1 - q * q)


def test_certain_events():
    t = threat("abc", 0.0, 0.0, 2)
    assert breach_prob_exact(three_on_three(), t) == 0.0
    assert availability_exact(three_on_three(), t) == 1.0
    t = threat("abc", 1.0, 1.0, 2)
    assert breach_prob_exact(three_on_three(), t) == 1.0
    assert availability_exact(three_on_three(), t) == 0.0


def test_colocated_shares_count_once_per_index():
    plan = AllocationPlan("o", ShareParams(2, 2), {1: {"a"}, 2: {"a"}})
    t = threat("a", 0.25, 0.25, 2)
    assert breach_prob_exact(plan, t) == pytest.approx(0.25)
    assert availability_exact(plan, t) == pytest.approx(0.75)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_exact_matches_subset_loop(seed):
    rnd = random.Random(seed)
    topo = random_topology(rnd, clusters=2, nodes_per_cluster=rnd.randint(1, 3))
    n = rnd.randint(1, 4)
    plan = random_plan(rnd, topo, ShareParams(rnd.randint(1, n), n))
    t = ThreatModel.from_topology(topo, plan.params.k)
    used = plan.nodes()
    comp = {v: t.comp_p[v] for v in used}
    alive = {v: 1 - t.fail_p[v] for v in used}
    assert breach_prob_exact(plan, t) == pytest.approx(enum_threshold_prob(comp, plan.placements, t.k))
    assert availability_exact(plan, t) == pytest.approx(enum_threshold_prob(alive, plan.placements, t.k))


def test_exact_refuses_large_plans():
    nodes = [f"n{i}" for i in range(21)]
    plan = AllocationPlan("o", ShareParams(1, 1), {1: set(nodes)})
    with pytest.raises(InstanceTooLargeError):
        breach_prob_exact(plan, threat(nodes, 0.1, 0.1, 1))


def test_monte_carlo_handles_large_plans():
    nodes = [f"n{i}" for i in range(30)]
    plan = AllocationPlan("o", ShareParams(1, 1), {1: set(nodes)})
    rep = monte_carlo(plan, threat(nodes, 0.0, 1.0, 1), 1000, 0)
    assert (rep.breach_prob, rep.availability) == (0.0, 0.0)


def test_monte_carlo_near_exact():
    plan = three_on_three()
    t = threat("abc", 0.3, 0.2, 2)
    rep = monte_carlo(plan, t, 100_000, 5)
    exact = exact_report(plan, t)
    for got, want in ((rep.breach_prob, exact.breach_prob), (rep.availability, exact.availability)):
        se = math.sqrt(want * (1 - want) / rep.trials)
        assert abs(got - want) <= 3 * se


def test_monte_carlo_is_reproducible_and_chunk_independent():
    plan = three_on_three()
    t = threat("abc", 0.4, 0.4, 2)
    a = monte_carlo(plan, t, 5000, 8)
    b = monte_carlo(plan, t, 5000, 8, chunk=777)
    assert a == b
    assert monte_carlo(plan, t, 5000, 9) != a


def test_trial_uniforms_are_addressable():
    whole = trial_uniforms(3, 5, 0, 10)
    assert np.array_equal(trial_uniforms(3, 5, 6, 4), whole[6:])
    assert whole.shape == (10, 2, 5)
    assert ((whole >= 0) & (whole < 1)).all()


def test_bad_inputs():
    with pytest.raises(ParameterError):
        ThreatModel({"a": 1.5}, {"a": 0.0}, 1)
    with pytest.raises(ParameterError):
        monte_carlo(three_on_three(), threat("abc", 0.1, 0.1, 2), 0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_extra_replica_tradeoff(seed):
    rnd = random.Random(seed)
    topo = random_topology(rnd, clusters=2, nodes_per_cluster=3)
    n = rnd.randint(1, 3)
    plan = random_plan(rnd, topo, ShareParams(rnd.randint(1, n), n))
    t = ThreatModel.from_topology(topo, plan.params.k)
    more = plan.with_replica(rnd.randint(1, n), rnd.choice(sorted(topo.nodes)))
    assert breach_prob_exact(more, t) >= breach_prob_exact(plan, t) - 1e-12
    assert availability_exact(more, t) >= availability_exact(plan, t) - 1e-12
    model = CostModel()
    assert plan_cost(topo, more, model).access <= plan_cost(topo, plan, model).access + 1e-9


def test_raising_k_lowers_breach():
    plan = AllocationPlan("o", ShareParams(1, 3), {1: {"a"}, 2: {"b"}, 3: {"c"}})
    t = threat("abc", 0.3, 0.3, 1)
    probs = [breach_prob_exact(plan, t.with_k(k)) for k in (1, 2, 3)]
    assert probs == sorted(probs, reverse=True)


def test_single_failure_survivable_for_2_of_3():
    plan = three_on_three()
    for down in itertools.chain([()], ((v,) for v in "abc")):
        assert available_after(plan, 2, down)
    assert not available_after(plan, 2, "ab")
