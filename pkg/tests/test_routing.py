import random

import pytest
from hypothesis import given, settings, strategies as st

from datagrid.errors import UnreachableError
from datagrid.instances import branch_topology, grid_topology, line_topology, random_topology
from datagrid.rng import KeyStream
from datagrid.routing import FlowState, ROUTE_LABEL, downhill, link_exposure, route_packet, simulate_flow
from datagrid.topology import GridNode, GridTopology, hop_distance_map


def check_flow(topo, src, dst, packets, seed):
    """Route ``packets`` packets and assert the routing invariants on each."""
    hops = hop_distance_map(topo, dst)
    choices = downhill(topo, hops, src)
    prev = None
    for path in simulate_flow(topo, FlowState(src, dst), packets, seed):
        assert path[0] == src and path[-1] == dst
        assert len(path) - 1 == hops[src]
        for a, b in zip(path, path[1:]):
            assert b in topo.neighbors(a)
        if prev is not None and len(choices) >= 2:
            assert path[1] != prev
        prev = path[1]


def test_line_is_deterministic():
    topo = line_topology(4)
    paths = list(simulate_flow(topo, FlowState("s", "d"), 5, 0))
    assert all(p == ["s", "v1", "v2", "v3", "d"] for p in paths)


def test_line_consumes_no_randomness():
    topo = line_topology(3)
    stream = KeyStream(5, ROUTE_LABEL)
    route_packet(topo, FlowState("s", "d"), stream)
    assert stream.read(8) == KeyStream(5, ROUTE_LABEL).read(8)


def test_diamond_alternates_exactly():
    exposure = link_exposure(branch_topology(2), FlowState("s", "d"), 10_000, 3)
    assert exposure[("b0_1", "s")] == 0.5
    assert exposure[("b1_1", "s")] == 0.5


def test_three_branches_spread():
    exposure = link_exposure(branch_topology(3), FlowState("s", "d"), 9_000, 4)
    for b in range(3):
        assert exposure[(f"b{b}_1", "s")] == pytest.approx(1 / 3, abs=0.03)


@pytest.mark.parametrize("topo,src,dst", [
    (line_topology(5), "s", "d"),
    (branch_topology(2), "s", "d"),
    (branch_topology(3, 3), "s", "d"),
    (grid_topology(4, 4), "r0c0", "r3c3"),
])
def test_invariants_on_named_shapes(topo, src, dst):
    check_flow(topo, src, dst, 2_000, 11)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_invariants_on_random_graphs(seed):
    rnd = random.Random(seed)
    topo = random_topology(rnd, clusters=3, nodes_per_cluster=3, extra_links=4)
    src, dst = rnd.sample(sorted(topo.nodes), 2)
    check_flow(topo, src, dst, 50, seed)


def test_same_seed_same_paths():
    topo = grid_topology(3, 3)
    a = list(simulate_flow(topo, FlowState("r0c0", "r2c2"), 40, 9))
    b = list(simulate_flow(topo, FlowState("r0c0", "r2c2"), 40, 9))
    c = list(simulate_flow(topo, FlowState("r0c0", "r2c2"), 40, 10))
    assert a == b
    assert a != c


def test_self_route_and_unreachable():
    topo = line_topology(2)
    path, flow = route_packet(topo, FlowState("s", "s"), KeyStream(0, ROUTE_LABEL))
    assert path == [] and flow.packets_sent == 1
    lonely = GridTopology(frozenset({"c"}), {"a": GridNode("a", "c", 0, 0, 1), "b": GridNode("b", "c", 0, 0, 1)},
                          {}, {}, {})
    with pytest.raises(UnreachableError):
        route_packet(lonely, FlowState("a", "b"), KeyStream(0, ROUTE_LABEL))


def test_flow_state_remembers_first_hop():
    topo = branch_topology(2)
    stream = KeyStream(1, ROUTE_LABEL)
    path, flow = route_packet(topo, FlowState("s", "d"), stream)
    assert flow.last_first_hop == path[1]
    again, _ = route_packet(topo, flow, stream)
    assert again[1] != path[1]
