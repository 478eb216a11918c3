"""Seeded random grid instances for tests and experiment scripts."""

from __future__ import annotations

import random

from .allocation import AllocationPlan
from .share import ShareParams
from .topology import GridNode, GridTopology, link_key


def random_topology(rnd: random.Random, clusters: int = 3, nodes_per_cluster: int = 2,
                    extra_links: int = 2, unit_links: bool = False, objects=("obj",),
                    capacity: int = 1 << 20, max_prob: float = 0.5) -> GridTopology:
    """Connected clustered grid: a chain inside each cluster, border links between clusters.

    Every cluster gets a client attach node and a random demand for each
    object in ``objects`` (some clusters may get zero demand).
    """
    cluster_ids = [f"c{i}" for i in range(clusters)]
    nodes, links = {}, {}
    members = {}

    def cost(lo, hi):
        return 1.0 if unit_links else float(rnd.randint(lo, hi))

    for c in cluster_ids:
        ids = [f"{c}n{j}" for j in range(nodes_per_cluster)]
        members[c] = ids
        for nid in ids:
            nodes[nid] = GridNode(nid, c, round(rnd.uniform(0, max_prob), 3),
                                  round(rnd.uniform(0, max_prob), 3), capacity)
        for a, b in zip(ids, ids[1:]):
            links[link_key(a, b)] = cost(1, 3)
    for c1, c2 in zip(cluster_ids, cluster_ids[1:]):
        links[link_key(rnd.choice(members[c1]), rnd.choice(members[c2]))] = cost(3, 9)
    all_nodes = sorted(nodes)
    for _ in range(extra_links):
        a, b = rnd.sample(all_nodes, 2) if len(all_nodes) > 1 else (None, None)
        if a is not None:
            links.setdefault(link_key(a, b), cost(1, 9))
    attach = {c: rnd.choice(members[c]) for c in cluster_ids}
    demand = {(c, o): float(rnd.choice([0, 1, 2, 3, 5])) for c in cluster_ids for o in objects}
    return GridTopology(frozenset(cluster_ids), nodes, links, demand, attach)


def random_plan(rnd: random.Random, topo: GridTopology, params: ShareParams, max_replicas: int = 2,
                obj: str = "obj") -> AllocationPlan:
    """Every share index gets 1..max_replicas replicas on random nodes."""
    nodes = sorted(topo.nodes)
    placements = {s: set(rnd.sample(nodes, rnd.randint(1, min(max_replicas, len(nodes)))))
                  for s in range(1, params.n + 1)}
    return AllocationPlan(obj, params, placements)


def small_allocation_instance(seed: int):
    """An instance small enough for the exhaustive optimum: (topology, params, model, budget)."""
    from .allocation import CostModel

    rnd = random.Random(seed)
    clusters = rnd.randint(1, 3)
    topo = random_topology(rnd, clusters=clusters, nodes_per_cluster=rnd.randint(1, 6 // clusters))
    n = rnd.randint(1, 3)
    params = ShareParams(rnd.randint(1, n), n)
    model = CostModel(rnd.choice([0.0, 0.1, 1.0, 3.0]), 1)
    return topo, params, model, rnd.randint(params.k, 5)


def _single_cluster(ids, links, capacity=1 << 20) -> GridTopology:
    nodes = {i: GridNode(i, "c", 0.0, 0.0, capacity) for i in ids}
    return GridTopology(frozenset({"c"}), nodes, {link_key(a, b): 1.0 for a, b in links}, {}, {"c": ids[0]})


def line_topology(length: int) -> GridTopology:
    """``s - v1 - ... - d`` with ``length`` links."""
    ids = ["s"] + [f"v{i}" for i in range(1, length)] + ["d"]
    return _single_cluster(ids, zip(ids, ids[1:]))


def branch_topology(branches: int, length: int = 2) -> GridTopology:
    """``branches`` disjoint s-d paths of ``length`` links each (2 branches of 2 = diamond)."""
    ids, links = ["s", "d"], []
    for b in range(branches):
        mids = [f"b{b}_{j}" for j in range(1, length)]
        ids += mids
        chain = ["s"] + mids + ["d"]
        links += list(zip(chain, chain[1:]))
    return _single_cluster(ids, links)


def grid_topology(rows: int, cols: int) -> GridTopology:
    """Unit-cost mesh; nodes ``r{i}c{j}``, source at the top-left corner."""
    ids = [f"r{i}c{j}" for i in range(rows) for j in range(cols)]
    links = [(f"r{i}c{j}", f"r{i}c{j + 1}") for i in range(rows) for j in range(cols - 1)]
    links += [(f"r{i}c{j}", f"r{i + 1}c{j}") for i in range(rows - 1) for j in range(cols)]
    return _single_cluster(ids, links)


def ring_topology(rnd: random.Random, clusters: int = 3, nodes_per_cluster: int = 2,
                  chords: int = 2, max_prob: float = 0.5) -> GridTopology:
    """Clusters laid out around one cycle plus random chords.

    A cycle stays connected after any single node failure, which the
    survivability checks rely on.
    """
    cluster_ids = [f"c{i}" for i in range(clusters)]
    order = [(c, f"{c}n{j}") for c in cluster_ids for j in range(nodes_per_cluster)]
    nodes = {nid: GridNode(nid, c, round(rnd.uniform(0, max_prob), 3), round(rnd.uniform(0, max_prob), 3), 1 << 20)
             for c, nid in order}
    ids = [nid for _, nid in order]
    links = {}
    if len(ids) > 1:
        for a, b in zip(ids, ids[1:] + ids[:1]):
            if a != b:
                links[link_key(a, b)] = float(rnd.randint(1, 9))
        for _ in range(chords):
            a, b = rnd.sample(ids, 2)
            links.setdefault(link_key(a, b), float(rnd.randint(1, 9)))
    attach = {c: f"{c}n{rnd.randrange(nodes_per_cluster)}" for c in cluster_ids}
    demand = {(c, "obj"): float(rnd.choice([0, 1, 2, 3, 5])) for c in cluster_ids}
    return GridTopology(frozenset(cluster_ids), nodes, links, demand, attach)
