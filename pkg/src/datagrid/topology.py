"""Clustered grid topology, its text format, and path distances.

Topology files are line oriented, ``#`` starts a comment::

    cluster <id>
    node <id> <cluster> <fail_p> <comp_p> <capacity_bytes>
    link <nodeA> <nodeB> <cost>
    client <cluster> <attach_node>
    demand <cluster> <object_id> <freq>

References may point forward; they are resolved after the whole file is
read and errors name the referencing line.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .errors import TopologyError, UnknownReferenceError, UnreachableError


@dataclass(frozen=True)
class GridNode:
    id: str
    cluster: str
    fail_p: float
    comp_p: float
    capacity: int

    def __post_init__(self):
        for name in ("fail_p", "comp_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise TopologyError(f"node {self.id}: {name}={p} outside [0, 1]")
        if self.capacity < 0:
            raise TopologyError(f"node {self.id}: negative capacity")


def link_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class GridTopology:
    clusters: frozenset[str]
    nodes: dict[str, GridNode]
    links: dict[tuple[str, str], float]
    demand: dict[tuple[str, str], float] = field(default_factory=dict)
    client_attach: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "clusters", frozenset(self.clusters))
        for node in self.nodes.values():
            if node.cluster not in self.clusters:
                raise TopologyError(f"node {node.id} in undeclared cluster {node.cluster}")
        for (a, b), cost in self.links.items():
            if a not in self.nodes or b not in self.nodes:
                raise TopologyError(f"link {a}-{b} references an unknown node")
            if a == b:
                raise TopologyError(f"self-loop on {a}")
            if (a, b) != link_key(a, b):
                raise TopologyError(f"link key {a}-{b} not in canonical order")
            if not (cost >= 0 and math.isfinite(cost)):
                raise TopologyError(f"link {a}-{b} has invalid cost {cost}")
        for cluster, node in self.client_attach.items():
            if cluster not in self.clusters:
                raise TopologyError(f"client attach for unknown cluster {cluster}")
            if node not in self.nodes or self.nodes[node].cluster != cluster:
                raise TopologyError(f"attach node {node} is not in cluster {cluster}")
        for (cluster, obj), freq in self.demand.items():
            if cluster not in self.clusters:
                raise TopologyError(f"demand for unknown cluster {cluster}")
            if cluster not in self.client_attach:
                raise TopologyError(f"cluster {cluster} has demand but no client attach node")
            if not (freq >= 0 and math.isfinite(freq)):
                raise TopologyError(f"demand {cluster}/{obj} has invalid frequency {freq}")

    @cached_property
    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        adj: dict[str, list[tuple[str, float]]] = {n: [] for n in self.nodes}
        for (a, b), cost in self.links.items():
            adj[a].append((b, cost))
            adj[b].append((a, cost))
        for lst in adj.values():
            lst.sort()
        return adj

    @cached_property
    def _dist_cache(self) -> dict[str, dict[str, float]]:
        return {}

    def require(self, node: str) -> GridNode:
        try:
            return self.nodes[node]
        except KeyError:
            raise UnknownReferenceError(f"unknown node {node!r}") from None

    def neighbors(self, node: str) -> list[str]:
        self.require(node)
        return [n for n, _ in self.adjacency[node]]

    def distances_from(self, src: str) -> dict[str, float]:
        """Dijkstra from ``src``; unreachable nodes are absent."""
        self.require(src)
        cached = self._dist_cache.get(src)
        if cached is not None:
            return cached
        dist = {src: 0.0}
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in self.adjacency[u]:
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        self._dist_cache[src] = dist
        return dist

    def cluster_nodes(self, cluster: str) -> list[str]:
        return sorted(n.id for n in self.nodes.values() if n.cluster == cluster)

    def attach(self, cluster: str) -> str:
        try:
            return self.client_attach[cluster]
        except KeyError:
            raise UnknownReferenceError(f"cluster {cluster!r} has no client attach node") from None

    def representative(self, cluster: str) -> str | None:
        """Attach node if declared, else the smallest node id, else None."""
        if cluster in self.client_attach:
            return self.client_attach[cluster]
        members = self.cluster_nodes(cluster)
        return members[0] if members else None

    def demand_for(self, obj: str) -> dict[str, float]:
        return {c: f for (c, o), f in sorted(self.demand.items()) if o == obj}

    def objects(self) -> list[str]:
        return sorted({o for _, o in self.demand})

    def without_nodes(self, removed) -> "GridTopology":
        """Same topology with ``removed`` nodes' links dropped (nodes stay)."""
        removed = set(removed)
        if not removed:
            return self
        links = {k: v for k, v in self.links.items() if k[0] not in removed and k[1] not in removed}
        return GridTopology(self.clusters, self.nodes, links, self.demand, self.client_attach)

    def with_demand(self, demand: dict[tuple[str, str], float]) -> "GridTopology":
        return GridTopology(self.clusters, self.nodes, self.links, dict(demand), self.client_attach)


def distance(topo: GridTopology, a: str, b: str) -> float:
    topo.require(b)
    d = topo.distances_from(a).get(b)
    if d is None:
        raise UnreachableError(f"{b} is unreachable from {a}")
    return d


def hop_distance_map(topo: GridTopology, dst: str) -> dict[str, int]:
    topo.require(dst)
    hops = {dst: 0}
    queue = deque([dst])
    while queue:
        u = queue.popleft()
        for v, _ in topo.adjacency[u]:
            if v not in hops:
                hops[v] = hops[u] + 1
                queue.append(v)
    return hops


def _number(tok: str, lineno: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise TopologyError(f"{what} {tok!r} is not a number", lineno) from None
    if not math.isfinite(v):
        raise TopologyError(f"{what} must be finite", lineno)
    return v


_ARITY = {"cluster": 1, "node": 5, "link": 3, "client": 2, "demand": 3}


def parse_topology(text: str) -> GridTopology:
    clusters: dict[str, int] = {}
    nodes: dict[str, tuple[GridNode, int]] = {}
    links: dict[tuple[str, str], tuple[float, int]] = {}
    clients: dict[str, tuple[str, int]] = {}
    demand: dict[tuple[str, str], tuple[float, int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()
        if directive not in _ARITY:
            raise TopologyError(f"unknown directive {directive!r}", lineno)
        if len(args) != _ARITY[directive]:
            raise TopologyError(f"{directive} takes {_ARITY[directive]} arguments, got {len(args)}", lineno)

        if directive == "cluster":
            if args[0] in clusters:
                raise TopologyError(f"duplicate cluster {args[0]}", lineno)
            clusters[args[0]] = lineno
        elif directive == "node":
            nid, cluster, fail, comp, cap = args
            if nid in nodes:
                raise TopologyError(f"duplicate node {nid}", lineno)
            capacity = _number(cap, lineno, "capacity")
            if capacity != int(capacity):
                raise TopologyError("capacity must be a whole number of bytes", lineno)
            try:
                node = GridNode(nid, cluster, _number(fail, lineno, "fail_p"),
                                _number(comp, lineno, "comp_p"), int(capacity))
            except TopologyError as exc:
                raise TopologyError(str(exc), lineno) from None
            nodes[nid] = (node, lineno)
        elif directive == "link":
            a, b, cost = args
            if a == b:
                raise TopologyError(f"self-loop on {a}", lineno)
            key = link_key(a, b)
            if key in links:
                raise TopologyError(f"duplicate link {a}-{b}", lineno)
            c = _number(cost, lineno, "cost")
            if c < 0:
                raise TopologyError("link cost must be nonnegative", lineno)
            links[key] = (c, lineno)
        elif directive == "client":
            cluster, node = args
            if cluster in clients:
                raise TopologyError(f"duplicate client attach for {cluster}", lineno)
            clients[cluster] = (node, lineno)
        else:
            cluster, obj, freq = args
            if (cluster, obj) in demand:
                raise TopologyError(f"duplicate demand {cluster} {obj}", lineno)
            f = _number(freq, lineno, "frequency")
            if f < 0:
                raise TopologyError("demand frequency must be nonnegative", lineno)
            demand[(cluster, obj)] = (f, lineno)

    for node, lineno in nodes.values():
        if node.cluster not in clusters:
            raise TopologyError(f"node {node.id} references undeclared cluster {node.cluster}", lineno)
    for (a, b), (_, lineno) in links.items():
        for end in (a, b):
            if end not in nodes:
                raise TopologyError(f"link references undeclared node {end}", lineno)
    for cluster, (node, lineno) in clients.items():
        if cluster not in clusters:
            raise TopologyError(f"client references undeclared cluster {cluster}", lineno)
        if node not in nodes:
            raise TopologyError(f"client references undeclared node {node}", lineno)
        if nodes[node][0].cluster != cluster:
            raise TopologyError(f"attach node {node} is not in cluster {cluster}", lineno)
    for (cluster, _), (_, lineno) in demand.items():
        if cluster not in clusters:
            raise TopologyError(f"demand references undeclared cluster {cluster}", lineno)
        if cluster not in clients:
            raise TopologyError(f"cluster {cluster} has demand but no client line", lineno)

    return GridTopology(
        clusters=frozenset(clusters),
        nodes={nid: node for nid, (node, _) in nodes.items()},
        links={k: c for k, (c, _) in links.items()},
        demand={k: f for k, (f, _) in demand.items()},
        client_attach={c: n for c, (n, _) in clients.items()},
    )


def render_topology(topo: GridTopology) -> str:
    out = [f"cluster {c}" for c in sorted(topo.clusters)]
    for nid in sorted(topo.nodes):
        n = topo.nodes[nid]
        out.append(f"node {n.id} {n.cluster} {n.fail_p!r} {n.comp_p!r} {n.capacity}")
    out += [f"link {a} {b} {c!r}" for (a, b), c in sorted(topo.links.items())]
    out += [f"client {c} {n}" for c, n in sorted(topo.client_attach.items())]
    out += [f"demand {c} {o} {f!r}" for (c, o), f in sorted(topo.demand.items())]
    return "\n".join(out) + "\n"


def load_topology(path) -> GridTopology:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read())
