"""Share-replica placement on a clustered grid.

Cost of a plan for one object::

    access  = sum_c demand(c) * (sum of the k smallest per-share distances
              from c's attach node to that share's nearest reachable replica)
    storage = alpha * share_size * replica_count
    total   = access + storage

Placement is solved in two levels: ``inter_cluster_allocate`` decides how
many replicas of each share each cluster gets (clusters stand in for their
representative node), then ``intra_cluster_allocate`` maps them onto
concrete nodes.  ``optimal_allocate`` is the exhaustive oracle used to
check the heuristic on small instances.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .errors import (FormatError, InfeasibleError, InstanceTooLargeError, ParameterError,
                     UnknownReferenceError)
from .share import ShareParams
from .topology import GridTopology

ORACLE_MAX_NODES = 8
ORACLE_MAX_SHARES = 3
ORACLE_MAX_BUDGET = 6
ORACLE_MAX_COMBINATIONS = 1 << 20
_EPS = 1e-12


@dataclass(frozen=True)
class CostModel:
    alpha: float = 0.0
    share_size: int = 1

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be a finite nonnegative number, got {self.alpha}")
        if self.share_size <= 0:
            raise ParameterError("share_size must be positive")

    def units(self, capacity: int) -> int:
        """How many share replicas fit in ``capacity`` bytes."""
        return capacity // self.share_size


@dataclass(frozen=True)
class CostBreakdown:
    access: float
    storage: float

    @property
    def total(self) -> float:
        return self.access + self.storage


class ScenarioClass(enum.Enum):
    FULLY_REPLICATED = "fully_replicated"
    PARTIALLY_REPLICATED = "partially_replicated"
    UNREPLICATED = "unreplicated"


@dataclass(frozen=True)
class AllocationPlan:
    object_id: str
    params: ShareParams
    placements: dict[int, frozenset[str]]

    def __post_init__(self):
        clean = {}
        for idx, nodes in self.placements.items():
            if not 1 <= idx <= self.params.n:
                raise ParameterError(f"share index {idx} outside [1, {self.params.n}]")
            clean[int(idx)] = frozenset(nodes)
        object.__setattr__(self, "placements", dict(sorted(clean.items())))

    @property
    def replica_count(self) -> int:
        return sum(len(v) for v in self.placements.values())

    @property
    def placed_shares(self) -> list[int]:
        return [i for i, v in self.placements.items() if v]

    def nodes(self) -> list[str]:
        return sorted(set().union(*self.placements.values())) if self.placements else []

    def shares_on(self, node: str) -> list[int]:
        return [i for i, v in self.placements.items() if node in v]

    def with_replica(self, index: int, node: str) -> "AllocationPlan":
        placements = dict(self.placements)
        placements[index] = placements.get(index, frozenset()) | {node}
        return AllocationPlan(self.object_id, self.params, placements)

    def with_params(self, params: ShareParams) -> "AllocationPlan":
        return AllocationPlan(self.object_id, params, self.placements)

    def to_json(self, share_size: int | None = None) -> str:
        doc = {"object": self.object_id, "k": self.params.k, "n": self.params.n}
        if share_size is not None:
            doc["share_size"] = share_size
        doc["shares"] = [{"index": i, "nodes": sorted(v)} for i, v in self.placements.items()]
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AllocationPlan":
        try:
            doc = json.loads(text)
            placements = {int(r["index"]): frozenset(r["nodes"]) for r in doc["shares"]}
            return cls(str(doc["object"]), ShareParams(int(doc["k"]), int(doc["n"])), placements)
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError("plan", str(exc)) from None


def nearest_k(dist: Mapping[str, float], placements: Mapping[int, Iterable[str]], k: int) -> float | None:
    """Sum of the k smallest per-share nearest-replica distances, or None."""
    best = []
    for nodes in placements.values():
        ds = [dist[n] for n in nodes if n in dist]
        if ds:
            best.append(min(ds))
    if len(best) < k:
        return None
    best.sort()
    return sum(best[:k])


def _access(topo: GridTopology, obj: str, placements: Mapping[int, Iterable[str]], k: int) -> float:
    total = 0.0
    for cluster, freq in topo.demand_for(obj).items():
        if freq == 0:
            continue
        cost = nearest_k(topo.distances_from(topo.attach(cluster)), placements, k)
        if cost is None:
            raise InfeasibleError(f"cluster {cluster} cannot reach {k} distinct shares")
        total += freq * cost
    return total


def plan_cost(topo: GridTopology, plan: AllocationPlan, model: CostModel) -> CostBreakdown:
    for node in plan.nodes():
        topo.require(node)
    access = _access(topo, plan.object_id, plan.placements, plan.params.k)
    return CostBreakdown(access, model.alpha * model.share_size * plan.replica_count)


def check_plan(topo: GridTopology, plan: AllocationPlan, model: CostModel, limit: int | None = None) -> None:
    """Raise InfeasibleError if ``plan`` breaks capacity or the per-node share limit."""
    for node in plan.nodes():
        held = plan.shares_on(node)
        cap = topo.require(node).capacity
        if len(held) * model.share_size > cap:
            raise InfeasibleError(f"node {node} holds {len(held)} replicas but has capacity {cap}")
        if limit is not None and len(held) > limit:
            raise InfeasibleError(f"node {node} holds {len(held)} distinct shares, limit {limit}")


def classify_scenario(topo: GridTopology, plan: AllocationPlan) -> ScenarioClass:
    """Full replication wins over 'unreplicated' when both hold (one cluster)."""
    if not plan.placed_shares:
        raise ParameterError("cannot classify an empty plan")
    clusters = {c for c in topo.clusters if topo.cluster_nodes(c)}
    per_share = {i: {topo.require(n).cluster for n in plan.placements.get(i, ())}
                 for i in range(1, plan.params.n + 1)}
    if all(cs >= clusters for cs in per_share.values()):
        return ScenarioClass.FULLY_REPLICATED
    if all(len(v) <= 1 for v in plan.placements.values()):
        return ScenarioClass.UNREPLICATED
    return ScenarioClass.PARTIALLY_REPLICATED


def _cluster_slots(topo: GridTopology, model: CostModel, limit: int) -> dict[str, int]:
    return {c: sum(min(limit, model.units(topo.nodes[n].capacity)) for n in topo.cluster_nodes(c))
            for c in sorted(topo.clusters)}


def inter_cluster_cost(topo: GridTopology, obj: str, params: ShareParams, model: CostModel,
                       assignment: Mapping[int, Iterable[str]]) -> CostBreakdown:
    """Plan cost with every replica sitting at its cluster's representative node."""
    located = {s: [topo.representative(c) for c in cs] for s, cs in assignment.items()}
    count = sum(len(v) for v in located.values())
    return CostBreakdown(_access(topo, obj, located, params.k), model.alpha * model.share_size * count)


def inter_cluster_allocate(topo: GridTopology, obj: str, params: ShareParams, model: CostModel,
                           budget: int, limit: int = 1) -> dict[int, list[str]]:
    """Greedy marginal-gain assignment of share replicas to clusters."""
    k, n = params.k, params.n
    if budget < k:
        raise InfeasibleError(f"budget {budget} is below the threshold k={k}")
    slots = _cluster_slots(topo, model, limit)
    demand = {c: f for c, f in topo.demand_for(obj).items() if f > 0}
    attach_dist = {c: topo.distances_from(topo.attach(c)) for c in demand}

    start, start_score = None, math.inf
    for c in sorted(topo.clusters):
        rep = topo.representative(c)
        if rep is None or slots[c] < k:
            continue
        if any(rep not in attach_dist[d] for d in demand):
            continue
        score = sum(f * attach_dist[d][rep] for d, f in demand.items())
        if score < start_score:
            start, start_score = c, score
    if start is None:
        raise InfeasibleError("no single cluster can host k shares reachable from every demanding cluster")

    assignment: dict[int, list[str]] = {s: [] for s in range(1, n + 1)}
    for s in range(1, k + 1):
        assignment[s].append(start)
    used = Counter({start: k})
    cost = inter_cluster_cost(topo, obj, params, model, assignment).total
    count = k
    while count < budget:
        best = None
        best_gain = _EPS
        for s in range(1, n + 1):
            for c in sorted(topo.clusters):
                if c in assignment[s] or used[c] >= slots[c]:
                    continue
                trial = dict(assignment)
                trial[s] = assignment[s] + [c]
                gain = cost - inter_cluster_cost(topo, obj, params, model, trial).total
                if gain > best_gain:
                    best, best_gain = (s, c), gain
        if best is None:
            break
        s, c = best
        assignment[s] = sorted(assignment[s] + [c])
        used[c] += 1
        count += 1
        cost = inter_cluster_cost(topo, obj, params, model, assignment).total
    return {s: cs for s, cs in assignment.items() if cs}


def intra_cluster_allocate(topo: GridTopology, cluster: str, shares_to_place: Iterable[int],
                           model: CostModel, limit: int = 1) -> dict[int, frozenset[str]]:
    """Place a multiset of share replicas on ``cluster``'s nodes.

    Nodes are filled nearest-first (ties by id), each with at most
    ``limit`` distinct shares; the shares with the most copies still
    unplaced go first so later nodes can take the remaining copies.
    """
    if limit < 1:
        raise ParameterError("limit must be at least 1")
    if cluster not in topo.clusters:
        raise UnknownReferenceError(f"unknown cluster {cluster!r}")
    remaining = Counter(shares_to_place)
    if not remaining:
        return {}
    rep = topo.representative(cluster)
    if rep is None:
        raise InfeasibleError(f"cluster {cluster} has no nodes")
    dist = topo.distances_from(rep)
    order = sorted((dist[n], n) for n in topo.cluster_nodes(cluster) if n in dist)
    placed: dict[int, set[str]] = {}
    for _, node in order:
        room = min(limit, model.units(topo.nodes[node].capacity))
        picks = sorted((s for s in remaining if remaining[s] > 0), key=lambda s: (-remaining[s], s))[:room]
        for s in picks:
            placed.setdefault(s, set()).add(node)
            remaining[s] -= 1
        if not +remaining:
            break
    left = +remaining
    if left:
        raise InfeasibleError(f"cluster {cluster} cannot host replicas {dict(sorted(left.items()))}")
    return {s: frozenset(v) for s, v in sorted(placed.items())}


def plan_allocation(topo: GridTopology, obj: str, params: ShareParams, model: CostModel,
                    budget: int, limit: int = 1) -> AllocationPlan:
    """Two-level placement: inter-cluster greedy, then intra-cluster per cluster."""
    assignment = inter_cluster_allocate(topo, obj, params, model, budget, limit)
    per_cluster: dict[str, list[int]] = {}
    for s, clusters in assignment.items():
        for c in clusters:
            per_cluster.setdefault(c, []).append(s)
    placements: dict[int, set[str]] = {}
    for c in sorted(per_cluster):
        for s, nodes in intra_cluster_allocate(topo, c, per_cluster[c], model, limit).items():
            placements.setdefault(s, set()).update(nodes)
    return AllocationPlan(obj, params, placements)


def replan(topo: GridTopology, obj: str, params: ShareParams, model: CostModel, budget: int,
           demand: Mapping[tuple[str, str], float], limit: int = 1) -> AllocationPlan:
    """Re-run placement after the demand pattern changed."""
    return plan_allocation(topo.with_demand(dict(demand)), obj, params, model, budget, limit)


def _subset_min_table(dist: Mapping[str, float], nodes: list[str]) -> np.ndarray:
    size = 1 << len(nodes)
    table = np.full(size, np.inf)
    for m in range(1, size):
        low = (m & -m).bit_length() - 1
        table[m] = min(table[m & (m - 1)], dist.get(nodes[low], np.inf))
    return table


def optimal_allocate(topo: GridTopology, obj: str, params: ShareParams, model: CostModel,
                     budget: int, limit: int = 1) -> AllocationPlan:
    """Exhaustive minimum-cost placement for small instances.

    Feasible plans store at least k distinct shares, stay within the
    budget, capacity and per-node limit, and are retrievable from every
    demanding cluster.  Ties go to fewer replicas, then to the first plan
    in enumeration order.
    """
    k, n = params.k, params.n
    nodes = sorted(topo.nodes)
    if len(nodes) > ORACLE_MAX_NODES or n > ORACLE_MAX_SHARES or budget > ORACLE_MAX_BUDGET:
        raise InstanceTooLargeError(
            f"oracle handles <= {ORACLE_MAX_NODES} nodes, n <= {ORACLE_MAX_SHARES}, "
            f"budget <= {ORACLE_MAX_BUDGET}; got {len(nodes)}, {n}, {budget}")
    if budget < k:
        raise InfeasibleError(f"budget {budget} is below the threshold k={k}")

    all_masks = sorted(range(1 << n), key=lambda m: (bin(m).count("1"), m))
    options = []
    for v in nodes:
        room = min(limit, model.units(topo.nodes[v].capacity))
        options.append([m for m in all_masks if bin(m).count("1") <= room])
    if math.prod(len(o) for o in options) > ORACLE_MAX_COMBINATIONS:
        raise InstanceTooLargeError("too many placements to enumerate")

    combos = np.array(list(itertools.product(*options)), dtype=np.int64).reshape(-1, len(nodes))
    popcount = np.array([bin(m).count("1") for m in range(1 << n)])
    counts = popcount[combos].sum(axis=1)
    nodesets = np.zeros((len(combos), n), dtype=np.int64)
    for s in range(n):
        for v in range(len(nodes)):
            nodesets[:, s] |= ((combos[:, v] >> s) & 1) << v
    feasible = (counts <= budget) & ((nodesets > 0).sum(axis=1) >= k)

    access = np.zeros(len(combos))
    for cluster, freq in topo.demand_for(obj).items():
        if freq == 0:
            continue
        table = _subset_min_table(topo.distances_from(topo.attach(cluster)), nodes)
        vals = np.sort(table[nodesets], axis=1)[:, :k].sum(axis=1)
        access = access + freq * vals
    total = access + model.alpha * model.share_size * counts
    feasible &= np.isfinite(total)
    if not feasible.any():
        raise InfeasibleError("no placement satisfies the constraints")

    best = total[feasible].min()
    tied = np.flatnonzero(feasible & (total <= best + 1e-9 * max(1.0, abs(best))))
    pick = tied[np.argmin(counts[tied])]
    placements = {s + 1: frozenset(nodes[v] for v in range(len(nodes)) if (nodesets[pick, s] >> v) & 1)
                  for s in range(n)}
    return AllocationPlan(obj, params, {s: v for s, v in placements.items() if v})


def full_replication_plan(topo: GridTopology, obj: str, params: ShareParams) -> AllocationPlan:
    """Every share on every node."""
    everywhere = frozenset(topo.nodes)
    return AllocationPlan(obj, params, {s: everywhere for s in range(1, params.n + 1)})
