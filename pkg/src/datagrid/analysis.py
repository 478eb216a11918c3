"""Breach and availability probabilities of a placement.

Nodes are compromised / fail independently.  A breach means the adversary
holds at least k distinct share indices; the object is available while
the surviving nodes still hold at least k distinct indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import AllocationPlan
from .errors import InstanceTooLargeError, ParameterError
from .topology import GridTopology

EXACT_MAX_NODES = 20


@dataclass(frozen=True)
class ThreatModel:
    comp_p: dict[str, float]
    fail_p: dict[str, float]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be at least 1")
        for table in (self.comp_p, self.fail_p):
            for node, p in table.items():
                if not 0.0 <= p <= 1.0:
                    raise ParameterError(f"probability {p} for {node} outside [0, 1]")

    @classmethod
    def from_topology(cls, topo: GridTopology, k: int) -> "ThreatModel":
        return cls({n.id: n.comp_p for n in topo.nodes.values()},
                   {n.id: n.fail_p for n in topo.nodes.values()}, k)

    def with_k(self, k: int) -> "ThreatModel":
        return ThreatModel(self.comp_p, self.fail_p, k)


@dataclass(frozen=True)
class AnalysisReport:
    breach_prob: float
    availability: float
    method: str
    trials: int | None = None
    breach_stderr: float | None = None
    availability_stderr: float | None = None
    access_cost: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _share_masks(plan: AllocationPlan) -> tuple[list[str], list[int]]:
    nodes = plan.nodes()
    pos = {n: i for i, n in enumerate(nodes)}
    masks = [sum(1 << pos[n] for n in v) for v in plan.placements.values() if v]
    return nodes, masks


def _holds_threshold(subsets: np.ndarray, masks: list[int], k: int) -> np.ndarray:
    held = np.zeros(subsets.shape, dtype=np.int64)
    for m in masks:
        held += (subsets & m) != 0
    return held >= k


def _subset_probs(ps: list[float]) -> np.ndarray:
    """P(exactly the nodes in mask are 'on'), bit i = node i."""
    probs = np.ones(1)
    for p in ps:
        probs = np.concatenate([probs * (1.0 - p), probs * p])
    return probs


def _exact(plan: AllocationPlan, ps: dict[str, float], k: int, survive: bool) -> float:
    nodes, masks = _share_masks(plan)
    if len(nodes) > EXACT_MAX_NODES:
        raise InstanceTooLargeError(
            f"exact enumeration is limited to {EXACT_MAX_NODES} nodes, plan uses {len(nodes)}; use Monte Carlo")
    on = [1.0 - ps[n] if survive else ps[n] for n in nodes]
    probs = _subset_probs(on)
    subsets = np.arange(1 << len(nodes), dtype=np.int64)
    return float(probs[_holds_threshold(subsets, masks, k)].sum())


def breach_prob_exact(plan: AllocationPlan, threat: ThreatModel) -> float:
    return _exact(plan, threat.comp_p, threat.k, survive=False)


def availability_exact(plan: AllocationPlan, threat: ThreatModel) -> float:
    return _exact(plan, threat.fail_p, threat.k, survive=True)


def available_after(plan: AllocationPlan, k: int, failed) -> bool:
    """Deterministic check: do the nodes outside ``failed`` hold k distinct shares?"""
    failed = set(failed)
    return sum(1 for v in plan.placements.values() if v - failed) >= k


def trial_block(node_count: int) -> int:
    """Philox counters consumed per trial (each counter yields 4 words)."""
    return max(1, -(-2 * node_count // 4))


def trial_uniforms(seed: int, node_count: int, first: int, count: int) -> np.ndarray:
    """Uniforms for trials ``first .. first+count-1``, shape (count, 2, node_count).

    Trial t reads Philox counter block t under key ``seed``, so any trial
    can be regenerated alone and chunks can be computed in any order.
    """
    block = trial_block(node_count)
    gen = np.random.Philox(key=seed, counter=first * block)
    raw = gen.random_raw(count * 4 * block).reshape(count, 4 * block)[:, :2 * node_count]
    return ((raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53).reshape(count, 2, node_count)


def monte_carlo(plan: AllocationPlan, threat: ThreatModel, trials: int, seed: int,
                chunk: int = 65536) -> AnalysisReport:
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    nodes, masks = _share_masks(plan)
    comp = np.array([threat.comp_p[n] for n in nodes])
    fail = np.array([threat.fail_p[n] for n in nodes])
    weights = np.array([1 << i for i in range(len(nodes))], dtype=np.int64)
    breaches = 0
    available = 0
    for first in range(0, trials, chunk):
        count = min(chunk, trials - first)
        u = trial_uniforms(seed, len(nodes), first, count)
        compromised = (u[:, 0, :] < comp).astype(np.int64) @ weights
        alive = (u[:, 1, :] >= fail).astype(np.int64) @ weights
        breaches += int(_holds_threshold(compromised, masks, threat.k).sum())
        available += int(_holds_threshold(alive, masks, threat.k).sum())
    pb, pa = breaches / trials, available / trials
    return AnalysisReport(
        breach_prob=pb, availability=pa, method="monte_carlo", trials=trials,
        breach_stderr=math.sqrt(pb * (1 - pb) / trials),
        availability_stderr=math.sqrt(pa * (1 - pa) / trials),
    )


def exact_report(plan: AllocationPlan, threat: ThreatModel) -> AnalysisReport:
    return AnalysisReport(breach_prob_exact(plan, threat), availability_exact(plan, threat), "exact")
