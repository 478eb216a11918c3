"""Randomised downhill routing with source-side next-hop exclusion.

Every hop moves to a neighbour strictly closer (in hops) to the
destination, picked uniformly at random.  At the source, the next hop
used by the flow's previous packet is excluded whenever at least two
downhill neighbours exist, so consecutive packets never share a first
link.  The stream only advances when there is a real choice to make.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .errors import UnreachableError
from .rng import KeyStream
from .topology import GridTopology, hop_distance_map, link_key

ROUTE_LABEL = "route"


@dataclass(frozen=True)
class FlowState:
    src: str
    dst: str
    last_first_hop: str | None = None
    packets_sent: int = 0


def downhill(topo: GridTopology, hops: dict[str, int], node: str) -> list[str]:
    here = hops[node]
    return [v for v in topo.neighbors(node) if hops.get(v, here) < here]


def route_packet(topo: GridTopology, flow: FlowState, stream: KeyStream,
                 hops: dict[str, int] | None = None) -> tuple[list[str], FlowState]:
    """Route one packet; returns the node path (empty when src == dst) and the new state."""
    topo.require(flow.src)
    if hops is None:
        hops = hop_distance_map(topo, flow.dst)
    if flow.src == flow.dst:
        return [], replace(flow, packets_sent=flow.packets_sent + 1)
    if flow.src not in hops:
        raise UnreachableError(f"{flow.dst} is unreachable from {flow.src}")

    first = downhill(topo, hops, flow.src)
    if len(first) >= 2 and flow.last_first_hop in first:
        first.remove(flow.last_first_hop)
    nxt = first[0] if len(first) == 1 else stream.choice(first)
    path = [flow.src, nxt]
    while nxt != flow.dst:
        cands = downhill(topo, hops, nxt)
        nxt = cands[0] if len(cands) == 1 else stream.choice(cands)
        path.append(nxt)
    return path, replace(flow, last_first_hop=path[1], packets_sent=flow.packets_sent + 1)


def path_links(path: list[str]) -> list[tuple[str, str]]:
    return [link_key(a, b) for a, b in zip(path, path[1:])]


def simulate_flow(topo: GridTopology, flow: FlowState, packet_count: int, seed: int):
    """Yield the path of each of ``packet_count`` packets on one flow."""
    stream = KeyStream(seed, ROUTE_LABEL)
    hops = hop_distance_map(topo, flow.dst)
    for _ in range(packet_count):
        path, flow = route_packet(topo, flow, stream, hops)
        yield path


def link_exposure(topo: GridTopology, flow: FlowState, packet_count: int,
                  seed: int) -> dict[tuple[str, str], float]:
    """Fraction of packets that traverse each link."""
    counts: Counter = Counter()
    for path in simulate_flow(topo, flow, packet_count, seed):
        counts.update(path_links(path))
    return {link: c / packet_count for link, c in sorted(counts.items())}
