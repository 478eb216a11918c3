"""Logical-time simulation of storage nodes serving share requests.

A :class:`SimWorld` owns the per-node share stores, the set of down
nodes, a tick clock and the traffic meters.  Every share moves as one
packet routed by :mod:`datagrid.routing`; all randomness comes from the
world seed, so a seed plus a command sequence fixes every output.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .allocation import AllocationPlan, CostModel, plan_allocation
from .codec import partition, recombine, share_size
from .errors import (AuthorizationError, InconsistentSharesError, IntegrityError,
                     ParameterError, PlacementError, ScriptError, UnavailableError,
                     UnknownReferenceError)
from .rng import KeyStream
from .routing import ROUTE_LABEL, FlowState, path_links, route_packet
from .share import Scheme, Share, ShareParams, object_digest
from .shareformat import HEADER_LEN
from .topology import GridTopology, hop_distance_map


@dataclass(frozen=True)
class AccessToken:
    principal: str
    authorized_objects: frozenset[bytes]

    def allows(self, object_id: bytes) -> bool:
        return object_id in self.authorized_objects


@dataclass
class Metrics:
    total_hops: int = 0
    total_cost: float = 0.0
    node_contacts: int = 0
    per_link_traffic: Counter = field(default_factory=Counter)
    storage_bytes_per_node: Counter = field(default_factory=Counter)
    header_bytes_per_node: Counter = field(default_factory=Counter)

    def snapshot(self) -> dict:
        return {
            "total_hops": self.total_hops,
            "total_cost": self.total_cost,
            "node_contacts": self.node_contacts,
            "per_link_traffic": {f"{a}--{b}": c for (a, b), c in sorted(self.per_link_traffic.items())},
            "storage_bytes_per_node": dict(sorted(self.storage_bytes_per_node.items())),
            "header_bytes_per_node": dict(sorted(self.header_bytes_per_node.items())),
        }


@dataclass(frozen=True)
class StoredObject:
    scheme: Scheme
    params: ShareParams
    length: int


class SimWorld:
    def __init__(self, topology: GridTopology, seed: int):
        self.topology = topology
        self.seed = seed
        self.stores: dict[str, dict[tuple[bytes, int], Share]] = {n: {} for n in sorted(topology.nodes)}
        self.down_nodes: set[str] = set()
        self.clock = 0
        self.objects: dict[bytes, StoredObject] = {}
        self.flows: dict[tuple[str, str], FlowState] = {}
        self._metrics = Metrics()
        self._stream = KeyStream(seed, ROUTE_LABEL)
        self._live: dict[frozenset, GridTopology] = {}
        self._hops: dict[tuple[frozenset, str], dict[str, int]] = {}

    def live_topology(self) -> GridTopology:
        key = frozenset(self.down_nodes)
        if key not in self._live:
            self._live[key] = self.topology.without_nodes(key)
        return self._live[key]

    def default_ingest(self) -> str:
        for c in sorted(self.topology.client_attach):
            return self.topology.client_attach[c]
        return min(self.topology.nodes)

    def _transport(self, src: str, dst: str) -> int:
        """Send one packet src -> dst; returns the hop count."""
        live = self.live_topology()
        key = (frozenset(self.down_nodes), dst)
        if key not in self._hops:
            self._hops[key] = hop_distance_map(live, dst)
        flow = self.flows.get((src, dst), FlowState(src, dst))
        path, self.flows[(src, dst)] = route_packet(live, flow, self._stream, self._hops[key])
        self._metrics.per_link_traffic.update(path_links(path))
        hops = max(0, len(path) - 1)
        self._metrics.total_hops += hops
        return hops

    def put_object(self, data: bytes, scheme: Scheme, params: ShareParams, plan: AllocationPlan,
                   seed: int | None = None, ingest: str | None = None) -> bytes:
        """Partition ``data``, store every planned replica; returns the object id."""
        self.clock += 1
        if plan.params != params:
            raise PlacementError(f"plan is for {plan.params}, object uses {params}")
        shares = {s.index: s for s in partition(data, scheme, params, self.seed if seed is None else seed)}
        ingest = self.default_ingest() if ingest is None else ingest
        if ingest not in self.topology.nodes or ingest in self.down_nodes:
            raise PlacementError(f"ingest node {ingest} is unknown or down")
        if len(plan.placed_shares) < params.k:
            raise PlacementError(f"plan places {len(plan.placed_shares)} distinct shares, need {params.k}")

        live = self.live_topology()
        reach = live.distances_from(ingest)
        extra = Counter()
        moves = []
        for idx, nodes in plan.placements.items():
            for node in sorted(nodes):
                if node not in self.topology.nodes:
                    raise UnknownReferenceError(f"plan references unknown node {node!r}")
                if node in self.down_nodes:
                    raise PlacementError(f"plan places share {idx} on down node {node}")
                if node not in reach:
                    raise PlacementError(f"node {node} unreachable from ingest {ingest}")
                extra[node] += len(shares[idx].payload)
                moves.append((idx, node))
        for node, nbytes in extra.items():
            used = self._metrics.storage_bytes_per_node[node]
            if used + nbytes > self.topology.nodes[node].capacity:
                raise PlacementError(f"node {node} capacity exceeded")

        for idx, node in moves:
            share = shares[idx]
            self._transport(ingest, node)
            self._metrics.total_cost += reach[node]
            self.stores[node][(share.object_id, idx)] = share
            self._metrics.storage_bytes_per_node[node] += len(share.payload)
            self._metrics.header_bytes_per_node[node] += HEADER_LEN + len(share.key_share)
        oid = next(iter(shares.values())).object_id
        self.objects[oid] = StoredObject(scheme, params, len(data))
        return oid

    def holders(self, object_id: bytes, index: int) -> list[str]:
        return [n for n, store in self.stores.items() if (object_id, index) in store]

    def get_object(self, object_id: bytes, cluster: str, token: AccessToken) -> bytes:
        """Fetch the k cheapest distinct shares to the cluster's attach node and rebuild."""
        self.clock += 1
        if not token.allows(object_id):
            raise AuthorizationError(f"{token.principal} may not read {object_id.hex()}")
        if object_id not in self.objects:
            raise UnknownReferenceError(f"no object {object_id.hex()}")
        attach = self.topology.attach(cluster)
        if attach in self.down_nodes:
            raise UnavailableError(f"attach node {attach} of {cluster} is down")
        meta = self.objects[object_id]
        dist = self.live_topology().distances_from(attach)
        sources = []
        for idx in range(1, meta.params.n + 1):
            options = sorted((dist[n], n) for n in self.holders(object_id, idx)
                             if n not in self.down_nodes and n in dist)
            if options:
                sources.append((options[0][0], idx, options[0][1]))
        if len(sources) < meta.params.k:
            raise UnavailableError(f"only {len(sources)} distinct shares reachable from {cluster}, need {meta.params.k}")
        sources.sort()
        fetched = []
        for cost, idx, node in sources[:meta.params.k]:
            self._metrics.node_contacts += 1
            self._transport(node, attach)
            self._metrics.total_cost += cost
            fetched.append(self.stores[node][(object_id, idx)])
        try:
            data = recombine(fetched)
        except (InconsistentSharesError, ParameterError) as exc:
            raise IntegrityError(str(exc)) from None
        if object_digest(data) != object_id:
            raise IntegrityError(f"digest mismatch for {object_id.hex()}")
        return data

    def _check_nodes(self, nodes) -> list[str]:
        nodes = list(nodes)
        for n in nodes:
            if n not in self.topology.nodes:
                raise UnknownReferenceError(f"unknown node {n!r}")
        return nodes

    def fail_nodes(self, nodes) -> None:
        self.down_nodes.update(self._check_nodes(nodes))
        self.clock += 1

    def restore_nodes(self, nodes) -> None:
        self.down_nodes.difference_update(self._check_nodes(nodes))
        self.clock += 1

    def corrupt(self, node: str, object_id: bytes, index: int) -> None:
        """Flip the first payload byte of one stored replica (fault injection)."""
        share = self.stores[node][(object_id, index)]
        payload = bytes([share.payload[0] ^ 0xFF]) + share.payload[1:]
        self.stores[node][(object_id, index)] = Share(
            share.params, share.index, share.scheme, share.object_id,
            share.original_length, payload, share.key_share)

    def metrics(self) -> dict:
        return self._metrics.snapshot()


# --- scenario scripts -------------------------------------------------------

OWNER = "owner"


@dataclass
class ScenarioResult:
    lines: list[str]
    events: list[dict]
    metrics: dict
    failed_assertions: int

    def to_json(self) -> str:
        return json.dumps({"events": self.events, "metrics": self.metrics,
                           "failed_assertions": self.failed_assertions}, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        return "\n".join(self.lines + ["metrics " + json.dumps(self.metrics, sort_keys=True)]) + "\n"


def _options(tokens: list[str], allowed: set[str], lineno: int) -> dict[str, str]:
    opts = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or key not in allowed:
            raise ScriptError(f"unexpected argument {tok!r}", lineno)
        opts[key] = value
    return opts


def _parse_placement(text: str, lineno: int) -> dict[int, set[str]]:
    out: dict[int, set[str]] = {}
    for part in text.split(";"):
        idx, sep, nodes = part.partition(":")
        if not sep or not idx.isdigit() or not nodes:
            raise ScriptError(f"bad placement {part!r}; expected INDEX:NODE[,NODE]", lineno)
        out.setdefault(int(idx), set()).update(nodes.split(","))
    return out


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ScriptError(f"{what} must be an integer, got {tok!r}", lineno) from None


def run_scenario(topology: GridTopology, text: str, seed: int) -> ScenarioResult:
    """Execute a scenario script against a fresh world.

    Commands::

        put <label> <scheme> <k> <n> <size> [budget=B] [limit=L] [alpha=A]
            [ingest=NODE] [place=IDX:NODE,NODE;IDX:NODE]
        token <principal> <label>[,<label>...]
        get <label> <cluster> [as=<principal>]
        fail <node>... / restore <node>...
        corrupt <label> <node> <index>
        assert-success | assert-unavailable | assert-unauthorized | assert-integrity-error
        assert-hops <n>
        assert-metric <total_hops|total_cost|node_contacts> <value>

    Malformed commands raise ScriptError; assertion failures are counted.
    """
    world = SimWorld(topology, seed)
    labels: dict[str, bytes] = {}
    tokens: dict[str, set[str]] = {}
    lines: list[str] = []
    events: list[dict] = []
    failed = 0
    last: dict | None = None

    def emit(event: dict, line: str) -> None:
        event["tick"] = world.clock
        events.append(event)
        lines.append(f"t={world.clock} {line}")

    def resolve(label: str, lineno: int) -> bytes:
        if label not in labels:
            raise ScriptError(f"unknown object label {label!r}", lineno)
        return labels[label]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cmd, *args = line.split()
        try:
            if cmd == "put":
                if len(args) < 5:
                    raise ScriptError("put <label> <scheme> <k> <n> <size> [options]", lineno)
                label, scheme_name, k, n, size = args[:5]
                opts = _options(args[5:], {"budget", "limit", "alpha", "ingest", "place"}, lineno)
                try:
                    scheme = Scheme.from_label(scheme_name)
                    params = ShareParams(_int(k, "k", lineno), _int(n, "n", lineno))
                except ParameterError as exc:
                    raise ScriptError(str(exc), lineno) from None
                length = _int(size, "size", lineno)
                if length < 1:
                    raise ScriptError("size must be positive", lineno)
                data = KeyStream(seed, f"object:{label}").read(length)
                if "place" in opts:
                    plan = AllocationPlan(label, params, _parse_placement(opts["place"], lineno))
                else:
                    model = CostModel(float(opts.get("alpha", 0.0)), share_size(scheme, length, params))
                    plan = plan_allocation(world.live_topology(), label, params, model,
                                           _int(opts.get("budget", str(params.n)), "budget", lineno),
                                           _int(opts.get("limit", "1"), "limit", lineno))
                oid = world.put_object(data, scheme, params, plan, ingest=opts.get("ingest"))
                labels[label] = oid
                tokens.setdefault(OWNER, set()).add(label)
                placement = {str(i): sorted(v) for i, v in plan.placements.items()}
                emit({"cmd": "put", "label": label, "object_id": oid.hex(), "placements": placement},
                     f"put {label} {scheme.label} k={params.k} n={params.n} -> {oid.hex()} "
                     f"placements={json.dumps(placement, sort_keys=True)}")
            elif cmd == "token":
                if len(args) != 2:
                    raise ScriptError("token <principal> <label>[,<label>...]", lineno)
                tokens.setdefault(args[0], set()).update(args[1].split(","))
            elif cmd == "get":
                if len(args) < 2:
                    raise ScriptError("get <label> <cluster> [as=<principal>]", lineno)
                label, cluster = args[:2]
                opts = _options(args[2:], {"as"}, lineno)
                oid = resolve(label, lineno)
                if cluster not in topology.client_attach:
                    raise ScriptError(f"cluster {cluster!r} has no client attach node", lineno)
                principal = opts.get("as", OWNER)
                token = AccessToken(principal, frozenset(labels[x] for x in tokens.get(principal, ()) if x in labels))
                before = (world._metrics.total_hops, world._metrics.total_cost)
                try:
                    world.get_object(oid, cluster, token)
                    outcome = "ok"
                except AuthorizationError:
                    outcome = "unauthorized"
                except UnavailableError:
                    outcome = "unavailable"
                except IntegrityError:
                    outcome = "integrity-error"
                hops = world._metrics.total_hops - before[0]
                cost = world._metrics.total_cost - before[1]
                last = {"outcome": outcome, "hops": hops, "cost": cost}
                emit({"cmd": "get", "label": label, "cluster": cluster, **last},
                     f"get {label} {cluster} as={principal} -> {outcome} hops={hops} cost={cost:g}")
            elif cmd in ("fail", "restore"):
                if not args:
                    raise ScriptError(f"{cmd} needs at least one node", lineno)
                try:
                    (world.fail_nodes if cmd == "fail" else world.restore_nodes)(args)
                except UnknownReferenceError as exc:
                    raise ScriptError(str(exc), lineno) from None
                emit({"cmd": cmd, "nodes": args}, f"{cmd} {' '.join(args)}")
            elif cmd == "corrupt":
                if len(args) != 3:
                    raise ScriptError("corrupt <label> <node> <index>", lineno)
                oid = resolve(args[0], lineno)
                try:
                    world.corrupt(args[1], oid, _int(args[2], "index", lineno))
                except KeyError:
                    raise ScriptError(f"{args[1]} holds no share {args[2]} of {args[0]}", lineno) from None
                emit({"cmd": cmd, "label": args[0], "node": args[1], "index": int(args[2])}, line)
            elif cmd.startswith("assert-"):
                ok = _check_assertion(cmd, args, last, world, lineno)
                failed += not ok
                emit({"cmd": cmd, "args": args, "passed": ok},
                     f"{cmd} {' '.join(args)} {'PASS' if ok else 'FAIL'}".replace("  ", " "))
            else:
                raise ScriptError(f"unknown command {cmd!r}", lineno)
        except (ValueError, UnknownReferenceError) as exc:
            raise ScriptError(str(exc), lineno) from None

    return ScenarioResult(lines, events, world.metrics(), failed)


_OUTCOME_ASSERTS = {
    "assert-success": "ok",
    "assert-unavailable": "unavailable",
    "assert-unauthorized": "unauthorized",
    "assert-integrity-error": "integrity-error",
}


def _check_assertion(cmd: str, args: list[str], last: dict | None, world: SimWorld, lineno: int) -> bool:
    if cmd in _OUTCOME_ASSERTS:
        if args:
            raise ScriptError(f"{cmd} takes no arguments", lineno)
        if last is None:
            raise ScriptError(f"{cmd} before any get", lineno)
        return last["outcome"] == _OUTCOME_ASSERTS[cmd]
    if cmd == "assert-hops":
        if len(args) != 1 or last is None:
            raise ScriptError("assert-hops <n> after a get", lineno)
        return last["hops"] == _int(args[0], "hops", lineno)
    if cmd == "assert-metric":
        if len(args) != 2 or args[0] not in ("total_hops", "total_cost", "node_contacts"):
            raise ScriptError("assert-metric <total_hops|total_cost|node_contacts> <value>", lineno)
        try:
            want = float(args[1])
        except ValueError:
            raise ScriptError(f"metric value {args[1]!r} is not a number", lineno) from None
        return math.isclose(world.metrics()[args[0]], want, abs_tol=1e-9)
    raise ScriptError(f"unknown assertion {cmd!r}", lineno)
