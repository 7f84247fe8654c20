"""Network model: directed data links over an undirected connectivity graph.

Distances between nodes are hop counts on the undirected graph; the distance
between two links is the smallest node distance over their endpoint pairs.
Two links interfere under the K-hop model iff their distance is < K, so K = 1
is the node-exclusive model (links sharing an endpoint conflict).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Sequence

from .errors import CapacityError, InputError
from .utility import UtilityFunction

NodeId = Hashable

# Exhaustive enumeration (optimal scheduler, interference degree, brackets)
# is only offered up to this many links.
ENUMERATION_GUARD = 25

# Sentinel distance for node pairs in different components. Any comparison
# "d < K" is False, so links in different components never interfere.
UNREACHABLE = math.inf


@dataclass(frozen=True)
class Link:
    """Directed data link. `alpha` is the capacity normalized to (0, 1]."""

    id: int
    tail: NodeId
    head: NodeId
    alpha: float

    @property
    def name(self) -> str:
        return f"({self.tail},{self.head})"


@dataclass(frozen=True)
class Flow:
    """End-to-end flow with its utility function. Rates are normalized to [0, 1]."""

    id: int
    source: NodeId
    dest: NodeId
    utility: UtilityFunction

    @property
    def name(self) -> str:
        return f"f{self.id}"


@dataclass(frozen=True)
class Network:
    nodes: tuple
    links: tuple[Link, ...]
    flows: tuple[Flow, ...] = ()

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise InputError("duplicate node ids")
        node_set = set(self.nodes)
        for i, link in enumerate(self.links):
            if link.id != i:
                raise InputError(f"link ids must follow declaration order; link {i} has id {link.id}")
            if link.tail not in node_set or link.head not in node_set:
                raise InputError(f"link {link.name} references unknown node")
            if link.tail == link.head:
                raise InputError(f"link {link.name} is a self-loop")
            if not (0.0 < link.alpha <= 1.0):
                raise InputError(f"link {link.name}: alpha must be in (0, 1], got {link.alpha}")
        if self.links and not any(l.alpha == 1.0 for l in self.links):
            raise InputError("capacities are normalized by the largest one: at least one link needs alpha == 1")
        for flow in self.flows:
            if flow.source == flow.dest:
                raise InputError(f"flow {flow.name}: source equals destination")
            if flow.source not in node_set or flow.dest not in node_set:
                raise InputError(f"flow {flow.name} references unknown node")
            if flow.dest not in self.directed_reachable(flow.source):
                raise InputError(f"flow {flow.name}: no directed path {flow.source} -> {flow.dest}")

    # ---- construction helpers ----

    @classmethod
    def build(
        cls,
        nodes: Iterable[NodeId],
        links: Iterable[tuple],
        flows: Iterable[tuple] = (),
    ) -> "Network":
        """Build from plain tuples: links as (tail, head, alpha) and flows as
        (source, dest, utility) or (source, dest, kind, weight)."""
        link_objs = []
        for i, entry in enumerate(links):
            tail, head, alpha = entry
            link_objs.append(Link(i, tail, head, float(alpha)))
        flow_objs = []
        for i, entry in enumerate(flows):
            if len(entry) == 3:
                source, dest, util = entry
            else:
                source, dest, kind, weight = entry
                util = UtilityFunction(kind, float(weight))
            flow_objs.append(Flow(i, source, dest, util))
        return cls(tuple(nodes), tuple(link_objs), tuple(flow_objs))

    # ---- lookups ----

    def link(self, link_id: int) -> Link:
        if not isinstance(link_id, int) or not (0 <= link_id < len(self.links)):
            raise InputError(f"unknown link id {link_id!r}")
        return self.links[link_id]

    def link_id(self, tail: NodeId, head: NodeId) -> int:
        for link in self.links:
            if link.tail == tail and link.head == head:
                return link.id
        raise InputError(f"no link ({tail},{head})")

    @cached_property
    def node_index(self) -> dict:
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def undirected_adjacency(self) -> dict:
        adj = {n: set() for n in self.nodes}
        for link in self.links:
            adj[link.tail].add(link.head)
            adj[link.head].add(link.tail)
        # deterministic neighbor order: node declaration order
        return {n: tuple(sorted(adj[n], key=self.node_index.__getitem__)) for n in self.nodes}

    @cached_property
    def outgoing(self) -> dict:
        out = {n: [] for n in self.nodes}
        for link in self.links:
            out[link.tail].append(link)
        return {n: tuple(v) for n, v in out.items()}

    # ---- distances ----

    @cached_property
    def _node_distances(self) -> dict:
        # all-pairs BFS on the undirected connectivity graph
        dist = {}
        for start in self.nodes:
            d = {start: 0}
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in self.undirected_adjacency[u]:
                    if v not in d:
                        d[v] = d[u] + 1
                        queue.append(v)
            dist[start] = d
        return dist

    def node_distance(self, a: NodeId, b: NodeId) -> float:
        if a not in self.node_index or b not in self.node_index:
            raise InputError(f"unknown node in distance query: {a!r}, {b!r}")
        return self._node_distances[a].get(b, UNREACHABLE)

    def nodes_within(self, n: NodeId, hops: int) -> tuple:
        """Other nodes at undirected distance <= hops, in declaration order."""
        d = self._node_distances[n]
        return tuple(m for m in self.nodes if m != n and d.get(m, UNREACHABLE) <= hops)

    @cached_property
    def _link_distance_matrix(self) -> list:
        mat = [[0.0] * len(self.links) for _ in self.links]
        for l1 in self.links:
            d_tail = self._node_distances[l1.tail]
            d_head = self._node_distances[l1.head]
            for l2 in self.links:
                if l2.id < l1.id:
                    mat[l1.id][l2.id] = mat[l2.id][l1.id]
                    continue
                best = min(
                    d_tail.get(l2.tail, UNREACHABLE),
                    d_tail.get(l2.head, UNREACHABLE),
                    d_head.get(l2.tail, UNREACHABLE),
                    d_head.get(l2.head, UNREACHABLE),
                )
                mat[l1.id][l2.id] = best
        return mat

    def directed_reachable(self, source: NodeId) -> set:
        seen = {source}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for link in self.outgoing[u]:
                if link.head not in seen:
                    seen.add(link.head)
                    queue.append(link.head)
        return seen


@dataclass(frozen=True)
class IndependentSetCollection:
    """All maximal valid K-matchings, each a sorted id tuple, lexicographically ordered."""

    sets: tuple[tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.sets)


def _validate_k(k: int) -> int:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise InputError(f"K must be an integer >= 1, got {k!r}")
    return k


def link_distance(net: Network, l1: int, l2: int) -> float:
    """Distance between two links: min node distance over endpoint pairs."""
    a = net.link(l1)
    b = net.link(l2)
    return net._link_distance_matrix[a.id][b.id]


def is_valid_k_matching(net: Network, links: Iterable[int], k: int) -> bool:
    """True iff all distinct pairs in `links` are at distance >= K."""
    _validate_k(k)
    ids = [net.link(l).id for l in links]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate link in candidate matching")
    mat = net._link_distance_matrix
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if mat[a][b] < k:
                return False
    return True


def interference_set(net: Network, l: int, k: int) -> tuple[int, ...]:
    """Ids of links within distance < K of `l` (always includes `l`), sorted."""
    _validate_k(k)
    a = net.link(l).id
    mat = net._link_distance_matrix
    return tuple(b.id for b in net.links if mat[a][b.id] < k)


def _maximal_compatible_sets(candidates: Sequence[int], compatible: dict) -> list:
    """All subsets of `candidates` that are pairwise compatible and maximal
    within `candidates` (no remaining candidate can be added)."""
    out = []

    def grow(chosen: set, avail: set, excluded: set):
        if not avail and not excluded:
            out.append(tuple(sorted(chosen)))
            return
        for v in sorted(avail):
            grow(chosen | {v}, avail & compatible[v], excluded & compatible[v])
            avail = avail - {v}
            excluded = excluded | {v}

    grow(set(), set(candidates), set())
    return sorted(set(out))


def _compatibility(net: Network, candidates: Sequence[int], k: int) -> dict:
    mat = net._link_distance_matrix
    return {
        a: {b for b in candidates if b != a and mat[a][b] >= k}
        for a in candidates
    }


def interference_degree_link(net: Network, l: int, k: int) -> int:
    """Largest valid K-matching that fits inside the interference set of `l`."""
    _validate_k(k)
    members = interference_set(net, l, k)
    if len(members) > ENUMERATION_GUARD:
        raise CapacityError(
            f"interference set of {net.link(l).name} has {len(members)} links, "
            f"over the enumeration guard of {ENUMERATION_GUARD}"
        )
    sets = _maximal_compatible_sets(members, _compatibility(net, members, k))
    return max(len(s) for s in sets)


def interference_degree_graph(net: Network, k: int) -> int:
    """Max interference degree over all links."""
    _validate_k(k)
    if not net.links:
        raise InputError("interference degree of a network with no links is undefined")
    return max(interference_degree_link(net, l.id, k) for l in net.links)


def enumerate_maximal_independent_sets(net: Network, k: int) -> IndependentSetCollection:
    """Every maximal valid K-matching of the network, exhaustively.

    Guarded: refuses networks over ENUMERATION_GUARD links; use the greedy or
    distributed schedulers beyond that size.
    """
    _validate_k(k)
    if len(net.links) > ENUMERATION_GUARD:
        raise CapacityError(
            f"{len(net.links)} links exceeds the enumeration guard of {ENUMERATION_GUARD}; "
            "use the greedy or distributed schedulers instead"
        )
    ids = [l.id for l in net.links]
    sets = _maximal_compatible_sets(ids, _compatibility(net, ids, k))
    return IndependentSetCollection(tuple(sets))
