"""Round-based simulation of the distributed greedy scheduler.

Each round runs three slots with a decision boundary after each:

  S_L  every node with an OPEN attached link announces its best one
       (capacity-weighted price) to all nodes within K+1 hops.
  T_L  a node whose best OPEN attached link beats everything it received
       MARKs it and CLOSEs its other OPEN attached links; otherwise each
       OPEN attached link that saw a better interfering announcement moves
       to CHECK.
  S_M  nodes announce their MARKED attached links to the K+1-hop
       neighborhood (every round, not only the round they were marked).
  T_M  a CHECK link interfering with any announced MARKED link is CLOSED;
       afterwards each node re-OPENs its best attached link still in CHECK.
  S_T  any node still holding an OPEN or CHECK link floods a
       DO-NOT-TERMINATE signal; the run ends at T_T once nobody does.

Links are operated by their tail node. Tails of interfering links are at
most K+1 hops apart, so the K+1-hop announcement radius is sufficient for
every conflict to be seen. MARKED and CLOSED are absorbing. Nodes only ever
write the state of their own attached links and read other state through
announcements taken from the slot snapshot, so the node processing order
cannot change the outcome.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InternalInvariantError, SimStateError
from .model import Network
from .scheduling import ScheduleSet, as_price_vector, priority_order


class LinkState(enum.Enum):
    OPEN = "O"
    CHECK = "CH"
    MARKED = "M"
    CLOSED = "CL"


@dataclass(frozen=True)
class Trace:
    """State snapshots at every decision boundary, plus the initial row."""

    link_names: tuple[str, ...]
    rows: tuple[tuple[str, tuple[str, ...]], ...]

    @property
    def rounds(self) -> int:
        return (len(self.rows) - 1) // 2


@dataclass
class SimState:
    net: Network
    k: int
    prices: np.ndarray
    rank: list[int]                    # rank[link_id]: position in priority order
    attached: dict                     # node -> tuple of attached (tail-owned) link ids
    reach: dict                        # node -> nodes within K+1 hops
    states: list[LinkState]
    round_index: int = 1
    terminated: bool = False
    trace_rows: list = field(default_factory=list)

    def snapshot(self, label: str):
        self.trace_rows.append((label, tuple(s.value for s in self.states)))

    @property
    def trace(self) -> Trace:
        return Trace(tuple(l.name for l in self.net.links), tuple(self.trace_rows))

    def marked_links(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.states) if s is LinkState.MARKED)


def init_sim(net: Network, k: int, p, tie_order: str = "ascending-id") -> SimState:
    prices = as_price_vector(net, p)
    order = priority_order(net, prices, tie_order)
    rank = [0] * len(net.links)
    for pos, link_id in enumerate(order):
        rank[link_id] = pos
    attached = {n: tuple(l.id for l in net.outgoing[n]) for n in net.nodes}
    reach = {n: net.nodes_within(n, k + 1) for n in net.nodes}
    state = SimState(
        net=net,
        k=k,
        prices=prices,
        rank=rank,
        attached=attached,
        reach=reach,
        states=[LinkState.OPEN] * len(net.links),
        terminated=not net.links,
    )
    state.snapshot("0")
    return state


def step_round(state: SimState, node_order=None) -> SimState:
    """Run one full round (S_L/T_L, S_M/T_M, S_T/T_T). Mutates and returns state."""
    if state.terminated:
        raise SimStateError("simulation already terminated; no further rounds to run")
    net, k, rank = state.net, state.k, state.rank
    mat = net._link_distance_matrix
    order = list(node_order) if node_order is not None else list(net.nodes)
    if sorted(order, key=net.node_index.__getitem__) != list(net.nodes):
        raise InputError("node_order must be a permutation of the network's nodes")
    m = state.round_index
    states = state.states

    # ---- S_L: price announcements from the slot snapshot ----
    snapshot = list(states)
    announced = {}
    for n in net.nodes:
        open_att = [l for l in state.attached[n] if snapshot[l] is LinkState.OPEN]
        if open_att:
            announced[n] = min(open_att, key=rank.__getitem__)

    # ---- T_L ----
    for n in order:
        open_att = [l for l in state.attached[n] if snapshot[l] is LinkState.OPEN]
        if not open_att:
            continue
        lmax_own = min(open_att, key=rank.__getitem__)
        received = [announced[u] for u in state.reach[n] if u in announced]
        if not received or rank[lmax_own] < min(rank[r] for r in received):
            states[lmax_own] = LinkState.MARKED
            for l in open_att:
                if l != lmax_own:
                    states[l] = LinkState.CLOSED
        else:
            for l in open_att:
                if any(rank[r] < rank[l] and mat[l][r] < k for r in received):
                    states[l] = LinkState.CHECK
    state.snapshot(f"T_L^{m}")

    # ---- S_M: marked-link announcements (tails keep announcing every round) ----
    marked_at = {}
    for n in net.nodes:
        mk = [l for l in state.attached[n] if states[l] is LinkState.MARKED]
        if mk:
            marked_at[n] = mk

    # ---- T_M ----
    snapshot = list(states)
    for n in order:
        checks = [l for l in state.attached[n] if snapshot[l] is LinkState.CHECK]
        if not checks:
            continue
        heard: list[int] = list(marked_at.get(n, ()))  # a node knows its own marked links
        for u in state.reach[n]:
            heard.extend(marked_at.get(u, ()))
        survivors = []
        for l in checks:
            if any(mat[l][h] < k for h in heard):
                states[l] = LinkState.CLOSED
            else:
                survivors.append(l)
        if survivors:
            states[min(survivors, key=rank.__getitem__)] = LinkState.OPEN
    state.snapshot(f"T_M^{m}")

    # ---- S_T / T_T: global termination check (the flood reaches everyone) ----
    state.terminated = not any(s is LinkState.OPEN or s is LinkState.CHECK for s in states)
    state.round_index = m + 1
    return state


def run_distributed_greedy(net: Network, k: int, p, node_order=None,
                           tie_order: str = "ascending-id") -> tuple[ScheduleSet, Trace]:
    """Run rounds until termination; returns the MARKED set and the trace."""
    state = init_sim(net, k, p, tie_order)
    while not state.terminated:
        if state.round_index > len(net.links):
            raise InternalInvariantError(
                f"no termination after {len(net.links)} rounds; "
                "at least one link must be marked per round"
            )
        step_round(state, node_order=node_order)
    schedule = ScheduleSet.from_links(net, state.marked_links(), state.prices)
    return schedule, state.trace


# ---- rendering ----

def render_trace(trace: Trace) -> str:
    """Plain-text table: one row per decision boundary, one column per link."""
    headers = ["T", *trace.link_names]
    rows = [[label, *cells] for label, cells in trace.rows]
    widths = [max(len(str(r[i])) for r in [headers, *rows]) for i in range(len(headers))]
    def fmt(row):
        return "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    return "\n".join([fmt(headers), *map(fmt, rows)])


def trace_csv_rows(trace: Trace) -> list[list[str]]:
    """Rows for CSV export: header, then one row per decision boundary."""
    out = [["T", *trace.link_names]]
    for label, cells in trace.rows:
        out.append([label, *cells])
    return out
