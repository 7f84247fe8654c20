"""Price-metric routing and source rate control.

Each flow is routed on a least-priced directed path and its rate responds to
the path price through the inverse marginal utility, capped to [0, 1]. This
is the congestion-control half of the dual evaluation; the solved rates and
per-link totals feed the scheduler's subgradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RoutingError
from .model import Flow, Network
from .scheduling import as_price_vector
from .utility import UtilityFunction

_REL_TOL = 1e-9


@dataclass(frozen=True)
class FlowAllocation:
    """Solved rates, chosen paths, and per-link aggregate traffic."""

    rates: dict            # flow id -> x_f in [0, 1]
    paths: dict            # flow id -> tuple of link ids, source to dest
    path_costs: dict       # flow id -> total price along the path
    link_totals: np.ndarray  # y_l = sum of x_f over flows routed through l

    def flow_vector(self, net: Network, flow_id: int) -> np.ndarray:
        """Per-link traffic of one flow: x_f on its path links, 0 elsewhere."""
        y = np.zeros(len(net.links))
        for l in self.paths[flow_id]:
            y[l] += self.rates[flow_id]
        return y


def _distances_to(net: Network, prices: np.ndarray, dest, forbidden=frozenset()) -> dict:
    # Bellman-Ford on the reversed links; price plays the role of length.
    dist = {n: np.inf for n in net.nodes}
    if dest not in dist:
        raise RoutingError(f"unknown destination node {dest!r}")
    dist[dest] = 0.0
    for _ in range(max(1, len(net.nodes) - 1)):
        changed = False
        for link in net.links:
            if link.tail in forbidden or link.head in forbidden:
                continue
            cand = prices[link.id] + dist[link.head]
            if cand < dist[link.tail]:
                dist[link.tail] = cand
                changed = True
        if not changed:
            break
    return dist


def least_priced_path(net: Network, flow: Flow, p) -> tuple[tuple[int, ...], float]:
    """Cheapest simple directed path source -> dest under link prices.

    Equal-cost ties resolve to the lexicographically smallest link-id
    sequence, found by greedily taking the smallest link id that still admits
    a completion at the optimal total price.
    """
    prices = as_price_vector(net, p)
    dist = _distances_to(net, prices, flow.dest)
    total = dist[flow.source]
    if not np.isfinite(total):
        raise RoutingError(f"flow {flow.name}: no directed path {flow.source} -> {flow.dest}")
    tol = _REL_TOL * (1.0 + total)

    path: list[int] = []
    visited = {flow.source}
    node = flow.source
    budget = total
    while node != flow.dest:
        rest = _distances_to(net, prices, flow.dest, forbidden=frozenset(visited))
        step = None
        for link in sorted(net.outgoing[node], key=lambda l: l.id):
            if link.head in visited:
                continue
            remaining = rest[link.head]
            if prices[link.id] + remaining <= budget + tol:
                step = link
                budget = remaining
                break
        if step is None:  # pragma: no cover - the initial distance certifies a completion
            raise RoutingError(f"flow {flow.name}: path construction lost its completion")
        path.append(step.id)
        visited.add(step.head)
        node = step.head
    return tuple(path), float(total)


def source_rate(utility: UtilityFunction, path_cost: float) -> float:
    """Rate x = min(U'^{-1}(price), 1), floored at 0.

    A zero path price saturates the cap outright; the inverse marginal
    utility is never evaluated at 0.
    """
    if path_cost <= 0.0:
        return 1.0
    x = utility.inverse_derivative(path_cost)
    return float(min(1.0, max(0.0, x)))


def solve_d1(net: Network, p) -> tuple[FlowAllocation, float]:
    """Route every flow at the current prices and maximize the rate term.

    Returns the allocation and the value sum_f [U(x_f) - price(f) * x_f],
    which is exact because every flow rides a least-priced path.
    """
    prices = as_price_vector(net, p)
    rates, paths, costs = {}, {}, {}
    y = np.zeros(len(net.links))
    d1 = 0.0
    for flow in net.flows:
        path, cost = least_priced_path(net, flow, prices)
        x = source_rate(flow.utility, cost)
        rates[flow.id] = x
        paths[flow.id] = path
        costs[flow.id] = cost
        for l in path:
            y[l] += x
        d1 += flow.utility.value(x) - cost * x
    return FlowAllocation(rates, paths, costs, y), float(d1)
