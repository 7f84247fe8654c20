"""Link schedulers: pick a maximal valid K-matching by capacity-weighted price.

All price comparisons in this package use the same deterministic total order:
descending alpha_l * p_l, ties broken by ascending link id. The distributed
simulator imports this order, which is what makes it reproduce the
centralized greedy schedule exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .model import Network, enumerate_maximal_independent_sets, is_valid_k_matching

# tie orders; "reversed-id" exists only as a self-test control that breaks
# the agreement between the centralized and distributed schedulers on purpose
TIE_ASCENDING_ID = "ascending-id"
TIE_REVERSED_ID = "reversed-id"


def as_price_vector(net: Network, p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (len(net.links),):
        raise InputError(f"price vector must have length {len(net.links)}, got shape {arr.shape}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InputError("prices must be finite and nonnegative")
    return arr


def capacity_weighted(net: Network, p: np.ndarray) -> np.ndarray:
    return np.array([l.alpha for l in net.links]) * p


def priority_order(net: Network, p, tie_order: str = TIE_ASCENDING_ID) -> list[int]:
    """Link ids sorted by descending capacity-weighted price, deterministic ties."""
    w = capacity_weighted(net, as_price_vector(net, p))
    if tie_order == TIE_ASCENDING_ID:
        return sorted(range(len(net.links)), key=lambda i: (-w[i], i))
    if tie_order == TIE_REVERSED_ID:
        return sorted(range(len(net.links)), key=lambda i: (-w[i], -i))
    raise InputError(f"unknown tie order {tie_order!r}")


def schedule_weight(net: Network, links: Iterable[int], p) -> float:
    """Sum of alpha_l * p_l over the given links."""
    prices = as_price_vector(net, p)
    total = 0.0
    for l in sorted({net.link(l).id for l in links}):
        total += net.links[l].alpha * prices[l]
    return float(total)


@dataclass(frozen=True)
class ScheduleSet:
    """A scheduled set of links with its capacity-weighted price."""

    links: tuple[int, ...]
    weight: float
    indicator: tuple[float, ...]  # alpha_l where scheduled, 0 elsewhere

    @classmethod
    def from_links(cls, net: Network, links: Iterable[int], p) -> "ScheduleSet":
        ids = tuple(sorted({net.link(l).id for l in links}))
        ind = [0.0] * len(net.links)
        for l in ids:
            ind[l] = net.links[l].alpha
        return cls(ids, schedule_weight(net, ids, p), tuple(ind))

    @property
    def indicator_array(self) -> np.ndarray:
        return np.array(self.indicator)

    def names(self, net: Network) -> str:
        return " ".join(net.links[l].name for l in self.links)


def optimal_schedule(net: Network, k: int, p) -> ScheduleSet:
    """Max-weight maximal K-matching by exhaustive enumeration (guarded).

    Ties resolve to the lexicographically smallest sorted link-id tuple.
    """
    prices = as_price_vector(net, p)
    collection = enumerate_maximal_independent_sets(net, k)
    best = None
    best_weight = -1.0
    for s in collection.sets:  # lexicographic order, so first strict max wins ties
        w = schedule_weight(net, s, prices)
        if best is None or w > best_weight:
            best, best_weight = s, w
    return ScheduleSet.from_links(net, best, prices)


def centralized_greedy(net: Network, k: int, p, tie_order: str = TIE_ASCENDING_ID) -> ScheduleSet:
    """Greedy scheduler: scan links in priority order, keep every link that
    stays a valid K-matching with the ones already kept. Result is maximal."""
    prices = as_price_vector(net, p)
    chosen: list[int] = []
    mat = net._link_distance_matrix
    for l in priority_order(net, prices, tie_order):
        if all(mat[l][m] >= k for m in chosen):
            chosen.append(l)
    assert is_valid_k_matching(net, chosen, k)
    return ScheduleSet.from_links(net, chosen, prices)
