"""Seeded random instances for property checks and fuzzing."""
from __future__ import annotations

import numpy as np

from .model import ENUMERATION_GUARD, Network
from .utility import LOG1P, QUADRATIC


def random_connected_network(seed: int, max_links: int = 20, max_flows: int = 3,
                             allow_partial_alpha: bool = True) -> tuple[Network, int]:
    """Draw a connected directed network, a K in {1, 2, 3}, and a handful of
    flows with reachable endpoints. Sized to stay within the enumeration
    guard so oracle comparisons are always available."""
    ss = np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    n_nodes = int(rng.integers(4, 9))
    nodes = list(range(1, n_nodes + 1))

    # spanning tree first so the underlying undirected graph is connected
    link_pairs: list[tuple[int, int]] = []
    seen_pairs: set[tuple[int, int]] = set()
    order = list(rng.permutation(nodes))
    for i in range(1, n_nodes):
        a = int(order[int(rng.integers(0, i))])
        b = int(order[i])
        tail, head = (a, b) if rng.random() < 0.5 else (b, a)
        link_pairs.append((tail, head))
        seen_pairs.add((tail, head))

    cap = min(max_links, ENUMERATION_GUARD)
    n_links = int(rng.integers(len(link_pairs), cap + 1))
    attempts = 0
    while len(link_pairs) < n_links and attempts < 200:
        attempts += 1
        a, b = (int(v) for v in rng.choice(nodes, size=2, replace=False))
        if (a, b) in seen_pairs:
            continue
        link_pairs.append((a, b))
        seen_pairs.add((a, b))

    if allow_partial_alpha and rng.random() < 0.5:
        alphas = rng.uniform(0.2, 1.0, size=len(link_pairs))
        alphas[int(rng.integers(0, len(link_pairs)))] = 1.0
    else:
        alphas = np.ones(len(link_pairs))
    links = [(t, h, float(a)) for (t, h), a in zip(link_pairs, alphas)]

    k = int(rng.integers(1, 4))

    probe = Network.build(nodes, links)
    flows = []
    n_flows = int(rng.integers(1, max_flows + 1))
    for _ in range(n_flows):
        for _attempt in range(50):
            s, d = (int(v) for v in rng.choice(nodes, size=2, replace=False))
            if d in probe.directed_reachable(s):
                kind = LOG1P if rng.random() < 0.5 else QUADRATIC
                weight = float(rng.uniform(0.5, 3.0))
                flows.append((s, d, kind, weight))
                break

    net = Network.build(nodes, links, flows)
    return net, k


def random_prices(rng: np.random.Generator, n_links: int) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=n_links)
