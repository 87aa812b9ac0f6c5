"""Deterministic test-corpus graphs."""

from __future__ import annotations

import random

from .graph import Graph, GraphError


def complete(n: int) -> Graph:
    full = (1 << n) - 1
    return Graph(n, tuple(full ^ (1 << v) for v in range(n)))


def complete_minus_matching(n: int) -> Graph:
    """K_n without the edges {2k, 2k+1}; the last vertex stays full when n is odd."""
    rows = [((1 << n) - 1) ^ (1 << v) for v in range(n)]
    for k in range(n // 2):
        u, v = 2 * k, 2 * k + 1
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
    return Graph(n, tuple(rows))


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_minus_edges(n: int, missing) -> Graph:
    rows = [((1 << n) - 1) ^ (1 << v) for v in range(n)]
    for u, v in missing:
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
    return Graph(n, tuple(rows))


def gnp(n: int, p: float, seed: int) -> Graph:
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


def random_min_degree(n: int, delta: int, seed: int, p: float | None = None) -> Graph:
    """G(n, p) followed by a deterministic repair up to minimum degree ``delta``.

    While some vertex has degree below ``delta``, the lowest such vertex (by degree,
    then id) is joined to its lowest-degree non-neighbor (ties to the lowest id).
    """
    if n < 1 or not 0 <= delta < n:
        raise GraphError(f"need 0 <= delta < n, got n={n}, delta={delta}")
    if p is None:
        p = delta / (n - 1) if n > 1 else 0.0
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability {p} outside [0, 1]")
    rng = random.Random(seed)
    adj = [set() for _ in range(n)]
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                adj[u].add(v)
                adj[v].add(u)
    while True:
        low = [v for v in range(n) if len(adj[v]) < delta]
        if not low:
            break
        v = min(low, key=lambda w: (len(adj[w]), w))
        partners = [u for u in range(n) if u != v and u not in adj[v]]
        u = min(partners, key=lambda w: (len(adj[w]), w))
        adj[u].add(v)
        adj[v].add(u)
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in adj[u] if u < v])
