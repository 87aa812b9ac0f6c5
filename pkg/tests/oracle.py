"""Brute-force reference implementations used only by the tests.

Nothing here imports the package's weight or clique code; graphs are plain
adjacency sets so every quantity is recomputed from first principles.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def adjacency_sets(n: int, edges) -> list[set[int]]:
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def cliques(adj, r: int) -> list[tuple[int, ...]]:
    """Nested-loop scan over all r-subsets."""
    n = len(adj)
    return [c for c in itertools.combinations(range(n), r)
            if all(b in adj[a] for a, b in itertools.combinations(c, 2))]


def common(adj, vs) -> set[int]:
    out = set(range(len(adj)))
    for v in vs:
        out &= adj[v]
    return out


def ordered_weight(adj, seq) -> Fraction:
    w = Fraction(1)
    for i in range(2, len(seq) + 1):
        w /= len(common(adj, seq[:i]))
    return w


def psi(k6, e, t) -> Fraction:
    if not set(t) <= set(k6):
        return Fraction(0)
    hits = len(set(e) & set(t))
    return {0: Fraction(1, 2), 1: Fraction(-1, 6), 2: Fraction(1, 6)}[hits]


def k4_weights(adj) -> dict[tuple[int, ...], Fraction]:
    """W_G(T) straight from the ordered 6-clique definition.

    Each ordered weight is an integer over lcm(1..n)**4, so the sweep stays in ints.
    """
    n = len(adj)
    scale = math.lcm(*range(1, n + 1)) ** 4
    acc = {t: 0 for t in cliques(adj, 4)}
    sixes = cliques(adj, 6)
    for k in sixes:
        quads = list(itertools.combinations(k, 4))
        for seq in itertools.permutations(k):
            den = 1
            for i in range(2, 6):
                den *= len(common(adj, seq[:i]))
            w = scale // den
            e = {seq[0], seq[1]}
            for t in quads:
                hits = len(e.intersection(t))
                acc[t] += w * (3, -1, 1)[hits]
    return {t: Fraction(v, 6 * 2 * scale) for t, v in acc.items()}


def ordered_k4_weight(adj, o) -> Fraction:
    """W_G(O): ordered 6-cliques that contain ``o`` as an ordered subsequence."""
    rest = common(adj, o)
    total = Fraction(0)
    for y, z in itertools.permutations(sorted(rest), 2):
        if z not in adj[y]:
            continue
        for slots in itertools.combinations(range(6), 2):
            seq, it = [], iter(o)
            for i in range(6):
                seq.append((y, z)[slots.index(i)] if i in slots else next(it))
            total += ordered_weight(adj, seq[:5]) * psi(seq, seq[:2], o)
    return total / 2


def gadget_sum(adj, k6, e, f) -> Fraction:
    return sum((psi(k6, e, t) for t in cliques(adj, 4) if set(f) <= set(t)), Fraction(0))
