"""Dense simple graphs on bitset rows, clique enumeration and common-neighbor density."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np

MAX_VERTICES = int(os.environ.get("K4FRAC_MAX_VERTICES", "4096"))

OrderedClique = tuple[int, ...]
Edge = tuple[int, int]


class GraphError(ValueError):
    pass


class EdgeListError(GraphError):
    """Malformed edge-list input."""


class NotACliqueError(GraphError):
    pass


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class VertexSet:
    """Subset of ``range(n)`` stored as an integer bitset."""

    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise GraphError(f"vertex set has bits outside 0..{self.n - 1}")

    @classmethod
    def of(cls, n: int, vertices: Iterable[int]) -> "VertexSet":
        return cls(mask_of(vertices), n)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.bits >> v & 1)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits & other.bits, self.n)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits | other.bits, self.n)

    def issubset(self, other: "VertexSet") -> bool:
        return self.bits & ~other.bits == 0

    def sorted(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.bits))

    def __repr__(self) -> str:
        return f"VertexSet({list(self)}, n={self.n})"


VertexLike = Union[VertexSet, Iterable[int]]


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph; ``rows[v]`` is the neighbor bitset of ``v``."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("a graph needs at least one vertex")
        if self.n > MAX_VERTICES:
            raise GraphError(f"n={self.n} exceeds the vertex cap {MAX_VERTICES}")
        if len(self.rows) != self.n:
            raise GraphError("one adjacency row per vertex is required")
        full = (1 << self.n) - 1
        for v, row in enumerate(self.rows):
            if row & ~full or row < 0:
                raise GraphError(f"row {v} has bits outside the vertex range")
            if row >> v & 1:
                raise GraphError(f"self-loop at vertex {v}")
            for u in iter_bits(row):
                if not self.rows[u] >> v & 1:
                    raise GraphError(f"adjacency not symmetric on {{{u}, {v}}}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {{{u}, {v}}} outside 0..{n - 1}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        a = np.asarray(matrix, dtype=bool)
        n = a.shape[0]
        rows = tuple(mask_of(np.flatnonzero(a[v]).tolist()) for v in range(n))
        return cls(n, rows)

    @property
    def vertices(self) -> VertexSet:
        return VertexSet((1 << self.n) - 1, self.n)

    def neighbors(self, v: int) -> VertexSet:
        return VertexSet(self.rows[v], self.n)

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> Iterator[Edge]:
        """Edges as ``(u, v)`` with ``u < v``, lexicographically."""
        for u in range(self.n):
            for v in iter_bits(self.rows[u] >> (u + 1)):
                yield (u, u + 1 + v)

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        if len(set(vs)) != len(vs):
            return False
        for i, u in enumerate(vs):
            if not 0 <= u < self.n:
                return False
            for v in vs[i + 1:]:
                if not self.rows[u] >> v & 1:
                    return False
        return True

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            a[u, v] = a[v, u] = True
        return a

    @cached_property
    def words(self) -> np.ndarray:
        """Rows packed into little-endian uint64 words, shape ``(n, ceil(n/64))``."""
        nw = (self.n + 63) // 64
        out = np.zeros((self.n, nw), dtype=np.uint64)
        lo = (1 << 64) - 1
        for v, row in enumerate(self.rows):
            for w in range(nw):
                out[v, w] = (row >> (64 * w)) & lo
        return out


def _as_mask(g: Graph, s: VertexLike) -> int:
    if isinstance(s, VertexSet):
        if s.n != g.n:
            raise GraphError("vertex set belongs to a graph of different order")
        return s.bits
    m = mask_of(s)
    if m >> g.n:
        raise GraphError("vertex set not contained in V(G)")
    return m


def neighborhood_mask(g: Graph, mask: int) -> int:
    """Bitset of common neighbors of the vertices in ``mask``; all of V for the empty set."""
    out = (1 << g.n) - 1
    rows = g.rows
    while mask:
        low = mask & -mask
        out &= rows[low.bit_length() - 1]
        mask ^= low
    return out


def common_neighbors(g: Graph, s: VertexLike) -> VertexSet:
    return VertexSet(neighborhood_mask(g, _as_mask(g, s)), g.n)


def density_hat(g: Graph, s: VertexLike) -> Fraction:
    """|N(S)| / n as an exact fraction, with the empty set mapping to 1."""
    return Fraction(neighborhood_mask(g, _as_mask(g, s)).bit_count(), g.n)


def min_degree(g: Graph) -> int:
    return min(r.bit_count() for r in g.rows)


def degree_deficiency(g: Graph) -> Fraction:
    """``1 - delta(G)/n``."""
    return 1 - Fraction(min_degree(g), g.n)


def exceeds_four_fifths(g: Graph) -> bool:
    """delta(G) > 4n/5, the regime where all clique weights are defined."""
    return 5 * min_degree(g) > 4 * g.n


def _extend(rows, clique: list[int], cand: int, need: int) -> Iterator[OrderedClique]:
    if need == 0:
        yield tuple(clique)
        return
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        # only vertices above v remain available, which keeps the output sorted
        nxt = cand & rows[v]
        if need - 1 > nxt.bit_count():
            continue
        clique.append(v)
        yield from _extend(rows, clique, nxt, need - 1)
        clique.pop()


def enumerate_cliques(g: Graph, r: int) -> Iterator[OrderedClique]:
    """Every ``r``-clique once, as a sorted tuple, in lexicographic order."""
    if not 2 <= r <= 6:
        raise GraphError("clique size must lie in 2..6")
    yield from _extend(g.rows, [], (1 << g.n) - 1, r)


def cliques_containing(g: Graph, r: int, s: VertexLike) -> Iterator[OrderedClique]:
    """The ``r``-cliques whose vertex set contains the clique ``s``."""
    if not 2 <= r <= 6:
        raise GraphError("clique size must lie in 2..6")
    smask = _as_mask(g, s)
    base = list(iter_bits(smask))
    if len(base) > r:
        raise GraphError("seed set larger than the requested clique size")
    if not g.is_clique(base):
        raise NotACliqueError(f"{base} is not a clique")
    cand = neighborhood_mask(g, smask) & ~smask
    found = []
    for extra in _extend(g.rows, [], cand, r - len(base)):
        found.append(tuple(sorted(base + list(extra))))
    found.sort()
    yield from found


def check_clique(g: Graph, vertices: Iterable[int], sizes=range(2, 7)) -> OrderedClique:
    k = tuple(int(v) for v in vertices)
    if len(k) not in sizes:
        raise GraphError(f"clique of size {len(k)} not allowed here")
    if not g.is_clique(k):
        raise NotACliqueError(f"{k} is not a clique")
    return k


# ---------------------------------------------------------------- edge lists

def parse_edge_list(text: str) -> Graph:
    """Parse whitespace-separated 0-based edges; ``#`` lines are comments.

    The first non-comment line may read ``n <count>`` to fix the vertex count.
    """
    declared = None
    edges: list[Edge] = []
    first = True
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if first and parts[0] == "n":
            first = False
            if len(parts) != 2:
                raise EdgeListError(f"line {lineno}: expected 'n <count>'")
            try:
                declared = int(parts[1])
            except ValueError:
                raise EdgeListError(f"line {lineno}: bad vertex count {parts[1]!r}") from None
            if declared < 1:
                raise EdgeListError(f"line {lineno}: vertex count must be positive")
            continue
        first = False
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected two vertex ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer vertex id in {line!r}") from None
        if u < 0 or v < 0:
            raise EdgeListError(f"line {lineno}: negative vertex id")
        if u == v:
            raise EdgeListError(f"line {lineno}: self-loop at {u}")
        edges.append((u, v))
    top = max((max(e) for e in edges), default=-1) + 1
    if declared is not None and top > declared:
        raise EdgeListError(f"edge endpoint {top - 1} exceeds declared n={declared}")
    n = declared if declared is not None else top
    if n < 1:
        raise EdgeListError("empty edge list without a vertex count")
    try:
        return Graph.from_edges(n, edges)
    except GraphError as exc:
        raise EdgeListError(str(exc)) from None


def read_edge_list(path: Union[str, Path]) -> Graph:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Graph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"n {g.n}")
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def ordered_cliques(g: Graph, r: int) -> Iterator[OrderedClique]:
    """All orderings of all ``r``-cliques."""
    for k in enumerate_cliques(g, r):
        yield from itertools.permutations(k)
