"""Edge-gadgets and the explicit K4 weighting built from ordered 6-cliques.

Every quantity here is exact. Inner loops carry integer numerators over the
common denominator ``lcm(1..n)**4`` (every neighborhood size divides
``lcm(1..n)``), and results are handed back as ``Fraction``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .graph import (
    Edge,
    Graph,
    GraphError,
    OrderedClique,
    check_clique,
    cliques_containing,
    enumerate_cliques,
    exceeds_four_fifths,
    iter_bits,
    mask_of,
    min_degree,
    neighborhood_mask,
)

Number = Union[Fraction, float]

# 6 * psi for the three cases |e ∩ V(T)| = 0, 1, 2
_PSI6 = (3, -1, 1)


class DegreeTooLow(GraphError):
    """Minimum degree at most 4n/5, so the clique weights are undefined."""

    def __init__(self, delta: int, n: int, detail: str = ""):
        self.delta, self.n = delta, n
        msg = f"minimum degree {delta} is not above 4n/5 = {Fraction(4 * n, 5)}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class EmptyNeighborhood(DegreeTooLow):
    pass


class NegativeWeight(GraphError):
    """The construction is well defined but some K4 receives negative weight."""

    def __init__(self, k4: OrderedClique, value: Number, result: "K4WeightMap"):
        self.k4, self.value, self.result = k4, value, result
        super().__init__(f"K4 {k4} has negative weight {value}")


class InconsistentWeights(AssertionError):
    """Two evaluation routes of the same quantity disagree."""


def canonical_edge(u: int, v: int) -> Edge:
    if u == v:
        raise GraphError("an edge needs two distinct endpoints")
    return (u, v) if u < v else (v, u)


# ------------------------------------------------------------------ gadgets

def psi(g: Graph, k6: Iterable[int], e: Iterable[int], t: Iterable[int]) -> Fraction:
    """Edge-gadget value of the K4 ``t`` for the edge ``e`` inside the 6-clique ``k6``."""
    k = check_clique(g, k6, sizes=(6,))
    eu, ev = canonical_edge(*e)
    if eu not in k or ev not in k:
        raise GraphError(f"{(eu, ev)} is not an edge of {k}")
    tt = check_clique(g, t, sizes=(4,))
    if not set(tt) <= set(k):
        return Fraction(0)
    return Fraction(_PSI6[(eu in tt) + (ev in tt)], 6)


def gadget_edge_sum(g: Graph, k6: Iterable[int], e: Iterable[int], f: Iterable[int]) -> Fraction:
    """Sum of the gadget over all K4s of ``g`` through the edge ``f``."""
    k = check_clique(g, k6, sizes=(6,))
    fu, fv = canonical_edge(*f)
    if not g.has_edge(fu, fv):
        raise GraphError(f"{(fu, fv)} is not an edge of the graph")
    return sum((psi(g, k, e, t) for t in cliques_containing(g, 4, (fu, fv))), Fraction(0))


@dataclass(frozen=True)
class _K4Incidence:
    k4s: np.ndarray          # (m, 4) sorted vertex ids
    edges: list[Edge]
    incidence: np.ndarray    # (m, |E|) 0/1


@lru_cache(maxsize=16)
def _incidence(g: Graph) -> _K4Incidence:
    k4s = np.array(list(enumerate_cliques(g, 4)), dtype=np.int64).reshape(-1, 4)
    edges = list(g.edges())
    index = {e: i for i, e in enumerate(edges)}
    inc = np.zeros((len(k4s), len(edges)), dtype=np.int64)
    for row, t in enumerate(k4s.tolist()):
        for u, v in itertools.combinations(t, 2):
            inc[row, index[(u, v)]] = 1
    return _K4Incidence(k4s, edges, inc)


def gadget_edge_sums(g: Graph, k6: Iterable[int], e: Iterable[int]) -> dict[Edge, Fraction]:
    """``gadget_edge_sum`` for every edge at once.

    The gadget is tabulated over all of K4(G) (scaled by 6, so integer) and pushed
    through the K4-edge incidence matrix; the arithmetic stays exact.
    """
    k = check_clique(g, k6, sizes=(6,))
    eu, ev = canonical_edge(*e)
    if eu not in k or ev not in k:
        raise GraphError(f"{(eu, ev)} is not an edge of {k}")
    inc = _incidence(g)
    if len(inc.k4s) == 0:
        return {f: Fraction(0) for f in inc.edges}
    inside = np.isin(inc.k4s, k).all(axis=1)
    hits = np.isin(inc.k4s, (eu, ev)).sum(axis=1)
    psi6 = np.where(inside, np.choose(hits, _PSI6), 0).astype(np.int64)
    sums6 = psi6 @ inc.incidence
    return {f: Fraction(int(s), 6) for f, s in zip(inc.edges, sums6)}


# ------------------------------------------------------------------ weights

def weight_ordered(g: Graph, k: Iterable[int]) -> Fraction:
    """Product over prefixes of the reciprocal common-neighborhood size."""
    kk = check_clique(g, k, sizes=(2, 3, 4, 5))
    out = Fraction(1)
    mask = 1 << kk[0]
    for i, v in enumerate(kk[1:], 2):
        mask |= 1 << v
        c = neighborhood_mask(g, mask).bit_count()
        if c == 0:
            raise EmptyNeighborhood(min_degree(g), g.n, f"N{kk[:i]} is empty")
        out /= c
    return out


def weight_scaled(g: Graph, k: Iterable[int]) -> Fraction:
    """``n**(r-1)`` times the ordered weight, i.e. a product of reciprocal densities."""
    kk = tuple(k)
    return g.n ** (len(kk) - 1) * weight_ordered(g, kk)


class ScaledWeights:
    """Ordered weights as integers over the common denominator ``L**4``, L = lcm(1..n)."""

    def __init__(self, g: Graph):
        self.g = g
        self.L = math.lcm(*range(1, g.n + 1))
        self.scale = self.L ** 4
        self.inv = [0] + [self.L // c for c in range(1, g.n + 1)]
        self._count: dict[int, int] = {}

    def count(self, mask: int) -> int:
        c = self._count.get(mask)
        if c is None:
            c = self._count[mask] = neighborhood_mask(self.g, mask).bit_count()
        return c

    def num(self, seq) -> int:
        """``W(seq) * L**4`` for an ordered clique of length 1..5."""
        prod = 1
        mask = 1 << seq[0]
        for v in seq[1:]:
            mask |= 1 << v
            c = self.count(mask)
            if c == 0:
                raise EmptyNeighborhood(min_degree(self.g), self.g.n, f"N{tuple(seq)} is empty")
            prod *= self.inv[c]
        return prod * self.L ** (5 - len(seq))


@lru_cache(maxsize=8)
def _scaled(g: Graph) -> ScaledWeights:
    return ScaledWeights(g)


def _require_dense(g: Graph) -> None:
    if not exceeds_four_fifths(g):
        raise DegreeTooLow(min_degree(g), g.n)


def _interleavings(o: OrderedClique, y: int, z: int):
    """Orderings of o + (y, z) that keep o in order and put y before z."""
    for i, j in itertools.combinations(range(6), 2):
        rest = iter(o)
        yield tuple(y if s == i else z if s == j else next(rest) for s in range(6))


def _definition_num(sw: ScaledWeights, o: OrderedClique) -> int:
    """``12 * L**4 * W_G(O)`` from the sum over ordered 6-cliques containing O in order."""
    g = sw.g
    tmask = mask_of(o)
    r = neighborhood_mask(g, tmask)
    total = 0
    for y in iter_bits(r):
        for z in iter_bits(r & g.rows[y]):
            for seq in _interleavings(o, y, z):
                hits = (seq[0] in o) + (seq[1] in o)
                total += sw.num(seq[:5]) * _PSI6[hits]
    return total


def _double_sum_num(sw: ScaledWeights, o: OrderedClique) -> tuple[int, int]:
    """``(L**4 W(x1,x2,x3), L**4 * S)`` with ``W'_G(O) = S / W(x1,x2,x3)``.

    S is the regrouped sum over y in R = N(O) and z in N(y) ∩ R.
    """
    g = sw.g
    x1, x2, x3, _ = o
    w = sw.num
    r = neighborhood_mask(g, mask_of(o))
    s = 0
    for y in iter_bits(r):
        s += 2 * w((x1, y, x2, x3)) - w((x1, x2, x3, y)) - w((x1, x2, y, x3))
        for z in iter_bits(r & g.rows[y]):
            s += (2 * w((x1, y, x2, x3, z)) + 2 * w((x1, y, x2, z, x3)) + 2 * w((x1, y, z, x2, x3))
                  - w((x1, x2, x3, y, z)) - w((x1, x2, y, x3, z)) - w((x1, x2, y, z, x3))
                  - 3 * w((y, z, x1, x2, x3)))
    return w((x1, x2, x3)), s


def weight_ordered_k4(g: Graph, o: Iterable[int], method: str = "closed") -> Fraction:
    """Weight of an ordered K4.

    ``method="definition"`` sums over ordered 6-cliques containing ``o`` as an
    ordered subsequence; ``"closed"`` uses the regrouped y/z double sum.
    """
    oo = check_clique(g, o, sizes=(4,))
    _require_dense(g)
    sw = _scaled(g)
    if method == "definition":
        return Fraction(_definition_num(sw, oo), 12 * sw.scale)
    if method == "closed":
        w3, s = _double_sum_num(sw, oo)
        return Fraction(w3 - s, 12 * sw.scale)
    raise ValueError(f"unknown method {method!r}")


def w_prime(g: Graph, o: Iterable[int], method: str = "both") -> Fraction:
    """``1 - 12 W_G(O) / W(x1,x2,x3)``.

    ``"definition"`` goes through ``weight_ordered_k4(..., "definition")``,
    ``"double_sum"`` evaluates the regrouped sum directly, ``"both"`` computes
    the two and raises ``InconsistentWeights`` if they differ.
    """
    oo = check_clique(g, o, sizes=(4,))
    _require_dense(g)
    sw = _scaled(g)
    w3 = sw.num(oo[:3])
    results = []
    if method in ("definition", "both"):
        results.append(1 - Fraction(_definition_num(sw, oo), w3))
    if method in ("double_sum", "both"):
        _, s = _double_sum_num(sw, oo)
        results.append(Fraction(s, w3))
    if not results:
        raise ValueError(f"unknown method {method!r}")
    if len(results) == 2 and results[0] != results[1]:
        raise InconsistentWeights(f"W' of {oo}: definition {results[0]} != double sum {results[1]}")
    return results[0]


def weight_k4(g: Graph, t: Iterable[int], method: str = "closed") -> Fraction:
    """Weight of the unordered K4 ``t``.

    ``"closed"`` adds the 24 ordered weights; ``"definition"`` sums the gadget over
    every ordering of every 6-clique containing ``t``.
    """
    tt = tuple(sorted(check_clique(g, t, sizes=(4,))))
    _require_dense(g)
    sw = _scaled(g)
    if method == "closed":
        total = 0
        for o in itertools.permutations(tt):
            w3, s = _double_sum_num(sw, o)
            total += w3 - s
        return Fraction(total, 12 * sw.scale)
    if method == "definition":
        r = neighborhood_mask(g, mask_of(tt))
        total = 0
        for y in iter_bits(r):
            for z in iter_bits(r & g.rows[y] & ~((2 << y) - 1)):
                for seq in itertools.permutations(tt + (y, z)):
                    hits = (seq[0] in tt) + (seq[1] in tt)
                    total += sw.num(seq[:5]) * _PSI6[hits]
        return Fraction(total, 12 * sw.scale)
    raise ValueError(f"unknown method {method!r}")


# ------------------------------------------------------------ full sweeps

def _to_tuple(mask: int) -> OrderedClique:
    return tuple(iter_bits(mask))


def _finish(g: Graph, acc: dict[int, int], denom: int) -> dict[OrderedClique, Fraction]:
    out = {t: Fraction(0) for t in enumerate_cliques(g, 4)}
    for m, v in acc.items():
        out[_to_tuple(m)] = Fraction(v, denom)
    return out


def k4_weights_naive(g: Graph) -> dict[OrderedClique, Fraction]:
    """All K4 weights by sweeping every ordered 6-clique (reference path, small n only)."""
    _require_dense(g)
    sw = _scaled(g)
    rows = g.rows
    acc: dict[int, int] = {}
    full = (1 << g.n) - 1
    for v1 in range(g.n):
        for v2 in iter_bits(rows[v1]):
            m2 = rows[v1] & rows[v2]
            for v3 in iter_bits(m2):
                m3 = m2 & rows[v3]
                for v4 in iter_bits(m3):
                    m4 = m3 & rows[v4]
                    for v5 in iter_bits(m4):
                        m5 = m4 & rows[v5]
                        if not m5:
                            continue
                        w = sw.num((v1, v2, v3, v4, v5))
                        e = (1 << v1) | (1 << v2)
                        base = e | (1 << v3) | (1 << v4) | (1 << v5)
                        for v6 in iter_bits(m5 & full):
                            kmask = base | (1 << v6)
                            for a, b in itertools.combinations(iter_bits(kmask), 2):
                                pair = (1 << a) | (1 << b)
                                hits = 2 - ((pair & e).bit_count())
                                tm = kmask ^ pair
                                acc[tm] = acc.get(tm, 0) + w * _PSI6[hits]
    return _finish(g, acc, 12 * sw.scale)


def k4_weights_grouped(g: Graph) -> dict[OrderedClique, Fraction]:
    """Same sum as ``k4_weights_naive`` but grouped by unordered 6-clique."""
    _require_dense(g)
    sw = _scaled(g)
    acc: dict[int, int] = {}
    for k in enumerate_cliques(g, 6):
        kmask = mask_of(k)
        sub = {}
        for seq in itertools.permutations(k):
            w = sw.num(seq[:5])
            e = (1 << seq[0]) | (1 << seq[1])
            sub[e] = sub.get(e, 0) + w
        for e, w in sub.items():
            for a, b in itertools.combinations(k, 2):
                pair = (1 << a) | (1 << b)
                hits = 2 - (pair & e).bit_count()
                tm = kmask ^ pair
                acc[tm] = acc.get(tm, 0) + w * _PSI6[hits]
    return _finish(g, acc, 12 * sw.scale)


def k4_weights_exact(g: Graph) -> dict[OrderedClique, Fraction]:
    """All K4 weights via the regrouped double sum, one ordered triple at a time.

    For a fixed prefix (x1, x2, x3) the y- and (y, z)-terms do not depend on x4,
    which only selects R = N(x1..x4); they are tabulated once per prefix.
    """
    _require_dense(g)
    sw = _scaled(g)
    rows, inv, L = g.rows, sw.inv, sw.L
    L2 = L * L
    acc: dict[int, int] = {}
    for x1 in range(g.n):
        m1 = rows[x1]
        for x2 in iter_bits(m1):
            m12 = m1 & rows[x2]
            i12 = inv[m12.bit_count()]
            for x3 in iter_bits(m12):
                m123 = m12 & rows[x3]
                if not m123:
                    continue
                i123 = inv[m123.bit_count()]
                base = i12 * i123 * L2
                a_term: dict[int, int] = {}
                b_term: dict[int, dict[int, int]] = {}
                for y in iter_bits(m123):
                    ry = rows[y]
                    i1y = inv[(m1 & ry).bit_count()]
                    i12y = inv[(m12 & ry).bit_count()]
                    i123y = inv[(m123 & ry).bit_count()]
                    a_term[y] = L * (2 * i1y * i12y * i123y - i12 * i123 * i123y - i12 * i12y * i123y)
                    by = b_term[y] = {}
                    for z in iter_bits(m123 & ry):
                        ryz = ry & rows[z]
                        i1yz = inv[(m1 & ryz).bit_count()]
                        i12yz = inv[(m12 & ryz).bit_count()]
                        i123yz = inv[(m123 & ryz).bit_count()]
                        iyz = inv[ryz.bit_count()]
                        by[z] = i123yz * (
                            2 * i1y * i12y * i123y + 2 * i1y * i12y * i12yz + 2 * i1y * i1yz * i12yz
                            - i12 * i123 * i123y - i12 * i12y * i123y - i12 * i12y * i12yz
                            - 3 * iyz * i1yz * i12yz)
                prefix = (1 << x1) | (1 << x2) | (1 << x3)
                for x4 in iter_bits(m123):
                    r = m123 & rows[x4]
                    s = 0
                    for y in iter_bits(r):
                        s += a_term[y]
                        by = b_term[y]
                        for z in iter_bits(r & rows[y]):
                            s += by[z]
                    tm = prefix | (1 << x4)
                    acc[tm] = acc.get(tm, 0) + base - s
    return _finish(g, acc, 12 * sw.scale)


def edge_sums(g: Graph, weights: dict[OrderedClique, Number]) -> dict[Edge, Number]:
    """Total weight through each edge (edges in no K4 get 0)."""
    zero = Fraction(0) if any(isinstance(v, Fraction) for v in weights.values()) else 0.0
    out: dict[Edge, Number] = {e: zero for e in g.edges()}
    for t, w in weights.items():
        for u, v in itertools.combinations(t, 2):
            out[(u, v)] += w
    return out


# -------------------------------------------------------- decomposition

@dataclass
class K4WeightMap:
    """K4 weights plus the summary numbers reported about them."""

    n: int
    min_degree: int
    weights: dict[OrderedClique, Number]
    exact: bool
    edge_sums: dict[Edge, Number]
    min_weight: Number
    argmin: OrderedClique | None
    max_edge_deviation: Number
    valid: bool
    exact_checks: dict[OrderedClique, Fraction] = field(default_factory=dict)

    def format(self) -> str:
        return format_k4_weights(self)


def _summarise(g: Graph, weights, exact: bool, exact_checks=None) -> K4WeightMap:
    sums = edge_sums(g, weights)
    one = Fraction(1) if exact else 1.0
    dev = max((abs(s - one) for s in sums.values()), default=one - one)
    if weights:
        argmin = min(weights, key=lambda t: (weights[t], t))
        low = weights[argmin]
    else:
        argmin, low = None, one - one
    return K4WeightMap(g.n, min_degree(g), weights, exact, sums, low, argmin, dev,
                       valid=False, exact_checks=dict(exact_checks or {}))


def fractional_k4_decomposition(
    g: Graph,
    mode: str = "exact",
    exact_checks: int = 20,
    seed: int = 0,
    tol: float = 1e-9,
) -> K4WeightMap:
    """Compute every K4 weight and decide whether they form a fractional decomposition.

    ``mode="exact"`` works in rationals throughout. ``mode="float"`` runs the float
    kernel and then recomputes exactly the lowest-weight K4 plus ``exact_checks``
    randomly chosen K4s (seeded); those exact values decide the sign verdict.
    Raises ``DegreeTooLow`` or ``NegativeWeight``.
    """
    _require_dense(g)
    if mode == "exact":
        result = _summarise(g, k4_weights_exact(g), exact=True)
        if result.argmin is not None and result.min_weight < 0:
            raise NegativeWeight(result.argmin, result.min_weight, result)
        result.valid = result.max_edge_deviation == 0
        return result
    if mode != "float":
        raise ValueError(f"unknown mode {mode!r}")

    from .kernels import k4_weight_sweep

    k4s, values = k4_weight_sweep(g)
    weights = {tuple(int(v) for v in t): float(w) for t, w in zip(k4s.tolist(), values)}
    result = _summarise(g, weights, exact=False)
    chosen: list[OrderedClique] = []
    if result.argmin is not None:
        chosen.append(result.argmin)
        rng = random.Random(seed)
        pool = sorted(weights)
        chosen.extend(rng.sample(pool, min(exact_checks, len(pool))))
    checks = {}
    for t in dict.fromkeys(chosen):
        checks[t] = weight_k4(g, t)
        if checks[t] < 0:
            result.exact_checks = checks
            raise NegativeWeight(t, checks[t], result)
    result.exact_checks = checks
    if result.min_weight < -tol:
        raise NegativeWeight(result.argmin, result.min_weight, result)
    result.valid = result.max_edge_deviation <= tol
    return result


# ------------------------------------------------------------ serialization

def _fmt(v: Number) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _parse_number(s: str) -> Number:
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    try:
        return Fraction(int(s))
    except ValueError:
        return float(s)


def format_k4_weights(m: K4WeightMap) -> str:
    lines = [
        "# k4 weights: a b c d weight",
        f"n={m.n} min_degree={m.min_degree} min_weight={_fmt(m.min_weight)} "
        f"max_edge_sum_deviation={_fmt(m.max_edge_deviation)}",
    ]
    lines.extend(" ".join(map(str, t)) + " " + _fmt(w) for t, w in sorted(m.weights.items()))
    return "\n".join(lines) + "\n"


def parse_k4_weights(text: str) -> tuple[dict[str, Number], dict[OrderedClique, Number]]:
    """Inverse of ``format_k4_weights``: (header fields, weights)."""
    header: dict[str, Number] = {}
    weights: dict[OrderedClique, Number] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            for item in line.split():
                k, v = item.split("=")
                header[k] = int(v) if k in ("n", "min_degree") else _parse_number(v)
            continue
        *vs, w = line.split()
        weights[tuple(int(v) for v in vs)] = _parse_number(w)
    return header, weights
