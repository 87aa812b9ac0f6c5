"""Float sweep computing every K4 weight through the regrouped double sum.

For a fixed ordered prefix (x1, x2, x3) with M = N(x1, x2, x3), the y-terms
``A[y]`` and (y, z)-terms ``B[y, z]`` do not depend on x4; x4 only restricts
y, z to its neighbors. So per prefix::

    S[x4] = sum_y adj(x4, y) A[y] + sum_{y, z} adj(x4, y) adj(x4, z) adj(y, z) B[y, z]

and the ordered weight is ``(W(x1, x2, x3) - S[x4]) / 12``.

Two backends share that layout: a numba kernel over packed uint64 rows and a
numpy version built on small matrix products. ``K4FRAC_DISABLE_NUMBA=1``
selects the numpy path.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit
from .graph import Graph, enumerate_cliques

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1, _S2, _S4, _S56 = np.uint64(1), np.uint64(2), np.uint64(4), np.uint64(56)


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return (x * _H01) >> _S56


@njit(cache=True)
def _pc2(a, b):
    s = 0
    for k in range(a.shape[0]):
        s += _popcount(a[k] & b[k])
    return s


@njit(cache=True)
def _pc3(a, b, c):
    s = 0
    for k in range(a.shape[0]):
        s += _popcount(a[k] & b[k] & c[k])
    return s


@njit(cache=True)
def _sweep_numba(words, adj, codes, out):
    n, nw = words.shape
    inv = np.zeros(n + 1)
    for c in range(1, n + 1):
        inv[c] = 1.0 / c
    m12 = np.empty(nw, dtype=np.uint64)
    m123 = np.empty(nw, dtype=np.uint64)
    members = np.empty(n, dtype=np.int64)
    a_term = np.empty(n)
    b_term = np.zeros((n, n))
    quad = np.empty(4, dtype=np.int64)
    for x1 in range(n):
        m1 = words[x1]
        for x2 in range(n):
            if not adj[x1, x2]:
                continue
            for k in range(nw):
                m12[k] = m1[k] & words[x2, k]
            i12 = inv[_pc2(m12, m12)]
            for x3 in range(n):
                if not (adj[x1, x3] and adj[x2, x3]):
                    continue
                for k in range(nw):
                    m123[k] = m12[k] & words[x3, k]
                m = 0
                for v in range(n):
                    if adj[x1, v] and adj[x2, v] and adj[x3, v]:
                        members[m] = v
                        m += 1
                if m == 0:
                    continue
                i123 = inv[m]
                for yi in range(m):
                    y = members[yi]
                    wy = words[y]
                    i1y = inv[_pc2(m1, wy)]
                    i12y = inv[_pc2(m12, wy)]
                    i123y = inv[_pc2(m123, wy)]
                    a_term[yi] = 2 * i1y * i12y * i123y - i12 * i123 * i123y - i12 * i12y * i123y
                    for zi in range(m):
                        z = members[zi]
                        if not adj[y, z]:
                            b_term[yi, zi] = 0.0
                            continue
                        wz = words[z]
                        i1yz = inv[_pc3(m1, wy, wz)]
                        i12yz = inv[_pc3(m12, wy, wz)]
                        i123yz = inv[_pc3(m123, wy, wz)]
                        iyz = inv[_pc2(wy, wz)]
                        b_term[yi, zi] = i123yz * (
                            2 * i1y * i12y * i123y + 2 * i1y * i12y * i12yz + 2 * i1y * i1yz * i12yz
                            - i12 * i123 * i123y - i12 * i12y * i123y - i12 * i12y * i12yz
                            - 3 * iyz * i1yz * i12yz)
                base = i12 * i123
                for xi in range(m):
                    x4 = members[xi]
                    s = 0.0
                    for yi in range(m):
                        if not adj[x4, members[yi]]:
                            continue
                        s += a_term[yi]
                        for zi in range(m):
                            if adj[x4, members[zi]]:
                                s += b_term[yi, zi]
                    quad[0], quad[1], quad[2], quad[3] = x1, x2, x3, x4
                    quad.sort()
                    code = ((quad[0] * n + quad[1]) * n + quad[2]) * n + quad[3]
                    out[np.searchsorted(codes, code)] += (base - s) / 12.0


def _sweep_numpy(adj: np.ndarray, codes: np.ndarray, out: np.ndarray) -> None:
    n = adj.shape[0]
    af = adj.astype(np.float64)
    inv = np.zeros(n + 1)
    inv[1:] = 1.0 / np.arange(1, n + 1)
    common = (af @ af.T).astype(np.int64)
    all_codes, all_vals = [], []
    for x1 in range(n):
        for x2 in np.flatnonzero(adj[x1]):
            u12 = adj[x1] & adj[x2]
            i12 = inv[u12.sum()]
            for x3 in np.flatnonzero(u12):
                u123 = u12 & adj[x3]
                mem = np.flatnonzero(u123)
                if mem.size == 0:
                    continue
                i123 = inv[mem.size]
                rows = af[mem]
                sub = adj[np.ix_(mem, mem)]
                subf = sub.astype(np.float64)
                i1y = inv[common[x1, mem]]
                i12y = inv[(rows @ u12).astype(np.int64)]
                i123y = inv[(rows @ u123).astype(np.int64)]
                a_term = 2 * i1y * i12y * i123y - i12 * i123 * i123y - i12 * i12y * i123y

                def pair_counts(mask):
                    return inv[((rows * mask) @ rows.T).astype(np.int64)]

                i1yz = pair_counts(adj[x1])
                i12yz = pair_counts(u12)
                i123yz = pair_counts(u123)
                iyz = inv[common[np.ix_(mem, mem)]]
                c1, c12, c123 = i1y[:, None], i12y[:, None], i123y[:, None]
                b_term = i123yz * (
                    2 * c1 * c12 * c123 + 2 * c1 * c12 * i12yz + 2 * c1 * i1yz * i12yz
                    - i12 * i123 * c123 - i12 * c12 * c123 - i12 * c12 * i12yz
                    - 3 * iyz * i1yz * i12yz) * subf
                s = subf @ a_term + ((subf @ b_term) * subf).sum(axis=1)
                quads = np.sort(np.column_stack([
                    np.full(mem.size, x1), np.full(mem.size, x2), np.full(mem.size, x3), mem]), axis=1)
                all_codes.append(((quads[:, 0] * n + quads[:, 1]) * n + quads[:, 2]) * n + quads[:, 3])
                all_vals.append((i12 * i123 - s) / 12.0)
    if all_codes:
        idx = np.searchsorted(codes, np.concatenate(all_codes))
        np.add.at(out, idx, np.concatenate(all_vals))


def k4_weight_sweep(g: Graph, backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(k4s, weights)``: sorted K4s as an ``(m, 4)`` array and their float weights.

    ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` for the configured default.
    """
    backend = backend or _accel.backend()
    k4s = np.array(list(enumerate_cliques(g, 4)), dtype=np.int64).reshape(-1, 4)
    n = g.n
    codes = ((k4s[:, 0] * n + k4s[:, 1]) * n + k4s[:, 2]) * n + k4s[:, 3]
    out = np.zeros(len(k4s))
    if len(k4s) == 0:
        return k4s, out
    if backend == "numba":
        if not _accel.HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable or disabled")
        _sweep_numba(g.words, g.adjacency, codes, out)
    elif backend == "numpy":
        _sweep_numpy(g.adjacency, codes, out)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return k4s, out
