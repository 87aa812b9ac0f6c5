import itertools
import random
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k4frac import _accel
from k4frac.gadget import (
    DegreeTooLow,
    InconsistentWeights,
    edge_sums,
    format_k4_weights,
    fractional_k4_decomposition,
    gadget_edge_sum,
    gadget_edge_sums,
    k4_weights_exact,
    k4_weights_grouped,
    k4_weights_naive,
    parse_k4_weights,
    psi,
    w_prime,
    weight_k4,
    weight_ordered,
    weight_ordered_k4,
    weight_scaled,
)
from k4frac.generators import complete, complete_minus_matching, cycle, random_min_degree
from k4frac.graph import GraphError, density_hat, enumerate_cliques, ordered_cliques
from k4frac.kernels import k4_weight_sweep

from . import oracle
from .conftest import CORPUS

DENSE = [name for name, g in CORPUS.items() if 5 * min(g.degree(v) for v in range(g.n)) > 4 * g.n]


# ------------------------------------------------------------------ gadget

@pytest.mark.parametrize("t, expected", [
    ((0, 1, 2, 3), Fraction(1, 6)),
    ((0, 2, 3, 4), Fraction(-1, 6)),
    ((2, 3, 4, 5), Fraction(1, 2)),
    ((0, 1, 2, 6), Fraction(0)),
])
def test_psi_cases(t, expected):
    g = complete(7)
    assert psi(g, range(6), (0, 1), t) == expected


def test_psi_rejects_edge_outside_k6():
    with pytest.raises(GraphError):
        psi(complete(7), range(6), (0, 6), (0, 1, 2, 3))


@pytest.mark.parametrize("f, expected", [((0, 1), 1), ((1, 2), 0), ((2, 3), 0), ((0, 7), 0), ((6, 7), 0)])
def test_gadget_edge_sum_cases(f, expected):
    g = complete(8)
    assert gadget_edge_sum(g, range(6), (0, 1), f) == expected


def test_gadget_batch_matches_literal_and_oracle():
    g = CORPUS["rand12-s1"]
    adj = oracle.adjacency_sets(g.n, g.edges())
    k6 = next(enumerate_cliques(g, 6))
    e = k6[1:3]
    batch = gadget_edge_sums(g, k6, e)
    for f in random.Random(0).sample(list(g.edges()), 15):
        assert batch[f] == gadget_edge_sum(g, k6, e, f) == oracle.gadget_sum(adj, k6, e, f)


# ----------------------------------------------------------------- weights

def test_weight_ordered_examples():
    k12 = complete(12)
    assert weight_ordered(k12, (3, 1, 4)) == Fraction(1, 90)
    for n in (8, 10):
        assert weight_ordered(complete(n), (0, 1, 2, 3, 4)) == Fraction(1, (n - 2) * (n - 3) * (n - 4) * (n - 5))
    assert weight_scaled(complete(10), (0, 1)) == Fraction(5, 4)


def test_weight_ordered_matches_oracle_on_k12_minus_matching():
    g = complete_minus_matching(12)
    adj = oracle.adjacency_sets(12, g.edges())
    rng = random.Random(3)
    fives = list(ordered_cliques(g, 5))
    for k in rng.sample(fives, 200):
        assert weight_ordered(g, k) == oracle.ordered_weight(adj, k)
        assert weight_scaled(g, k) == g.n ** 4 * weight_ordered(g, k)
    for k in rng.sample(list(ordered_cliques(g, 3)), 50):
        dens = Fraction(1)
        for i in (2, 3):
            dens /= density_hat(g, k[:i])
        assert weight_scaled(g, k) == dens


@pytest.mark.parametrize("name", DENSE)
def test_k4_weights_match_definition_oracle(name, oracle_weights):
    g = CORPUS[name]
    assert k4_weights_exact(g) == oracle_weights(name)


@pytest.mark.parametrize("name", ["K8", "K12-PM"])
def test_sweep_routes_agree(name):
    g = CORPUS[name]
    ref = k4_weights_exact(g)
    assert k4_weights_naive(g) == ref
    assert k4_weights_grouped(g) == ref
    for t in list(ref)[:5]:
        assert weight_k4(g, t, "closed") == weight_k4(g, t, "definition") == ref[t]


@pytest.mark.parametrize("n", [8, 10, 12])
def test_complete_graph_weights(n):
    w = k4_weights_exact(complete(n))
    assert set(w.values()) == {Fraction(1, comb(n - 2, 2))}


def test_ordered_weights_sum_to_unordered():
    g = CORPUS["rand12-s2"]
    adj = oracle.adjacency_sets(g.n, g.edges())
    for t in random.Random(1).sample(list(enumerate_cliques(g, 4)), 4):
        parts = [weight_ordered_k4(g, o) for o in itertools.permutations(t)]
        assert sum(parts) == weight_k4(g, t)
        for o in itertools.permutations(t):
            assert weight_ordered_k4(g, o) == weight_ordered_k4(g, o, "definition")
        assert parts[5] == oracle.ordered_k4_weight(adj, next(itertools.islice(itertools.permutations(t), 5, None)))


def test_k10_ordered_weights_equal():
    g = complete(10)
    vals = {weight_ordered_k4(g, o) for o in itertools.permutations((0, 3, 5, 9))}
    assert vals == {Fraction(1, 28 * 24)}


@pytest.mark.parametrize("name", ["K10", "K12-PM", "rand12-s3"])
def test_w_prime_identity(name):
    g = CORPUS[name]
    for o in itertools.islice(ordered_cliques(g, 4), 0, None, 97):
        wp = w_prime(g, o)  # raises if the two routes disagree
        assert wp == 1 - 12 * weight_ordered_k4(g, o) / weight_ordered(g, o[:3])
        assert wp < 1


def test_inconsistent_weights_is_assertion():
    assert issubclass(InconsistentWeights, AssertionError)


def test_degree_too_low():
    with pytest.raises(DegreeTooLow) as info:
        fractional_k4_decomposition(cycle(5))
    assert info.value.delta == 2 and info.value.n == 5
    with pytest.raises(DegreeTooLow):
        weight_k4(complete_minus_matching(10), (0, 2, 4, 6))


# ------------------------------------------------------------ decomposition

@pytest.mark.parametrize("name", DENSE)
def test_edge_sums_exactly_one(name, oracle_weights):
    g = CORPUS[name]
    sums = edge_sums(g, oracle_weights(name))
    assert set(sums) == set(g.edges()) and set(sums.values()) == {1}


def test_decomposition_k10():
    m = fractional_k4_decomposition(complete(10))
    assert m.valid and m.exact and m.min_weight == Fraction(1, 28) and m.max_edge_deviation == 0
    assert len(m.weights) == 210


def test_weight_map_round_trip():
    m = fractional_k4_decomposition(complete_minus_matching(12))
    header, weights = parse_k4_weights(format_k4_weights(m))
    assert weights == m.weights
    assert header == {"n": 12, "min_degree": 10, "min_weight": Fraction(1, 24), "max_edge_sum_deviation": 0}


@pytest.mark.parametrize("name", DENSE)
def test_fast_and_exact_agree(name):
    g = CORPUS[name]
    exact = fractional_k4_decomposition(g, "exact")
    fast = fractional_k4_decomposition(g, "float", exact_checks=5, seed=2)
    assert exact.valid == fast.valid
    assert set(fast.weights) == set(exact.weights)
    assert max(abs(fast.weights[t] - float(exact.weights[t])) for t in exact.weights) < 1e-12
    assert all(exact.weights[t] == v for t, v in fast.exact_checks.items())
    assert fast.argmin in fast.exact_checks


# ----------------------------------------------------------------- kernels

@pytest.mark.parametrize("backend", ["numpy", pytest.param("numba", marks=pytest.mark.skipif(
    not _accel.HAS_NUMBA, reason="numba not installed"))])
@pytest.mark.parametrize("name", ["K12-PM", "rand12-s1"])
def test_float_kernel_matches_exact(backend, name):
    g = CORPUS[name]
    exact = k4_weights_exact(g)
    k4s, vals = k4_weight_sweep(g, backend=backend)
    assert [tuple(t) for t in k4s.tolist()] == sorted(exact)
    np.testing.assert_allclose(vals, [float(exact[tuple(t)]) for t in k4s.tolist()], rtol=0, atol=1e-13)


@settings(max_examples=8, deadline=None)
@given(st.integers(7, 13), st.integers(0, 1000))
def test_backends_agree_and_edge_sums_hold(n, seed):
    g = random_min_degree(n, 4 * n // 5 + 1, seed)
    k4s, a = k4_weight_sweep(g, backend="numpy")
    backends = ["numba"] if _accel.HAS_NUMBA else []
    for b in backends:
        _, other = k4_weight_sweep(g, backend=b)
        np.testing.assert_allclose(other, a, rtol=0, atol=1e-12)
    sums = edge_sums(g, {tuple(t): w for t, w in zip(k4s.tolist(), a)})
    assert max(abs(s - 1) for s in sums.values()) < 1e-9


@pytest.mark.parametrize("flag, field, expected", [
    ("K4FRAC_DISABLE_NUMBA", 0, "numpy"),
    ("K4FRAC_DISABLE_GMPY2", 1, "False"),
])
def test_backend_flags(flag, field, expected):
    import os
    import subprocess
    import sys
    code = "from k4frac import _accel; print(_accel.backend(), _accel.HAS_GMPY2)"
    out = subprocess.run([sys.executable, "-c", code], env={**os.environ, flag: "1"},
                         capture_output=True, text=True, check=True).stdout.split()
    assert out[field] == expected
