"""Acceptance criteria 1-9; the terminal summary prints one PASS/FAIL line per criterion."""

import itertools
import random
from fractions import Fraction
from math import comb

import pytest

from k4frac.certify import build_sign_chain, derivative_chain, eval_poly, poly_from_product_form
from k4frac.gadget import (
    edge_sums,
    fractional_k4_decomposition,
    gadget_edge_sum,
    gadget_edge_sums,
    k4_weights_exact,
    w_prime,
    weight_k4,
    weight_ordered,
    weight_ordered_k4,
)
from k4frac.generators import complete, complete_minus_matching
from k4frac.graph import enumerate_cliques, min_degree, ordered_cliques
from k4frac.nlp import CHECKS, eval_objective, graph_to_p1_point, run_check, w13
from k4frac.optimize import SearchConfig, optimize

from .conftest import CORPUS

D = Fraction(2, 33)


@pytest.fixture(scope="module")
def threshold_graph():
    g = complete_minus_matching(33)
    assert g.n == 33 and min_degree(g) == 31
    return g, fractional_k4_decomposition(g, "float", exact_checks=20, seed=0)


@pytest.mark.criterion(1)
def test_gadget_edge_isolation():
    rng = random.Random(1)
    for name, g in CORPUS.items():
        edges = list(g.edges())
        for k6 in enumerate_cliques(g, 6):
            for e in itertools.combinations(k6, 2):
                sums = gadget_edge_sums(g, k6, e)
                for f in rng.sample(edges, min(200, len(edges))):
                    assert sums[f] == (1 if f == e else 0), (name, k6, e, f)
        # the literal per-edge sum agrees with the batched one on a spot sample
        k6 = next(enumerate_cliques(g, 6))
        e = k6[:2]
        batch = gadget_edge_sums(g, k6, e)
        for f in rng.sample(edges, 10) + [e]:
            assert gadget_edge_sum(g, k6, e, f) == batch[f]


@pytest.mark.criterion(2)
def test_edge_sum_identity(threshold_graph, oracle_weights):
    for name, g in CORPUS.items():
        assert 5 * min_degree(g) > 4 * g.n
        weights = k4_weights_exact(g)
        assert weights == oracle_weights(name)
        sums = edge_sums(g, weights)
        assert set(sums) == set(g.edges())
        assert all(s == 1 for s in sums.values()), name
    _, fast = threshold_graph
    assert fast.max_edge_deviation <= 1e-9


@pytest.mark.criterion(3)
def test_threshold_instance(threshold_graph):
    g, m = threshold_graph
    assert m.min_weight >= -1e-9
    assert len(m.exact_checks) >= 20
    assert all(v >= 0 for v in m.exact_checks.values())
    rng = random.Random(33)
    for t in rng.sample(sorted(m.weights), 3):
        assert float(weight_k4(g, t)) == pytest.approx(m.weights[t], abs=1e-12)


@pytest.mark.criterion(4)
def test_complete_graph_oracle():
    for n in (8, 10, 12):
        weights = k4_weights_exact(complete(n))
        assert len(weights) == comb(n, 4)
        assert set(weights.values()) == {Fraction(1, comb(n - 2, 2))}


@pytest.mark.criterion(5)
def test_graph_bridge():
    for g in (complete(10), complete_minus_matching(12)):
        for o in ordered_cliques(g, 4):
            wp = w_prime(g, o)
            pt = graph_to_p1_point(g, o)
            assert eval_objective("P1", pt, pt.d) == wp
            assert weight_ordered_k4(g, o) == weight_ordered(g, o[:3]) * (1 - wp) / 12


@pytest.mark.criterion(6)
def test_chain_inequalities():
    required = {"P3<=P4", "P6<=P7", "P7<=P8", "P11<=P12"}
    assert required <= set(CHECKS)
    failed = {}
    for name in CHECKS:
        res = run_check(name, D, 10_000, seed=0)
        assert res.samples == 10_000
        if not res.passed:
            failed[name] = res.witnesses[0].to_dict()
    assert not failed


@pytest.mark.criterion(7)
def test_polynomial_certificate():
    w = poly_from_product_form()
    assert w.coeffs == tuple(Fraction(c) for c in (-1, 26, -194, 669, -1192, 1065, -381))
    chain = derivative_chain(w)
    expected = [Fraction(-1345519, 430489323), Fraction(38549710, 4348377),
                Fraction(-25389224, 131769), Fraction(10001326, 3993), Fraction(-2585328, 121)]
    assert [eval_poly(p, D) for p in chain] == expected
    cert = build_sign_chain(0, D)
    assert cert.verdict and cert.recheck()
    disc = {x["item"]: x for x in cert.discrepancies}
    assert disc["derivative 4 at 2/33"]["reference"] == "-2585086/121"
    assert disc["derivative 4 at 2/33"]["difference"] == "2/1"


@pytest.mark.criterion(8)
def test_closed_form_identity():
    w = poly_from_product_form()
    grid = [Fraction(k, 330) for k in range(21)]
    assert grid[-1] == D
    for d in grid:
        assert (w13(d) - 1) * (1 - 3 * d) ** 3 * (1 - 2 * d) ** 3 == eval_poly(w, d)


@pytest.mark.criterion(9)
def test_optimizer_corroboration():
    res = optimize(SearchConfig("P12", D))
    assert res.exact_value <= w13(D)
    assert w13(D) < 1
    assert res.margin >= 0
