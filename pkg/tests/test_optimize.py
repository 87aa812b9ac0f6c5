from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k4frac.nlp import ZeroDenominator, domain_check, eval_objective, w13
from k4frac.optimize import (
    SEARCHABLE,
    SearchConfig,
    chain_is_monotone,
    corroborate_chain,
    exactify,
    gamma,
    grid_search,
    local_refine,
    optimize,
)

D = Fraction(2, 33)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig("P8")
    with pytest.raises(ValueError):
        SearchConfig("P12", resolution=1)
    with pytest.raises(ValueError):
        SearchConfig("P12", shrink=1.0)
    with pytest.raises(ValueError):
        SearchConfig("P12", tolerance=0)
    assert SearchConfig("p12").grid == 2000


@pytest.mark.parametrize("program, res", [("P12", 37), ("P11", 13), ("P10", 7), ("P9", 5)])
def test_grid_evaluation_count(program, res):
    cfg = SearchConfig(program, D, resolution=res)
    assert grid_search(cfg).evaluations == res ** len(cfg.names)


def test_grid_is_exhaustive():
    # brute-force oracle: best exact value over the same grid
    cfg = SearchConfig("P11", D, resolution=9)
    got = grid_search(cfg)
    pts = [D * Fraction(i, 8) for i in range(9)]
    best = max(float(eval_objective("P11", {"a": a, "b": b}, D)) for a in pts for b in pts)
    assert got.best_value == pytest.approx(best, rel=1e-12)


def test_p12_at_zero_deficiency():
    res = grid_search(SearchConfig("P12", 0, resolution=11))
    assert res.best_value == 0 and res.best_point == {"a": 0.0}


def test_refine_never_decreases_and_is_deterministic():
    cfg = SearchConfig("P12", D, resolution=50)
    g = grid_search(cfg)
    r = local_refine(cfg, g.best_point)
    assert r.best_value >= g.best_value
    assert local_refine(cfg, g.best_point).best_point == r.best_point
    assert r.best_value <= 1


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_refine_stays_in_box(u, v, w):
    cfg = SearchConfig("P10", D, resolution=20)
    start = {"x": 1 - float(D) * u, "a": float(D) * v, "b": float(D) * w}
    r = local_refine(cfg, start)
    assert 1 - float(D) <= r.best_point["x"] <= 1
    assert all(0 <= r.best_point[k] <= float(D) for k in ("a", "b"))


def test_exactify():
    pt, val = exactify("P11", {"a": 0.0, "b": 0.0}, D)
    assert pt == {"a": 0, "b": 0} and val == eval_objective("P11", pt, D)
    # a hair above the box: the first rounding stays off the box, a finer one lands inside
    pt, _ = exactify("P12", {"a": float(D) + 1e-8}, D)
    assert domain_check("P12", pt, D) == []


def test_exactify_reports_vanishing_denominator():
    with pytest.raises(ZeroDenominator):
        exactify("P12", {"a": 0.25}, Fraction(1, 4))


def test_optimize_p12_bound():
    res = optimize(SearchConfig("P12", D, resolution=500))
    assert domain_check("P12", res.exact_point, D) == []
    assert res.upper_bound == w13(D)
    assert res.margin >= 0
    assert res.exact_value <= w13(D) < 1
    assert res.error_bound == pytest.approx(gamma(64) * res.best_value)
    assert res.to_dict()["margin"] == f"{res.margin.numerator}/{res.margin.denominator}"


def test_p10_argmax_at_pinned_x():
    res = optimize(SearchConfig("P10", D, resolution=40))
    assert any(n.startswith("argmax x is at 1-d") for n in res.notes)


@pytest.mark.parametrize("d", [Fraction(1, 100), Fraction(1, 33), D])
def test_chain_corroboration(d):
    small = {p: r for p, r in zip(SEARCHABLE, (12, 40, 200, 400))}
    results = corroborate_chain(d, small)
    assert chain_is_monotone(results)
    for r in results:
        assert r.exact_value <= w13(d)
        assert domain_check(r.program, r.exact_point, d) == []


def test_worker_count_does_not_change_result():
    one = grid_search(SearchConfig("P10", D, resolution=15, workers=1))
    two = grid_search(SearchConfig("P10", D, resolution=15, workers=3))
    assert (one.best_point, one.best_value, one.evaluations) == (two.best_point, two.best_value, two.evaluations)
