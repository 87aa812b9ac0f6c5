"""Float search for the maxima of the small programs P9 to P12, re-checked exactly.

The domains of these programs are boxes (x, y in [1-d, 1]; a, b in [0, d]),
so the grid is a plain product. Every objective term is nonnegative on the
box, so the float sum carries a relative error of at most ``gamma(K)`` for K
the operation count; ``error_bound`` reports that figure.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .nlp import (
    ProgramId,
    ZeroDenominator,
    as_fraction,
    domain_check,
    eval_objective,
    eval_objective_float,
    program_variables,
    w13,
)

SEARCHABLE = (ProgramId.P9, ProgramId.P10, ProgramId.P11, ProgramId.P12)
DEFAULT_GRID = {ProgramId.P9: 60, ProgramId.P10: 200, ProgramId.P11: 2000, ProgramId.P12: 2000}
DENOMINATOR_LADDER = (10 ** 3, 10 ** 6, 10 ** 9, 10 ** 12)
_OPS = 64  # generous count of float operations per objective evaluation
_EPS = np.finfo(np.float64).eps / 2


def gamma(k: int) -> float:
    return k * _EPS / (1 - k * _EPS)


@dataclass(frozen=True)
class SearchConfig:
    program: ProgramId
    d: Fraction = Fraction(2, 33)
    resolution: int | None = None
    multistart: int = 1
    shrink: float = 0.5
    tolerance: float = 1e-12
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "program", ProgramId.parse(self.program))
        object.__setattr__(self, "d", as_fraction(self.d))
        if self.program not in SEARCHABLE:
            raise ValueError(f"search covers {[p.name for p in SEARCHABLE]}, not {self.program.name}")
        if self.resolution is not None and self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    @property
    def grid(self) -> int:
        return self.resolution or DEFAULT_GRID[self.program]

    @property
    def names(self) -> tuple[str, ...]:
        return program_variables(self.program)


def box(program: ProgramId, d: Fraction) -> dict[str, tuple[Fraction, Fraction]]:
    out = {}
    for k in program_variables(program):
        out[k] = (1 - d, Fraction(1)) if k in ("x", "y") else (Fraction(0), d)
    return out


@dataclass
class SearchResult:
    program: ProgramId
    d: Fraction
    best_point: dict[str, float]
    best_value: float
    evaluations: int
    error_bound: float
    exact_point: dict[str, Fraction] | None = None
    exact_value: Fraction | None = None
    upper_bound: Fraction | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def margin(self) -> Fraction | None:
        if self.exact_value is None or self.upper_bound is None:
            return None
        return self.upper_bound - self.exact_value

    def to_dict(self) -> dict:
        q = lambda v: None if v is None else f"{v.numerator}/{v.denominator}"  # noqa: E731
        return {
            "program": self.program.name,
            "d": q(self.d),
            "best_point": self.best_point,
            "best_value": self.best_value,
            "evaluations": self.evaluations,
            "float_error_bound": self.error_bound,
            "exact_point": None if self.exact_point is None else {k: q(v) for k, v in self.exact_point.items()},
            "exact_value": q(self.exact_value),
            "upper_bound": q(self.upper_bound),
            "margin": q(self.margin),
            "margin_float": None if self.margin is None else float(self.margin),
            "notes": self.notes,
        }


def _evaluate(program: ProgramId, names, arrays, d: float) -> np.ndarray:
    vals = eval_objective_float(program, dict(zip(names, arrays)), d)
    return np.where(np.isfinite(vals), vals, -np.inf)


def grid_search(cfg: SearchConfig) -> SearchResult:
    """Exhaustive grid with ``resolution`` points per axis (endpoints included).

    Ties go to the lexicographically smallest grid point.
    """
    names = cfg.names
    bounds = box(cfg.program, cfg.d)
    axes = [np.linspace(float(bounds[k][0]), float(bounds[k][1]), cfg.grid) for k in names]
    d = float(cfg.d)
    # one chunk per value of the first axis keeps memory flat for P9
    chunks = range(len(axes[0])) if len(axes) > 1 else [None]

    def run(i):
        if i is None:
            mesh = [axes[0]]
        else:
            rest = list(np.meshgrid(*axes[1:], indexing="ij"))
            mesh = [np.full(rest[0].shape, axes[0][i])] + rest
        vals = _evaluate(cfg.program, names, mesh, d).ravel()
        j = int(np.argmax(vals))
        return float(vals[j]), [float(m.ravel()[j]) for m in mesh], vals.size

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(i) for i in chunks]
    best_val, best_pt, total = -math.inf, None, 0
    for val, pt, size in parts:   # chunk order == lexicographic order
        total += size
        if val > best_val:
            best_val, best_pt = val, pt
    point = dict(zip(names, best_pt))
    return SearchResult(cfg.program, cfg.d, point, best_val, total, gamma(_OPS) * abs(best_val))


def local_refine(cfg: SearchConfig, start: dict[str, float]) -> SearchResult:
    """Coordinate ascent with shrinking steps, clipped to the box; never decreases the value."""
    names = cfg.names
    bounds = {k: (float(lo), float(hi)) for k, (lo, hi) in box(cfg.program, cfg.d).items()}
    d = float(cfg.d)
    cur = np.array([min(max(start[k], bounds[k][0]), bounds[k][1]) for k in names])

    def f(v) -> float:
        return float(_evaluate(cfg.program, names, [np.array(c) for c in v], d))

    best = f(cur)
    evals = 1
    step = np.array([(bounds[k][1] - bounds[k][0]) / max(cfg.grid, 2) for k in names])
    while step.max() >= cfg.tolerance and evals < 100_000:
        moved = False
        for i, k in enumerate(names):
            for sgn in (1.0, -1.0):
                trial = cur.copy()
                trial[i] = min(max(cur[i] + sgn * step[i], bounds[k][0]), bounds[k][1])
                if trial[i] == cur[i]:
                    continue
                val = f(trial)
                evals += 1
                if val > best:
                    cur, best, moved = trial, val, True
                    break
        if not moved:
            step *= cfg.shrink
    point = dict(zip(names, cur.tolist()))
    return SearchResult(cfg.program, cfg.d, point, best, evals, gamma(_OPS) * abs(best))


def exactify(program, pt: dict[str, float], d) -> tuple[dict[str, Fraction], Fraction]:
    """Round the float point to rationals and evaluate it exactly.

    Denominators climb the ladder 10**3, 10**6, ... while the rounded point is off
    the box or hits a vanishing denominator; as a last resort the rounded point is
    clipped onto the box exactly.
    """
    program = ProgramId.parse(program)
    d = as_fraction(d)
    last_error: Exception | None = None
    for den in DENOMINATOR_LADDER:
        cand = {k: Fraction(v).limit_denominator(den) for k, v in pt.items()}
        if domain_check(program, cand, d):
            continue
        try:
            return cand, eval_objective(program, cand, d)
        except ZeroDenominator as exc:
            last_error = exc
    bounds = box(program, d)
    cand = {k: min(max(Fraction(v).limit_denominator(DENOMINATOR_LADDER[-1]), bounds[k][0]), bounds[k][1])
            for k, v in pt.items()}
    try:
        return cand, eval_objective(program, cand, d)
    except ZeroDenominator:
        raise last_error or ZeroDenominator("could not place the point on the domain") from None


def optimize(cfg: SearchConfig, start: dict[str, float] | None = None) -> SearchResult:
    """Grid search, local refinement from the grid argmax (and ``start``), exact re-evaluation."""
    grid = grid_search(cfg)
    best = local_refine(cfg, grid.best_point)
    if start is not None:
        seeded = local_refine(cfg, start)
        if seeded.best_value > best.best_value:
            best = seeded
    if grid.best_value > best.best_value:
        best = grid
    result = SearchResult(cfg.program, cfg.d, best.best_point, best.best_value,
                          grid.evaluations + (best.evaluations if best is not grid else 0),
                          best.error_bound)
    result.exact_point, result.exact_value = exactify(cfg.program, result.best_point, cfg.d)
    if cfg.d < Fraction(1, 4):
        result.upper_bound = w13(cfg.d)
    spacing = float(cfg.d) / (cfg.grid - 1) if cfg.grid > 1 else float(cfg.d)
    for k in ("x", "y"):
        if k in result.best_point:
            off = abs(result.best_point[k] - (1 - float(cfg.d)))
            verdict = "at" if off <= spacing + 1e-15 else "away from"
            result.notes.append(f"argmax {k} is {verdict} 1-d (distance {off:.3g})")
    if result.margin is not None and result.margin < 0:
        result.notes.append("exact value exceeds the closed-form bound")
    return result


def _project(pt: dict[str, float], successor: ProgramId) -> dict[str, float]:
    return {k: pt[k] for k in program_variables(successor)}


def corroborate_chain(d=Fraction(2, 33), resolutions: dict | None = None, workers: int = 1) -> list[SearchResult]:
    """Optimize P9, P10, P11, P12 in turn, seeding each with its predecessor's projected argmax."""
    resolutions = resolutions or {}
    out: list[SearchResult] = []
    prev = None
    for p in SEARCHABLE:
        cfg = SearchConfig(p, d, resolution=resolutions.get(p), workers=workers)
        start = _project(prev.best_point, p) if prev is not None else None
        prev = optimize(cfg, start)
        out.append(prev)
    return out


def chain_is_monotone(results: list[SearchResult], slack: float = 1e-9) -> bool:
    vals = [r.best_value for r in results]
    return all(b >= a - slack for a, b in zip(vals, vals[1:]))
