"""Objectives and interval domains of the relaxation chain P1 ... P12 (and the closed form W13).

Variables are common-neighbor densities of the sets around an ordered K4:

====  =========================  ====  ==============================
name  density of                 name  density of
====  =========================  ====  ==============================
x     N(x1)                      q0    N(x1, x2, y)
y     N(y)                       q     N(x1, y, z)
e0    N(x1, x2)                  p0    N(x1, x2, x3, y)
e     N(x1, y)                   p     N(x1, x2, y, z)
f     N(y, z)                    h     N(x1, x2, x3, y, z)
g0    N(x1, x2, x3)              r0/r  count fractions of the sums
====  =========================  ====  ==============================

with ``a = x - e0`` and ``b = y - f`` in the last programs. Every objective is
written once against a namespace of values, so the exact path (``Fraction``)
and the float path (numpy arrays, used by the optimizer) share the formulas.
"""

from __future__ import annotations

import enum
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from types import SimpleNamespace
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import _accel
from .graph import Graph, check_clique, degree_deficiency, iter_bits, mask_of, neighborhood_mask


class ProgramId(enum.IntEnum):
    P1 = 1
    P2 = 2
    P3 = 3
    P4 = 4
    P5 = 5
    P6 = 6
    P7 = 7
    P8 = 8
    P9 = 9
    P10 = 10
    P11 = 11
    P12 = 12
    W13 = 13

    @classmethod
    def parse(cls, s: Union[str, int, "ProgramId"]) -> "ProgramId":
        if isinstance(s, ProgramId):
            return s
        if isinstance(s, int):
            return cls(s)
        try:
            return cls[s.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown program {s!r}") from None


class ZeroDenominator(ZeroDivisionError):
    """An objective was evaluated where one of its denominators vanishes."""


class NoSubstitution(ValueError):
    pass


ScalarPoint = dict  # variable name -> value
Value = Union[Fraction, float, np.ndarray]


def ramp(x):
    """``max(x, 0)``, elementwise for arrays, type-preserving for scalars."""
    if isinstance(x, np.ndarray):
        return np.maximum(x, 0.0)
    return x if x > 0 else x - x


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        raise TypeError("exact evaluation needs Fraction, int or 'num/den', not float")
    return Fraction(v)


# ---------------------------------------------------------------- domains

# Bounds in sampling order; each interval only reads variables earlier in the list.
_BOUNDS: dict[str, Callable] = {
    "x": lambda v, d: (1 - d, d - d + 1),
    "y": lambda v, d: (1 - d, d - d + 1),
    "e0": lambda v, d: (v.x - d, v.x),
    "e": lambda v, d: (v.x + v.y - 1, v.x),
    "f": lambda v, d: (v.y - d, v.y),
    "g0": lambda v, d: (v.e0 - d, v.e0),
    "q0": lambda v, d: (v.e + v.e0 - v.x, v.e0),
    "q": lambda v, d: (v.e + v.f - v.y, v.e),
    "p0": lambda v, d: (v.g0 + v.e - v.x, v.g0),
    "p": lambda v, d: (v.q0 + v.f - v.y, v.q0),
    "h": lambda v, d: (v.p0 + v.q - v.e, v.p0),
    "r0": lambda v, d: (d - d, v.g0),
    "r": lambda v, d: (d - d, v.p0),
    "a": lambda v, d: (d - d, d),
    "b": lambda v, d: (d - d, d),
}

_FULL = ("x", "y", "e0", "e", "f", "g0", "q0", "q", "p0", "p", "h", "r0", "r")

VARIABLES: dict[ProgramId, tuple[str, ...]] = {
    ProgramId.P3: _FULL,
    ProgramId.P4: _FULL,
    ProgramId.P5: ("x", "y", "e0", "e", "f", "g0", "q0", "q", "p0"),
    ProgramId.P6: ("x", "y", "e0", "e", "f", "g0", "q"),
    ProgramId.P7: ("x", "y", "e0", "e", "f", "g0"),
    ProgramId.P8: ("x", "y", "e0", "e", "f"),
    ProgramId.P9: ("x", "y", "a", "b"),
    ProgramId.P10: ("x", "a", "b"),
    ProgramId.P11: ("a", "b"),
    ProgramId.P12: ("a",),
    ProgramId.W13: (),
}

# P9 also has a form in (x, y, e0, f) before switching to a = x - e0, b = y - f
P9_DENSITY_FORM = ("x", "y", "e0", "f")


def program_variables(p: ProgramId, pt: Mapping | None = None) -> tuple[str, ...]:
    p = ProgramId.parse(p)
    if p in (ProgramId.P1, ProgramId.P2):
        raise ValueError(f"{p.name} uses structured points")
    if p is ProgramId.P9 and pt is not None and "a" not in pt and "e0" in pt:
        return P9_DENSITY_FORM
    return VARIABLES[p]


@dataclass(frozen=True)
class DomainViolation:
    variable: str
    bound: str  # "lower" or "upper"
    bound_value: Fraction
    actual: Fraction

    def __str__(self) -> str:
        op = ">=" if self.bound == "lower" else "<="
        return f"{self.variable} = {self.actual} violates {self.variable} {op} {self.bound_value}"


def _check_intervals(names: Sequence[str], values: Mapping, d, prefix: str = "",
                     ctx: Mapping | None = None) -> list[DomainViolation]:
    ns = SimpleNamespace(**(ctx or {}), **values)
    out = []
    for name in names:
        lo, hi = _BOUNDS[name](ns, d)
        v = values[name]
        if v < lo:
            out.append(DomainViolation(prefix + name, "lower", lo, v))
        if v > hi:
            out.append(DomainViolation(prefix + name, "upper", hi, v))
    return out


def _missing(names, pt) -> None:
    gone = [k for k in names if k not in pt]
    if gone:
        raise ValueError(f"point lacks variables {gone}")


# ------------------------------------------------------- structured points

@dataclass(frozen=True)
class PairBlock:
    """Densities attached to one z in N(y) ∩ R."""

    f: Fraction
    q: Fraction
    p: Fraction
    h: Fraction


@dataclass(frozen=True)
class NeighborBlock:
    """Densities attached to one y in R.

    For P1 points ``pairs`` lists one block per z; for P2 points the single
    representative ``pair`` is used together with the count fraction ``r``.
    """

    y: Fraction
    e: Fraction
    q0: Fraction
    p0: Fraction
    pairs: tuple[PairBlock, ...] = ()
    pair: PairBlock | None = None
    r: Fraction | None = None


@dataclass(frozen=True)
class StructuredPoint:
    """A point of P1 or P2; ``unit`` plays the role of 1/n so counts become densities."""

    program: ProgramId
    x: Fraction
    e0: Fraction
    g0: Fraction
    unit: Fraction
    blocks: tuple[NeighborBlock, ...]
    d: Fraction | None = None

    def flat(self) -> dict[str, Fraction]:
        out = {"x": self.x, "e0": self.e0, "g0": self.g0, "unit": self.unit}
        for i, b in enumerate(self.blocks):
            for k in ("y", "e", "q0", "p0"):
                out[f"{k}[{i}]"] = getattr(b, k)
            if self.program is ProgramId.P1:
                for j, pb in enumerate(b.pairs):
                    for k in ("f", "q", "p", "h"):
                        out[f"{k}[{i}][{j}]"] = getattr(pb, k)
            else:
                for k in ("f", "q", "p", "h"):
                    out[f"{k}[{i}]"] = getattr(b.pair, k)
                out[f"r[{i}]"] = b.r
        return out


def _structured_domain(pt: StructuredPoint, d) -> list[DomainViolation]:
    top = {"x": pt.x, "e0": pt.e0, "g0": pt.g0}
    out = _check_intervals(("x", "e0", "g0"), top, d)
    if pt.unit <= 0:
        out.append(DomainViolation("unit", "lower", Fraction(0), pt.unit))
    if len(pt.blocks) * pt.unit > pt.g0:
        out.append(DomainViolation("R0*unit", "upper", pt.g0, len(pt.blocks) * pt.unit))
    for i, b in enumerate(pt.blocks):
        vals = {"y": b.y, "e": b.e, "q0": b.q0, "p0": b.p0}
        out += _check_intervals(("y", "e", "q0", "p0"), vals, d, f"[{i}].", top)
        ctx = {**top, **vals}
        if pt.program is ProgramId.P1:
            if len(b.pairs) * pt.unit > b.p0:
                out.append(DomainViolation(f"[{i}].R*unit", "upper", b.p0, len(b.pairs) * pt.unit))
            for j, pb in enumerate(b.pairs):
                out += _check_intervals(("f", "q", "p", "h"), vars(_pair_dict(pb)), d,
                                        f"[{i}][{j}].", ctx)
        else:
            out += _check_intervals(("f", "q", "p", "h"), vars(_pair_dict(b.pair)), d, f"[{i}].", ctx)
            out += _check_intervals(("r",), {"r": b.r}, d, f"[{i}].", ctx)
    return out


def _pair_dict(pb: PairBlock) -> SimpleNamespace:
    return SimpleNamespace(f=pb.f, q=pb.q, p=pb.p, h=pb.h)


def domain_check(p, pt, d) -> list[DomainViolation]:
    """Every interval constraint of ``p`` at ``pt``; an empty list means on-domain."""
    p = ProgramId.parse(p)
    if isinstance(pt, StructuredPoint):
        if pt.program is not p:
            raise ValueError(f"structured point of {pt.program.name} checked against {p.name}")
        return _structured_domain(pt, d)
    names = program_variables(p, pt)
    _missing(names, pt)
    return _check_intervals(names, {k: pt[k] for k in names}, d)


# ------------------------------------------------------------- objectives

def _inner(v, e, q0, p0, f, q, p):
    """The seven-term bracket multiplying r/h (P1 to P3)."""
    e0, g0 = v.e0, v.g0
    return (2 / (e * q0 * p0) + 2 / (e * q0 * p) + 2 / (e * q * p)
            - 1 / (e0 * g0 * p0) - 1 / (e0 * q0 * p0) - 1 / (e0 * q0 * p) - 3 / (f * q * p))


def _outer(v, e, q0, p0):
    return (1 / p0) * (2 / (e * q0) - 1 / (v.e0 * v.g0) - 1 / (v.e0 * q0))


def _w1(pt: StructuredPoint, d):
    total = 0
    for b in pt.blocks:
        s = _outer(pt, b.e, b.q0, b.p0)
        for pb in b.pairs:
            s += (pt.unit / pb.h) * _inner(pt, b.e, b.q0, b.p0, pb.f, pb.q, pb.p)
        total += s
    return pt.e0 * pt.g0 * pt.unit * total


def _w2(pt: StructuredPoint, d):
    total = 0
    for b in pt.blocks:
        pb = b.pair
        total += _outer(pt, b.e, b.q0, b.p0) + (b.r / pb.h) * _inner(pt, b.e, b.q0, b.p0, pb.f, pb.q, pb.p)
    return pt.e0 * pt.g0 * pt.unit * total


def _w3(v, d):
    return v.e0 * v.g0 * v.r0 * (
        _outer(v, v.e, v.q0, v.p0) + (v.r / v.h) * _inner(v, v.e, v.q0, v.p0, v.f, v.q, v.p))


def _ramp_brackets(e0, e, f, g0, q0, q):
    first = (1 / q0 + 1 / g0) * ramp(e0 - e) / (e * e0) + ramp(g0 - q0) / (e * q0 * g0)
    second = ramp(e0 - e) / (q0 * e * e0) + 3 * ramp(f - e) / (q * e * f) + ramp(q - q0) / (e * q0 * q)
    return first, second


def _w4(v, d):
    first, second = _ramp_brackets(v.e0, v.e, v.f, v.g0, v.q0, v.q)
    return v.e0 * v.g0 * v.r0 * ((1 / v.p0 + v.r / (v.h * v.p0)) * first + v.r / (v.h * v.p) * second)


def _w5(v, d):
    first, second = _ramp_brackets(v.e0, v.e, v.f, v.g0, v.q0, v.q)
    hh = v.p0 + v.q - v.e
    return v.e0 * v.g0 ** 2 * ((1 / v.p0 + 1 / hh) * first
                               + v.p0 / (hh * (v.q0 + v.f - v.y)) * second)


def _w6(v, d):
    x, y, e0, e, f, g0, q = v.x, v.y, v.e0, v.e, v.f, v.g0, v.q
    s = e + e0 - x
    first = (1 / s + 1 / g0) * ramp(e0 - e) / (e * e0) + ramp(g0 - s) / (e * s * g0)
    second = ramp(e0 - e) / (s * e * e0) + 3 * ramp(f - e) / (q * e * f) + ramp(q - s) / (e * s * q)
    return e0 * g0 ** 2 * ((1 / (g0 + e - x) + 1 / (g0 + q - x)) * first
                           + (g0 + e - x) / ((g0 + q - x) * (s + f - y)) * second)


def _w7(v, d):
    x, y, e0, e, f, g0 = v.x, v.y, v.e0, v.e, v.f, v.g0
    s = e + e0 - x
    low = g0 + e + f - y - x
    first = (1 / s + 1 / g0) * ramp(e0 - e) / (e * e0) + ramp(g0 - s) / (e * s * g0)
    second = (ramp(e0 - e) / (s * e * e0) + 3 * ramp(f - e) / ((e + f - y) * e * f)
              + (x - e0) / (e * e * s))
    return e0 * g0 ** 2 * ((1 / (g0 + e - x) + 1 / low) * first
                           + (g0 + e - x) / (low * (s + f - y)) * second)


def _w8(v, d):
    x, y, e0, e, f = v.x, v.y, v.e0, v.e, v.f
    s = e + e0 - x
    low = e0 + e + f - y - x
    first = (1 / s + 1 / (e0 - d)) * ramp(e0 - e) / e + (x - e) / (e * s)
    second = ramp(e0 - e) / (s * e * e0) + 3 * ramp(f - e) / ((e + f - y) * e * f) + (x - e0) / (e * e * s)
    return (e0 ** 2 / s + e0 ** 2 / low) * first + s * e0 ** 3 / low ** 2 * second


def _w9_density(v, d):
    """P9 written in (x, y, e0, f), i.e. P8 at e = x + y - 1."""
    x, y, e0, f = v.x, v.y, v.e0, v.f
    t = x + y - 1
    u = e0 + y - 1
    w = e0 + f - 1
    first = (1 / u + 1 / (e0 - d)) * ramp(e0 - x - y + 1) / t + (1 - y) / (t * u)
    second = (ramp(e0 - x - y + 1) / (u * t * e0) + 3 * ramp(f - x - y + 1) / ((x + f - 1) * t * f)
              + (x - e0) / (t * t * u))
    return (e0 ** 2 / u + e0 ** 2 / w) * first + u * e0 ** 3 / w ** 2 * second


def _w9(v, d):
    if not hasattr(v, "a"):
        return _w9_density(v, d)
    x, y, a, b = v.x, v.y, v.a, v.b
    xa = x - a
    t = x + y - 1
    u = xa + y - 1
    w = x + y - a - b - 1
    ra = ramp(1 - y - a)
    return ((xa ** 2 / u + xa ** 2 / (u - b)) * ((ra + 1 - y) / (u * t) + ra / ((xa - d) * t))
            + xa ** 2 * ra / (t * w ** 2)
            + a * xa ** 3 / (w ** 2 * t ** 2)
            + 3 * u * xa ** 3 * ramp(1 - x - b) / ((x + y - b - 1) * t * (y - b) * w ** 2))


def _w10(v, d):
    x, a, b = v.x, v.a, v.b
    xa = x - a
    k = x - a - d
    w = x - a - b - d
    return ((xa ** 2 / k + xa ** 2 / w) * (3 * d - 2 * a) / (k * (x - d))
            + xa ** 2 * (d - a) / ((x - d) * w ** 2)
            + a * xa ** 3 / (w ** 2 * (x - d) ** 2)
            + 3 * k * xa ** 3 * ramp(1 - x - b) / ((x - b - d) * (x - d) * (1 - d - b) * w ** 2))


def _w11(v, d):
    a, b = v.a, v.b
    c = 1 - d - a
    k = 1 - a - 2 * d
    w = 1 - a - b - 2 * d
    m = 1 - 2 * d
    return ((c ** 2 / k + c ** 2 / w) * (3 * d - 2 * a) / (k * m)
            + c ** 2 * (d - a) / (m * w ** 2)
            + a * c ** 3 / (w ** 2 * m ** 2)
            + 3 * k * c ** 3 * (d - b) / ((1 - b - 2 * d) * m * (1 - d - b) * w ** 2))


def _w12(v, d):
    a = v.a
    c = 1 - d - a
    k = 1 - a - 2 * d
    w = 1 - a - 3 * d
    m = 1 - 2 * d
    return ((c ** 2 / k + c ** 2 / w) * (3 * d - 2 * a) / (k * m)
            + c ** 2 * (d - a) / (m * w ** 2)
            + a * c ** 3 / (w ** 2 * m ** 2)
            + 3 * k * c ** 3 * d / ((1 - 3 * d) * m ** 2 * w ** 2))


def _w13(v, d):
    c = 1 - d
    m = 1 - 2 * d
    k = 1 - 3 * d
    return ((c ** 2 / m + c ** 2 / k) * 3 * d / m ** 2
            + c ** 2 * d / (m * k ** 2)
            + d * c ** 3 / (k ** 2 * m ** 2)
            + 3 * c ** 3 * d / (k ** 3 * m))


_OBJECTIVES = {
    ProgramId.P3: _w3, ProgramId.P4: _w4, ProgramId.P5: _w5, ProgramId.P6: _w6,
    ProgramId.P7: _w7, ProgramId.P8: _w8, ProgramId.P9: _w9, ProgramId.P10: _w10,
    ProgramId.P11: _w11, ProgramId.P12: _w12, ProgramId.W13: _w13,
}


def _exact_structured(pt: StructuredPoint) -> SimpleNamespace:
    """Same tree with every value in the fast exact type."""
    c = _accel.to_exact

    def pair(pb):
        return None if pb is None else SimpleNamespace(f=c(pb.f), q=c(pb.q), p=c(pb.p), h=c(pb.h))

    blocks = [SimpleNamespace(y=c(b.y), e=c(b.e), q0=c(b.q0), p0=c(b.p0),
                              pairs=[pair(pb) for pb in b.pairs], pair=pair(b.pair),
                              r=None if b.r is None else c(b.r))
              for b in pt.blocks]
    return SimpleNamespace(x=c(pt.x), e0=c(pt.e0), g0=c(pt.g0), unit=c(pt.unit), blocks=blocks)


def eval_objective(p, pt, d) -> Fraction:
    """Exact objective of program ``p`` at ``pt``.

    Structured points (P1, P2) use ``unit`` for 1/n. Raises ``ZeroDenominator``
    when a denominator vanishes; nothing else about the domain is checked here.
    """
    p = ProgramId.parse(p)
    d = as_fraction(d)
    dx = _accel.to_exact(d)
    try:
        if isinstance(pt, StructuredPoint):
            if pt.program is not p:
                raise ValueError(f"structured point of {pt.program.name} evaluated as {p.name}")
            return _accel.from_exact((_w1 if p is ProgramId.P1 else _w2)(_exact_structured(pt), dx))
        if p in (ProgramId.P1, ProgramId.P2):
            raise ValueError(f"{p.name} needs a StructuredPoint")
        names = program_variables(p, pt)
        _missing(names, pt)
        ns = SimpleNamespace(**{k: _accel.to_exact(as_fraction(pt[k])) for k in names})
        return _accel.from_exact(_OBJECTIVES[p](ns, dx))
    except ZeroDivisionError as exc:
        raise ZeroDenominator(f"{p.name} has a vanishing denominator at this point") from exc


def eval_objective_float(p, values: Mapping[str, np.ndarray], d: float) -> np.ndarray:
    """Vectorized float evaluation; off-domain denominators give inf/nan rather than raising."""
    p = ProgramId.parse(p)
    ns = SimpleNamespace(**{k: np.asarray(v, dtype=np.float64) for k, v in values.items()})
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(_OBJECTIVES[p](ns, float(d)), dtype=np.float64)


def w13(d) -> Fraction:
    """Closed form bounding the last program; defined for d in [0, 1/4)."""
    d = as_fraction(d)
    if not 0 <= d < Fraction(1, 4):
        raise ZeroDenominator(f"closed form needs d in [0, 1/4), got {d}")
    return eval_objective(ProgramId.W13, {}, d)


# --------------------------------------------------- symmetrize / collapse

def _pair_value(pt, b, pb):
    return (1 / pb.h) * _inner(pt, b.e, b.q0, b.p0, pb.f, pb.q, pb.p)


def _block_value(pt, b):
    pb = b.pair
    return _outer(pt, b.e, b.q0, b.p0) + (b.r / pb.h) * _inner(pt, b.e, b.q0, b.p0, pb.f, pb.q, pb.p)


def _argmax_first(values) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def symmetrize_p1(pt: StructuredPoint) -> StructuredPoint:
    """Within each y-block copy the best z-block (first on ties) to every z."""
    if pt.program is not ProgramId.P1:
        raise ValueError("symmetrize_p1 needs a P1 point")
    fast = _exact_structured(pt)
    blocks = []
    for b, fb in zip(pt.blocks, fast.blocks):
        if not b.pairs:
            blocks.append(b)
            continue
        j = _argmax_first([_pair_value(fast, fb, pb) for pb in fb.pairs])
        blocks.append(replace(b, pairs=(b.pairs[j],) * len(b.pairs)))
    return replace(pt, blocks=tuple(blocks))


def symmetrize_p2(pt: StructuredPoint) -> StructuredPoint:
    """Copy the best y-block (first on ties) to every y."""
    if pt.program is not ProgramId.P2:
        raise ValueError("symmetrize_p2 needs a P2 point")
    if not pt.blocks:
        return pt
    fast = _exact_structured(pt)
    i = _argmax_first([_block_value(fast, b) for b in fast.blocks])
    return replace(pt, blocks=(pt.blocks[i],) * len(pt.blocks))


def _lowest_pair(ctx: SimpleNamespace, d) -> PairBlock:
    vals = {}
    ns = SimpleNamespace(**vars(ctx))
    for k in ("f", "q", "p", "h"):
        vals[k] = _BOUNDS[k](ns, d)[0]
        setattr(ns, k, vals[k])
    return PairBlock(**vals)


def p1_to_p2(pt: StructuredPoint, d) -> StructuredPoint:
    """Collapse a P1 point whose z-blocks agree inside each y-block into P2.

    y-blocks without any z get the lower-bound pair and ``r = 0``.
    """
    d = as_fraction(d)
    blocks = []
    for b in pt.blocks:
        if b.pairs and any(pb != b.pairs[0] for pb in b.pairs):
            raise ValueError("z-blocks differ; symmetrize first")
        if b.pairs:
            pair = b.pairs[0]
        else:
            pair = _lowest_pair(SimpleNamespace(x=pt.x, e0=pt.e0, g0=pt.g0, y=b.y, e=b.e, q0=b.q0, p0=b.p0), d)
        blocks.append(NeighborBlock(b.y, b.e, b.q0, b.p0, pair=pair, r=len(b.pairs) * pt.unit))
    return replace(pt, program=ProgramId.P2, blocks=tuple(blocks))


def p2_to_p3(pt: StructuredPoint, d) -> ScalarPoint:
    """Collapse a P2 point with identical y-blocks into a scalar P3 point."""
    d = as_fraction(d)
    if any(b != pt.blocks[0] for b in pt.blocks):
        raise ValueError("y-blocks differ; symmetrize first")
    out = {"x": pt.x, "e0": pt.e0, "g0": pt.g0}
    if pt.blocks:
        b = pt.blocks[0]
        out.update(y=b.y, e=b.e, q0=b.q0, p0=b.p0, f=b.pair.f, q=b.pair.q, p=b.pair.p, h=b.pair.h, r=b.r)
    else:
        ns = SimpleNamespace(**out)
        for k in ("y", "e", "f", "q0", "q", "p0", "p", "h", "r"):
            lo = _BOUNDS[k](ns, d)[0] if k != "y" else 1 - d
            out[k] = lo
            setattr(ns, k, lo)
    out["r0"] = len(pt.blocks) * pt.unit
    return {k: out[k] for k in _FULL}


# ------------------------------------------------------------ reductions

def reduce_point(p, pt: Mapping, d) -> ScalarPoint:
    """Apply the pinning substitution that takes ``p`` to its successor.

    The returned point carries the successor's variables plus the pinned ones.
    """
    p = ProgramId.parse(p)
    d = as_fraction(d)
    v = dict(pt)
    if p is ProgramId.P4:
        v.update(r=v["p0"], r0=v["g0"], h=v["p0"] + v["q"] - v["e"], p=v["q0"] + v["f"] - v["y"])
        return v
    if p is ProgramId.P5:
        v.update(p0=v["g0"] + v["e"] - v["x"], q0=v["e0"] + v["e"] - v["x"])
        return v
    if p is ProgramId.P8:
        v["e"] = v["x"] + v["y"] - 1
        v.update(a=v["x"] - v["e0"], b=v["y"] - v["f"])
        return v
    if p is ProgramId.P9:
        if "a" not in v:
            v.update(a=v["x"] - v["e0"], b=v["y"] - v["f"])
        v["y"] = 1 - d
        return v
    if p is ProgramId.P10:
        v["x"] = 1 - d
        return v
    raise NoSubstitution(f"{p.name} has no pinning substitution")


SUCCESSOR = {ProgramId.P4: ProgramId.P5, ProgramId.P5: ProgramId.P6, ProgramId.P8: ProgramId.P9,
             ProgramId.P9: ProgramId.P10, ProgramId.P10: ProgramId.P11}


@dataclass(frozen=True)
class Witness:
    check: str
    point: dict
    lower: Fraction   # value that should not exceed ...
    upper: Fraction   # ... this one
    d: Fraction

    def to_dict(self) -> dict:
        return {"check": self.check, "d": str(self.d), "point": {k: str(v) for k, v in self.point.items()},
                "weaker_value": str(self.lower), "stronger_value": str(self.upper)}


CHAIN_PAIRS = ((ProgramId.P3, ProgramId.P4), (ProgramId.P6, ProgramId.P7),
               (ProgramId.P7, ProgramId.P8), (ProgramId.P11, ProgramId.P12),
               (ProgramId.P12, ProgramId.W13))


def chain_inequality_check(pair, pt: Mapping, d) -> Witness | None:
    """Pointwise majorization ``W_hi(pt) >= W_lo(pt)``; returns a witness on failure."""
    lo_p, hi_p = (ProgramId.parse(s) for s in pair)
    if (lo_p, hi_p) not in CHAIN_PAIRS:
        raise ValueError(f"no pointwise majorization between {lo_p.name} and {hi_p.name}")
    d = as_fraction(d)
    lo = eval_objective(lo_p, pt, d)
    hi = eval_objective(hi_p, pt, d)
    if hi >= lo:
        return None
    return Witness(f"{lo_p.name}<={hi_p.name}", dict(pt), lo, hi, d)


def pinning_check(p, pt: Mapping, d) -> Witness | None:
    """Successor objective at the pinned point must not fall below ``p``'s objective at ``pt``."""
    p = ProgramId.parse(p)
    d = as_fraction(d)
    succ = SUCCESSOR.get(p)
    if succ is None:
        raise NoSubstitution(f"{p.name} has no pinning substitution")
    before = eval_objective(p, pt, d)
    after = eval_objective(succ, reduce_point(p, pt, d), d)
    if after >= before:
        return None
    return Witness(f"pin {p.name}->{succ.name}", dict(pt), before, after, d)


# -------------------------------------------------------------- sampling

GRID = 1024


def _draw(rng: random.Random, lo: Fraction, hi: Fraction, grid: int = GRID) -> Fraction:
    if hi <= lo:
        return lo
    roll = rng.random()
    if roll < 0.1:
        return lo
    if roll < 0.2:
        return hi
    return lo + (hi - lo) * Fraction(rng.randint(0, grid), grid)


def sample_point(p, d, rng: random.Random, grid: int = GRID) -> ScalarPoint:
    """On-domain point drawn coordinate by coordinate inside its interval."""
    names = program_variables(ProgramId.parse(p))
    d = as_fraction(d)
    ns = SimpleNamespace()
    out = {}
    for k in names:
        lo, hi = _BOUNDS[k](ns, d)
        out[k] = _draw(rng, lo, hi, grid)
        setattr(ns, k, out[k])
    return out


def sample_structured(p, d, rng: random.Random, max_outer: int = 3, max_inner: int = 3,
                      grid: int = GRID) -> StructuredPoint:
    p = ProgramId.parse(p)
    d = as_fraction(d)
    ns = SimpleNamespace()
    for k in ("x", "e0", "g0"):
        lo, hi = _BOUNDS[k](ns, d)
        setattr(ns, k, _draw(rng, lo, hi, grid))
    unit = Fraction(1, rng.randint(8, 40))
    r0 = rng.randint(0, min(max_outer, int(ns.g0 / unit)))
    blocks = []
    for _ in range(r0):
        b = SimpleNamespace(**vars(ns))
        for k in ("y", "e", "q0", "p0"):
            lo, hi = _BOUNDS[k](b, d)
            setattr(b, k, _draw(rng, lo, hi, grid))

        def pair() -> PairBlock:
            c = SimpleNamespace(**vars(b))
            for k in ("f", "q", "p", "h"):
                lo, hi = _BOUNDS[k](c, d)
                setattr(c, k, _draw(rng, lo, hi, grid))
            return PairBlock(c.f, c.q, c.p, c.h)

        if p is ProgramId.P1:
            ri = rng.randint(0, min(max_inner, int(b.p0 / unit)))
            blocks.append(NeighborBlock(b.y, b.e, b.q0, b.p0, pairs=tuple(pair() for _ in range(ri))))
        else:
            blocks.append(NeighborBlock(b.y, b.e, b.q0, b.p0, pair=pair(), r=_draw(rng, Fraction(0), b.p0, grid)))
    return StructuredPoint(p, ns.x, ns.e0, ns.g0, unit, tuple(blocks), d)


def rng_for(seed: int, index: int, salt: str = "") -> random.Random:
    """Independent stream per sample index so results do not depend on worker count."""
    return random.Random(f"{seed}:{salt}:{index}")


# -------------------------------------------------------------- suite

# name -> (sampled program, checker)
def _q_pinned(value: str):
    def check(pt, d):
        pt = dict(pt)
        pt["q"] = pt["e"] + pt["f"] - pt["y"] if value == "low" else pt["e"]
        w = chain_inequality_check((ProgramId.P6, ProgramId.P7), pt, d)
        return None if w is None else replace(w, check=f"P6<=P7 (q={'e+f-y' if value == 'low' else 'e'})")
    return check


def _sym(p):
    def check(pt, d):
        fn = symmetrize_p1 if p is ProgramId.P1 else symmetrize_p2
        before = eval_objective(p, pt, d)
        sym = fn(pt)
        after = eval_objective(p, sym, d)
        bad = after < before or domain_check(p, sym, d)
        return Witness(f"symmetrize {p.name}", pt.flat(), before, after, d) if bad else None
    return check


def _collapse(pt, d):
    """P1 -> P2 -> P3 collapse keeps the value once symmetric."""
    s1 = symmetrize_p1(pt)
    v1 = eval_objective(ProgramId.P1, s1, d)
    s2 = p1_to_p2(s1, d)
    v2 = eval_objective(ProgramId.P2, s2, d)
    if v1 != v2:
        return Witness("collapse P1->P2", s1.flat(), v1, v2, d)
    s2 = symmetrize_p2(s2)
    v2 = eval_objective(ProgramId.P2, s2, d)
    v3 = eval_objective(ProgramId.P3, p2_to_p3(s2, d), d)
    if v2 != v3:
        return Witness("collapse P2->P3", s2.flat(), v2, v3, d)
    return None


CHECKS: dict[str, tuple] = {
    "P3<=P4": ("scalar", ProgramId.P3, lambda pt, d: chain_inequality_check(("P3", "P4"), pt, d)),
    "P6<=P7": ("scalar", ProgramId.P6, lambda pt, d: chain_inequality_check(("P6", "P7"), pt, d)),
    "P6<=P7 (q=e+f-y)": ("scalar", ProgramId.P6, _q_pinned("low")),
    "P6<=P7 (q=e)": ("scalar", ProgramId.P6, _q_pinned("high")),
    "P7<=P8": ("scalar", ProgramId.P7, lambda pt, d: chain_inequality_check(("P7", "P8"), pt, d)),
    "P11<=P12": ("scalar", ProgramId.P11, lambda pt, d: chain_inequality_check(("P11", "P12"), pt, d)),
    "P12<=W13": ("scalar", ProgramId.P12, lambda pt, d: chain_inequality_check(("P12", "W13"), pt, d)),
    "pin P4->P5": ("scalar", ProgramId.P4, lambda pt, d: pinning_check("P4", pt, d)),
    "pin P5->P6": ("scalar", ProgramId.P5, lambda pt, d: pinning_check("P5", pt, d)),
    "pin P8->P9": ("scalar", ProgramId.P8, lambda pt, d: pinning_check("P8", pt, d)),
    "pin P9->P10": ("scalar", ProgramId.P9, lambda pt, d: pinning_check("P9", pt, d)),
    "pin P10->P11": ("scalar", ProgramId.P10, lambda pt, d: pinning_check("P10", pt, d)),
    "symmetrize P1": ("structured", ProgramId.P1, _sym(ProgramId.P1)),
    "symmetrize P2": ("structured", ProgramId.P2, _sym(ProgramId.P2)),
    "collapse P1->P3": ("structured", ProgramId.P1, _collapse),
}


@dataclass
class CheckResult:
    name: str
    samples: int
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses


def _run_range(name: str, d: Fraction, seed: int, start: int, stop: int, keep: int) -> list[Witness]:
    kind, prog, check = CHECKS[name]
    found = []
    for i in range(start, stop):
        rng = rng_for(seed, i, name)
        pt = sample_point(prog, d, rng) if kind == "scalar" else sample_structured(prog, d, rng)
        w = check(pt, d)
        if w is not None:
            found.append(w)
            if len(found) >= keep:
                break
    return found


def run_check(name: str, d, samples: int, seed: int = 0, threads: int = 1, keep: int = 5) -> CheckResult:
    """Evaluate one named check at ``samples`` seeded on-domain points."""
    d = as_fraction(d)
    if name not in CHECKS:
        raise ValueError(f"unknown check {name!r}")
    if threads <= 1 or samples < 2 * threads:
        return CheckResult(name, samples, _run_range(name, d, seed, 0, samples, keep))
    bounds = np.linspace(0, samples, threads + 1).astype(int)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(_run_range, [name] * threads, [d] * threads, [seed] * threads,
                         bounds[:-1].tolist(), bounds[1:].tolist(), [keep] * threads)
        found = [w for part in parts for w in part]
    return CheckResult(name, samples, found[:keep])


def run_chain_suite(d, samples: int = 10_000, seed: int = 0, threads: int = 1,
                    checks: Sequence[str] | None = None) -> list[CheckResult]:
    return [run_check(name, d, samples, seed, threads) for name in (checks or CHECKS)]


# ----------------------------------------------------------- graph points

def graph_to_p1_point(g: Graph, o) -> StructuredPoint:
    """The P1 point of densities read off the ordered 4-clique ``o``."""
    x1, x2, x3, x4 = check_clique(g, o, sizes=(4,))
    n = g.n

    def dens(*vs) -> Fraction:
        return Fraction(neighborhood_mask(g, mask_of(vs)).bit_count(), n)

    r = neighborhood_mask(g, mask_of((x1, x2, x3, x4)))
    blocks = []
    for y in iter_bits(r):
        pairs = tuple(PairBlock(dens(y, z), dens(x1, y, z), dens(x1, x2, y, z), dens(x1, x2, x3, y, z))
                      for z in iter_bits(r & g.rows[y]))
        blocks.append(NeighborBlock(dens(y), dens(x1, y), dens(x1, x2, y), dens(x1, x2, x3, y), pairs=pairs))
    return StructuredPoint(ProgramId.P1, dens(x1), dens(x1, x2), dens(x1, x2, x3), Fraction(1, n),
                           tuple(blocks), degree_deficiency(g))


# --------------------------------------------------------- serialization

def format_point(p, pt, d) -> str:
    p = ProgramId.parse(p)
    flat = pt.flat() if isinstance(pt, StructuredPoint) else pt
    lines = [f"# program={p.name} d={as_fraction(d)}"]
    lines.extend(f"{k}={as_fraction(v)}" for k, v in flat.items())
    return "\n".join(lines) + "\n"


def parse_point(text: str) -> tuple[ProgramId, Fraction, dict[str, Fraction]]:
    """Inverse of ``format_point`` for scalar points."""
    prog, d, vals = None, None, {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for item in line[1:].split():
                k, v = item.split("=")
                if k == "program":
                    prog = ProgramId.parse(v)
                elif k == "d":
                    d = Fraction(v)
            continue
        k, v = line.split("=")
        vals[k.strip()] = Fraction(v.strip())
    if prog is None or d is None:
        raise ValueError("point header needs program= and d=")
    return prog, d, vals
