"""Exact sign certificate for the degree-6 polynomial W(d) behind the closed-form bound.

W(d) < 0 on [lo, hi] is established by a derivative chain: the quadratic fourth
derivative is monotone by its vertex location, and each lower derivative is
monotone by the sign of the one above it. Each sign comes from whichever
endpoint value can decide it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Sequence

from .nlp import as_fraction


@dataclass(frozen=True)
class Polynomial:
    """Immutable polynomial with Fraction coefficients in ascending degree."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def linear(cls, c0, c1) -> "Polynomial":
        return cls((c0, c1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Polynomial") -> "Polynomial":
        other = _lift(other)
        return Polynomial(a + b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=Fraction(0)))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "Polynomial":
        return _lift(other) - self

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        other = _lift(other)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial((1,))
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, d) -> Fraction:
        return eval_poly(self, d)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" + ("" if i == 0 else "*d" if i == 1 else f"*d^{i}"))
        return " + ".join(terms).replace("+ -", "- ")


def _lift(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial((p,))


def differentiate(p: Polynomial) -> Polynomial:
    return Polynomial(i * c for i, c in enumerate(p.coeffs) if i > 0)


def eval_poly(p: Polynomial, d) -> Fraction:
    """Horner evaluation, exact."""
    d = as_fraction(d)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * d + c
    return acc


def poly_from_product_form() -> Polynomial:
    """Expand the six-term product expression for W(d)."""
    d = Polynomial((0, 1))
    one_d = Polynomial((1, -1))     # 1 - d
    two_d = Polynomial((1, -2))     # 1 - 2d
    three_d = Polynomial((1, -3))   # 1 - 3d
    return (3 * d * one_d ** 2 * three_d ** 3
            + 3 * d * one_d ** 2 * three_d ** 2 * two_d
            + one_d ** 2 * d * two_d ** 2 * three_d
            + d * one_d ** 3 * three_d * two_d
            + 3 * one_d ** 3 * d * two_d ** 2
            - three_d ** 3 * two_d ** 3)


def derivative_chain(p: Polynomial, depth: int = 4) -> list[Polynomial]:
    out = [p]
    for _ in range(depth):
        out.append(differentiate(out[-1]))
    return out


# Reference figures for W and its derivatives at d = 2/33. The fourth-derivative
# pair differs from exact differentiation by exactly 2 (constant -28606 versus
# -28608); it is carried only so reports can show the mismatch.
REFERENCE_COEFFICIENTS = tuple(Fraction(c) for c in (-1, 26, -194, 669, -1192, 1065, -381))
REFERENCE_POINT = Fraction(2, 33)
REFERENCE_VALUES = {
    0: Fraction(-1345519, 430489323),
    1: Fraction(38549710, 4348377),
    2: Fraction(-25389224, 131769),
    3: Fraction(10001326, 3993),
    4: Fraction(-2585086, 121),
}
REFERENCE_FOURTH_DERIVATIVE = Polynomial((-28606, 127800, -137160))


class CertificationFailed(AssertionError):
    def __init__(self, certificate: "SignCertificate"):
        self.certificate = certificate
        step = certificate.failed_step
        super().__init__(f"sign chain breaks at derivative order {step}" if step is not None
                         else "sign chain does not close")


@dataclass(frozen=True)
class StepRecord:
    order: int
    direction: str            # "increasing", "decreasing" or "unknown"
    endpoint: str             # "lo" or "hi"
    value: Fraction
    sign: str                 # "negative", "positive" or "undetermined"
    vertex: Fraction | None = None  # only for the quadratic top step
    curvature: int = 0              # sign of its leading coefficient

    def to_dict(self) -> dict:
        out = {"order": self.order, "direction": self.direction, "endpoint": self.endpoint,
               "value": _q(self.value), "sign": self.sign}
        if self.vertex is not None:
            out["vertex"] = _q(self.vertex)
            out["curvature"] = self.curvature
        return out


def _q(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _sign_from(direction: str, lo_val: Fraction, hi_val: Fraction) -> tuple[str, str, Fraction]:
    """Sign entailed on the whole interval by monotonicity plus one endpoint value."""
    if direction == "increasing":
        if hi_val < 0:
            return "negative", "hi", hi_val
        if lo_val > 0:
            return "positive", "lo", lo_val
        return "undetermined", "hi", hi_val
    if direction == "decreasing":
        if hi_val > 0:
            return "positive", "hi", hi_val
        if lo_val < 0:
            return "negative", "lo", lo_val
        return "undetermined", "hi", hi_val
    return "undetermined", "hi", hi_val


def _direction_from_vertex(curvature: int, vertex: Fraction, lo: Fraction, hi: Fraction) -> str:
    if curvature < 0:
        return "increasing" if vertex >= hi else "decreasing" if vertex <= lo else "unknown"
    return "decreasing" if vertex >= hi else "increasing" if vertex <= lo else "unknown"


def _quadratic_direction(q: Polynomial, lo: Fraction, hi: Fraction) -> tuple[str, Fraction | None, int]:
    if q.degree <= 0:
        return "increasing", None, 0   # constant: monotone both ways
    if q.degree == 1:
        return ("increasing" if q.coeffs[1] > 0 else "decreasing"), None, 0
    if q.degree != 2:
        raise ValueError("top step expects a polynomial of degree at most 2")
    c1, c2 = q.coeffs[1], q.coeffs[2]
    vertex = -c1 / (2 * c2)
    curvature = 1 if c2 > 0 else -1
    return _direction_from_vertex(curvature, vertex, lo, hi), vertex, curvature


@dataclass
class SignCertificate:
    lo: Fraction
    hi: Fraction
    polynomial: Polynomial
    records: list[StepRecord]
    verdict: bool
    failed_step: int | None
    discrepancies: list[dict] = field(default_factory=list)

    def recheck(self) -> bool:
        """Recompute the verdict from the records alone."""
        if not self.records:
            return False
        expected = None
        for i, rec in enumerate(self.records):
            if i and rec.order != self.records[i - 1].order - 1:
                return False
            if i == 0:
                if rec.vertex is not None and rec.direction != _direction_from_vertex(
                        rec.curvature, rec.vertex, self.lo, self.hi):
                    return False
            elif rec.direction != expected:
                return False
            entailed = {
                ("increasing", "hi"): "negative" if rec.value < 0 else None,
                ("increasing", "lo"): "positive" if rec.value > 0 else None,
                ("decreasing", "hi"): "positive" if rec.value > 0 else None,
                ("decreasing", "lo"): "negative" if rec.value < 0 else None,
            }.get((rec.direction, rec.endpoint))
            if entailed is None or entailed != rec.sign:
                return False
            expected = "increasing" if rec.sign == "positive" else "decreasing"
        last = self.records[-1]
        return last.order == 0 and last.sign == "negative"

    def to_dict(self) -> dict:
        return {
            "interval": [_q(self.lo), _q(self.hi)],
            "polynomial": [_q(c) for c in self.polynomial.coeffs],
            "steps": [r.to_dict() for r in self.records],
            "verdict": "PASS" if self.verdict else "FAIL",
            "failed_step": self.failed_step,
            "discrepancies": self.discrepancies,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def reference_discrepancies(p: Polynomial | None = None) -> list[dict]:
    """Where the reference figures disagree with exact computation."""
    p = p or poly_from_product_form()
    chain = derivative_chain(p)
    out = []
    if p.coeffs != REFERENCE_COEFFICIENTS:
        out.append({"item": "coefficients", "reference": [_q(c) for c in REFERENCE_COEFFICIENTS],
                    "exact": [_q(c) for c in p.coeffs]})
    if chain[4] != REFERENCE_FOURTH_DERIVATIVE:
        out.append({"item": "fourth derivative", "reference": str(REFERENCE_FOURTH_DERIVATIVE),
                    "exact": str(chain[4])})
    for order, ref in REFERENCE_VALUES.items():
        exact = eval_poly(chain[order], REFERENCE_POINT)
        if exact != ref:
            out.append({"item": f"derivative {order} at {_q(REFERENCE_POINT)}", "reference": _q(ref),
                        "exact": _q(exact), "difference": _q(ref - exact)})
    return out


def build_sign_chain(lo, hi, p: Polynomial | None = None) -> SignCertificate:
    """Run the derivative chain on [lo, hi] and record every step; never raises on failure."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    if lo < 0 or hi < lo:
        raise ValueError(f"need 0 <= lo <= hi, got [{lo}, {hi}]")
    p = p or poly_from_product_form()
    chain = derivative_chain(p)
    records: list[StepRecord] = []
    top = len(chain) - 1
    direction, vertex, curvature = _quadratic_direction(chain[top], lo, hi)
    failed = None
    for order in range(top, -1, -1):
        f = chain[order]
        sign, endpoint, value = _sign_from(direction, eval_poly(f, lo), eval_poly(f, hi))
        records.append(StepRecord(order, direction, endpoint, value, sign,
                                  vertex if order == top else None, curvature if order == top else 0))
        if sign == "undetermined" or (order == 0 and sign != "negative"):
            failed = order
            break
        direction = "increasing" if sign == "positive" else "decreasing"
    verdict = failed is None
    discrepancies = reference_discrepancies(p) if hi == REFERENCE_POINT else []
    return SignCertificate(lo, hi, p, records, verdict, failed, discrepancies)


def certify_sign_chain(lo, hi) -> SignCertificate:
    """Certificate that W(d) < 0 on [lo, hi]; raises ``CertificationFailed`` otherwise."""
    cert = build_sign_chain(lo, hi)
    if not cert.verdict:
        raise CertificationFailed(cert)
    return cert


def bisect_threshold(precision, upper=Fraction(1, 5)) -> Fraction:
    """Largest multiple ``k * precision`` whose interval [0, k * precision] still certifies.

    The returned value ``t`` satisfies: [0, t] passes and [0, t + precision] fails.
    """
    precision = as_fraction(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")

    def ok(k: int) -> bool:
        return build_sign_chain(0, k * precision).verdict

    good, bad = 0, -(-as_fraction(upper) // precision)
    if ok(bad):
        raise ValueError(f"chain still closes at {bad * precision}; raise the upper limit")
    while bad - good > 1:
        mid = (good + bad) // 2
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good * precision

