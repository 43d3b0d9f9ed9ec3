"""Parametric orientation-preserving interval diffeomorphisms with a rigor layer.

Four closed-form families: affine maps, affine maps with a quadratic bump,
plateau maps that are the identity on an inner interval, and post-compositions
with an endpoint-fixing bump (used by monotone one-parameter families).
All class checks use closed-form derivative and endpoint bounds, not sampling.
Evaluation and derivative methods accept floats or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Outward rounding margin for interval images and certified comparisons.
# A fixed margin is portable and dominates accumulated rounding at the
# composition depths used here (<= 64).
EPS_ROUND = 1e-13
INVERT_TOL = 1e-12
_BISECT_STEPS = 60


@dataclass(frozen=True)
class RealInterval:
    """Closed subinterval of [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"need 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class ClassCheck:
    """Outcome of a map-class validation; falsy with a reason on failure."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


_OK = ClassCheck(True)


@dataclass(frozen=True)
class Affine:
    """x -> a + b*x."""

    a: float
    b: float

    form = "affine"

    def eval(self, x):
        return self.a + self.b * x

    def derivative(self, x):
        if isinstance(x, np.ndarray):
            return np.full_like(x, self.b)
        return self.b

    def derivative_range(self, lo: float, hi: float) -> tuple[float, float]:
        return (self.b, self.b)

    def second_derivative_bound(self) -> float:
        return 0.0

    def third_derivative_bound(self) -> float:
        return 0.0

    def class_check(self) -> ClassCheck:
        if not all(math.isfinite(v) for v in (self.a, self.b)):
            return ClassCheck(False, "parameters must be finite")
        if self.b <= 0:
            return ClassCheck(False, f"derivative bound b = {self.b} is not positive")
        if self.a <= 0:
            return ClassCheck(False, f"f(0) = {self.a} is not > 0")
        if self.a + self.b >= 1:
            return ClassCheck(False, f"f(1) = {self.a + self.b} is not < 1")
        return _OK

    def params(self) -> dict:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class BumpedAffine:
    """x -> a + b*x + c*x*(1-x)."""

    a: float
    b: float
    c: float

    form = "bumped_affine"

    def eval(self, x):
        return self.a + self.b * x + self.c * x * (1.0 - x)

    def derivative(self, x):
        return self.b + self.c * (1.0 - 2.0 * x)

    def derivative_range(self, lo: float, hi: float) -> tuple[float, float]:
        e1 = self.b + self.c * (1.0 - 2.0 * lo)
        e2 = self.b + self.c * (1.0 - 2.0 * hi)
        return (min(e1, e2), max(e1, e2))

    def second_derivative_bound(self) -> float:
        return 2.0 * abs(self.c)

    def third_derivative_bound(self) -> float:
        return 0.0

    def class_check(self) -> ClassCheck:
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c)):
            return ClassCheck(False, "parameters must be finite")
        if self.b - abs(self.c) <= 0:
            return ClassCheck(False, f"derivative bound b - |c| = {self.b - abs(self.c)} is not positive")
        if self.a <= 0:
            return ClassCheck(False, f"f(0) = {self.a} is not > 0")
        if self.a + self.b >= 1:
            return ClassCheck(False, f"f(1) = {self.a + self.b} is not < 1")
        return _OK

    def params(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class Plateau:
    """Identity on [j_lo, j_hi], quadratic push-in outside; C^1 at the joins.

    f(x) = x + c1*(j_lo - x)^2 below j_lo, x on the plateau,
    x - c1*(x - j_hi)^2 above j_hi.
    """

    c1: float
    j_lo: float
    j_hi: float

    form = "plateau"

    def eval(self, x):
        if isinstance(x, np.ndarray):
            below = x < self.j_lo
            above = x > self.j_hi
            return np.where(
                below,
                x + self.c1 * (self.j_lo - x) ** 2,
                np.where(above, x - self.c1 * (x - self.j_hi) ** 2, x),
            )
        if x < self.j_lo:
            return x + self.c1 * (self.j_lo - x) ** 2
        if x > self.j_hi:
            return x - self.c1 * (x - self.j_hi) ** 2
        return x

    def derivative(self, x):
        if isinstance(x, np.ndarray):
            below = x < self.j_lo
            above = x > self.j_hi
            return np.where(
                below,
                1.0 - 2.0 * self.c1 * (self.j_lo - x),
                np.where(above, 1.0 - 2.0 * self.c1 * (x - self.j_hi), 1.0),
            )
        if x < self.j_lo:
            return 1.0 - 2.0 * self.c1 * (self.j_lo - x)
        if x > self.j_hi:
            return 1.0 - 2.0 * self.c1 * (x - self.j_hi)
        return 1.0

    def derivative_range(self, lo: float, hi: float) -> tuple[float, float]:
        # slope is unimodal: increases to 1 at j_lo, flat, then decreases
        d_lo = float(self.derivative(lo))
        d_hi = float(self.derivative(hi))
        if hi < self.j_lo or lo > self.j_hi:
            return (min(d_lo, d_hi), max(d_lo, d_hi))
        return (min(d_lo, d_hi), 1.0)

    def second_derivative_bound(self) -> float:
        return 2.0 * self.c1

    def third_derivative_bound(self) -> float:
        return 0.0

    def class_check(self) -> ClassCheck:
        if not all(math.isfinite(v) for v in (self.c1, self.j_lo, self.j_hi)):
            return ClassCheck(False, "parameters must be finite")
        if not (0.0 < self.j_lo <= self.j_hi < 1.0):
            return ClassCheck(False, f"need 0 < j_lo <= j_hi < 1, got ({self.j_lo}, {self.j_hi})")
        if self.c1 <= 0:
            return ClassCheck(False, f"c1 = {self.c1} is not positive")
        slope_lb = 1.0 - 2.0 * self.c1 * max(self.j_lo, 1.0 - self.j_hi)
        if slope_lb <= 0:
            return ClassCheck(False, f"derivative bound {slope_lb} is not positive")
        return _OK

    def params(self) -> dict:
        return {"c1": self.c1, "j_lo": self.j_lo, "j_hi": self.j_hi}


def _bump(y, amount):
    return y + amount * y * (1.0 - y)


def _bump_slope(y, amount):
    return 1.0 + amount * (1.0 - 2.0 * y)


@dataclass(frozen=True)
class BumpComposed:
    """psi o inner, where psi(y) = y + amount*y*(1-y) fixes both endpoints.

    The bump keeps 0 and 1 fixed, so class membership reduces to the inner
    map's endpoint checks plus a positive slope bound on the inner image.
    """

    amount: float
    inner: "FiberMap"

    form = "bump_composed"

    def eval(self, x):
        return _bump(self.inner.eval(x), self.amount)

    def derivative(self, x):
        y = self.inner.eval(x)
        return _bump_slope(y, self.amount) * self.inner.derivative(x)

    def derivative_range(self, lo: float, hi: float) -> tuple[float, float]:
        y_lo = float(self.inner.eval(lo)) - EPS_ROUND
        y_hi = float(self.inner.eval(hi)) + EPS_ROUND
        p1 = _bump_slope(y_lo, self.amount)
        p2 = _bump_slope(y_hi, self.amount)
        i_lo, i_hi = self.inner.derivative_range(lo, hi)
        candidates = [p * d for p in (p1, p2) for d in (i_lo, i_hi)]
        return (min(candidates), max(candidates))

    def second_derivative_bound(self) -> float:
        s_hi = self.inner.derivative_range(0.0, 1.0)[1]
        psi_slope_hi = 1.0 + abs(self.amount)
        return 2.0 * abs(self.amount) * s_hi * s_hi + psi_slope_hi * self.inner.second_derivative_bound()

    def third_derivative_bound(self) -> float:
        s_hi = self.inner.derivative_range(0.0, 1.0)[1]
        return (
            6.0 * abs(self.amount) * s_hi * self.inner.second_derivative_bound()
            + (1.0 + abs(self.amount)) * self.inner.third_derivative_bound()
        )

    def class_check(self) -> ClassCheck:
        if not math.isfinite(self.amount):
            return ClassCheck(False, "bump amount must be finite")
        inner_check = self.inner.class_check()
        if not inner_check:
            return ClassCheck(False, f"inner map: {inner_check.reason}")
        y0 = float(self.inner.eval(0.0))
        y1 = float(self.inner.eval(1.0))
        slope_lb = min(_bump_slope(y0, self.amount), _bump_slope(y1, self.amount))
        if slope_lb <= 0:
            return ClassCheck(False, f"bump slope bound {slope_lb} on the inner image is not positive")
        f0 = _bump(y0, self.amount)
        f1 = _bump(y1, self.amount)
        if f0 <= 0:
            return ClassCheck(False, f"f(0) = {f0} is not > 0")
        if f1 >= 1:
            return ClassCheck(False, f"f(1) = {f1} is not < 1")
        return _OK

    def params(self) -> dict:
        return {"amount": self.amount}


FiberMap = Affine | BumpedAffine | Plateau | BumpComposed

_FORMS = {"affine": Affine, "bumped_affine": BumpedAffine, "plateau": Plateau}


def validate_class(f: FiberMap) -> ClassCheck:
    """Closed-form check that f is an increasing diffeomorphism sending [0,1] strictly inside."""
    return f.class_check()


def evaluate(f: FiberMap, x):
    """f(x) for x in [0, 1]; raises on domain violation."""
    _check_domain(x)
    return f.eval(x)


def derivative(f: FiberMap, x):
    """Exact analytic derivative at x in [0, 1]."""
    _check_domain(x)
    return f.derivative(x)


def _check_domain(x):
    arr = np.asarray(x)
    if arr.size and ((arr < 0.0).any() or (arr > 1.0).any()):
        raise ValueError("argument outside [0, 1]")


def invert(f: FiberMap, y, tol: float = INVERT_TOL):
    """Unique x in [0, 1] with f(x) = y, by monotone bisection refined by Newton.

    y must lie in [f(0), f(1)] up to tol slack. Accepts scalars or arrays.
    """
    scalar = np.isscalar(y) or (isinstance(y, np.ndarray) and y.ndim == 0)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    f0 = float(f.eval(0.0))
    f1 = float(f.eval(1.0))
    if (ys < f0 - tol).any() or (ys > f1 + tol).any():
        raise ValueError(f"value outside the image [{f0}, {f1}]")
    ys = np.clip(ys, f0, f1)
    lo = np.zeros_like(ys)
    hi = np.ones_like(ys)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = f.eval(mid) < ys
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(2):
        x = np.clip(x - (f.eval(x) - ys) / f.derivative(x), 0.0, 1.0)
    if scalar:
        return float(x[0])
    return x


def compose_along_word(maps, x):
    """Apply maps left to right; the empty word is the identity."""
    _check_domain(x)
    for m in maps:
        x = m.eval(x)
    return x


def interval_image(f: FiberMap, iv: RealInterval) -> RealInterval:
    """Outward-rounded enclosure of f(iv), valid by monotonicity."""
    lo = max(0.0, float(f.eval(iv.lo)) - EPS_ROUND)
    hi = min(1.0, float(f.eval(iv.hi)) + EPS_ROUND)
    return RealInterval(min(lo, hi), hi)


def map_to_json(f: FiberMap) -> dict:
    record = {"form": f.form, "parameters": f.params()}
    if isinstance(f, BumpComposed):
        record["inner"] = map_to_json(f.inner)
    return record


def map_from_json(record: dict) -> FiberMap:
    form = record.get("form")
    params = record.get("parameters", {})
    if form == "bump_composed":
        return BumpComposed(amount=float(params["amount"]), inner=map_from_json(record["inner"]))
    if form not in _FORMS:
        raise ValueError(f"unknown map form {form!r}")
    return _FORMS[form](**{k: float(v) for k, v in params.items()})
