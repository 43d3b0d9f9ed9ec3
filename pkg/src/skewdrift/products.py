"""Multistep skew products: iteration, the strict fiberwise order, distance,
and multistep truncation of continuously-parameterized products.

A product assigns a fiber map to every admissible word on a two-sided
dependence window (l, r); iteration consumes pre-supplied future symbols, so
every computation here is finite.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    IncompatibleProductsError,
    InvalidApproximationError,
    ResourceBoundError,
    WindowTooShortError,
)
from .fibers import EPS_ROUND, FiberMap, invert, map_from_json, map_to_json, validate_class
from .symbolic import MarkovChain, SymbolWindow, TransitionSystem

# Hard cap on dependence-window size, shared with the drift-witness machinery.
WINDOW_CAP = 12

_XGRID = np.linspace(0.0, 1.0, 1025)
_ORDER_EXTRA_DEPTH = 6


@dataclass(frozen=True)
class LabeledPoint:
    """A base window plus a fiber coordinate."""

    window: SymbolWindow
    x: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0):
            raise ValueError(f"fiber coordinate {self.x} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class MultistepSkewProduct:
    """Assignment of a fiber map to every admissible word on window (l, r).

    The fiber map applied at a base point depends on its coordinates -l..r.
    """

    base: TransitionSystem
    chain: MarkovChain
    window: tuple[int, int]
    assignment: dict[tuple[int, ...], FiberMap]

    def __post_init__(self):
        l, r = self.window
        if l < 0 or r < 0:
            raise ValueError("window offsets must be nonnegative")
        size = l + r + 1
        if size > WINDOW_CAP:
            raise ResourceBoundError(f"window size {size} exceeds the bound {WINDOW_CAP}")
        if not self.base.same_base(self.chain.base):
            raise IncompatibleProductsError("chain support must match the base transitions")
        words = self.base.words(size)
        assignment = dict(self.assignment)
        missing = [w for w in words if w not in assignment]
        if missing:
            raise ValueError(f"assignment missing admissible word {missing[0]}")
        extra = set(assignment) - set(words)
        if extra:
            raise ValueError(f"assignment contains inadmissible word {sorted(extra)[0]}")
        for w in words:
            check = validate_class(assignment[w])
            if not check:
                raise ValueError(f"fiber map for word {w}: {check.reason}")
        object.__setattr__(self, "window", (int(l), int(r)))
        object.__setattr__(self, "assignment", assignment)

    def map_for(self, word: tuple[int, ...], word_window: tuple[int, int] | None = None) -> FiberMap:
        """Fiber map for a word given at a window at least as wide as this product's."""
        l, r = self.window
        if word_window is None:
            word_window = (l, r)
        lw, rw = word_window
        if lw < l or rw < r or len(word) != lw + rw + 1:
            raise WindowTooShortError((-l, r), (-lw, rw), "fiber map lookup")
        start = lw - l
        return self.assignment[word[start : start + l + r + 1]]

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "window": list(self.window),
            "assignment": [
                {"word": list(w), "map": map_to_json(m)} for w, m in sorted(self.assignment.items())
            ],
        }

    @staticmethod
    def from_json(base: TransitionSystem, chain: MarkovChain, record: dict) -> "MultistepSkewProduct":
        window = tuple(int(v) for v in record["window"])
        assignment = {
            tuple(int(s) for s in entry["word"]): map_from_json(entry["map"])
            for entry in record["assignment"]
        }
        return MultistepSkewProduct(base, chain, window, assignment)


def iterate(product: MultistepSkewProduct, point: LabeledPoint, n: int) -> LabeledPoint:
    """Apply the skew product n times; the output window is re-offset by -n."""
    if n < 1:
        raise ValueError("iteration count must be >= 1")
    l, r = product.window
    win = point.window
    needed = (-l, r + n - 1)
    if not win.covers(*needed):
        raise WindowTooShortError(needed, (win.lo, win.hi), f"{n}-step iteration")
    x = point.x
    for k in range(n):
        x = product.assignment[win.word(k - l, k + r)].eval(x)
    shifted = SymbolWindow(win.offset - n, win.symbols)
    return LabeledPoint(shifted, float(x))


class ProductOrder(Enum):
    FIRST_BELOW = "first_below"
    SECOND_BELOW = "second_below"
    INCOMPARABLE = "incomparable"


def _refine_below(f, g, u, v, du, dv, curv, depth) -> bool:
    if du >= 0.0 or dv >= 0.0:
        return False
    if max(du, dv) + curv * (v - u) ** 2 / 8.0 + 4.0 * EPS_ROUND < 0.0:
        return True
    if depth == 0:
        return False
    m = 0.5 * (u + v)
    dm = float(f.eval(m) - g.eval(m))
    return _refine_below(f, g, u, m, du, dm, curv, depth - 1) and _refine_below(
        f, g, m, v, dm, dv, curv, depth - 1
    )


def _strictly_below(f: FiberMap, g: FiberMap) -> bool:
    """Certified f(x) < g(x) for all x in [0, 1].

    Chord-plus-curvature bound on each grid subinterval, with local bisection
    of inconclusive subintervals; failure means "not certified", never a
    claim about the true order.
    """
    d = np.asarray(f.eval(_XGRID) - g.eval(_XGRID), dtype=float)
    if (d >= 0.0).any():
        return False
    curv = f.second_derivative_bound() + g.second_derivative_bound()
    w = _XGRID[1] - _XGRID[0]
    bound = np.maximum(d[:-1], d[1:]) + curv * w * w / 8.0 + 4.0 * EPS_ROUND
    for i in np.nonzero(bound >= 0.0)[0]:
        if not _refine_below(
            f, g, float(_XGRID[i]), float(_XGRID[i + 1]), float(d[i]), float(d[i + 1]),
            curv, _ORDER_EXTRA_DEPTH,
        ):
            return False
    return True


def compare_order(F: MultistepSkewProduct, G: MultistepSkewProduct) -> ProductOrder:
    """Certified three-way comparison under the strict fiberwise order.

    INCOMPARABLE covers both genuine crossings and pairs too close to certify.
    """
    if not F.base.same_base(G.base):
        raise IncompatibleProductsError("products live over different bases")
    if F.window != G.window:
        raise IncompatibleProductsError(
            f"windows {F.window} and {G.window} differ; pad the narrower product first"
        )
    first_below = True
    second_below = True
    cache: dict[tuple[int, int], tuple[bool, bool]] = {}
    for word in F.base.words(F.window[0] + F.window[1] + 1):
        f = F.assignment[word]
        g = G.assignment[word]
        key = (id(f), id(g))
        if key not in cache:
            cache[key] = (
                _strictly_below(f, g) if first_below else False,
                _strictly_below(g, f) if second_below else False,
            )
        fb, sb = cache[key]
        first_below = first_below and fb
        second_below = second_below and sb
        if not first_below and not second_below:
            return ProductOrder.INCOMPARABLE
    if first_below:
        return ProductOrder.FIRST_BELOW
    if second_below:
        return ProductOrder.SECOND_BELOW
    return ProductOrder.INCOMPARABLE


def pad_to_window(product: MultistepSkewProduct, window: tuple[int, int]) -> MultistepSkewProduct:
    """Replicate the assignment onto a wider dependence window."""
    lw, rw = window
    l, r = product.window
    if lw < l or rw < r:
        raise ValueError(f"target window {window} does not contain {product.window}")
    words = product.base.words(lw + rw + 1)
    assignment = {w: product.map_for(w, (lw, rw)) for w in words}
    return MultistepSkewProduct(product.base, product.chain, (lw, rw), assignment)


def distance(F: MultistepSkewProduct, G: MultistepSkewProduct) -> float:
    """Grid approximation of the sup distance over words of |f-g|, |f'-g'|,
    and the same for the inverse branches on their common image range.

    A lower bound of the true sup, off by at most the grid step times a
    Lipschitz bound of the compared quantities.
    """
    if not F.base.same_base(G.base):
        raise IncompatibleProductsError("products live over different bases")
    lw = max(F.window[0], G.window[0])
    rw = max(F.window[1], G.window[1])
    best = 0.0
    seen: set[tuple[int, int]] = set()
    for word in F.base.words(lw + rw + 1):
        f = F.map_for(word, (lw, rw))
        g = G.map_for(word, (lw, rw))
        key = (id(f), id(g))
        if key in seen:
            continue
        seen.add(key)
        fv = np.asarray(f.eval(_XGRID), dtype=float)
        gv = np.asarray(g.eval(_XGRID), dtype=float)
        d = float(np.abs(fv - gv).max())
        d = max(d, float(np.abs(np.asarray(f.derivative(_XGRID)) - np.asarray(g.derivative(_XGRID))).max()))
        y_lo = max(fv[0], gv[0])
        y_hi = min(fv[-1], gv[-1])
        if y_lo < y_hi:
            ys = np.linspace(y_lo, y_hi, 1025)
            xf = invert(f, ys)
            xg = invert(g, ys)
            d = max(d, float(np.abs(xf - xg).max()))
            d = max(
                d,
                float(np.abs(1.0 / np.asarray(f.derivative(xf)) - 1.0 / np.asarray(g.derivative(xg))).max()),
            )
        best = max(best, d)
    return best


@dataclass(frozen=True, eq=False)
class ContinuousProductSpec:
    """Template product whose designated parameter depends on all coordinates.

    For the symbol s at coordinate 0, the designated parameter equals
    base value(s) + sum over n != 0 of 2^-|n| * rho[s, omega_n]; truncating the
    sum gives multistep approximants.
    """

    base: TransitionSystem
    chain: MarkovChain
    template_form: str
    designated: str
    symbol_params: tuple[dict, ...]
    rho: np.ndarray

    def __post_init__(self):
        n = self.base.alphabet_size
        rho = np.asarray(self.rho, dtype=float)
        if rho.shape != (n, n) or not np.isfinite(rho).all():
            raise ValueError(f"coefficient table must be finite with shape ({n}, {n})")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        params = tuple(dict(p) for p in self.symbol_params)
        if len(params) != n:
            raise ValueError(f"need one parameter record per symbol, got {len(params)}")
        for s in range(1, n + 1):
            if self.designated not in params[s - 1]:
                raise ValueError(f"symbol {s} record lacks designated parameter {self.designated!r}")
            # worst case over all sequences: the full two-sided series has mass 2
            for extreme in (2.0 * rho[s - 1].min(), 2.0 * rho[s - 1].max()):
                m = self.make_map(s, params[s - 1][self.designated] + extreme)
                check = validate_class(m)
                if not check:
                    raise ValueError(f"symbol {s} worst-case parameter leaves the class: {check.reason}")
        object.__setattr__(self, "symbol_params", params)

    def make_map(self, symbol: int, designated_value: float) -> FiberMap:
        params = dict(self.symbol_params[symbol - 1])
        params[self.designated] = designated_value
        return map_from_json({"form": self.template_form, "parameters": params})

    def tail_midrange(self, symbol: int) -> float:
        row = self.rho[symbol - 1]
        return 0.5 * (float(row.min()) + float(row.max()))


def multistep_approximation(spec: ContinuousProductSpec, m: int) -> MultistepSkewProduct:
    """Truncate the parameter series to coordinates in [-m, m].

    The tail is replaced by its midpoint value, so successive approximants are
    within a geometric distance of each other (halving in m).
    """
    if m < 0:
        raise ValueError("truncation depth must be >= 0")
    if 2 * m + 1 > WINDOW_CAP:
        raise ResourceBoundError(f"window size {2 * m + 1} exceeds the bound {WINDOW_CAP}")
    rho = spec.rho
    assignment: dict[tuple[int, ...], FiberMap] = {}
    for word in spec.base.words(2 * m + 1):
        s = word[m]
        value = spec.symbol_params[s - 1][spec.designated]
        for j in range(1, m + 1):
            value += 2.0 ** (-j) * (rho[s - 1][word[m - j] - 1] + rho[s - 1][word[m + j] - 1])
        value += 2.0 ** (1 - m) * spec.tail_midrange(s)
        fmap = spec.make_map(s, value)
        check = validate_class(fmap)
        if not check:
            raise InvalidApproximationError(f"word {word}: {check.reason}")
        assignment[word] = fmap
    return MultistepSkewProduct(spec.base, spec.chain, (m, m), assignment)


def approximation_distance_bound(spec: ContinuousProductSpec, m: int) -> float:
    """Upper bound C * 2^-m on the distance between approximants at m and m+1.

    C is read from the coefficient table's per-symbol spread, inflated by
    conservative inverse-branch and derivative factors.
    """
    spread = 0.0
    min_slope = np.inf
    second = 0.0
    for s in range(1, spec.base.alphabet_size + 1):
        row = spec.rho[s - 1]
        spread = max(spread, float(row.max() - row.min()))
        for extreme in (2.0 * row.min(), 2.0 * row.max()):
            fmap = spec.make_map(s, spec.symbol_params[s - 1][spec.designated] + extreme)
            min_slope = min(min_slope, fmap.derivative_range(0.0, 1.0)[0])
            second = max(second, fmap.second_derivative_bound())
    c = 0.5 * spread * (2.0 + 2.0 / min_slope + (2.0 + second) / min_slope**2)
    return c * 2.0 ** (-m)
