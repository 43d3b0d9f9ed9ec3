"""Transitive subshifts of finite type, Markov measures, windows, and sampling.

Symbols are 1-based (alphabet {1, ..., N}); matrices are indexed 0-based.
Points of the base space are represented only by finite two-sided windows;
every operation that consumes a window states how much of it it needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IncomparableWindowsError,
    InvalidMatrixError,
    NotErgodicError,
    WindowTooShortError,
)

STATIONARY_RESIDUAL_TOL = 1e-10
ROW_SUM_TOL = 1e-12


def _as_binary_matrix(transitions) -> np.ndarray:
    arr = np.asarray(transitions)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise InvalidMatrixError("transition matrix must be square and nonempty")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidMatrixError("transition matrix entries must be 0 or 1")
    return arr.astype(np.int8)


def _reaches_all(arr: np.ndarray, start: int) -> bool:
    n = arr.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        i = stack.pop()
        for j in np.nonzero(arr[i])[0]:
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def _strongly_connected(arr: np.ndarray) -> bool:
    return _reaches_all(arr, 0) and _reaches_all(arr.T, 0)


def validate_transitive(transitions) -> bool:
    """True iff the 0/1 matrix's digraph is strongly connected.

    Raises InvalidMatrixError for non-square or non-binary input.
    """
    return _strongly_connected(_as_binary_matrix(transitions))


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """Alphabet {1..N}, N >= 2, with a strongly connected 0/1 transition matrix."""

    transitions: np.ndarray

    def __post_init__(self):
        arr = _as_binary_matrix(self.transitions)
        if arr.shape[0] < 2:
            raise InvalidMatrixError("alphabet size must be at least 2")
        if (arr.sum(axis=1) == 0).any() or (arr.sum(axis=0) == 0).any():
            raise InvalidMatrixError("every symbol needs an outgoing and an incoming transition")
        if not _strongly_connected(arr):
            raise InvalidMatrixError("transition digraph must be strongly connected")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "transitions", arr)
        succ = tuple(
            tuple(int(j) + 1 for j in np.nonzero(arr[i])[0]) for i in range(arr.shape[0])
        )
        object.__setattr__(self, "_successors", succ)
        object.__setattr__(self, "_word_cache", {})

    @property
    def alphabet_size(self) -> int:
        return self.transitions.shape[0]

    def allows(self, i: int, j: int) -> bool:
        return bool(self.transitions[i - 1, j - 1])

    def successors(self, symbol: int) -> tuple[int, ...]:
        return self._successors[symbol - 1]

    def admits(self, symbols) -> bool:
        """True iff consecutive symbols follow allowed transitions."""
        for a, b in zip(symbols, symbols[1:]):
            if not self.transitions[a - 1, b - 1]:
                return False
        return True

    def words(self, length: int) -> tuple[tuple[int, ...], ...]:
        """All admissible words of the given length, lexicographically ordered."""
        if length < 1:
            raise ValueError("word length must be >= 1")
        cache = self._word_cache
        if length not in cache:
            level = [(s,) for s in range(1, self.alphabet_size + 1)]
            for _ in range(length - 1):
                level = [w + (t,) for w in level for t in self._successors[w[-1] - 1]]
            cache[length] = tuple(level)
        return cache[length]

    def same_base(self, other: "TransitionSystem") -> bool:
        return np.array_equal(self.transitions, other.transitions)


def stationary_distribution(stochastic) -> np.ndarray:
    """Stationary vector of a row-stochastic matrix by direct linear solve.

    One balance equation is replaced by the normalization row; the support
    pattern must be irreducible (otherwise the chain is not ergodic).
    """
    P = np.asarray(stochastic, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.size == 0:
        raise InvalidMatrixError("stochastic matrix must be square and nonempty")
    if (P < 0).any() or (P > 1).any() or not np.isfinite(P).all():
        raise InvalidMatrixError("stochastic entries must lie in [0, 1]")
    if np.abs(P.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
        raise InvalidMatrixError("stochastic rows must sum to 1 within 1e-12")
    if not _strongly_connected((P > 0).astype(np.int8)):
        raise NotErgodicError("stochastic support pattern is reducible")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    residual = np.abs(pi @ P - pi).max()
    if residual >= STATIONARY_RESIDUAL_TOL:
        raise NotErgodicError(f"stationary residual {residual:.3e} exceeds 1e-10")
    return pi


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Stochastic matrix compatible with a transition system, plus its stationary vector."""

    base: TransitionSystem
    stochastic: np.ndarray
    stationary: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        P = np.asarray(self.stochastic, dtype=float)
        A = self.base.transitions
        if P.shape != A.shape:
            raise InvalidMatrixError("stochastic matrix shape must match the transition matrix")
        if not ((P > 0) == (A == 1)).all():
            raise InvalidMatrixError("stochastic support must match the transition pattern exactly")
        pi = stationary_distribution(P)
        P = P.copy()
        P.flags.writeable = False
        pi.flags.writeable = False
        object.__setattr__(self, "stochastic", P)
        object.__setattr__(self, "stationary", pi)
        object.__setattr__(self, "_cum_start", np.cumsum(pi))
        object.__setattr__(self, "_cum_rows", np.cumsum(P, axis=1))


@dataclass(frozen=True)
class SymbolWindow:
    """Finite two-sided window: symbols occupying indices offset..offset+len-1.

    Admissibility is checked where a transition system is available; a window
    built for one system may be measured under another.
    """

    offset: int
    symbols: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.offset, int) or self.offset > 0:
            raise ValueError("window offset must be an integer <= 0")
        syms = tuple(int(s) for s in self.symbols)
        if not syms:
            raise ValueError("window must be nonempty")
        if any(s < 1 for s in syms):
            raise ValueError("symbols are 1-based positive integers")
        object.__setattr__(self, "symbols", syms)

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        return self.offset + len(self.symbols) - 1

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def symbol(self, index: int) -> int:
        if not (self.lo <= index <= self.hi):
            raise WindowTooShortError((index, index), (self.lo, self.hi), "symbol access")
        return self.symbols[index - self.offset]

    def word(self, lo: int, hi: int) -> tuple[int, ...]:
        """Symbols on [lo, hi] as a word."""
        if not self.covers(lo, hi):
            raise WindowTooShortError((lo, hi), (self.lo, self.hi), "word extraction")
        start = lo - self.offset
        return self.symbols[start : start + (hi - lo + 1)]


@dataclass(frozen=True)
class WindowMetric:
    """Result of comparing two windows under the 2^-|n| sequence metric.

    ``value`` is the exact metric when a disagreement exists in the shared
    range, and 0 otherwise; ``upper_bound`` is what the metric of any pair of
    underlying sequences can be at most; ``exact`` flags the first case.
    """

    value: float
    upper_bound: float
    exact: bool


def metric(a: SymbolWindow, b: SymbolWindow) -> WindowMetric:
    """Sequence metric restricted to the shared index range of two windows.

    Agreement on the whole shared range returns value 0 flagged inexact, with
    upper_bound 2^-(radius+1) where radius = min(-lo, hi) of the shared range.
    """
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi:
        raise IncomparableWindowsError(
            f"windows cover [{a.lo}, {a.hi}] and [{b.lo}, {b.hi}]: no shared range"
        )
    best: int | None = None
    for n in range(lo, hi + 1):
        if a.symbol(n) != b.symbol(n) and (best is None or abs(n) < best):
            best = abs(n)
    if best is not None:
        v = 2.0 ** (-best)
        return WindowMetric(v, v, True)
    radius = min(-lo, hi)
    return WindowMetric(0.0, min(1.0, 2.0 ** (-(radius + 1))), False)


def cylinder_measure(chain: MarkovChain, window: SymbolWindow) -> float:
    """Markov measure of the cylinder fixed by the window; 0 if a transition is forbidden.

    Shift-invariant: the offset does not enter.
    """
    syms = window.symbols
    P = chain.stochastic
    m = float(chain.stationary[syms[0] - 1])
    for a, b in zip(syms, syms[1:]):
        p = P[a - 1, b - 1]
        if p == 0.0:
            return 0.0
        m *= float(p)
    return m


@dataclass(frozen=True)
class PeriodicWord:
    """Cyclically admissible word; repeating it two-sidedly gives a periodic point."""

    symbols: tuple[int, ...]
    minimal_period: int = field(init=False)

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        if not syms:
            raise ValueError("periodic word must be nonempty")
        object.__setattr__(self, "symbols", syms)
        n = len(syms)
        period = n
        for d in range(1, n):
            if n % d == 0 and all(syms[i] == syms[(i + d) % n] for i in range(n)):
                period = d
                break
        object.__setattr__(self, "minimal_period", period)

    def symbol(self, index: int) -> int:
        return self.symbols[index % len(self.symbols)]

    def window(self, lo: int, hi: int) -> SymbolWindow:
        """Materialize the periodic point on [lo, hi]."""
        return SymbolWindow(lo, tuple(self.symbol(i) for i in range(lo, hi + 1)))


def periodic_words(system: TransitionSystem, n: int) -> list[PeriodicWord]:
    """All cyclically admissible words of length n; count equals trace(transitions^n)."""
    if n < 1:
        raise ValueError("period length must be >= 1")
    out = []
    for w in system.words(n):
        if system.transitions[w[-1] - 1, w[0] - 1]:
            out.append(PeriodicWord(w))
    return out


def sample_window(chain: MarkovChain, left: int, right: int, rng: np.random.Generator) -> SymbolWindow:
    """Window on [left, right] sampled from the Markov measure; deterministic given rng state."""
    if left > 0 or right < 0:
        raise ValueError("need left <= 0 <= right")
    width = right - left + 1
    u = rng.random(width)
    syms = _symbols_from_uniforms(chain, u[None, :])[0]
    return SymbolWindow(left, tuple(int(s) for s in syms))


def _symbols_from_uniforms(chain: MarkovChain, u: np.ndarray) -> np.ndarray:
    """Map a block of uniforms (n, width) to Markov-sampled symbol rows (1-based).

    Row i is sample i's private randomness, so results do not depend on how
    rows are chunked across workers.
    """
    n, width = u.shape
    nsym = chain.base.alphabet_size
    cum_rows = chain._cum_rows
    out = np.empty((n, width), dtype=np.int64)
    first = np.searchsorted(chain._cum_start, u[:, 0], side="right")
    out[:, 0] = np.minimum(first, nsym - 1) + 1
    for j in range(1, width):
        rows = cum_rows[out[:, j - 1] - 1]
        nxt = (rows <= u[:, j, None]).sum(axis=1)
        out[:, j] = np.minimum(nxt, nsym - 1) + 1
    return out
