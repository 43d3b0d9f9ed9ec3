"""Box unions (cylinder x fiber-interval) with exact standard measure."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidRegionError
from .fibers import RealInterval
from .symbolic import MarkovChain, SymbolWindow, TransitionSystem, cylinder_measure


def measure_boxes(chain: MarkovChain, boxes) -> float:
    """Sum of cylinder measure times fiber length over (window, interval) boxes.

    Boxes on one cylinder (same offset and symbols) must be disjoint; prior
    merging is the caller's job.
    """
    by_cylinder: dict[tuple[int, tuple[int, ...]], list[RealInterval]] = {}
    total = 0.0
    for window, interval in boxes:
        key = (window.offset, window.symbols)
        for other in by_cylinder.setdefault(key, []):
            if max(other.lo, interval.lo) < min(other.hi, interval.hi):
                raise InvalidRegionError(
                    f"overlapping fiber intervals on cylinder {window.symbols}"
                )
        by_cylinder[key].append(interval)
        total += cylinder_measure(chain, window) * interval.length
    return total


@dataclass(frozen=True, eq=False)
class BoxRegion:
    """Union of boxes sharing one cylinder window: word -> disjoint intervals."""

    system: TransitionSystem
    window: tuple[int, int]
    intervals: dict[tuple[int, ...], tuple[tuple[float, float], ...]]

    def __post_init__(self):
        cleaned = {}
        for word, ivs in self.intervals.items():
            ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in ivs))
            for (alo, ahi), (blo, bhi) in zip(ivs, ivs[1:]):
                if blo < ahi:
                    raise InvalidRegionError(f"overlapping intervals on word {word}")
            if ivs:
                cleaned[tuple(word)] = ivs
        object.__setattr__(self, "intervals", cleaned)
        object.__setattr__(self, "window", (int(self.window[0]), int(self.window[1])))

    @classmethod
    def empty(cls, system: TransitionSystem) -> "BoxRegion":
        return cls(system, (0, 0), {})

    @classmethod
    def from_boxes(cls, system: TransitionSystem, window: tuple[int, int], boxes: dict) -> "BoxRegion":
        return cls(system, window, boxes)

    def measure(self, chain: MarkovChain) -> float:
        L, _R = self.window
        boxes = []
        for word, ivs in self.intervals.items():
            win = SymbolWindow(-L, word)
            for lo, hi in ivs:
                boxes.append((win, RealInterval(lo, hi)))
        return measure_boxes(chain, boxes)

    def refined(self, window: tuple[int, int]) -> "BoxRegion":
        L2, R2 = window
        L, R = self.window
        if (L2, R2) == (L, R):
            return self
        if L2 < L or R2 < R:
            raise ValueError(f"target window {window} does not contain {self.window}")
        start = L2 - L
        size = L + R + 1
        out: dict[tuple[int, ...], tuple] = {}
        for word in self.system.words(L2 + R2 + 1):
            ivs = self.intervals.get(word[start : start + size])
            if ivs:
                out[word] = ivs
        return BoxRegion(self.system, (L2, R2), out)

    def same_boxes(self, other: "BoxRegion") -> bool:
        return self.window == other.window and self.intervals == other.intervals


def region_union(a: BoxRegion, b: BoxRegion) -> BoxRegion:
    """Set union of two box regions, exact on the common refined window."""
    if not a.system.same_base(b.system):
        raise InvalidRegionError("regions live over different bases")
    window = (max(a.window[0], b.window[0]), max(a.window[1], b.window[1]))
    ra = a.refined(window)
    rb = b.refined(window)
    out: dict[tuple[int, ...], tuple] = {}
    for word in set(ra.intervals) | set(rb.intervals):
        merged: list[list[float]] = []
        for lo, hi in sorted(list(ra.intervals.get(word, ())) + list(rb.intervals.get(word, ()))):
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        out[word] = tuple((lo, hi) for lo, hi in merged)
    return BoxRegion(a.system, window, out)
