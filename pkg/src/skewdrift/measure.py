"""Region measures, Monte Carlo estimates, monotone families, parameter sweeps,
and detection of jumps of the certified up-measure curve.

The Monte Carlo side uses distribution-free Hoeffding intervals at fixed 95%
confidence; unknown mass is reported, never allocated. Sweeps accumulate
certified up-boxes forward along the grid (valid because certificates replay
upward through the order), so the recorded lower curve is monotone exactly,
not just statistically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .drift import DOWN, UNKNOWN, UP, get_classifier
from .errors import FamilyRangeError, ToleranceError
from .fibers import Affine, BumpComposed, BumpedAffine, FiberMap, validate_class
from .products import LabeledPoint, MultistepSkewProduct, ProductOrder, compare_order
from .regions import BoxRegion, measure_boxes, region_union  # noqa: F401  (measure_boxes re-exported)
from .symbolic import SymbolWindow, _symbols_from_uniforms

CONFIDENCE = 0.95


def hoeffding_radius(n: int, confidence: float = CONFIDENCE) -> float:
    """Distribution-free two-sided confidence radius for a [0,1] mean."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class RegionEstimate:
    """Certified box measures plus Monte Carlo fractions for one product.

    mc fractions sum to 1; the sampled up-fraction cannot sit more than one
    confidence radius below the certified measure at the same depth.
    """

    certified_up_measure: float
    certified_down_measure: float
    mc_up: float
    mc_down: float
    mc_unknown: float
    radius: float
    n_samples: int
    depth: int
    seed: object
    up_region: BoxRegion = field(compare=False, repr=False, default=None)
    down_region: BoxRegion = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.certified_up_measure + self.certified_down_measure > 1.0 + 1e-12:
            raise ValueError("certified measures exceed total mass")
        if abs(self.mc_up + self.mc_down + self.mc_unknown - 1.0) > 1e-12:
            raise ValueError("mc fractions must sum to 1")
        if self.mc_up < self.certified_up_measure - self.radius:
            raise ValueError("sampled up-fraction inconsistent with the certified measure")
        if self.mc_down < self.certified_down_measure - self.radius:
            raise ValueError("sampled down-fraction inconsistent with the certified measure")

    def to_json(self) -> dict:
        return {
            "certified_up": self.certified_up_measure,
            "certified_down": self.certified_down_measure,
            "mc_up": self.mc_up,
            "mc_down": self.mc_down,
            "mc_unknown": self.mc_unknown,
            "radius": self.radius,
            "n": self.n_samples,
            "depth": self.depth,
            "seed": list(self.seed) if isinstance(self.seed, tuple) else self.seed,
        }


def _region_from_classifier(product: MultistepSkewProduct, depth: int, direction: str) -> BoxRegion:
    window, boxes = get_classifier(product, depth).certified_boxes(direction)
    return BoxRegion.from_boxes(product.base, window, boxes)


def estimate_regions(product: MultistepSkewProduct, depth: int, n: int, seed) -> RegionEstimate:
    """Classify n sampled points at the given depth and measure certified boxes.

    Sampling draws a private row of uniforms per point up front, so the result
    is a pure function of the seed regardless of execution order.
    """
    if n < 100:
        raise ValueError("need at least 100 samples")
    classifier = get_classifier(product, depth)
    lo, hi = classifier.required_range()
    width = hi - lo + 1
    rng = np.random.default_rng(seed)
    uniforms = rng.random((n, width + 1))
    symbol_rows = _symbols_from_uniforms(product.chain, uniforms[:, :width]).tolist()
    xs = uniforms[:, width].tolist()
    counts = {UP: 0, DOWN: 0, UNKNOWN: 0}
    for row, x in zip(symbol_rows, xs):
        point = LabeledPoint(SymbolWindow(lo, tuple(row)), x)
        counts[classifier.classify(point).verdict] += 1
    up_region = _region_from_classifier(product, depth, UP)
    down_region = _region_from_classifier(product, depth, DOWN)
    return RegionEstimate(
        certified_up_measure=up_region.measure(product.chain),
        certified_down_measure=down_region.measure(product.chain),
        mc_up=counts[UP] / n,
        mc_down=counts[DOWN] / n,
        mc_unknown=counts[UNKNOWN] / n,
        radius=hoeffding_radius(n),
        n_samples=n,
        depth=depth,
        seed=seed,
        up_region=up_region,
        down_region=down_region,
    )


@dataclass(frozen=True, eq=False)
class MonotoneFamily:
    """Post-composition family: every fiber map followed by y + tau*kappa*y*(1-y).

    The bump fixes both endpoints, so class membership reduces to endpoint
    checks on the base maps, and members are strictly increasing in tau.
    """

    base_product: MultistepSkewProduct
    kappa: float
    tau_range: tuple[float, float]

    def __post_init__(self):
        if not (self.kappa > 0):
            raise FamilyRangeError(f"kappa must be positive, got {self.kappa}")
        lo, hi = self.tau_range
        if not (lo < hi):
            raise FamilyRangeError(f"need tau_min < tau_max, got {self.tau_range}")
        object.__setattr__(self, "tau_range", (float(lo), float(hi)))
        # class membership is monotone in tau, so the endpoints certify the range
        member_lo = family_member(self, lo)
        member_hi = family_member(self, hi)
        if compare_order(member_lo, member_hi) is not ProductOrder.FIRST_BELOW:
            raise FamilyRangeError("family endpoints are not certifiably ordered")


def _bump_after(fmap: FiberMap, amount: float) -> FiberMap:
    if isinstance(fmap, Affine):
        # psi o affine stays quadratic: fold into closed form
        a, b = fmap.a, fmap.b
        return BumpedAffine(
            a=a + amount * a * (1.0 - a),
            b=b + amount * b * (1.0 - 2.0 * a) - amount * b * b,
            c=amount * b * b,
        )
    return BumpComposed(amount=amount, inner=fmap)


def family_member(family: MonotoneFamily, tau: float) -> MultistepSkewProduct:
    """The product at parameter tau; tau = 0 returns the base unchanged."""
    lo, hi = family.tau_range
    if not (lo <= tau <= hi):
        raise FamilyRangeError(f"tau = {tau} outside [{lo}, {hi}]")
    if tau == 0.0:
        return family.base_product
    amount = tau * family.kappa
    base = family.base_product
    assignment = {}
    for word, fmap in base.assignment.items():
        composed = _bump_after(fmap, amount)
        check = validate_class(composed)
        if not check:
            raise FamilyRangeError(f"member at tau = {tau}, word {word}: {check.reason}")
        assignment[word] = composed
    return MultistepSkewProduct(base.base, base.chain, base.window, assignment)


@dataclass(frozen=True)
class GapInterval:
    tau_lo: float
    tau_hi: float
    lower_bound: float


@dataclass(frozen=True)
class SweepResult:
    """Per-parameter estimates along a grid, with monotone certified curves.

    mu_lower accumulates certified up-boxes left to right (down_lower right to
    left), so it is non-decreasing exactly when the depth is fixed.
    """

    grid: tuple[float, ...]
    estimates: tuple[RegionEstimate, ...]
    mu_lower: tuple[float, ...]
    down_lower: tuple[float, ...]
    gaps: tuple[GapInterval, ...] = ()

    @property
    def mu_mc(self) -> tuple[float, ...]:
        return tuple(e.mc_up for e in self.estimates)


def sweep(
    family: MonotoneFamily, grid, depth: int, n: int, seed: int
) -> SweepResult:
    """Estimate regions along an increasing grid of parameters.

    Per-parameter randomness derives from (seed, grid index). Certified
    up-boxes accumulate forward (down-boxes backward): boxes certified at a
    smaller parameter remain valid at larger ones, which makes the recorded
    lower curves monotone by construction.
    """
    grid = [float(t) for t in grid]
    lo, hi = family.tau_range
    for a, b in zip(grid, grid[1:]):
        if a >= b:
            raise ValueError("grid must be strictly increasing")
    if grid and not (lo <= grid[0] and grid[-1] <= hi):
        raise FamilyRangeError(f"grid leaves the family range [{lo}, {hi}]")
    if not grid:
        return SweepResult((), (), (), ())
    chain = family.base_product.chain
    estimates = []
    mu_lower = []
    acc_up: BoxRegion | None = None
    for i, tau in enumerate(grid):
        member = family_member(family, tau)
        est = estimate_regions(member, depth, n, (seed, i))
        estimates.append(est)
        acc_up = est.up_region if acc_up is None else region_union(acc_up, est.up_region)
        mu_lower.append(acc_up.measure(chain))
    down_lower = [0.0] * len(grid)
    acc_down: BoxRegion | None = None
    for i in range(len(grid) - 1, -1, -1):
        est = estimates[i]
        acc_down = est.down_region if acc_down is None else region_union(acc_down, est.down_region)
        down_lower[i] = acc_down.measure(chain)
    for a, b in zip(mu_lower, mu_lower[1:]):
        if b < a - 1e-12:
            raise RuntimeError("certified up-measure curve lost monotonicity")
    return SweepResult(tuple(grid), tuple(estimates), tuple(mu_lower), tuple(down_lower))


def detect_gaps(result: SweepResult, eps: float) -> list[GapInterval]:
    """Flag grid pairs where the sampled up-measure jumps beyond noise.

    A flagged pair localizes a parameter whose unknown/anchored mass is at
    least the reported lower bound (jump minus the statistical allowance).
    Only positive jumps are reported.
    """
    if not result.estimates:
        return []
    max_radius = max(e.radius for e in result.estimates)
    if eps <= 2.0 * max_radius:
        raise ToleranceError(
            f"eps = {eps} must exceed twice the confidence radius {max_radius}"
        )
    gaps = []
    mc = result.mu_mc
    for i in range(len(result.grid) - 1):
        allowance = result.estimates[i].radius + result.estimates[i + 1].radius
        jump = mc[i + 1] - mc[i]
        if jump > eps + allowance:
            gaps.append(GapInterval(result.grid[i], result.grid[i + 1], jump - allowance))
    return gaps


def with_gaps(result: SweepResult, gaps) -> SweepResult:
    return replace(result, gaps=tuple(gaps))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def sweep_to_csv(result: SweepResult, seed: int, depth: int, n: int) -> str:
    """Fixed 17-significant-digit CSV; reruns with the same seed are byte-identical."""
    lines = [f"# seed={seed} depth={depth} samples={n}"]
    lines.append("tau,certified_up,certified_down,mc_up,mc_down,mc_unknown,radius,n,depth,seed")
    for tau, est, up_lo, down_lo in zip(result.grid, result.estimates, result.mu_lower, result.down_lower):
        lines.append(
            ",".join(
                [
                    _fmt(tau),
                    _fmt(up_lo),
                    _fmt(down_lo),
                    _fmt(est.mc_up),
                    _fmt(est.mc_down),
                    _fmt(est.mc_unknown),
                    _fmt(est.radius),
                    str(est.n_samples),
                    str(est.depth),
                    str(seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def gaps_to_csv(gaps, seed: int, depth: int, n: int) -> str:
    lines = [f"# seed={seed} depth={depth} samples={n}", "tau_lo,tau_hi,gap_lower_bound"]
    for gap in gaps:
        lines.append(",".join([_fmt(gap.tau_lo), _fmt(gap.tau_hi), _fmt(gap.lower_bound)]))
    return "\n".join(lines) + "\n"


def mu_data_file(result: SweepResult, seed: int, depth: int, n: int) -> str:
    """Plot-ready whitespace table of the sampled and certified up-measure curves."""
    lines = [f"# seed={seed} depth={depth} samples={n}", "# tau mu_mc mu_lower"]
    for tau, mc, lower in zip(result.grid, result.mu_mc, result.mu_lower):
        lines.append(f"{_fmt(tau)} {_fmt(mc)} {_fmt(lower)}")
    return "\n".join(lines) + "\n"
