"""Configuration-driven command line: validate, classify, measure, sweep, approx.

Exit codes: 0 success, 2 validation/config failure, 3 resource-bound violation.
All file writes are plain text with fixed 17-significant-digit floats, so
identical config + seed reproduces byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .drift import classify_point
from .errors import ConfigError, ResourceBoundError
from .fibers import validate_class
from .measure import (
    detect_gaps,
    estimate_regions,
    family_member,
    gaps_to_csv,
    mu_data_file,
    sweep,
    sweep_to_csv,
    with_gaps,
)
from .products import (
    LabeledPoint,
    ProductOrder,
    approximation_distance_bound,
    compare_order,
    distance,
    multistep_approximation,
)
from .symbolic import SymbolWindow, validate_transitive


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parse_point_row(row: dict, line: int) -> LabeledPoint:
    try:
        tokens = row["window"].split()
        offset = int(tokens[0])
        symbols = tuple(int(t) for t in tokens[1:])
        x = float(row["x"])
        return LabeledPoint(SymbolWindow(offset, symbols), x)
    except (KeyError, IndexError, ValueError) as exc:
        raise ConfigError(f"points line {line}", f"malformed point row: {exc}")


def _cmd_validate(cfg: RunConfig, out_dir: Path) -> int:
    lines = []
    ok = True
    transitive = validate_transitive(cfg.base.transitions)
    lines.append(f"transitive base: {'ok' if transitive else 'FAIL'}")
    ok = ok and transitive
    pi = ", ".join(_fmt(v) for v in cfg.chain.stationary)
    lines.append(f"stationary vector: ({pi})")
    if cfg.product is not None:
        bad = 0
        for word, fmap in sorted(cfg.product.assignment.items()):
            check = validate_class(fmap)
            if not check:
                bad += 1
                lines.append(f"map class FAIL for word {word}: {check.reason}")
        lines.append(f"fiber maps in class: {len(cfg.product.assignment) - bad}/{len(cfg.product.assignment)}")
        ok = ok and bad == 0
    if cfg.continuous is not None:
        lines.append("continuous template: worst-case parameters stay in class")
    if cfg.family is not None:
        lo, hi = cfg.family.tau_range
        order = compare_order(family_member(cfg.family, lo), family_member(cfg.family, hi))
        monotone = order is ProductOrder.FIRST_BELOW
        lines.append(f"family monotone on [{_fmt(lo)}, {_fmt(hi)}]: {'ok' if monotone else 'FAIL'}")
        ok = ok and monotone
    report = "\n".join(lines) + "\n"
    print(report, end="")
    _write(out_dir / "validate_report.txt", report)
    return 0 if ok else 2


def _cmd_classify(cfg: RunConfig, out_dir: Path, points_path: str | None) -> int:
    if cfg.product is None:
        raise ConfigError("product", "classify needs a 'product' section")
    if not points_path:
        raise ConfigError("points", "classify needs --points CSV")
    depth = cfg.analysis.depth
    points = []
    with open(points_path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        for i, row in enumerate(reader, start=2):
            points.append(_parse_point_row(row, i))
    header = f"# seed={cfg.analysis.seed} depth={depth} samples={len(points)}"
    csv_lines = [header, "window,x,verdict,margin,depth"]
    json_lines = []
    for point in points:
        result = classify_point(cfg.product, point, depth)
        margin = "" if result.witness is None else _fmt(result.witness.margin)
        window_txt = " ".join([str(point.window.offset)] + [str(s) for s in point.window.symbols])
        csv_lines.append(f"{window_txt},{_fmt(point.x)},{result.verdict},{margin},{depth}")
        record = result.to_json()
        record["window"] = window_txt
        record["x"] = point.x
        json_lines.append(json.dumps(record, sort_keys=True))
    _write(out_dir / "classifications.csv", "\n".join(csv_lines) + "\n")
    _write(out_dir / "classifications.jsonl", "\n".join(json_lines) + "\n")
    print(f"classified {len(points)} points at depth {depth} -> {out_dir}/classifications.csv")
    return 0


def _cmd_measure(cfg: RunConfig, out_dir: Path) -> int:
    if cfg.product is None:
        raise ConfigError("product", "measure needs a 'product' section")
    est = estimate_regions(cfg.product, cfg.analysis.depth, cfg.analysis.samples, cfg.analysis.seed)
    _write(out_dir / "region_estimate.json", json.dumps(est.to_json(), indent=2, sort_keys=True) + "\n")
    print(
        f"mc_up={est.mc_up:.4f} mc_down={est.mc_down:.4f} mc_unknown={est.mc_unknown:.4f} "
        f"certified_up={est.certified_up_measure:.4f} certified_down={est.certified_down_measure:.4f}"
    )
    return 0


def _cmd_sweep(cfg: RunConfig, out_dir: Path) -> int:
    if cfg.family is None:
        raise ConfigError("family", "sweep needs a 'family' section")
    if not cfg.analysis.grid:
        raise ConfigError("analysis.grid", "sweep needs a parameter grid")
    a = cfg.analysis
    result = sweep(cfg.family, a.grid, a.depth, a.samples, a.seed)
    gaps = detect_gaps(result, a.gap_epsilon)
    result = with_gaps(result, gaps)
    _write(out_dir / "sweep.csv", sweep_to_csv(result, a.seed, a.depth, a.samples))
    _write(out_dir / "gaps.csv", gaps_to_csv(gaps, a.seed, a.depth, a.samples))
    _write(out_dir / "mu.dat", mu_data_file(result, a.seed, a.depth, a.samples))
    print(f"swept {len(result.grid)} parameters; {len(gaps)} gap interval(s) -> {out_dir}/sweep.csv")
    return 0


def _cmd_approx(cfg: RunConfig, out_dir: Path) -> int:
    if cfg.continuous is None:
        raise ConfigError("continuous", "approx needs a 'continuous' section")
    m = cfg.analysis.depth
    product = multistep_approximation(cfg.continuous, m)
    _write(out_dir / "approx_product.json", json.dumps(product.to_json(), indent=2, sort_keys=True) + "\n")
    lines = [f"# seed={cfg.analysis.seed} depth={m} samples={cfg.analysis.samples}", "m,distance_to_next,bound"]
    for k in range(max(0, m - 3), m):
        d = distance(multistep_approximation(cfg.continuous, k), multistep_approximation(cfg.continuous, k + 1))
        lines.append(f"{k},{_fmt(d)},{_fmt(approximation_distance_bound(cfg.continuous, k))}")
    _write(out_dir / "approx_ladder.csv", "\n".join(lines) + "\n")
    print(f"truncated at m={m}; ladder -> {out_dir}/approx_ladder.csv")
    return 0


def run(command: str, config_path: str, *, seed=None, depth=None, samples=None,
        grid=None, out=".", points=None) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        cfg = load_config(config_path, {"seed": seed, "depth": depth, "samples": samples, "grid": grid})
        out_dir = Path(out)
        if command == "validate":
            return _cmd_validate(cfg, out_dir)
        if command == "classify":
            return _cmd_classify(cfg, out_dir, points)
        if command == "measure":
            return _cmd_measure(cfg, out_dir)
        if command == "sweep":
            return _cmd_sweep(cfg, out_dir)
        if command == "approx":
            return _cmd_approx(cfg, out_dir)
        print(f"unknown command {command!r}", file=sys.stderr)
        return 2
    except ResourceBoundError as exc:
        print(f"resource bound: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="skewdrift",
        description="Certified drift analysis for interval skew products over subshifts of finite type.",
    )
    parser.add_argument("command", choices=["validate", "classify", "measure", "sweep", "approx"])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override analysis.seed")
    parser.add_argument("--depth", type=int, default=None, help="override analysis.depth (m for approx)")
    parser.add_argument("--samples", type=int, default=None, help="override analysis.samples")
    parser.add_argument("--grid", type=str, default=None, help='override sweep grid as "lo:hi:step"')
    parser.add_argument("--out", type=str, default=".", help="output directory")
    parser.add_argument("--points", type=str, default=None, help="input points CSV for classify")
    args = parser.parse_args(argv)
    code = run(
        args.command,
        args.config,
        seed=args.seed,
        depth=args.depth,
        samples=args.samples,
        grid=args.grid,
        out=args.out,
        points=args.points,
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
