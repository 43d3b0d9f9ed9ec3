"""JSON run configuration: parsing and validation with field-anchored errors.

Schema (all sections are plain JSON, UTF-8, no comments):

    {
      "base": {"alphabet_size": 2, "transitions": [[1,1],[1,0]],
               "stochastic": [[0.6667,0.3333],[1.0,0.0]]},
      "product": {"window": [0,0],
                  "assignment": [{"word": [1], "map": {"form": "affine",
                                  "parameters": {"a": 0.1, "b": 0.8}}}, ...]},
      "continuous": {"template": "affine", "designated": "a",
                     "symbol_params": [{"a": 0.1, "b": 0.8}, ...],
                     "rho": [[0.01,-0.01],[0.006,-0.006]]},
      "family": {"kappa": 1.0, "tau_range": [-0.02, 0.02]},
      "analysis": {"depth": 8, "samples": 10000, "seed": 42,
                   "grid": "-0.02:0.02:0.002", "gap_epsilon": 0.05}
    }

Exactly one of "product" / "continuous" is required; "family" is optional and
applies to the product section.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .measure import MonotoneFamily
from .products import ContinuousProductSpec, MultistepSkewProduct
from .symbolic import MarkovChain, TransitionSystem


@dataclass
class AnalysisConfig:
    depth: int = 6
    samples: int = 1000
    seed: int = 0
    grid: list[float] | None = None
    gap_epsilon: float = 0.05


@dataclass
class RunConfig:
    base: TransitionSystem
    chain: MarkovChain
    product: MultistepSkewProduct | None
    continuous: ContinuousProductSpec | None
    family: MonotoneFamily | None
    analysis: AnalysisConfig


def _expect(record: dict, key: str, path: str):
    if key not in record:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return record[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    v = float(value)
    if not np.isfinite(v):
        raise ConfigError(path, "must be finite")
    return v


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def parse_grid_spec(text: str) -> list[float]:
    """Inclusive "lo:hi:step" grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("grid", f"expected lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ConfigError("grid", "need step > 0 and hi >= lo")
    count = int(round((hi - lo) / step))
    return [lo + i * step for i in range(count + 1) if lo + i * step <= hi + 1e-12]


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    return parse_config(raw, overrides or {})


def parse_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    overrides = overrides or {}
    base_rec = _expect(raw, "base", "config")
    try:
        base = TransitionSystem(np.asarray(_expect(base_rec, "transitions", "base")))
    except ValueError as exc:
        raise ConfigError("base.transitions", str(exc))
    declared = _integer(_expect(base_rec, "alphabet_size", "base"), "base.alphabet_size")
    if declared != base.alphabet_size:
        raise ConfigError("base.alphabet_size", f"declared {declared}, matrix has {base.alphabet_size}")
    try:
        chain = MarkovChain(base, np.asarray(_expect(base_rec, "stochastic", "base"), dtype=float))
    except ValueError as exc:
        raise ConfigError("base.stochastic", str(exc))

    product = None
    continuous = None
    if ("product" in raw) == ("continuous" in raw):
        raise ConfigError("config", "exactly one of 'product' or 'continuous' is required")
    if "product" in raw:
        rec = raw["product"]
        try:
            product = MultistepSkewProduct.from_json(base, chain, rec)
        except ConfigError:
            raise
        except (KeyError, TypeError) as exc:
            raise ConfigError("product", f"malformed record: {exc}")
        except ValueError as exc:
            raise ConfigError("product.assignment", str(exc))
    else:
        rec = raw["continuous"]
        try:
            continuous = ContinuousProductSpec(
                base,
                chain,
                template_form=str(_expect(rec, "template", "continuous")),
                designated=str(_expect(rec, "designated", "continuous")),
                symbol_params=tuple(_expect(rec, "symbol_params", "continuous")),
                rho=np.asarray(_expect(rec, "rho", "continuous"), dtype=float),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("continuous", str(exc))

    family = None
    if "family" in raw:
        if product is None:
            raise ConfigError("family", "a family needs a 'product' section as its base")
        rec = raw["family"]
        kappa = _number(_expect(rec, "kappa", "family"), "family.kappa")
        tau_range = _expect(rec, "tau_range", "family")
        if not (isinstance(tau_range, list) and len(tau_range) == 2):
            raise ConfigError("family.tau_range", "expected [tau_min, tau_max]")
        try:
            family = MonotoneFamily(
                product,
                kappa,
                (_number(tau_range[0], "family.tau_range[0]"), _number(tau_range[1], "family.tau_range[1]")),
            )
        except ValueError as exc:
            raise ConfigError("family", str(exc))

    analysis = AnalysisConfig()
    rec = raw.get("analysis", {})
    if not isinstance(rec, dict):
        raise ConfigError("analysis", "must be an object")
    if "depth" in rec:
        analysis.depth = _integer(rec["depth"], "analysis.depth")
    if "samples" in rec:
        analysis.samples = _integer(rec["samples"], "analysis.samples")
    if "seed" in rec:
        analysis.seed = _integer(rec["seed"], "analysis.seed")
    if "gap_epsilon" in rec:
        analysis.gap_epsilon = _number(rec["gap_epsilon"], "analysis.gap_epsilon")
    if "grid" in rec:
        grid = rec["grid"]
        if isinstance(grid, str):
            analysis.grid = parse_grid_spec(grid)
        elif isinstance(grid, list):
            analysis.grid = [_number(t, f"analysis.grid[{i}]") for i, t in enumerate(grid)]
        else:
            raise ConfigError("analysis.grid", "expected a list or a lo:hi:step string")

    for key in ("depth", "samples", "seed"):
        if overrides.get(key) is not None:
            setattr(analysis, key, int(overrides[key]))
    if overrides.get("grid") is not None:
        analysis.grid = parse_grid_spec(overrides["grid"])
    if analysis.depth < 0:
        raise ConfigError("analysis.depth", "must be nonnegative")
    if analysis.samples < 100:
        raise ConfigError("analysis.samples", "need at least 100 samples")

    return RunConfig(base, chain, product, continuous, family, analysis)
