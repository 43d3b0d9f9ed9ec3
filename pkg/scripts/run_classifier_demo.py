#!/usr/bin/env python3
"""Classify a strip of fiber coordinates on a genuinely multistep system and
show the certified strip for one witness.

Usage: python3 scripts/run_classifier_demo.py
"""

import numpy as np

import skewdrift as sd


def main():
    system = sd.TransitionSystem(np.array([[1, 1], [1, 0]]))
    chain = sd.MarkovChain(system, np.array([[2 / 3, 1 / 3], [1.0, 0.0]]))
    words = system.words(3)
    product = sd.MultistepSkewProduct(
        system, chain, (1, 1),
        {w: sd.Affine(0.05 + 0.03 * i, 0.8) for i, w in enumerate(words)},
    )
    depth = 5
    rng = np.random.default_rng(0)
    window = sd.sample_window(chain, -(depth + 2), depth + 1, rng)
    print(f"base window {window.offset}..{window.hi}: {' '.join(map(str, window.symbols))}")
    for x in np.linspace(0.05, 0.95, 19):
        result = sd.classify_point(product, sd.LabeledPoint(window, float(x)), depth)
        mark = ""
        if result.witness is not None:
            level = result.witness.graph.value_at(window)
            mark = f"  witness level {level:.4f}, margin {result.witness.margin:.2e}"
        print(f"x = {x:.2f}: {result.verdict}{mark}")


if __name__ == "__main__":
    main()
