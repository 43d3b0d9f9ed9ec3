"""Shared systems and products used across the suite."""

import numpy as np
import pytest

import skewdrift as sd

FULL2 = [[1, 1], [1, 1]]
GOLDEN = [[1, 1], [1, 0]]


@pytest.fixture(scope="session")
def full2():
    return sd.TransitionSystem(np.array(FULL2))


@pytest.fixture(scope="session")
def uniform_chain(full2):
    return sd.MarkovChain(full2, np.array([[0.5, 0.5], [0.5, 0.5]]))


@pytest.fixture(scope="session")
def golden():
    return sd.TransitionSystem(np.array(GOLDEN))


@pytest.fixture(scope="session")
def golden_chain(golden):
    return sd.MarkovChain(golden, np.array([[2 / 3, 1 / 3], [1.0, 0.0]]))


def constant_product(system, chain, fmap):
    words = system.words(1)
    return sd.MultistepSkewProduct(system, chain, (0, 0), {w: fmap for w in words})


@pytest.fixture(scope="session")
def const_affine(full2, uniform_chain):
    return constant_product(full2, uniform_chain, sd.Affine(0.1, 0.8))


@pytest.fixture(scope="session")
def const_plateau(full2, uniform_chain):
    return constant_product(full2, uniform_chain, sd.Plateau(0.5, 0.4, 0.6))


@pytest.fixture(scope="session")
def two_map(full2, uniform_chain):
    return sd.MultistepSkewProduct(
        full2, uniform_chain, (0, 0), {(1,): sd.Affine(0.1, 0.8), (2,): sd.Affine(0.2, 0.7)}
    )


def multistep_affines(system, chain, base_offset=0.06, step=0.02, slope=0.75):
    words = system.words(3)
    assignment = {w: sd.Affine(base_offset + step * i, slope) for i, w in enumerate(words)}
    return sd.MultistepSkewProduct(system, chain, (1, 1), assignment)


@pytest.fixture(scope="session")
def ms_full(full2, uniform_chain):
    return multistep_affines(full2, uniform_chain)


@pytest.fixture(scope="session")
def golden_ms(golden, golden_chain):
    return multistep_affines(golden, golden_chain, base_offset=0.05, step=0.03, slope=0.8)


def wide_point(product, depth, seed, x=None):
    """Random point with enough window for classification at the given depth."""
    rng = np.random.default_rng(seed)
    l, r = product.window
    win = sd.sample_window(product.chain, -(depth + l + 1), depth + r, rng)
    return sd.LabeledPoint(win, float(rng.random()) if x is None else x)
