"""Shared fixtures and model factories for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wfgraph.graph import AlleleGraph, gamma_from_fitness

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_model(seed, n=None, rate_scale=1.0):
    """Random strongly-connected graph with a random fitness landscape.
    A spanning path guarantees connectivity; extra pairs are added with
    probability 1/2.  Rates are uniform in [0.05, 1] times rate_scale
    and drawn independently per direction, so the embedded chain is
    usually not reversible."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x6D0DE1]))
    if n is None:
        n = int(rng.integers(3, 6))
    lam = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        lam[a, b] = rng.uniform(0.05, 1.0)
        lam[b, a] = rng.uniform(0.05, 1.0)
    for i in range(n):
        for j in range(i + 1, n):
            if lam[i, j] == 0.0 and rng.random() < 0.5:
                lam[i, j] = rng.uniform(0.05, 1.0)
                lam[j, i] = rng.uniform(0.05, 1.0)
    labels = tuple("abcdefgh"[:n])
    g = AlleleGraph(labels, lam * rate_scale)
    fitness = tuple(rng.normal(0.0, 1.0, n).tolist())
    return g, gamma_from_fitness(fitness, g)


def random_reversible_model(seed, n=None, rate_scale=1.0):
    """Like random_model, but rates satisfy the cycle condition.

    lam[u, v] = s[u, v] / m[u] with symmetric s and positive m, so rate
    ratios telescope around every cycle and the embedded chain is
    reversible for any fitness landscape."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5EED2]))
    if n is None:
        n = int(rng.integers(3, 6))
    s = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        s[a, b] = s[b, a] = rng.uniform(0.05, 1.0)
    for i in range(n):
        for j in range(i + 1, n):
            if s[i, j] == 0.0 and rng.random() < 0.5:
                s[i, j] = s[j, i] = rng.uniform(0.05, 1.0)
    m = rng.uniform(0.5, 2.0, n)
    lam = s / m[:, None]
    labels = tuple("abcdefgh"[:n])
    g = AlleleGraph(labels, lam * rate_scale)
    fitness = tuple(rng.normal(0.0, 1.0, n).tolist())
    return g, gamma_from_fitness(fitness, g)


def two_type(lam_ab, lam_ba, gamma_ab):
    g = AlleleGraph(("a", "b"), np.array([[0.0, lam_ab], [lam_ba, 0.0]]))
    return g, gamma_from_fitness((0.0, float(gamma_ab)), g)


@pytest.fixture
def neutral_pair():
    return two_type(0.5, 0.5, 0.0)


@pytest.fixture
def selected_pair():
    return two_type(0.4, 0.7, 1.3)
