import itertools

import numpy as np
import pytest

from isocrit import estimators
from isocrit.simlab.designs import ClusterSRSWOR, ExplicitDesign, StratifiedSRSWOR
from isocrit.survey import Population


def exact_expectation(pop, design, fn):
    """Probability-weighted average of fn(sample) over the whole design support."""
    total = None
    for idx, prob in design.enumerate(pop):
        val = np.asarray(fn(design.realize(pop, idx)), dtype=float) * prob
        total = val if total is None else total + val
    return total


def exact_cov_ht(pop, design):
    """Exact design covariance matrix of the HT domain means, by enumeration."""
    means, probs = [], []
    for idx, prob in design.enumerate(pop):
        means.append(estimators.ht_domain_means(design.realize(pop, idx), pop.N_d, allow_empty=True).means)
        probs.append(prob)
    means, probs = np.array(means), np.array(probs)
    mu = probs @ means
    centred = means - mu
    return (centred * probs[:, None]).T @ centred


def random_explicit_design(N, size, rng):
    """All size-``size`` subsets of N units with random positive probabilities (measurable)."""
    samples = list(itertools.combinations(range(N), size))
    probs = rng.uniform(0.2, 1.0, len(samples))
    return ExplicitDesign(samples, probs / probs.sum())


@pytest.fixture
def pop6():
    """N=6, two domains of three units, one stratum."""
    return Population(y=[1.0, 2.5, 4.0, 3.0, 7.0, 5.5], domain=[1, 1, 1, 2, 2, 2], group=[1] * 6, D=2)


@pytest.fixture
def pop8_strata():
    """N=8, two domains, two strata that cut across domains."""
    return Population(
        y=[0.5, 1.5, 2.0, 4.0, 3.5, 6.0, 2.5, 8.0],
        domain=[1, 1, 1, 1, 2, 2, 2, 2],
        group=[1, 2, 1, 2, 1, 2, 1, 2],
        D=2,
    )


@pytest.fixture
def pop_clusters():
    """N=20 in 10 clusters of two units, three domains."""
    rng = np.random.default_rng(7)
    domain = np.array([1] * 7 + [2] * 7 + [3] * 6)
    group = np.repeat(np.arange(1, 11), 2)
    rng.shuffle(group)
    return Population(y=rng.normal(domain.astype(float), 1.0), domain=domain, group=group, D=3)


@pytest.fixture
def srswor_6_3():
    return StratifiedSRSWOR([3])


@pytest.fixture
def designs_small(pop8_strata):
    rng = np.random.default_rng(3)
    return [
        ("srswor", Population(pop8_strata.y, pop8_strata.domain, [1] * 8, 2), StratifiedSRSWOR([4])),
        ("stsi", pop8_strata, StratifiedSRSWOR([2, 3])),
        ("explicit", pop8_strata, random_explicit_design(8, 4, rng)),
    ]


__all__ = ["ClusterSRSWOR", "exact_cov_ht", "exact_expectation", "random_explicit_design"]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
