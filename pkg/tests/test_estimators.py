import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_expectation
from isocrit.errors import EmptyBlock, EmptyDomain, MissingPopulationSizes
from isocrit.estimators import HAJEK, HT, hajek_domain_means, ht_domain_means, pooled_block_mean
from isocrit.simlab.designs import StratifiedSRSWOR
from isocrit.survey import DesignSample, GroupedJoint, independent_sample


def _toy():
    # domain 1: y=(1,3) pi=(0.5,0.25); domain 2: y=(10,) pi=0.5
    pi = [0.5, 0.25, 0.5]
    return DesignSample(y=[1.0, 3.0, 10.0], pi=pi, domain=[1, 1, 2], group=[0, 0, 0], D=2,
                        joint=GroupedJoint(pi, [0, 0, 0], None, None))


def test_hajek_example():
    est = hajek_domain_means(_toy())
    # (2 + 12) / (2 + 4) and 20 / 2
    np.testing.assert_allclose(est.means, [14 / 6, 10.0], rtol=1e-15)
    np.testing.assert_allclose(est.weights, [6.0, 2.0])
    assert est.flavor == HAJEK


def test_ht_example():
    est = ht_domain_means(_toy(), [7, 4])
    np.testing.assert_allclose(est.means, [2.0, 5.0], rtol=1e-15)
    assert est.flavor == HT


def test_ht_needs_sizes():
    with pytest.raises(MissingPopulationSizes):
        ht_domain_means(_toy(), None)
    with pytest.raises(MissingPopulationSizes):
        ht_domain_means(_toy(), [1.0])


def test_empty_domain_raises():
    s = independent_sample([1.0, 2.0], [2.0, 2.0], [1, 1], 2)
    with pytest.raises(EmptyDomain) as info:
        hajek_domain_means(s)
    assert info.value.domain == 2


def test_pooled_block_mean_examples():
    s = _toy()
    assert pooled_block_mean(s, 1, 2) == pytest.approx((2 + 12 + 20) / 8, rel=1e-15)
    assert pooled_block_mean(s, 1, 2, HT, [7, 4]) == pytest.approx(34 / 11, rel=1e-15)
    with pytest.raises(EmptyBlock):
        pooled_block_mean(independent_sample([1.0], [2.0], [1], 3), 2, 3)


def test_pooled_both_ends_equal_overall_mean(pop8_strata):
    s = StratifiedSRSWOR([2, 3]).draw(pop8_strata, np.random.default_rng(4))
    total = np.sum(s.y / s.pi) / np.sum(1 / s.pi)
    assert pooled_block_mean(s, 1, s.D) == pytest.approx(total, rel=1e-14)
    single = hajek_domain_means(s).means
    for d in range(1, s.D + 1):
        assert pooled_block_mean(s, d, d) == pytest.approx(single[d - 1], rel=1e-14)


def test_ht_unbiased_by_enumeration(designs_small):
    for name, pop, design in designs_small:
        mean = exact_expectation(pop, design, lambda s: ht_domain_means(s, pop.N_d, allow_empty=True).means)
        np.testing.assert_allclose(mean, pop.domain_means(), atol=1e-12, err_msg=name)


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(2, 15),
    a=st.floats(0.01, 100),
    b=st.floats(-100, 100),
    c=st.floats(0.01, 100),
    seed=st.integers(0, 2**31),
)
def test_hajek_equivariance(n, a, b, c, seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=n)
    w = rng.uniform(1, 10, n)
    domain = np.r_[1, 2, rng.integers(1, 3, n - 2)]
    base = hajek_domain_means(independent_sample(y, w, domain, 2)).means
    affine = hajek_domain_means(independent_sample(a * y + b, w, domain, 2)).means
    np.testing.assert_allclose(affine, a * base + b, rtol=1e-9, atol=1e-9 * (abs(b) + a))
    rescaled = hajek_domain_means(independent_sample(y, c * w, domain, 2)).means
    np.testing.assert_allclose(rescaled, base, rtol=1e-9, atol=1e-12)
