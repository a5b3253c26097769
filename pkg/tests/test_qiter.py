import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from itergcp import igcp, mc, qiter
from itergcp.core import BudgetExceeded, DomainError
from itergcp.qiter import QIterParams

# mpmath reference, lambda 0.7 over mu1 1.1 over mu2 0.9 at t 1.3
FROZEN = [0.60804919023444745, 0.15635649157199098, 0.10472094555627952, 0.060986484496591652]


def test_frozen():
    p = QIterParams([0.7], [[1.1], [0.9]])
    np.testing.assert_allclose(qiter.qiter_pmf_vector(p, 1.3, 3).probs, FROZEN, atol=1e-13)
    assert qiter.qiter_pmf(p, 2, 1.3).value == pytest.approx(FROZEN[2], abs=1e-13)


def test_one_layer_is_igcp(igcp_params):
    p = QIterParams(igcp_params.outer, [igcp_params.inner])
    np.testing.assert_allclose(qiter.qiter_pmf_vector(p, 1.4, 15).probs,
                               igcp.igcp_pmf_vector(igcp_params, 1.4, 15).probs, atol=1e-15)


def test_double_sum():
    lam, m1, m2, t = 0.5, 0.8, 1.2, 1.0
    p = QIterParams([lam], [[m1], [m2]])
    v = qiter.qiter_pmf_vector(p, t, 8)
    m = np.arange(150)
    for n in range(9):
        brute = math.fsum(stats.poisson.pmf(s, m2 * t) * np.sum(stats.poisson.pmf(n, lam * m) * stats.poisson.pmf(m, m1 * s))
                          for s in range(80))
        assert v.probs[n] == pytest.approx(brute, abs=1e-12)


@given(st.floats(0.1, 1.5), st.floats(0.1, 1.5), st.floats(0.1, 1.5), st.floats(0.1, 1.5))
@settings(max_examples=25, deadline=None)
def test_pgf_matches_pmf(lam, m1, m2, t):
    p = QIterParams([lam, 0.2], [[m1], [m2, 0.1]])
    v = qiter.qiter_pmf_vector(p, t, 60)
    for u in (0.0, 0.5, 0.9):
        direct = float(np.sum(v.probs * u ** np.arange(61)))
        assert abs(qiter.qiter_pgf(p, u, t) - direct) <= 1e-9 + v.tail_bound


def test_all_poisson_variance():
    # unit Poisson layers: mean t, variance (q + 1) t
    p = QIterParams([1.0], [[1.0], [1.0]])
    assert qiter.qiter_moments(p, 2.0) == pytest.approx((2.0, 6.0))


def test_moments_from_pmf():
    p = QIterParams([0.6, 0.2], [[0.8, 0.3], [1.0]])
    t = 0.9
    v = qiter.qiter_pmf_vector(p, t, 150)
    n = np.arange(151)
    mean, var = qiter.qiter_moments(p, t)
    assert np.dot(n, v.probs) == pytest.approx(mean, rel=1e-8)
    assert np.dot((n - mean) ** 2, v.probs) == pytest.approx(var, rel=1e-6)


def test_sampler_mc():
    p = QIterParams([0.6, 0.2], [[0.8, 0.3], [1.0], [0.7]])
    mean, var = qiter.qiter_moments(p, 1.0)
    est = mc.run_mc(lambda rng, n: qiter.sample_qiter_value(p, 1.0, rng, n), mc.McConfig(50_000, master_seed=2))
    assert est.within(mean)
    assert est.variance == pytest.approx(var, rel=0.06)


def test_sampler_chi_square(rng):
    p = QIterParams([0.7], [[1.1], [0.9]])
    draws = qiter.sample_qiter_value(p, 1.3, rng, 40_000)
    _, pval = mc.chi_square_samples(draws, qiter.qiter_pmf_vector(p, 1.3, 60))
    assert pval >= 1e-3


def test_budget_and_domain():
    p = QIterParams([0.7], [[1.1], [0.9], [2.0]])
    with pytest.raises(BudgetExceeded):
        qiter.qiter_pmf_vector(p, 3.0, 10, budget=50)
    with pytest.raises(DomainError):
        qiter.qiter_pmf(p, -1, 1.0)
    with pytest.raises(DomainError):
        QIterParams([1.0], [])
    assert qiter.qiter_pmf_vector(p, 0.0, 3).probs.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_pgf_coefficients_match_recursion():
    from itergcp.kernels import pgf_coefficients
    p = QIterParams([0.7, 0.2], [[1.1], [0.9, 0.3]])
    coef = pgf_coefficients(lambda u: qiter.qiter_pgf(p, u, 1.1), 10)
    np.testing.assert_allclose(coef, qiter.qiter_pmf_vector(p, 1.1, 10).probs, atol=1e-12)


def test_one_layer_sampler_matches_igcp(igcp_params, rng):
    p = QIterParams(igcp_params.outer, [igcp_params.inner])
    draws = qiter.sample_qiter_value(p, 1.2, rng, 40_000)
    _, pval = mc.chi_square_samples(draws, igcp.igcp_pmf_vector(igcp_params, 1.2))
    assert pval >= 1e-3
