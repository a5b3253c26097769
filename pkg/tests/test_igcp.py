import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itergcp import gcp, igcp, mc
from itergcp.core import BudgetExceeded, DomainError

# mpmath references, outer (1, 0.5), inner (0.6, 0.2)
FROZEN_T1 = [0.51883752943107984, 0.079793540439623029, 0.091095661277310062,
             0.076909022230432651, 0.063045096966935709, 0.047725072919346839]
FROZEN_T2_N10 = 0.025853321393736955
FROZEN_PASSAGE = 0.2343816614955321

small_rates = st.lists(st.floats(0.05, 1.5), min_size=1, max_size=3)


def test_pmf_frozen(igcp_params):
    for n, ref in enumerate(FROZEN_T1):
        assert igcp.igcp_pmf(igcp_params, n, 1.0).value == pytest.approx(ref, abs=1e-14)
    assert igcp.igcp_pmf(igcp_params, 10, 2.0).value == pytest.approx(FROZEN_T2_N10, abs=1e-14)
    np.testing.assert_allclose(igcp.igcp_pmf_vector(igcp_params, 1.0, 5).probs, FROZEN_T1, atol=1e-14)


@given(small_rates, small_rates, st.floats(0.1, 2.5), st.integers(0, 10))
@settings(max_examples=40, deadline=None)
def test_bell_form_matches_series(outer, inner, t, n):
    p = igcp.IgcpParams.from_rates(outer, inner)
    bell = igcp.igcp_pmf(p, n, t).value
    ser = igcp.igcp_pmf_series_oracle(p, n, t)
    assert abs(bell - ser.value) <= 1e-10 + ser.tail_bound


@given(small_rates, small_rates, st.floats(0.1, 3.0))
@settings(max_examples=30, deadline=None)
def test_pmf_vector_moments(outer, inner, t):
    p = igcp.IgcpParams.from_rates(outer, inner)
    v = igcp.igcp_pmf_vector(p, t)
    assert abs(v.mass - 1) <= 1e-9
    n = np.arange(len(v))
    mean = np.dot(n, v.probs)
    var = np.dot((n - mean) ** 2, v.probs)
    assert mean == pytest.approx(p.S * t, rel=1e-8)
    assert var == pytest.approx(p.T * t, rel=1e-7)
    assert var > mean  # overdispersion


def test_pgf_matches_vector(igcp_params):
    v = igcp.igcp_pmf_vector(igcp_params, 1.5)
    for u in (0.0, 0.5, -0.3):
        assert igcp.igcp_pgf(igcp_params, u, 1.5) == pytest.approx(np.sum(v.probs * u ** np.arange(len(v))), abs=1e-12)


def test_levy_measure_and_rates(igcp_params):
    total = math.fsum(igcp.igcp_levy_measure(igcp_params, n) for n in range(1, 300))
    assert total == pytest.approx(igcp.levy_total_mass(igcp_params), abs=1e-12)
    lam = igcp_params.outer.total_rate
    closed = 0.6 * -math.expm1(-lam) + 0.2 * -math.expm1(-2 * lam)
    assert igcp.levy_total_mass(igcp_params) == pytest.approx(closed, rel=1e-14)
    with pytest.raises(DomainError):
        igcp.igcp_levy_measure(igcp_params, 0)


def test_ode_agrees(igcp_params):
    assert igcp.igcp_ode_verify(igcp_params, 12, 1.5) <= 1e-6


def test_moments_covariance(igcp_params):
    mean, var, cov = igcp.igcp_moments(igcp_params, 0.7, 2.0)
    assert mean == pytest.approx(igcp_params.S * 2.0)
    assert var == pytest.approx(igcp_params.T * 2.0)
    assert cov == pytest.approx(igcp_params.T * 0.7)


def test_first_passage_probability_frozen(igcp_params):
    res = igcp.first_passage_probability(igcp_params)
    assert res.value == pytest.approx(FROZEN_PASSAGE, abs=1e-13)


def test_first_passage_density_integrates(igcp_params):
    grid = np.linspace(0.0, 50.0, 1001)
    cdf = igcp.first_passage_cdf_table(igcp_params, 1, grid)
    assert cdf[-1] == pytest.approx(FROZEN_PASSAGE, abs=1e-5)
    assert np.all(np.diff(cdf) >= -1e-12)


def test_first_passage_mc(igcp_params, rng):
    draws = igcp.sample_first_passage(igcp_params, 2, 20_000, rng)
    frac = np.isfinite(draws).mean()
    grid = np.linspace(0.0, 60.0, 601)
    total = igcp.first_passage_cdf_table(igcp_params, 2, grid)[-1]
    assert abs(frac - total) < 4 * math.sqrt(total * (1 - total) / draws.size)


def test_first_passage_domain(igcp_params):
    with pytest.raises(DomainError):
        igcp.first_passage_density(igcp_params, 0, 1.0)


def test_sampler_chi_square(igcp_params, rng):
    draws = igcp.sample_igcp_value(igcp_params, 1.5, rng, 50_000)
    _, pval = mc.chi_square_samples(draws, igcp.igcp_pmf_vector(igcp_params, 1.5))
    assert pval >= 1e-3


def test_path_batch_marginal(igcp_params, rng):
    batch = igcp.sample_igcp_paths(igcp_params, 2.0, 40_000, rng)
    _, pval = mc.chi_square_samples(batch.values_at(1.0), igcp.igcp_pmf_vector(igcp_params, 1.0))
    assert pval >= 1e-3
    single = batch.get(0)
    assert single.value_at(2.0) == batch.values_at(2.0)[0]


def test_fractional_integral_alpha_one(igcp_params):
    mean, var, cov = igcp.fractional_integral_moments(igcp_params, 1.0, 2.0)
    assert mean == pytest.approx(igcp_params.S * 2.0)
    assert var == pytest.approx(igcp_params.T * 8.0 / 3.0)
    assert cov == pytest.approx(igcp_params.T * 2.0)


def test_conditional_mean_total_expectation(igcp_params):
    alpha, t = 0.5, 1.2
    num, pmf, tail = igcp.fractional_integral_conditional_means(igcp_params, alpha, t, 90)
    target = igcp_params.S * t ** (alpha + 1) / math.gamma(alpha + 2)
    assert math.fsum(num) == pytest.approx(target, rel=1e-12)
    one = igcp.fractional_integral_conditional_mean(igcp_params, alpha, t, 3)
    assert one.value == pytest.approx(num[3] / pmf[3], rel=1e-10)
    with pytest.raises(BudgetExceeded):
        igcp.fractional_integral_conditional_means(igcp_params, alpha, t, 40, budget=10)


def test_conditional_mean_mc(igcp_params, rng):
    batch = igcp.sample_igcp_paths(igcp_params, 1.0, 100_000, rng)
    x, i = batch.values_at(1.0), batch.integrals(1.0, 1.0)
    sel = i[x == 2]
    est = igcp.fractional_integral_conditional_mean(igcp_params, 1.0, 1.0, 2).value
    assert abs(sel.mean() - est) < 4 * sel.std() / math.sqrt(sel.size)


def test_martingale_residual_mean(igcp_params):
    conf = mc.McConfig(40_000, master_seed=5)
    est = mc.run_mc(lambda rng, n: igcp.martingale_residual(igcp.sample_igcp_value(igcp_params, 2.0, rng, n),
                                                            igcp_params, 2.0), conf)
    assert est.within(0.0)


def test_nh_constant_schedule_matches_homogeneous(igcp_params):
    sched = gcp.RateSchedule.constant([0.6, 0.2], 3.0)
    for n in range(8):
        assert igcp.nh_igcp_pmf(igcp_params.outer, sched, n, 2.0).value == pytest.approx(
            igcp.igcp_pmf(igcp_params, n, 2.0).value, abs=1e-14)


def test_nh_piecewise(igcp_params, rng):
    sched = gcp.RateSchedule(np.array([0.0, 1.0, 2.0]), np.array([[0.4, 1.0], [0.3, 0.1]]))
    outer = igcp_params.outer
    assert igcp.nh_ode_verify(outer, sched, 10, 2.0) <= 1e-6
    mean, var = igcp.nh_igcp_moments(outer, sched, 2.0)
    draws = igcp.sample_nh_igcp_value(outer, sched, 2.0, rng, 50_000)
    assert abs(draws.mean() - mean) < 4 * math.sqrt(var / draws.size)
    inc = igcp.sample_nh_increment(outer, sched, 1.0, 0.5, rng, 50_000)
    pmf = [igcp.nh_increment_pmf(outer, sched, n, 1.0, 0.5).value for n in range(40)]
    _, pval = mc.chi_square_samples(inc, pmf)
    assert pval >= 1e-3
    cdf = igcp.nh_first_passage_cdf(outer, sched, 2, 2.0)
    assert cdf == pytest.approx(1 - sum(igcp.nh_igcp_pmf(outer, sched, m, 2.0).value for m in range(2)))


def test_budget_exceeded():
    p = igcp.IgcpParams.from_rates([0.1] * 8, [0.1] * 8)
    with pytest.raises(BudgetExceeded):
        igcp.igcp_pmf(p, 60, 1.0, budget=1000)


def test_tail_bound_survives_mgf_overflow():
    p = igcp.IgcpParams.from_rates([1.0, 1.0, 1.0], [1.0, 1.0])
    v = igcp.igcp_pmf_vector(p, 1.0)
    assert v.tail_bound <= 1e-12
    assert abs(v.mass - 1) <= 1e-9
