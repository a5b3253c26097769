import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itergcp import gcp, mc
from itergcp.core import DomainError

rates = st.lists(st.floats(0.05, 3.0), min_size=1, max_size=4)

# mpmath references from tests/oracles/freeze_values.py, rates (1, 0.5), t = 1
FROZEN = [0.22313016014842983, 0.22313016014842983, 0.22313016014842983,
          0.14875344009895322, 0.092970900061845762, 0.048344868032159796]


def test_pmf_frozen(outer):
    for n, ref in enumerate(FROZEN):
        assert gcp.gcp_pmf(outer, n, 1.0) == pytest.approx(ref, abs=1e-15)
    np.testing.assert_allclose(gcp.gcp_pmf_vector(outer, 1.0, 5).probs, FROZEN, atol=1e-15)


def test_k1_is_poisson():
    p = gcp.GcpParams([2.5])
    for n in range(10):
        assert gcp.gcp_pmf(p, n, 1.3) == pytest.approx(math.exp(-3.25) * 3.25 ** n / math.factorial(n), rel=1e-13)


@given(rates, st.floats(0.05, 5.0))
@settings(max_examples=40, deadline=None)
def test_recursion_matches_partition_sum(r, t):
    p = gcp.GcpParams(r)
    v = gcp.gcp_pmf_vector(p, t, 20)
    for n in range(21):
        assert abs(v.probs[n] - gcp.gcp_pmf(p, n, t)) <= 1e-13


@given(rates, st.floats(0.05, 10.0))
@settings(max_examples=40, deadline=None)
def test_normalisation_and_moments(r, t):
    p = gcp.GcpParams(r)
    v = gcp.gcp_pmf_vector(p, t)
    assert v.tail_bound <= 1e-9
    assert abs(v.mass - 1) <= 1e-9
    n = np.arange(len(v))
    mean, var = gcp.gcp_moments(p, t)
    assert np.dot(n, v.probs) == pytest.approx(mean, rel=1e-9)
    assert np.dot((n - mean) ** 2, v.probs) == pytest.approx(var, rel=1e-8)


def test_large_rate_log_space():
    p = gcp.GcpParams([300.0, 250.0])
    v = gcp.gcp_pmf_vector(p, 1.0)
    assert abs(v.mass - 1) < 1e-9


def test_pgf_matches_pmf(outer):
    v = gcp.gcp_pmf_vector(outer, 1.2)
    for u in (0.0, 0.4, -0.7, 0.3 + 0.5j):
        direct = np.sum(v.probs * np.power(u, np.arange(len(v))))
        assert abs(gcp.gcp_pgf(outer, u, 1.2) - direct) < 1e-12
    with pytest.raises(DomainError):
        gcp.gcp_pgf(outer, 1.5, 1.0)


def test_invalid_rates():
    for bad in ([], [0.0], [-1.0], [float("nan")], [1.0, float("inf")]):
        with pytest.raises(DomainError):
            gcp.GcpParams(bad)
    with pytest.raises(DomainError):
        gcp.gcp_pmf(gcp.GcpParams([1.0]), 2, -0.1)


def test_sampler_chi_square(outer, rng):
    draws = gcp.sample_gcp_values(outer, 2.0, rng, 50_000)
    _, pval = mc.chi_square_samples(draws, gcp.gcp_pmf_vector(outer, 2.0))
    assert pval >= 1e-3


def test_path_sampler(outer, rng):
    vals = np.array([gcp.sample_gcp_path(outer, 1.5, rng).value_at(1.5) for _ in range(20_000)])
    _, pval = mc.chi_square_samples(vals, gcp.gcp_pmf_vector(outer, 1.5))
    assert pval >= 1e-3
    path = gcp.sample_gcp_path(outer, 3.0, rng)
    assert np.all(np.diff(path.values_at(np.linspace(0, 3, 50))) >= 0)


def test_path_integral_step():
    path = gcp.GcpPath([0.5, 1.0], [2, 1], 2.0)
    assert path.integral(2.0) == pytest.approx(2 * 1.5 + 1 * 1.0)
    assert path.value_at(0.99) == 2
    assert path.value_at(1.0) == 3


def test_rate_schedule():
    s = gcp.RateSchedule(np.array([0.0, 1.0, 3.0]), np.array([[1.0, 2.0], [0.5, 0.0]]))
    np.testing.assert_allclose(s.rho(2.0), [3.0, 0.5])
    np.testing.assert_allclose(s.rho_between(0.5, 2.0), [2.5, 0.25])
    np.testing.assert_allclose(s.mu(1.5), [2.0, 0.0])
    with pytest.raises(DomainError):
        s.rho(4.0)
    with pytest.raises(DomainError):
        gcp.RateSchedule(np.array([0.5, 1.0]), np.array([[1.0]]))


def test_nh_gcp_sampler(rng):
    s = gcp.RateSchedule(np.array([0.0, 1.0, 2.0]), np.array([[1.0, 3.0], [0.5, 0.2]]))
    vals = gcp.sample_nh_gcp_value(s, 2.0, rng, 50_000)
    rho = s.rho(2.0)
    assert abs(vals.mean() - (rho[0] + 2 * rho[1])) < 4 * vals.std() / math.sqrt(vals.size)
    path = gcp.sample_nh_gcp_path(s, 2.0, rng)
    assert np.all(np.diff(path.event_times) >= 0)
