import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itergcp import compound, igcp, mc
from itergcp.compound import JumpLaw
from itergcp.core import DomainError

LAWS = [JumpLaw.point_mass(1), JumpLaw.point_mass(3), JumpLaw.geometric(0.4),
        JumpLaw.gcp_unit([0.7, 0.2]), JumpLaw.explicit([0.2, 0.5, 0.3])]


def test_point_mass_one_is_igcp(igcp_params):
    v = compound.compound_igcp_pmf_vector(igcp_params, JumpLaw.point_mass(1), 1.0, 20)
    np.testing.assert_allclose(v.probs, igcp.igcp_pmf_vector(igcp_params, 1.0, 20).probs, atol=1e-15)


@pytest.mark.parametrize("law", LAWS, ids=lambda x: x.kind)
def test_pmf_matches_pgf(igcp_params, law):
    t = 0.8
    v = compound.compound_igcp_pmf_vector(igcp_params, law, t, 400)
    assert abs(v.mass - 1) < 1e-9
    for u in (0.0, 0.3, 0.8):
        direct = np.sum(v.probs * u ** np.arange(len(v)))
        assert compound.compound_igcp_pgf(igcp_params, law, u, t) == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("law", LAWS, ids=lambda x: x.kind)
def test_moments(igcp_params, law):
    t = 1.1
    v = compound.compound_igcp_pmf_vector(igcp_params, law, t, 200)
    n = np.arange(len(v))
    mean, var = compound.compound_igcp_moments(igcp_params, law, t)
    assert np.dot(n, v.probs) == pytest.approx(mean, rel=1e-8)
    assert np.dot((n - mean) ** 2, v.probs) == pytest.approx(var, rel=1e-7)


@pytest.mark.parametrize("law", LAWS, ids=lambda x: x.kind)
def test_d_process_pgf(igcp_params, law):
    for u in (0.0, 0.25, 0.6, 0.95, 1.0):
        assert compound.d_process_pgf(igcp_params, law, u, 1.3) == pytest.approx(
            compound.compound_igcp_pgf(igcp_params, law, u, 1.3), abs=1e-10)


def test_cgcp_pgf_point_mass_is_gcp(igcp_params):
    from itergcp.gcp import gcp_pgf
    assert compound.cgcp_pgf(igcp_params.outer, JumpLaw.point_mass(1), 0.4, 2.0) == pytest.approx(
        gcp_pgf(igcp_params.outer, 0.4, 2.0))


def test_exponential_cdf_limits(igcp_params):
    law = JumpLaw.exponential(1.5)
    atom = igcp.igcp_pmf(igcp_params, 0, 1.0).value
    assert compound.compound_igcp_cdf(igcp_params, law, 0.0, 1.0) == pytest.approx(atom)
    assert compound.compound_igcp_cdf(igcp_params, law, -1.0, 1.0) == 0.0
    assert compound.compound_igcp_cdf(igcp_params, law, 200.0, 1.0) == pytest.approx(1.0, abs=1e-9)


@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0))
@settings(max_examples=30, deadline=None)
def test_exponential_cdf_monotone(w1, w2):
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    law = JumpLaw.exponential(2.0)
    lo, hi = sorted((w1, w2))
    assert compound.compound_igcp_cdf(p, law, lo, 1.0) <= compound.compound_igcp_cdf(p, law, hi, 1.0) + 1e-15


def test_exponential_mean_mc(igcp_params):
    law = JumpLaw.exponential(2.0)
    mean, var = compound.compound_igcp_moments(igcp_params, law, 1.5)
    est = mc.run_mc(lambda rng, n: compound.sample_compound_value(igcp_params, law, 1.5, rng, n),
                    mc.McConfig(50_000, master_seed=3))
    assert est.within(mean)
    assert est.variance == pytest.approx(var, rel=0.05)


def test_sampler_chi_square(igcp_params, rng):
    law = JumpLaw.gcp_unit([0.7, 0.2])
    draws = compound.sample_compound_value(igcp_params, law, 1.0, rng, 50_000)
    _, pval = mc.chi_square_samples(draws, compound.compound_igcp_pmf_vector(igcp_params, law, 1.0, 150))
    assert pval >= 1e-3


def test_fdd_consistency(igcp_params):
    law = JumpLaw.geometric(0.5)
    one = compound.compound_fdd(igcp_params, law, [1.0], [4])
    cdf = compound.compound_igcp_pmf_vector(igcp_params, law, 1.0, 4).probs.sum()
    assert one == pytest.approx(cdf, abs=1e-12)
    # a loose second constraint changes nothing
    two = compound.compound_fdd(igcp_params, law, [1.0, 1.0 + 1e-9], [4, 10_000])
    assert two == pytest.approx(one, abs=1e-6)
    with pytest.raises(DomainError):
        compound.compound_fdd(igcp_params, law, [1.0, 0.5], [1, 2])
    assert compound.compound_fdd(igcp_params, law, [0.5, 1.0], [-1, 3]) == 0.0


def test_fdd_mc(igcp_params):
    law = JumpLaw.geometric(0.4)
    times, cell = (0.5, 1.2), (1, 4)
    exact = compound.compound_fdd(igcp_params, law, times, cell)
    est = mc.run_mc(lambda rng, n: np.all(compound.sample_compound_fdd(igcp_params, law, times, rng, n) <= cell,
                                          axis=1), mc.McConfig(50_000, master_seed=9))
    assert est.within(exact)


def test_martingale_residual(igcp_params):
    law = JumpLaw.geometric(0.4)
    est = mc.run_mc(lambda rng, n: compound.compound_martingale_residual(
        compound.sample_compound_value(igcp_params, law, 2.0, rng, n), igcp_params, law, 2.0),
        mc.McConfig(40_000, master_seed=4))
    assert est.within(0.0)


def test_law_validation():
    with pytest.raises(DomainError):
        JumpLaw.geometric(0.0)
    with pytest.raises(DomainError):
        JumpLaw.exponential(-1.0)
    with pytest.raises(DomainError):
        JumpLaw.explicit([0.5, 0.4])
    with pytest.raises(DomainError):
        JumpLaw("cauchy")
    with pytest.raises(DomainError):
        JumpLaw.exponential(1.0).pgf(0.5)


def test_geometric_conv_power_closed_form():
    law = JumpLaw.geometric(0.3)
    generic = JumpLaw.explicit(np.append(0.0, law.pmf_vector(400).probs[1:]) / law.pmf_vector(400).probs.sum())
    np.testing.assert_allclose(law.conv_power_pmf(4, 30), generic.conv_power_pmf(4, 30), atol=1e-13)


@pytest.mark.parametrize("law", LAWS[:4], ids=lambda x: x.kind)
def test_pgf_derivative_is_mean(igcp_params, law):
    # second-order backward difference at u = 1, the pgf is undefined beyond it
    t, h = 1.4, 1e-5
    g = lambda u: compound.compound_igcp_pgf(igcp_params, law, u, t)  # noqa: E731
    deriv = (3 * g(1.0) - 4 * g(1.0 - h) + g(1.0 - 2 * h)) / (2 * h)
    assert deriv == pytest.approx(compound.compound_igcp_moments(igcp_params, law, t)[0], rel=1e-6)
