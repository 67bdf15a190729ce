import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from mimoexp import (
    ChannelSpec,
    McConfig,
    cutoff_rate,
    d_e0_dbeta,
    d_e0_drho,
    e0_tilde,
    ergodic_capacity,
    log_zeta,
    mc_capacity,
    mc_e0,
    mc_zeta,
)
from mimoexp.errors import IllConditionedWarning, NumericalError, ValidationError
from mimoexp.exponent import (
    base_term,
    base_term_dbeta,
    base_term_drho,
    closed_form_terms,
    integer_order,
    singular_distance,
)
from mimoexp.spectra import exponential_correlation


def richardson(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


# ---------------------------------------------------------------- base term

def test_base_term_vanishes_at_origin():
    assert base_term(0.0, 3.0, 3) == 0.0


@given(st.floats(0, 1), st.floats(0.1, 4.0))
def test_base_term_derivatives(rho, beta):
    h = 1e-6
    assert base_term_dbeta(rho, beta, 4) == pytest.approx(
        (base_term(rho, beta + h, 4) - base_term(rho, beta - h, 4)) / (2 * h), rel=1e-6, abs=1e-8)
    assert base_term_drho(rho, beta, 4) == pytest.approx(
        (base_term(rho + h, beta, 4) - base_term(rho - h, beta, 4)) / (2 * h), rel=1e-6, abs=1e-8)


# ---------------------------------------------------------------- routing

def test_route_selection(iid33, corr33):
    assert closed_form_terms(iid33, 0.5, 2.0).route == "iid"
    assert closed_form_terms(corr33, 0.4, 2.0).route == "integer"
    assert closed_form_terms(corr33, 0.5, 2.0).route == "general"
    assert integer_order(corr33, 0.4 + 1e-7) == 2
    assert integer_order(corr33, 0.4 + 1e-5) is None
    assert singular_distance(corr33, 0.41) == pytest.approx(0.05)


def test_explicit_route_validation(iid33, corr33):
    with pytest.raises(ValidationError):
        e0_tilde(corr33, 0.5, 2.0, method="iid")
    with pytest.raises(ValidationError):
        e0_tilde(corr33, 0.5, 2.0, method="integer")
    with pytest.raises(ValidationError):
        e0_tilde(corr33, 0.5, 2.0, method="bogus")


@pytest.mark.parametrize("rho,beta", [(-0.1, 2.0), (1.1, 2.0), (0.5, 0.0), (0.5, 3.01)])
def test_domain_validation(corr33, rho, beta):
    with pytest.raises(ValidationError):
        e0_tilde(corr33, rho, beta)
    with pytest.raises(ValidationError):
        d_e0_dbeta(corr33, rho, beta)
    with pytest.raises(ValidationError):
        d_e0_drho(corr33, rho, beta)


# ---------------------------------------------------------------- values

def test_zero_rho_full_beta_is_zero(corr33):
    assert e0_tilde(corr33, 0.0, 3.0) == 0.0


# mpmath 2-D quadrature over the joint eigenvalue density of the Wishart matrix
WISHART_REFERENCE = [
    ((2, 2, 2, 10.0), 0.5, 2.0, 1.4683858985882138732),
    ((2, 2, 3, 10.0), 1.0, 2.0, 2.133997813290040821),
    ((3, 2, 1, 5.0), 0.7, 2.4, 1.2813521060128563294),
]


@pytest.mark.parametrize("shape,rho,beta,expected", WISHART_REFERENCE)
def test_iid_against_eigenvalue_quadrature(shape, rho, beta, expected):
    spec = ChannelSpec.exponential(*shape)
    assert e0_tilde(spec, rho, beta) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("shape,rho,beta,expected", WISHART_REFERENCE)
def test_iid_through_general_route(shape, rho, beta, expected):
    spec = ChannelSpec.exponential(*shape)
    if integer_order(spec, rho) is None:
        assert e0_tilde(spec, rho, beta, method="general") == pytest.approx(expected, rel=1e-9)
    else:
        assert e0_tilde(spec, rho, beta, method="integer") == pytest.approx(expected, rel=1e-9)


def test_2x2_iid_against_monte_carlo():
    spec = ChannelSpec.exponential(2, 2, 2, 10.0)
    est = mc_e0(spec, 0.5, 2.0, McConfig(samples=10**6))
    assert abs(est.z_score(e0_tilde(spec, 0.5, 2.0))) <= 3.0


@pytest.mark.parametrize("shape,zt,zr,rho,beta", [
    ((3, 3, 5, 15.0), 0.5, 0.7, 0.5, 2.4),
    ((3, 3, 1, 10.0), 0.5, 0.7, 0.75, 2.0),
    ((2, 4, 2, 12.0), 0.3, 0.8, 0.9, 1.6),
    ((4, 2, 3, 8.0), 0.6, 0.2, 0.25, 3.5),
    ((2, 3, 4, 5.0), 0.9, 0.0, 0.8, 1.2),
])
def test_correlated_against_monte_carlo(shape, zt, zr, rho, beta):
    spec = ChannelSpec.exponential(*shape, zt, zr)
    z = mc_zeta(spec, rho, beta, McConfig(samples=4 * 10**5, seed=3))
    assert abs(z.z_score(math.exp(log_zeta(spec, rho, beta)))) <= 3.0


def test_one_sided_correlation_against_monte_carlo():
    # identity on the n x n side, correlation on the m x m side
    spec = ChannelSpec(3, 2, 3, 10.0, phi_r=exponential_correlation(2, 0.8))
    assert spec.es2.mult == (3,)
    z = mc_zeta(spec, 0.6, 2.5, McConfig(samples=4 * 10**5, seed=5))
    assert abs(z.z_score(math.exp(log_zeta(spec, 0.6, 2.5)))) <= 3.0


def test_cutoff_rate_is_e0_at_unit_rho(corr33):
    assert cutoff_rate(corr33) == e0_tilde(corr33, 1.0, 3.0)


def test_cutoff_rate_2x2_against_monte_carlo():
    spec = ChannelSpec.exponential(2, 2, 3, 10.0)
    from mimoexp import mc_cutoff_rate
    est = mc_cutoff_rate(spec, McConfig(samples=10**6))
    assert abs(est.z_score(cutoff_rate(spec))) <= 3.0


def test_zero_snr():
    spec = ChannelSpec(3, 3, 5, 0.0)
    assert e0_tilde(spec, 0.5, 2.0) == base_term(0.5, 2.0, 3)
    assert d_e0_drho(spec, 0.5, 3.0) == 0.0
    assert ergodic_capacity(spec) == 0.0
    assert cutoff_rate(spec) == 0.0


def test_vanishing_snr_limits():
    spec = ChannelSpec.exponential(3, 3, 5, -60.0)
    assert cutoff_rate(spec) == pytest.approx(0.0, abs=1e-5)
    assert d_e0_drho(spec, 0.5, 3.0) == pytest.approx(0.0, abs=1e-5)


# ---------------------------------------------------------------- capacity

@pytest.mark.parametrize("zt,zr,expected,unit", [
    (0.0, 0.0, 8.48, 1.0),
    (0.5, 0.7, 7.19, 1.0),
    (0.9, 0.9, 7.36, math.log(2.0)),
])
def test_capacity_regression(zt, zr, expected, unit):
    spec = ChannelSpec.exponential(3, 3, 1, 15.0, zt, zr)
    assert ergodic_capacity(spec) / unit == pytest.approx(expected, abs=0.02)


@pytest.mark.parametrize("shape,snr,zt,zr", [
    ((3, 3), 15.0, 0.0, 0.0),
    ((3, 3), 15.0, 0.5, 0.7),
    ((2, 4), 10.0, 0.3, 0.6),
    ((4, 2), 20.0, 0.6, 0.3),
    ((4, 4), 60.0, 0.0, 0.0),
])
def test_capacity_against_monte_carlo(shape, snr, zt, zr):
    spec = ChannelSpec.exponential(*shape, 1, snr, zt, zr)
    est = mc_capacity(spec, McConfig(samples=2 * 10**5, seed=1))
    assert abs(est.z_score(ergodic_capacity(spec))) <= 3.0


@pytest.mark.parametrize("zt,zr", [(0.0, 0.0), (0.5, 0.7)])
def test_capacity_is_rate_at_zero_rho(zt, zr):
    cap = ergodic_capacity(ChannelSpec.exponential(3, 3, 1, 15.0, zt, zr))
    for nc in (1, 5, 10):
        spec = ChannelSpec.exponential(3, 3, nc, 15.0, zt, zr)
        assert d_e0_drho(spec, 0.0, 3.0) == pytest.approx(cap, rel=1e-6)


# ---------------------------------------------------------------- derivatives

def test_dbeta_at_zero_rho():
    spec = ChannelSpec.exponential(3, 3, 5, 15.0, 0.5, 0.7)
    for beta in (0.5, 1.7, 3.0):
        assert d_e0_dbeta(spec, 0.0, beta) == pytest.approx((3.0 - beta) / beta, rel=1e-14)


@pytest.mark.parametrize("nc,rho,beta,which", [
    (5, 0.5, 2.0, "beta"),
    (1, 0.3, 2.5, "rho"),
])
def test_iid_derivative_examples(nc, rho, beta, which):
    spec = ChannelSpec.exponential(3, 3, nc, 15.0)
    if which == "beta":
        fd = richardson(lambda b: e0_tilde(spec, rho, b), beta, 1e-3 * beta)
        assert d_e0_dbeta(spec, rho, beta) == pytest.approx(fd, rel=1e-5)
    else:
        fd = richardson(lambda r: e0_tilde(spec, r, beta), rho, 1e-3)
        assert d_e0_drho(spec, rho, beta) == pytest.approx(fd, rel=1e-5)


@pytest.mark.parametrize("rho", [0.2, 0.4, 0.6])
def test_integer_route_beta_derivative(corr33, rho):
    assert closed_form_terms(corr33, rho, 2.2).route == "integer"
    fd = richardson(lambda b: e0_tilde(corr33, rho, b), 2.2, 1e-3)
    assert d_e0_dbeta(corr33, rho, 2.2) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("offset", [-1.5e-3, -1e-6, 0.0, 5e-4, 1.9e-3])
def test_rho_derivative_near_removable_singularity(corr33, offset):
    # n_c rho = 2 + 5 * offset; the reference is a wide central difference
    rho = 0.4 + offset
    fd = richardson(lambda r: e0_tilde(corr33, r, 2.2), rho, 0.02)
    assert d_e0_drho(corr33, rho, 2.2) == pytest.approx(fd, rel=1e-7)


# ---------------------------------------------------------------- invariants

@pytest.mark.parametrize("zt,zr,nc,k", [(0.5, 0.7, 5, 1), (0.5, 0.7, 5, 2), (0.3, 0.6, 4, 3), (0.8, 0.2, 3, 1)])
def test_integer_route_is_limit_of_general(zt, zr, nc, k):
    spec = ChannelSpec.exponential(3, 3, nc, 12.0, zt, zr)
    rho = k / nc
    exact = e0_tilde(spec, rho, 2.5)
    for sign in (-1, 1):
        near = e0_tilde(spec, rho + sign * 1e-4, 2.5, method="general")
        far = e0_tilde(spec, rho + sign * 2e-4, 2.5, method="general")
        assert 2 * near - far == pytest.approx(exact, abs=1e-6)


@pytest.mark.parametrize("shape,nc,k", [((3, 3), 5, 2), ((3, 3), 1, 1), ((2, 4), 3, 2), ((4, 2), 4, 1)])
def test_iid_formula_equals_integer_route(shape, nc, k):
    spec = ChannelSpec.exponential(*shape, nc, 13.0)
    rho = k / nc
    assert e0_tilde(spec, rho, 1.8, method="iid") == pytest.approx(
        e0_tilde(spec, rho, 1.8, method="integer"), abs=1e-8)


@pytest.mark.parametrize("zt,zr", [(0.0, 0.0), (0.5, 0.7)])
def test_monotone_decrease_in_coherence_time(zt, zr):
    for rho in (0.25, 0.5, 1.0):
        for beta in (1.5, 2.4, 3.0):
            vals = [e0_tilde(ChannelSpec.exponential(3, 3, nc, 15.0, zt, zr), rho, beta)
                    for nc in range(1, 11)]
            assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.filterwarnings("ignore::mimoexp.errors.IllConditionedWarning")
def test_large_coherence_time_limit(corr33):
    spec = corr33.replace(n_c=10**4)
    for rho, beta in ((0.3, 2.5), (1.0, 3.0)):
        gap = e0_tilde(spec, rho, beta) - base_term(rho, beta, 3)
        assert 0.0 < gap <= 0.01


channel_params = st.tuples(
    st.sampled_from([(2, 2), (3, 3), (2, 3), (3, 2)]),
    st.integers(1, 8),
    st.floats(0.0, 20.0),
    st.sampled_from([0.0, 0.3, 0.5, 0.7]),
    st.sampled_from([0.0, 0.4, 0.6]),
)


@settings(max_examples=40, deadline=None)
@given(channel_params, st.floats(0.05, 1.0), st.floats(0.2, 0.95), st.floats(0.02, 0.5))
def test_concave_in_beta(params, rho, mid, half):
    (nt, nr), nc, snr, zt, zr = params
    spec = ChannelSpec.exponential(nt, nr, nc, snr, zt, zr)
    lo, hi = (mid - half) * nt, (mid + half) * nt
    assume(lo >= 0.05 * nt and hi <= nt)
    f = lambda b: e0_tilde(spec, rho, b)
    assert f(0.5 * (lo + hi)) >= 0.5 * (f(lo) + f(hi)) - 1e-9


@settings(max_examples=40, deadline=None)
@given(channel_params, st.floats(0.01, 1.0), st.floats(0.2, 1.0))
def test_log_zeta_is_non_positive(params, rho, frac):
    (nt, nr), nc, snr, zt, zr = params
    spec = ChannelSpec.exponential(nt, nr, nc, snr, zt, zr)
    assert log_zeta(spec, rho, frac * nt) <= 1e-12


# ---------------------------------------------------------------- conditioning

def test_low_snr_strong_correlation_refuses():
    spec = ChannelSpec.exponential(4, 4, 7, -40.0, 0.9, 0.9)
    with pytest.raises(NumericalError) as info, warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        e0_tilde(spec, 0.3, 3.8)
    assert info.value.condition > 1e12


def test_moderate_conditioning_warns():
    spec = ChannelSpec.exponential(3, 3, 1, -40.0, 0.9, 0.9)
    with pytest.warns(IllConditionedWarning):
        e0_tilde(spec, 0.3, 2.8)


def test_paper_range_is_well_conditioned():
    with warnings.catch_warnings():
        warnings.simplefilter("error", IllConditionedWarning)
        for zeta in np.arange(0.0, 1.0, 0.1):
            for nc in range(1, 11):
                spec = ChannelSpec.exponential(3, 3, nc, 15.0, zeta, zeta)
                e0_tilde(spec, 0.37, 2.3)
                cutoff_rate(spec)
