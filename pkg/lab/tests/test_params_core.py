from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError
from pytest import approx, mark, raises

from errors import ParamsError, UnboundedFormError
from params_core import (Params, _bounded_log_extremum, beta_alpha, beta_zero, classical_thresholds,
                         compute_constants,
                         delta_alpha, exact_constants, eta_threshold, gamma_alpha, grid_search_minimum,
                         k0_k1_identity_holds, k0_k1_mu, k_min, m_shift, quasi_diss_bound_M)


def P(N, p, alpha=0.0, **kwargs):
    return Params(N=N, p=p, alpha=alpha, **kwargs)


@mark.parametrize("N p alpha expected".split(),
                  ((5, 2.0, 0.0, 2.25),
                   (3, 2.0, 0.0, 0.25),
                   (3, 1.5, 0.5, 1.0)))
def test_gamma_alpha(N, p, alpha, expected):
    assert gamma_alpha(P(N, p, alpha)) == approx(expected, rel=1e-15)


@mark.parametrize("N p expected".split(), ((5, 2.0, 1.25), (4, 2.0, 0.0), (3, 2.0, -0.75)))
def test_beta_zero(N, p, expected):
    assert beta_zero(P(N, p)) == approx(expected, abs=1e-15)


def test_beta_alpha_values():
    assert beta_alpha(P(5, 2.0, 1.0)) == approx(2.0)
    assert beta_alpha(P(5, 2.0, 5.0)) == approx(0.0, abs=1e-15)
    assert beta_alpha(P(3, 2.0, 1.0)) == approx(0.0, abs=1e-15)


@mark.parametrize("N p alpha expected".split(),
                  ((5, 2.0, 3.0, 2.0),
                   (4, 3.0, 1.0, -16.0 / 9.0),
                   (6, 3.0, 4.0, 0.0)))
def test_delta_alpha(N, p, alpha, expected):
    assert delta_alpha(P(N, p, alpha)) == approx(expected, abs=1e-14)


@mark.parametrize("N expected".split(), ((5, 1.25), (7, 5.25), (3, -0.75)))
def test_k_min(N, expected):
    assert k_min(P(N, 2.0)) == approx(expected)


def test_k0_k1_mu_values():
    assert k0_k1_mu(P(5, 2.0, 1.0)) == approx((2.0, 0.0, 2.0))
    assert k0_k1_mu(P(6, 2.0, 2.0)) == approx((3.0, 1.0, 3.0))
    k0, _, _ = k0_k1_mu(P(5, 2.0, 3.0))
    assert k0 == approx(0.0, abs=1e-14)


def test_eta_threshold_values():
    assert eta_threshold(P(5, 2.0, 2.0)) == approx(-1.25)
    assert eta_threshold(P(4, 2.0, 4.0)) == approx(3.0)
    assert eta_threshold(P(5, 2.0, 0.0)) == approx(-9.0 / 4.0)


@mark.parametrize("N expected".split(), ((5, (1.25, 2.25)), (3, (-0.75, 0.25)), (4, (0.0, 1.0))))
def test_classical_thresholds(N, expected):
    assert classical_thresholds(P(N, 2.0)) == approx(expected)


@mark.parametrize("fields message".split(),
                  (({"N": 2, "p": 2.0, "alpha": 0.0}, "N ≥ 3"),
                   ({"N": 5, "p": 1.0, "alpha": 0.0}, "1 < p"),
                   ({"N": 5, "p": 2.0, "alpha": -1.0}, "alpha ≥ 0"),
                   ({"N": 5, "p": 2.0, "alpha": 1.0, "eta": 1.0}, "beta must be given")))
def test_params_invariants(fields, message):
    with raises(ValidationError, match=message):
        Params(**fields)


def test_params_are_frozen():
    params = P(5, 2.0)
    with raises(ValidationError):
        params.N = 6
    assert params.p_dual == approx(2.0)
    assert not params.has_tilde
    assert P(5, 2.0, 3.0, eta=1.0, beta=2.0).without_tilde() == P(5, 2.0, 3.0)


# exact arithmetic -----------------------------------------------------------

rationals = st.fractions(min_value=Fraction(11, 10), max_value=Fraction(6), max_denominator=12)
alphas = st.fractions(min_value=Fraction(0), max_value=Fraction(8), max_denominator=12)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=3, max_value=12), rationals, alphas)
def test_identities_hold_exactly(N, p, alpha):
    exact = exact_constants(N, p, alpha)
    assert k0_k1_identity_holds(N, p, alpha)
    assert (exact["beta_zero"] > 0) == (N > 2 * p)
    assert (exact["delta_alpha"] >= 0) == (alpha >= 1 + Fraction(N, 2) * (p - 2))
    assert exact["mu"] == min(exact["k0"], exact["k0"] + exact["k1"])


@settings(deadline=None)
@given(st.integers(min_value=3, max_value=10),
       st.floats(min_value=1.1, max_value=6.0),
       st.floats(min_value=0.0, max_value=8.0))
def test_identity_holds_for_float_inputs(N, p, alpha):
    assert k0_k1_identity_holds(N, p, alpha)


@given(st.integers(min_value=3, max_value=10),
       st.floats(min_value=1.1, max_value=6.0),
       st.floats(min_value=0.0, max_value=4.0),
       st.floats(min_value=0.01, max_value=2.0))
def test_gamma_monotone(N, p, alpha, step):
    assert gamma_alpha(P(N, p, alpha + step)) > gamma_alpha(P(N, p, alpha))
    assert gamma_alpha(P(N, p + step, alpha)) < gamma_alpha(P(N, p, alpha))


# m and M --------------------------------------------------------------------

def test_m_shift_closed_form():
    params = P(3, 2.0, 4.0, eta=1.0, beta=3.0)
    assert m_shift(params) == approx(-7.8125, rel=1e-12)
    K = -3.75
    _, value = grid_search_minimum(lambda r: K * r ** 2 + r ** 3)
    assert value == approx(-7.8125, rel=1e-5)


def test_m_shift_vanishes_for_nonnegative_k0():
    assert m_shift(P(6, 2.0, 3.0, eta=1.0, beta=2.0)) == 0.0


def test_m_shift_tends_to_zero_as_eta_grows():
    values = [m_shift(P(3, 2.0, 4.0, eta=eta, beta=3.0)) for eta in (1.0, 10.0, 100.0, 1000.0)]
    assert all(v <= 0 for v in values)
    assert values == sorted(values)
    assert abs(values[-1]) < 1e-4


def test_m_shift_rejects_non_tilde_parameters():
    with raises(ParamsError, match="tilde-branch only"):
        m_shift(P(5, 2.0, 3.0))
    with raises(ParamsError, match="tilde-branch only"):
        m_shift(P(5, 2.0, 2.0, eta=1.0, beta=1.0))


def test_quasi_diss_bound_M_values():
    assert quasi_diss_bound_M(P(5, 2.0, 2.0, eta=1.0, beta=1.0), 1.0) == approx(1.0)
    params = P(5, 2.0, 3.0, eta=1.0, beta=2.0)
    assert quasi_diss_bound_M(params, 1.0) == approx(81.0 / 64.0, rel=1e-12)
    r_best, value = grid_search_minimum(lambda r: -(2.25 * r - r ** 2))
    assert -value == approx(81.0 / 64.0, rel=1e-6)
    assert r_best == approx(9.0 / 8.0, rel=1e-3)


def test_quasi_diss_bound_M_decreases_in_eta():
    values = [quasi_diss_bound_M(P(5, 2.0, 3.0, eta=eta, beta=2.0), 1.0) for eta in (1.0, 10.0, 100.0)]
    assert values[0] > values[1] > values[2] > 0


@mark.parametrize("fun maximize expected".split(),
                  ((lambda r: -3.75 * r ** 2 + r ** 3, False, -7.8125),
                   (lambda r: 2.25 * r - r ** 2, True, 81.0 / 64.0),
                   (lambda r: 10.0 * r ** 0.5 - r ** 0.75, True, 4000.0 / 27.0)))
def test_bounded_extremum_matches_closed_form(fun, maximize, expected):
    assert _bounded_log_extremum(fun, maximize) == approx(expected, rel=1e-8)


def test_quasi_diss_bound_M_errors():
    with raises(UnboundedFormError):
        quasi_diss_bound_M(P(5, 2.0, 3.0, eta=1.0, beta=1.0), 1.0)
    with raises(ParamsError, match="epsilon"):
        quasi_diss_bound_M(P(5, 2.0, 3.0, eta=1.0, beta=2.0), 1.5)
    with raises(ParamsError):
        quasi_diss_bound_M(P(5, 2.0, 3.0), 1.0)


def test_compute_constants(params_521):
    constants = compute_constants(params_521)
    assert constants.gamma_alpha == approx(4.0)
    assert constants.beta_zero == approx(1.25)
    assert constants.beta_alpha == approx(2.0)
    assert constants.k == approx(1.25)
    assert constants.mu == min(constants.k0, constants.k0 + constants.k1)
    assert constants.m is None and constants.eta_threshold is None


def test_compute_constants_tilde():
    constants = compute_constants(P(3, 2.0, 4.0, eta=1.0, beta=3.0))
    assert constants.m == approx(-7.8125)
    assert constants.eta_threshold is not None


def test_gamma_alpha_equals_gamma_zero_at_alpha_zero():
    constants = compute_constants(P(6, 2.5, 0.0))
    assert constants.gamma_alpha == constants.gamma_zero
    assert np.isfinite(constants.baras_goldstein)
