from itertools import product

import numpy as np
from pytest import approx, fixture, mark, raises

from errors import DegenerateProfileError, ParamsError, UnboundedFormError
from factory_profiles import PowerGaussianFactory, build_profile_corpus, random_power_gaussians
from inequality_lab import (FORM_EVALUATORS, VIOLATION_FULL, VIOLATION_SPLIT, _abs_pow, dispersivity_form,
                            dissipativity_form, dissipativity_violation_scan, evaluate_corpus, hardy_infimum_search,
                            hardy_optimizer_profile, hardy_ratio, shifted_yosida_form_gap,
                            tilde_dissipativity_form, tilde_yosida_form_gap, yosida_form_gap,
                            yosida_violation_scan)
from lab_constants import *
from params_core import Params, eta_threshold, gamma_alpha, k0_k1_mu
from radial_toolkit import GaussianProfile, LinearGaussianProfile, ZeroProfile

HARDY_EPS = (0.2, 0.1, 0.05, 0.025)


@fixture(scope="module")
def corpus():
    return build_profile_corpus()


# Hardy ----------------------------------------------------------------------

def test_hardy_ratio_of_gaussian(gaussian, params_520):
    evaluation = hardy_ratio(gaussian, params_520)
    assert evaluation.ratio == approx(3.75, rel=1e-8)
    assert evaluation.holds
    assert evaluation.gap == approx(evaluation.rhs - 2.25 * evaluation.lhs)
    assert evaluation.details["gamma_alpha"] == approx(2.25)


def test_hardy_ratio_of_zero_profile(params_520):
    with raises(DegenerateProfileError):
        hardy_ratio(ZeroProfile(), params_520)


@mark.parametrize("factor".split(), ((3.0,), (-0.5,), (1e-3,)))
def test_hardy_ratio_is_scale_invariant(gaussian, params_521, factor):
    base = hardy_ratio(gaussian, params_521).ratio
    assert hardy_ratio(gaussian.scaled(factor), params_521).ratio == approx(base, rel=1e-8)


def test_hardy_ratio_is_dilation_invariant_without_weight(params_520):
    narrow = hardy_ratio(GaussianProfile(a=4.0), params_520).ratio
    wide = hardy_ratio(GaussianProfile(a=0.25), params_520).ratio
    assert narrow == approx(wide, rel=1e-8)


@mark.slow
def test_hardy_lower_bound_on_power_gaussians(params_521):
    gamma = gamma_alpha(params_521)
    for u in PowerGaussianFactory.grid():
        evaluation = hardy_ratio(u, params_521)
        assert evaluation.holds, u.descriptor()
        assert evaluation.ratio >= gamma - 1e-8


def test_hardy_optimizer_profile_exponent(params_521):
    u = hardy_optimizer_profile(params_521, 0.05)
    assert u.s == approx(-2.0 + 0.05)


@mark.slow
@mark.parametrize("N p alpha tolerance".split(), ((5, 2.0, 0.0, 1.02), (6, 3.0, 2.0, 1.05)))
def test_hardy_infimum_search_approaches_gamma(N, p, alpha, tolerance):
    params = Params(N=N, p=p, alpha=alpha)
    ratios = [e.ratio for e in hardy_infimum_search(params, HARDY_EPS)]
    gamma = gamma_alpha(params)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert all(r >= gamma - 1e-8 for r in ratios)
    assert ratios[-1] <= tolerance * gamma


def test_hardy_infimum_search_single_eps(params_520):
    results = hardy_infimum_search(params_520, [0.2])
    assert len(results) == 1
    assert results[0].details["eps"] == 0.2


@mark.parametrize("eps".split(), (([],), ([0.1, 0.2],), ([0.1, -0.05],)))
def test_hardy_infimum_search_rejects(params_520, eps):
    with raises(ParamsError):
        hardy_infimum_search(params_520, eps)


# dissipativity --------------------------------------------------------------

def test_dissipativity_at_critical_constant(gaussian):
    params = Params(N=5, p=2.0, alpha=1.0, c=2.25)
    evaluation = dissipativity_form(gaussian, params)
    assert evaluation.form == FORM_DISSIPATIVITY
    assert evaluation.holds
    assert evaluation.lhs <= 1e-8
    assert evaluation.gap == approx(-evaluation.lhs)


def test_dissipativity_without_potential(gaussian, params_520):
    evaluation = dissipativity_form(gaussian, params_520)
    assert evaluation.lhs < 0
    assert evaluation.details["split_lhs"] == approx(-evaluation.details["I0_sq"])


def test_dissipativity_normalization(gaussian, params_521):
    raw = dissipativity_form(gaussian, params_521)
    normalized = dissipativity_form(gaussian.scaled(5.0), params_521, normalize=True)
    assert normalized.lhs == approx(raw.lhs / raw.details["norm_pp"], rel=1e-8)
    assert normalized.details["normalized"] is True


def test_dissipativity_pairing_is_bounded_by_estimate(gaussian, params_521):
    evaluation = dissipativity_form(gaussian, params_521)
    assert evaluation.details["pairing"] <= evaluation.lhs + 1e-8


def test_split_violation_above_critical_constant():
    params = Params(N=5, p=2.0, alpha=0.0, c=2.75)
    search = dissipativity_violation_scan(params, target=VIOLATION_SPLIT)
    assert search.found
    assert search.best_value > 0
    assert -1.5 < search.best_parameter < 0
    assert search.note == ""


def test_full_violation_for_large_constant():
    params = Params(N=5, p=2.0, alpha=0.0, c=5.0)
    search = dissipativity_violation_scan(params, target=VIOLATION_FULL)
    assert search.found
    assert search.target == VIOLATION_FULL


def test_no_violation_below_critical_constant():
    params = Params(N=5, p=2.0, alpha=0.0, c=1.0)
    search = dissipativity_violation_scan(params, s_values=[-1.2, -0.8, -0.4], target=VIOLATION_SPLIT)
    assert not search.found
    assert "not a proof" in search.note


def test_violation_scan_rejects(params_520):
    with raises(ParamsError):
        dissipativity_violation_scan(params_520, target="partial")
    with raises(ParamsError):
        dissipativity_violation_scan(params_520, s_values=[-2.0])


def test_tilde_quasi_branch(gaussian):
    params = Params(N=5, p=2.0, alpha=3.0, c=2.0, eta=1.0, beta=2.0)
    evaluation = tilde_dissipativity_form(gaussian, params)
    assert evaluation.details["branch"] == "quasi"
    assert evaluation.details["M"] > 0
    assert evaluation.rhs == approx(evaluation.details["M"] * evaluation.details["norm_pp"])
    assert evaluation.holds


def test_tilde_critical_branch_with_zero_eta_reduces(gaussian):
    params = Params(N=5, p=2.0, alpha=2.0, c=1.0, eta=0.0, beta=0.0)
    tilde = tilde_dissipativity_form(gaussian, params)
    plain = dissipativity_form(gaussian, params.without_tilde())
    assert tilde.details["branch"] == "critical"
    assert tilde.rhs == 0.0
    assert tilde.lhs == approx(plain.lhs, rel=1e-10)


def test_tilde_form_errors(gaussian, params_521):
    with raises(ParamsError):
        tilde_dissipativity_form(gaussian, params_521)
    with raises(UnboundedFormError):
        tilde_dissipativity_form(gaussian, Params(N=5, p=2.0, alpha=3.0, eta=1.0, beta=0.5))


def test_dispersivity_of_sign_changing_profile():
    params = Params(N=5, p=2.0, alpha=1.0, c=2.0)
    evaluation = dispersivity_form(LinearGaussianProfile(r1=1.0, a=1.0), params)
    assert evaluation.form == FORM_DISPERSIVITY
    assert evaluation.holds
    assert evaluation.details["intervals"][0][1] == approx(1.0, abs=1e-10)


def test_zero_power_is_one_at_the_roots():
    u = np.array([0.0, -2.0, 4.0])
    assert _abs_pow(u, 0.0) == approx([1.0, 1.0, 1.0])
    assert _abs_pow(u, -0.5) == approx([0.0, 2.0 ** -0.5, 0.5])
    assert _abs_pow(u, 1.0) == approx([0.0, 2.0, 4.0])


def test_dispersivity_of_negative_profile_is_trivial(gaussian, params_521):
    evaluation = dispersivity_form(gaussian.scaled(-1.0), params_521)
    assert evaluation.lhs == 0.0
    assert evaluation.holds
    assert evaluation.details["trivial"]


def test_dispersivity_of_positive_profile_matches_dissipativity(gaussian, params_521):
    dispersive = dispersivity_form(gaussian, params_521)
    dissipative = dissipativity_form(gaussian, params_521)
    assert dispersive.lhs == approx(dissipative.lhs, rel=1e-6)


# Yosida ---------------------------------------------------------------------

def test_yosida_gap_holds(gaussian, params_521):
    evaluation = yosida_form_gap(gaussian, params_521, 0.1)
    assert evaluation.form == FORM_YOSIDA
    assert evaluation.holds
    assert evaluation.details["beta_zero"] == approx(1.25)
    assert evaluation.details["beta_alpha"] == approx(2.0)


@mark.parametrize("epsilon".split(), ((1.0,), (0.1,), (0.01,)))
def test_yosida_gap_without_weight(gaussian, params_520, epsilon):
    evaluation = yosida_form_gap(gaussian, params_520, epsilon)
    assert evaluation.gap >= -1e-8
    assert evaluation.ratio == approx(evaluation.lhs / evaluation.details["v_norm_pp"])


def test_yosida_rejects_nonpositive_epsilon(gaussian, params_520):
    with raises(ParamsError):
        yosida_form_gap(gaussian, params_520, 0.0)


def test_yosida_surplus_admits_violation(params_520):
    search = yosida_violation_scan(params_520, epsilon=1e-6, surplus=0.5)
    assert search.found
    assert search.parameter_name == "delta"
    assert search.best_value < 0


def test_yosida_violation_scan_rejects_surplus(params_520):
    with raises(ParamsError):
        yosida_violation_scan(params_520, surplus=0.0)


def test_shifted_form_reports_mu(gaussian):
    params = Params(N=6, p=2.0, alpha=2.0)
    evaluation = shifted_yosida_form_gap(gaussian, params, 0.1)
    assert evaluation.form == FORM_SHIFTED
    assert evaluation.details["mu"] == approx(k0_k1_mu(params)[2])
    assert evaluation.rhs == approx(evaluation.details["beta_zero"] * evaluation.details["v_norm_pp"])


def test_tilde_yosida_requires_confining_term(gaussian):
    with raises(ParamsError):
        tilde_yosida_form_gap(gaussian, Params(N=5, p=2.0, alpha=3.0), 0.1)
    evaluation = tilde_yosida_form_gap(gaussian, Params(N=3, p=2.0, alpha=4.0, eta=1.0, beta=3.0), 0.1)
    assert evaluation.details["m"] == approx(-7.8125)


# sweeps ---------------------------------------------------------------------

def test_form_registry_covers_every_form():
    assert set(FORM_EVALUATORS) == set(FORMS)


def test_evaluate_corpus_concurrently_keeps_order(params_521):
    profiles = [GaussianProfile(a=a) for a in (0.5, 1.0, 2.0, 4.0)]
    serial = evaluate_corpus(dissipativity_form, profiles, params_521)
    parallel = evaluate_corpus(dissipativity_form, profiles, params_521, workers=2)
    assert [e.profile_descriptor for e in parallel] == [u.descriptor() for u in profiles]
    assert np.allclose([e.lhs for e in parallel], [e.lhs for e in serial])


@mark.slow
@mark.parametrize("N p alpha".split(), list(product(range(3, 9), (1.5, 2.0, 3.0), (0.0, 1.0, 2.0, 3.0))))
def test_hardy_ratio_on_corpus(corpus, N, p, alpha):
    params = Params(N=N, p=p, alpha=alpha)
    gamma = gamma_alpha(params)
    for u in corpus:
        evaluation = hardy_ratio(u, params)
        assert evaluation.ratio >= gamma - 1e-8, u.descriptor()


@mark.slow
@mark.parametrize("N p alpha".split(), ((5, 2.0, 0.0), (5, 2.0, 1.0), (4, 3.0, 2.0), (6, 1.5, 2.0)))
def test_dissipativity_on_corpus_at_critical_constant(corpus, N, p, alpha):
    assert alpha <= (N - 2) * (p - 1)
    c = (p - 1.0) * gamma_alpha(Params(N=N, p=p, alpha=0.0))
    params = Params(N=N, p=p, alpha=alpha, c=c)
    for evaluation in evaluate_corpus(dissipativity_form, corpus, params, normalize=True):
        assert evaluation.lhs <= 1e-8, evaluation.profile_descriptor


@mark.slow
@mark.parametrize("N p alpha".split(), ((5, 2.0, 0.0), (5, 2.0, 1.0), (7, 3.0, 2.0)))
@mark.parametrize("epsilon".split(), ((1.0,), (0.1,), (0.01,), (1e-3,), (1e-4,)))
def test_yosida_gap_on_corpus(corpus, N, p, alpha, epsilon):
    params = Params(N=N, p=p, alpha=alpha)
    for evaluation in evaluate_corpus(yosida_form_gap, corpus, params, epsilon=epsilon):
        scale = max(1.0, abs(evaluation.lhs), abs(evaluation.rhs))
        assert evaluation.gap >= -1e-8 * scale, evaluation.profile_descriptor


@mark.slow
@mark.parametrize("N p alpha c eta".split(), ((5, 2.0, 3.0, 1.0, 1.0), (7, 3.0, 2.0, 2.0, 1.0)))
def test_tilde_critical_branch_on_random_profiles(N, p, alpha, c, eta):
    params = Params(N=N, p=p, alpha=alpha, c=c, eta=eta, beta=alpha - 2.0)
    assert eta >= eta_threshold(params)
    assert c <= (p - 1.0) * gamma_alpha(Params(N=N, p=p, alpha=0.0))
    for evaluation in evaluate_corpus(tilde_dissipativity_form, random_power_gaussians(50, seed=11), params):
        assert evaluation.details["branch"] == "critical"
        assert evaluation.lhs <= 1e-8 * max(1.0, evaluation.details["norm_pp"]), evaluation.profile_descriptor
