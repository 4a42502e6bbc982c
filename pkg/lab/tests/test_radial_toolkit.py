import math

import numpy as np
from pytest import approx, mark, raises

from errors import ParamsError, QuadratureError
from lab_constants import *
import radial_toolkit
from radial_toolkit import (CutoffPowerProfile, GaussianProfile, LinearGaussianProfile,
                            PowerExponentialProfile, PowerGaussianProfile, SampledProfile,
                            ZeroProfile, _quad_panel, derivative, integrate_radial, lp_norm_weighted, make_grid,
                            positive_intervals, sample_profile, second_difference, surface_measure,
                            weighted_radial_integral)


# grids ----------------------------------------------------------------------

def test_make_grid_layouts():
    log_grid = make_grid(1e-3, 10.0, 64)
    assert log_grid.M == 64
    assert log_grid.nodes[0] == approx(1e-3)
    assert log_grid.nodes[-1] == approx(10.0)
    ratios = log_grid.nodes[1:] / log_grid.nodes[:-1]
    assert np.allclose(ratios, ratios[0])

    uniform = make_grid(0.5, 2.0, 16, LAYOUT_UNIFORM)
    assert np.allclose(np.diff(uniform.nodes), 1.5 / 15)
    assert uniform.trapezoid_weights().sum() == approx(1.5)


@mark.parametrize("r_min r_max M layout".split(),
                  ((0.0, 1.0, 32, LAYOUT_LOG),
                   (2.0, 1.0, 32, LAYOUT_LOG),
                   (0.1, 1.0, 15, LAYOUT_UNIFORM),
                   (0.1, 1.0, 32, "chebyshev")))
def test_make_grid_rejects(r_min, r_max, M, layout):
    with raises(ParamsError):
        make_grid(r_min, r_max, M, layout)


# quadrature -----------------------------------------------------------------

def test_surface_measure():
    assert surface_measure(3) == approx(4.0 * math.pi)
    assert surface_measure(5) == approx(8.0 * math.pi ** 2 / 3.0)


def test_gaussian_moment_on_fixed_interval():
    result = integrate_radial(lambda r: np.exp(-2.0 * r * r) * r * r, 1e-6, 12.0)
    assert result.value == approx(math.sqrt(math.pi / 2.0) / 8.0, rel=1e-8)
    assert result.abs_error_estimate < 1e-8
    assert result.node_count > 0


def test_automatic_upper_limit():
    result = integrate_radial(lambda r: r ** 3 * np.exp(-r), 1e-6)
    assert result.value == approx(6.0, rel=1e-8)


def test_zero_integrand():
    result = integrate_radial(lambda r: np.zeros_like(r), 1e-6)
    assert result.value == 0.0
    assert result.abs_error_estimate == 0.0


def test_linear_scale_with_breakpoints():
    u = LinearGaussianProfile(r1=1.0, a=1.0)
    result = integrate_radial(lambda r: np.abs(u(r)), 1e-6, 8.0, breakpoints=u.breakpoints(), log_scale=False)
    dense = np.linspace(0.0, 8.0, 400001)
    assert result.value == approx(np.trapz(np.abs(u(dense)), dense), rel=1e-7)


def test_grid_quadrature():
    grid = make_grid(1.0, 2.0, 201, LAYOUT_UNIFORM)
    result = integrate_radial(lambda r: r * r, grid=grid)
    assert result.value == approx(7.0 / 3.0, rel=1e-5)
    assert result.node_count == 201


def test_non_integrable_origin():
    with raises(QuadratureError, match="origin"):
        integrate_radial(lambda r: r ** -1.5, 1e-6, 1.0)


def test_non_convergence_carries_partial_value():
    with raises(QuadratureError) as excinfo:
        integrate_radial(lambda r: np.exp(-2.0 * r * r) * r * r, 1e-6, 12.0, tol=1e-300, max_levels=4)
    error = excinfo.value
    assert math.isfinite(error.partial_value)
    assert error.partial_value == approx(math.sqrt(math.pi / 2.0) / 8.0, rel=1e-2)
    assert error.node_count > 0


def test_quad_panel_reports_missed_tolerance():
    value, err, calls = _quad_panel(np.exp, 0.0, 1.0, 1e-10)
    assert value == approx(math.e - 1.0, rel=1e-12)
    assert err <= 1e-10 * value
    assert calls > 0
    assert _quad_panel(np.exp, 0.0, 1.0, 1e-300) is None


def test_romberg_takes_over_when_quad_gives_up(monkeypatch):
    monkeypatch.setattr(radial_toolkit, "_quad_panel", lambda *args: None)
    result = integrate_radial(lambda r: np.exp(-2.0 * r * r) * r * r, 1e-6, 12.0)
    assert result.value == approx(math.sqrt(math.pi / 2.0) / 8.0, rel=1e-8)


def test_gaussian_lp_norm(gaussian):
    expected = math.sqrt(8.0 * math.pi ** 2 / 3.0 * (3.0 / 32.0) * math.sqrt(math.pi / 2.0))
    assert lp_norm_weighted(gaussian, 2.0, 5) == approx(expected, rel=1e-7)


def test_lp_norm_is_homogeneous(gaussian):
    base = lp_norm_weighted(gaussian, 3.0, 4, w=1.0)
    assert lp_norm_weighted(gaussian.scaled(3.0), 3.0, 4, w=1.0) == approx(3.0 * base, rel=1e-9)
    assert lp_norm_weighted(gaussian.scaled(-2.0), 3.0, 4, w=1.0) == approx(2.0 * base, rel=1e-9)


def test_lp_norm_is_a_norm_on_sampled_profiles(sampled_profiles):
    grid = sampled_profiles[0].grid
    for u, v in zip(sampled_profiles[::2], sampled_profiles[1::2]):
        for p in (1.5, 2.0, 3.0):
            nu = lp_norm_weighted(u, p, 5, grid=grid)
            nv = lp_norm_weighted(v, p, 5, grid=grid)
            total = lp_norm_weighted(SampledProfile(grid=grid, values=u.values + v.values), p, 5, grid=grid)
            assert total <= nu + nv + 1e-12 * (nu + nv)
            assert lp_norm_weighted(u.scaled(-2.5), p, 5, grid=grid) == approx(2.5 * nu, rel=1e-12)


def test_weighted_integral_of_gaussian_in_three_dimensions():
    result = weighted_radial_integral(lambda r: np.exp(-r * r), 3)
    assert result.value == approx(math.pi ** 1.5, rel=1e-8)


# profiles -------------------------------------------------------------------

def _central(u, r, order, h):
    if order == 1:
        return (u.evaluate(r + h) - u.evaluate(r - h)) / (2.0 * h)
    return (u.evaluate(r + h) - 2.0 * u.evaluate(r) + u.evaluate(r - h)) / (h * h)


@mark.parametrize("profile r".split(),
                  ((GaussianProfile(a=1.5), np.linspace(0.2, 2.5, 9)),
                   (PowerExponentialProfile(s=1.5, q=2.0), np.linspace(0.5, 3.0, 9)),
                   (PowerGaussianProfile(s=2.0, a=0.5), np.linspace(0.3, 3.0, 9)),
                   (CutoffPowerProfile(s=2.0, w=2.0), np.linspace(0.2, 1.4, 9)),
                   (LinearGaussianProfile(r1=1.0, a=1.0), np.linspace(0.2, 2.0, 9))))
def test_analytic_derivatives(profile, r):
    assert profile.evaluate(r, 1) == approx(_central(profile, r, 1, 1e-5), rel=1e-6, abs=1e-8)
    assert profile.evaluate(r, 2) == approx(_central(profile, r, 2, 1e-4), rel=1e-4, abs=1e-5)


def test_gaussian_laplacian(gaussian):
    r = np.linspace(0.1, 3.0, 7)
    assert gaussian.laplacian(r, 5) == approx((4.0 * r * r - 10.0) * np.exp(-r * r))


def test_cutoff_support():
    u = CutoffPowerProfile(s=1.0, w=2.0)
    r = np.array([0.5, 1.9999, 2.0, 3.0])
    values = u(r)
    assert values[0] == approx(0.5 * math.exp(1.0 - 1.0 / (1.0 - 0.0625)))
    assert np.all(values[1:] == 0.0)
    log_cut = CutoffPowerProfile(s=-1.0, w=1.0, r0=2.0, scale=CUTOFF_LOG)
    assert log_cut.support_end() == approx(2.0 * math.e)
    assert log_cut.breakpoints() == approx([2.0, 2.0 * math.e])


def test_profile_validation():
    with raises(ParamsError):
        GaussianProfile(a=0.0)
    with raises(ParamsError):
        CutoffPowerProfile(w=1.0, scale=CUTOFF_LOG)
    with raises(ParamsError):
        GaussianProfile().evaluate(np.array([1.0]), 3)


def test_sampled_second_derivative_of_sine():
    grid = make_grid(0.1, 6.0, 400, LAYOUT_UNIFORM)
    u = SampledProfile(grid=grid, values=np.sin(grid.nodes))
    second = derivative(u, 2)
    assert isinstance(second, SampledProfile)
    assert np.max(np.abs(second.values + np.sin(grid.nodes))) <= 5e-4
    first = u.nodal(1)
    assert np.max(np.abs(first - np.cos(grid.nodes))) <= 5e-4


def test_sampled_derivatives_converge_at_second_order():
    errors = {1: [], 2: []}
    steps = []
    for M in (100, 200, 400):
        grid = make_grid(0.1, 6.0, M, LAYOUT_UNIFORM)
        u = SampledProfile(grid=grid, values=np.sin(grid.nodes))
        steps.append(grid.nodes[1] - grid.nodes[0])
        errors[1].append(np.max(np.abs(u.nodal(1) - np.cos(grid.nodes))))
        errors[2].append(np.max(np.abs(u.nodal(2) + np.sin(grid.nodes))))
    for order in (1, 2):
        e = errors[order]
        rates = [math.log(e[i] / e[i + 1]) / math.log(steps[i] / steps[i + 1]) for i in range(2)]
        assert min(rates) >= 1.9


def test_second_difference_exact_for_quadratics():
    nodes = np.geomspace(0.1, 5.0, 40)
    assert second_difference(3.0 * nodes ** 2 - nodes, nodes) == approx(np.full(40, 6.0), rel=1e-6)


def test_sample_profile_matches_analytic(gaussian):
    grid = make_grid(1e-3, 5.0, 200)
    sampled = sample_profile(gaussian, grid)
    assert sampled.values == approx(gaussian(grid.nodes))
    assert np.isnan(sampled.evaluate(np.array([10.0]))[0])
    with raises(ParamsError):
        SampledProfile(grid=grid, values=np.zeros(10))


def test_derivative_profile_descriptor(gaussian):
    d1 = derivative(gaussian, 1)
    assert d1.descriptor() == "d1[gaussian:a=1]"
    with raises(ParamsError):
        derivative(gaussian, 2).evaluate(np.array([1.0]), 1)


def test_positive_intervals():
    intervals = positive_intervals(LinearGaussianProfile(r1=1.0, a=1.0))
    assert len(intervals) == 1
    start, end = intervals[0]
    assert start == approx(1e-6)
    assert end == approx(1.0, abs=1e-10)
    assert positive_intervals(ZeroProfile()) == []
