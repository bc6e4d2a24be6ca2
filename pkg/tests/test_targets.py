import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, stats

from qhartley.targets import (
    TargetSpec,
    de_boundary,
    de_residual,
    de_solution,
    pdf_binormal,
    pdf_exponential,
    pdf_gbm,
    pdf_ou,
)


def test_ou_matches_scipy_normal_and_integrates_to_one():
    mu, sigma, nu, xi, t = 5.0, 3.0, 0.5, 24.0, 1.0
    mean = mu + (xi - mu) * math.exp(-nu * t)
    var = sigma**2 / (2 * nu) * (1 - math.exp(-2 * nu * t))
    xs = np.linspace(0, 32, 50)
    assert np.allclose(pdf_ou(xs, t, mu, sigma, nu, xi), stats.norm(mean, math.sqrt(var)).pdf(xs))
    total, _ = integrate.quad(lambda x: pdf_ou(x, t, mu, sigma, nu, xi), -np.inf, np.inf)
    assert total == pytest.approx(1, abs=1e-10)


def test_ou_peak_location_and_height():
    f = lambda x: -pdf_ou(x, 1.0, 5.0, 3.0, 0.5, 24.0)
    res = optimize.minimize_scalar(f, bounds=(0, 32), method="bounded", options={"xatol": 1e-10})
    want_x = 5 + 19 * math.exp(-0.5)
    assert res.x == pytest.approx(want_x, abs=1e-6)
    assert res.x == pytest.approx(16.524, abs=1e-3)
    assert -res.fun == pytest.approx(0.16726, abs=1e-5)


def test_gbm_matches_scipy_lognormal():
    mu, sigma, xi, t = 0.1, 0.3, 12.0, 1.0
    dist = stats.lognorm(s=sigma * math.sqrt(t), scale=xi * math.exp((mu - sigma**2 / 2) * t))
    xs = np.linspace(0.5, 40, 60)
    assert np.allclose(pdf_gbm(xs, t, mu, sigma, xi), dist.pdf(xs))
    mode = optimize.minimize_scalar(lambda x: -pdf_gbm(x, t, mu, sigma, xi), bounds=(1, 30), method="bounded").x
    assert mode == pytest.approx(xi * math.exp(mu - 1.5 * sigma**2), abs=1e-4)
    assert mode == pytest.approx(11.587, abs=1e-3)
    with pytest.raises(ValueError):
        pdf_gbm(0.0, t, mu, sigma, xi)


def test_gbm_grid_values_zero_at_origin():
    v = TargetSpec("gbm").grid_values([0.0, 1.0, 12.0])
    assert v[0] == 0 and v[1] > 0 and v[2] > v[1]


def test_exponential():
    assert pdf_exponential(0.0, 0.5) == pytest.approx(0.5)
    total, _ = integrate.quad(lambda x: pdf_exponential(x, 0.5), 0, np.inf)
    assert total == pytest.approx(1)
    with pytest.raises(ValueError):
        pdf_exponential(-1.0, 0.5)


def test_binormal_value_at_mean_and_normalization():
    p = dict(mu_x=8.3, mu_y=8.6, sigma_x=1.5, sigma_y=1.8)
    assert pdf_binormal(8.3, 8.6, rho=0.0, **p) == pytest.approx(0.058946, abs=1e-6)
    for rho in (-0.8, 0.4):
        cov = [[1.5**2, rho * 1.5 * 1.8], [rho * 1.5 * 1.8, 1.8**2]]
        pts = np.array([[7.0, 9.0], [8.3, 8.6], [10.0, 6.5]])
        want = stats.multivariate_normal([8.3, 8.6], cov).pdf(pts)
        assert np.allclose(pdf_binormal(pts[:, 0], pts[:, 1], rho=rho, **p), want)
    with pytest.raises(ValueError):
        pdf_binormal(0, 0, 0, 0, 1, 1, 1.0)


def test_binormal_grid_is_ij_indexed():
    t = TargetSpec("binormal", {"rho": 0.5})
    xs, ys = np.array([7.0, 8.0, 9.0]), np.array([8.0, 10.0])
    g = t.grid_values(xs, ys)
    assert g.shape == (3, 2)
    assert g[2, 1] == pytest.approx(t.pdf(9.0, 10.0))


@pytest.mark.parametrize("kind", ["de1", "de2"])
def test_analytic_solutions_satisfy_equations(kind):
    mu, sigma = TargetSpec(kind).params["mu"], TargetSpec(kind).params["sigma"]
    xs = np.linspace(0.5, 15, 20)
    f, f1, f2 = de_solution(kind, xs, mu, sigma)
    scale = np.abs(f).max()
    assert np.abs(de_residual(kind, f, f1, f2, xs, mu, sigma)).max() < 1e-12 * max(1, scale)


@pytest.mark.parametrize("kind", ["de1", "de2"])
def test_analytic_derivatives_match_finite_differences(kind):
    mu, sigma = TargetSpec(kind).params["mu"], TargetSpec(kind).params["sigma"]
    xs = np.linspace(1, 14, 15)
    h = 1e-5
    f, f1, f2 = de_solution(kind, xs, mu, sigma)
    fp, _, _ = de_solution(kind, xs + h, mu, sigma)
    fm, _, _ = de_solution(kind, xs - h, mu, sigma)
    assert np.allclose(f1, (fp - fm) / (2 * h), atol=1e-8)
    assert np.allclose(f2, (fp - 2 * f + fm) / h**2, atol=1e-4)


@pytest.mark.parametrize("kind", ["de1", "de2"])
def test_boundary_conditions_match_solution(kind):
    mu, sigma = TargetSpec(kind).params["mu"], TargetSpec(kind).params["sigma"]
    xb, fb, dfb = de_boundary(kind, mu, sigma)
    f, f1, _ = de_solution(kind, xb, mu, sigma)
    assert f == pytest.approx(fb, abs=1e-12)
    assert f1 == pytest.approx(dfb, abs=1e-12)
    if kind == "de1":
        assert fb == pytest.approx(1 / math.sqrt(2 * math.pi * sigma**2), abs=1e-15)
        assert fb == pytest.approx(0.2837, abs=1e-4)


def test_spec_validation():
    with pytest.raises(ValueError):
        TargetSpec("ou", {"sigma": 0})
    with pytest.raises(ValueError):
        TargetSpec("ou", {"bogus": 1})
    with pytest.raises(ValueError):
        TargetSpec("binormal", {"rho": 1.0})
    with pytest.raises(ValueError):
        TargetSpec("cauchy")
    with pytest.raises(ValueError):
        TargetSpec("ou", {"t": 0})


@settings(max_examples=50, deadline=None)
@given(x=st.floats(0.01, 40), y=st.floats(0.01, 40))
def test_densities_are_nonnegative(x, y):
    for kind in ("ou", "gbm", "exponential"):
        assert TargetSpec(kind).pdf(x) >= 0
    assert TargetSpec("binormal", {"rho": -0.4}).pdf(x, y) >= 0
