import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhartley.circuits import run
from qhartley.model import (
    DomainError,
    GridModel,
    QuantumModel,
    evaluate,
    expectation,
    grad_theta,
    grad_theta_central,
    grad_x,
    second_derivative_x,
)
from qhartley.verification import cas


def random_model(seed, kind="hartley", n=3, depth=2, **kw):
    rng = np.random.default_rng(seed)
    m = QuantumModel(kind, n, depth, **kw)
    m.theta = rng.uniform(-math.pi, math.pi, m.n_params)
    m.alpha = float(rng.uniform(0.5, 3))
    m.beta = float(rng.uniform(-0.1, 0.1))
    return m


def test_untrained_hartley_model_matches_closed_form():
    n = 3
    m = QuantumModel("hartley", n, 1)
    xs = np.linspace(0, m.x_max, 17)
    want = cas(-math.pi * xs) ** 2 / (2 * 2**n)
    assert np.allclose(evaluate(m, xs), want, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 4))
def test_latent_probabilities_sum_to_half_on_either_grid(seed, n):
    # the post-selected states form an orthonormal basis on both grids, and each branch carries weight 1/2
    m = random_model(seed, n=n, depth=1)
    for grid in (np.arange(2**n), np.arange(2**n) + 0.5):
        assert expectation(m, grid).sum() == pytest.approx(0.5, abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_fourier_probabilities_sum_to_one_and_are_periodic(seed):
    m = random_model(seed, "fourier", n=3, depth=1, ansatz="hea", scheme="RXRZ")
    assert expectation(m, np.arange(8)).sum() == pytest.approx(1, abs=1e-10)
    assert expectation(m, 1.3) == pytest.approx(expectation(m, 9.3), abs=1e-10)


def test_parameter_counts():
    assert QuantumModel("hartley", 4, 1).n_params == 8
    assert QuantumModel("fourier", 4, 1, ansatz="hea", scheme="RYRX").n_params == 16
    assert QuantumModel("fourier", 4, 1, ansatz="hea", scheme="RY").n_params == 8
    assert QuantumModel("bivariate-hartley", 4, 2).n_params == 12 + 12 + 24
    assert QuantumModel("bivariate-hartley", 4, 2, correlation=False).n_params == 24
    with pytest.raises(ValueError):
        QuantumModel("hartley", 3, 1, theta=np.zeros(5))
    with pytest.raises(ValueError):
        QuantumModel("fourier", 3, 1, ansatz="hea")


def test_domain_guard():
    m = QuantumModel("hartley", 3, 1)
    assert m.x_max == 7.5
    evaluate(m, 7.5)
    for bad in (-0.1, 7.6, float("nan")):
        with pytest.raises(DomainError):
            evaluate(m, bad)
    with pytest.raises(DomainError):
        grad_x(m, 8.0)


def test_shift_rule_grad_x_uses_4n_plus_2_evaluations():
    for n in (2, 4):
        m = random_model(3, n=n)
        stats = {}
        grad_x(m, 1.7, stats=stats)
        assert stats["evaluations"] == 4 * n + 2


@pytest.mark.parametrize("seed", range(6))
def test_grad_x_matches_central_difference(seed):
    m = random_model(seed, n=4, depth=2)
    x = float(np.random.default_rng(seed).uniform(0.2, 15))
    a = grad_x(m, x)
    b = grad_x(m, x, method="central")
    assert abs(a - b) <= 1e-6 * max(1.0, abs(a))


@pytest.mark.parametrize("seed", range(4))
def test_second_derivative_matches_central_difference(seed):
    m = random_model(seed, n=3, depth=2)
    x = float(np.random.default_rng(seed + 50).uniform(0.2, 7))
    a = second_derivative_x(m, x)
    b = second_derivative_x(m, x, method="central")
    assert abs(a - b) <= 1e-4 * max(1.0, abs(a))


@pytest.mark.parametrize("kind,kw", [
    ("hartley", {}),
    ("fourier", {"ansatz": "hea", "scheme": "RZRY"}),
    ("bivariate-hartley", {}),
])
def test_grad_theta_matches_central_difference(kind, kw):
    n = 2 if kind == "bivariate-hartley" else 3
    m = random_model(7, kind, n=n, depth=1, **kw)
    y = 1.2 if m.bivariate else None
    g = grad_theta(m, 2.3, y)
    c = grad_theta_central(m, 2.3, y)
    assert np.allclose(g.theta, c, atol=1e-6 * max(1, np.abs(g.theta).max()))
    assert g.alpha == pytest.approx(expectation(m, 2.3, y))
    assert g.beta == 1.0


def test_bivariate_partial_derivatives():
    m = random_model(11, "bivariate-hartley", n=2, depth=1)
    for wrt in (0, 1):
        a = grad_x(m, 1.4, 2.1, wrt=wrt)
        b = grad_x(m, 1.4, 2.1, method="central", wrt=wrt)
        assert abs(a - b) < 1e-6 * max(1, abs(a))


@pytest.mark.parametrize("kind,kw", [
    ("hartley", {}),
    ("fourier", {"ansatz": "hea", "scheme": "RXRZ"}),
])
def test_grid_model_matches_circuit_evaluation(kind, kw):
    m = random_model(5, kind, n=3, depth=2, **kw)
    xs = np.array([0.0, 0.5, 2.25, 6.0, 7.5])
    g = GridModel(m, xs, order=2).evaluate(m.theta, m.alpha, m.beta, jacobian=True)
    assert np.allclose(g["f"], evaluate(m, xs), atol=1e-12)
    assert np.allclose(g["f1"], [grad_x(m, x) for x in xs], atol=1e-10)
    assert np.allclose(g["f2"], [second_derivative_x(m, x) for x in xs], atol=1e-9)
    for i, x in enumerate(xs):
        gt = grad_theta(m, x)
        assert np.allclose(g["df"][i, :-2], gt.theta, atol=1e-12)
        assert g["df"][i, -2] == pytest.approx(gt.alpha)


def test_grid_model_derivative_jacobians_match_finite_differences():
    m = random_model(8, n=3, depth=1)
    gm = GridModel(m, np.array([0.5, 3.0]), order=2)
    base = gm.evaluate(m.theta, m.alpha, m.beta, jacobian=True)
    h = 1e-6
    for p in range(m.n_params):
        tp, tm = m.theta.copy(), m.theta.copy()
        tp[p] += h
        tm[p] -= h
        up, um = gm.evaluate(tp, m.alpha, m.beta), gm.evaluate(tm, m.alpha, m.beta)
        for key in ("f1", "f2"):
            fd = (up[key] - um[key]) / (2 * h)
            assert np.allclose(base["d" + key][:, p], fd, atol=1e-5)


def test_bivariate_grid_model():
    m = random_model(9, "bivariate-hartley", n=2, depth=1)
    xs, ys = np.array([0.0, 1.5, 3.0]), np.array([0.5, 2.0])
    g = GridModel(m, xs, ys).evaluate(m.theta, m.alpha, m.beta)
    assert g["f"].shape == (3, 2)
    assert g["f"][1, 1] == pytest.approx(evaluate(m, 1.5, 2.0), abs=1e-12)


def test_json_round_trip():
    m = random_model(4, "bivariate-hartley", n=2, depth=1, correlation=False)
    m.seed = 3
    back = QuantumModel.from_json(m.to_json())
    assert back.to_json() == m.to_json()
    assert np.array_equal(back.theta, m.theta)
    d = json.loads(m.to_json())
    d["format"] = "other/9"
    with pytest.raises(ValueError):
        QuantumModel.from_dict(d)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), x=st.floats(0, 7.5))
def test_hartley_model_has_period_twice_the_register(seed, x):
    m = random_model(seed, n=3, depth=1)
    assert expectation(m, x) == pytest.approx(expectation(m, x + 16), abs=1e-10)


def test_zero_amplitude_model_is_constant():
    m = random_model(1)
    m.alpha = 0.0
    assert np.allclose(evaluate(m, np.linspace(0, 7, 9)), m.beta)
    assert grad_x(m, 2.0) == 0


def test_grad_x_integrates_back():
    m = random_model(12, n=3, depth=2)
    xs = np.linspace(1.0, 3.0, 401)
    g = np.array([grad_x(m, x) for x in xs])
    integral = np.sum((g[1:] + g[:-1]) / 2 * np.diff(xs))
    assert integral == pytest.approx(evaluate(m, 3.0) - evaluate(m, 1.0), abs=1e-4)


def test_real_amplitudes_on_half_integer_grid():
    m = random_model(2, n=3, depth=2)
    for x in np.arange(16) / 2:
        amps = run(m.full_circuit(), x=x, params=m.theta)
        assert np.abs(amps[:8].imag).max() < 1e-10
