"""Sampling checks on a trained model beyond the numbered acceptance gates."""

import numpy as np

from qhartley import sampling as smp
from qhartley.model import GridModel, QuantumModel
from qhartley.targets import TargetSpec


def test_fine_sampling_tracks_target_on_half_integers(trained_gbm):
    m = trained_gbm.model
    fine = np.arange(2 ** (m.n + 1)) / 2
    h = smp.histogram(smp.sample(m, 10**6, seed=31, S=1), bins=fine)
    t = TargetSpec("gbm").grid_values(fine)
    assert smp.tvd(h.probs, t / t.sum()) < 0.05


def test_qft_chain_quadruples_resolution(trained_gbm):
    m = trained_gbm.model
    batch = smp.sample(m, 10**7, seed=32, S=2, variant="qft-chain")
    h = smp.histogram(batch)
    assert np.allclose(np.diff(h.coords), 0.25)
    inside = h.coords <= m.x_max
    xs = h.coords[inside]
    q = GridModel(m, xs).evaluate(m.theta, m.alpha, m.beta)["q"]
    emp = h.probs[inside]
    # the chain interpolates rather than reproducing the model exactly; on a smooth fit it stays close
    assert emp.sum() > 0.99
    assert smp.tvd(emp / emp.sum(), q / q.sum()) < 0.02


def test_uncorrelated_registers_sample_a_product_distribution():
    rng = np.random.default_rng(5)
    m = QuantumModel("bivariate-hartley", 3, 1, correlation=False)
    m.theta = rng.uniform(-3, 3, m.n_params)
    h = smp.postprocess_bivariate(smp.sample(m, 10**6, seed=33))
    prod = np.outer(h.marginal_x().probs, h.marginal_y().probs)
    assert smp.tvd(h.probs.ravel(), prod.ravel()) < 0.03
    assert abs(h.probs.sum() - 1) < 1e-12
