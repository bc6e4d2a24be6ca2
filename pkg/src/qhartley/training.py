"""Losses, Adam, and the three training loops (distribution, differential equation, bivariate)."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import model as qm
from .model import GridModel, QuantumModel
from .statevector import RNG_ALGORITHM, make_rng
from .targets import TargetSpec, de_boundary, de_coefficients

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Loss or gradient became non-finite, or the gradient self-check failed."""


@dataclass
class TrainConfig:
    epochs: int = 3000
    learning_rate: float = 0.01
    seed: int = 0
    loss_report_stride: int = 1
    init_scale: float = 0.1
    early_stop: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.loss_report_stride < 1:
            raise ValueError("loss_report_stride must be >= 1")
        if self.init_scale < 0:
            raise ValueError("init_scale must be >= 0")


@dataclass
class TrainReport:
    model: QuantumModel
    losses: list[tuple[int, float]]
    seed: int
    config: TrainConfig
    wall_clock: float = field(default=0.0, compare=False)

    @property
    def final_loss(self) -> float:
        return self.losses[-1][1]

    def loss_csv(self) -> str:
        lines = ["epoch,loss"]
        lines += [f"{e},{l:.17g}" for e, l in self.losses]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        # wall-clock time is deliberately left out so reruns serialize identically
        return {
            "final_loss": self.final_loss,
            "epochs_run": self.losses[-1][0],
            "seed": self.seed,
            "rng": RNG_ALGORITHM,
            "config": asdict(self.config),
            "model": self.model.to_dict(),
        }


# ---------------------------------------------------------------------------
# grids and losses


def make_training_grid(n: int) -> np.ndarray:
    """The 2**n integers and 2**n half-integers of ``[0, 2**n)``, sorted."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.arange(2 ** (n + 1)) / 2.0


def integer_grid(n: int) -> np.ndarray:
    return np.arange(2**n, dtype=float)


def default_grid(model: QuantumModel) -> np.ndarray:
    # Fourier models train on integers only; Hartley models on integers and half-integers
    return integer_grid(model.n) if model.kind == "fourier" else make_training_grid(model.n)


def mse_loss(model: QuantumModel, target: TargetSpec, grid=None) -> float:
    """Mean squared error against the target, one circuit evaluation per point."""
    grid = default_grid(model) if grid is None else np.asarray(grid, dtype=float)
    if model.bivariate:
        t = target.grid_values(grid, grid)
        vals = np.array([[qm.evaluate(model, x, y) for y in grid] for x in grid])
    else:
        t = target.grid_values(grid)
        vals = np.array([qm.evaluate(model, x) for x in grid])
    return float(np.mean((vals - t) ** 2))


def mse_loss_batched(model: QuantumModel, target: TargetSpec, grid=None) -> float:
    grid = default_grid(model) if grid is None else np.asarray(grid, dtype=float)
    gm = GridModel(model, grid, grid if model.bivariate else None)
    f = gm.evaluate(model.theta, model.alpha, model.beta)["f"]
    t = target.grid_values(grid, grid) if model.bivariate else target.grid_values(grid)
    return float(np.mean((f - t) ** 2))


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


BETA1, BETA2, EPS = 0.9, 0.999, 1e-8


def adam_step(params, grads, state: AdamState, lr: float):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or state.m.shape != params.shape:
        raise ValueError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, moments {state.m.shape}"
        )
    t = state.t + 1
    m = BETA1 * state.m + (1 - BETA1) * grads
    v = BETA2 * state.v + (1 - BETA2) * grads * grads
    m_hat = m / (1 - BETA1**t)
    v_hat = v / (1 - BETA2**t)
    new = params - lr * m_hat / (np.sqrt(v_hat) + EPS)
    return new, AdamState(m, v, t)


# ---------------------------------------------------------------------------
# training loops


def initialize(template: QuantumModel, config: TrainConfig, alpha: float) -> QuantumModel:
    rng = make_rng(config.seed)
    s = config.init_scale
    theta = rng.uniform(-s, s, template.n_params)
    return template.copy(theta=theta, alpha=float(alpha), beta=0.0, seed=config.seed)


def gradient_self_check(model: QuantumModel, seed: int, tol: float = 1e-6) -> float:
    """Compare shift-rule and central-difference angle gradients at one random point."""
    rng = make_rng(seed + 7919)
    x = float(rng.uniform(0, model.x_max))
    y = float(rng.uniform(0, model.x_max)) if model.bivariate else None
    shift = qm.grad_theta(model, x, y).theta
    central = qm.grad_theta_central(model, x, y)
    err = float(np.max(np.abs(shift - central))) if shift.size else 0.0
    if not err < tol:
        raise NumericalError(f"gradient self-check failed: max deviation {err:.3e} >= {tol:g}")
    return err


def _optimize(model: QuantumModel, loss_and_grad, config: TrainConfig) -> TrainReport:
    """Minimize over (theta, alpha, beta) with Adam; ``loss_and_grad(theta, alpha, beta)``."""
    start = time.perf_counter()
    gradient_self_check(model, config.seed)
    params = np.concatenate([model.theta, [model.alpha, model.beta]])
    state = AdamState.zeros(params.size)
    losses: list[tuple[int, float]] = []
    p = model.n_params
    for epoch in range(config.epochs):
        loss, grad = loss_and_grad(params[:p], params[p], params[p + 1])
        if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
            raise NumericalError(f"non-finite loss or gradient at epoch {epoch}: loss={loss}")
        if epoch % config.loss_report_stride == 0:
            losses.append((epoch, float(loss)))
        if loss < config.early_stop:
            break
        params, state = adam_step(params, grad, state, config.learning_rate)
    else:
        epoch = config.epochs
    loss, _ = loss_and_grad(params[:p], params[p], params[p + 1])
    if not math.isfinite(loss):
        raise NumericalError("non-finite final loss")
    if not losses or losses[-1][0] != epoch:
        losses.append((epoch, float(loss)))
    else:
        losses[-1] = (epoch, float(loss))
    trained = model.copy(theta=params[:p].copy(), alpha=params[p], beta=params[p + 1])
    elapsed = time.perf_counter() - start
    log.info("trained %s n=%d seed=%d: loss %.3e in %.1fs", model.kind, model.n,
             config.seed, loss, elapsed)
    return TrainReport(trained, losses, config.seed, config, elapsed)


def train_distribution(
    target: TargetSpec, template: QuantumModel, config: TrainConfig, grid=None
) -> TrainReport:
    if template.bivariate or target.bivariate:
        raise ValueError("train_distribution handles univariate targets; use train_bivariate")
    if target.is_de:
        raise ValueError("differential-equation targets go through train_de")
    grid = default_grid(template) if grid is None else np.asarray(grid, dtype=float)
    t = target.grid_values(grid)
    gm = GridModel(template, grid)
    model = initialize(template, config, float(np.max(t)))

    def loss_and_grad(theta, alpha, beta):
        r = gm.evaluate(theta, alpha, beta, jacobian=True)
        err = r["f"] - t
        return float(np.mean(err**2)), 2 * err @ r["df"] / err.size

    return _optimize(model, loss_and_grad, config)


def de_grid(kind: str, n: int) -> np.ndarray:
    grid = make_training_grid(n)
    return grid[grid > 0] if kind == "de2" else grid


def train_de(kind: str, template: QuantumModel, config: TrainConfig, target: TargetSpec | None = None) -> TrainReport:
    """Residual loss on the grid plus boundary value and boundary slope terms, equally weighted."""
    if kind not in ("de1", "de2"):
        raise ValueError(f"unknown differential equation {kind!r}")
    target = TargetSpec(kind) if target is None else target
    if target.kind != kind:
        raise ValueError("target kind does not match the requested equation")
    if template.bivariate:
        raise ValueError("differential equations need a univariate model")
    mu, sigma = target.params["mu"], target.params["sigma"]
    grid = de_grid(kind, template.n)
    c0, c1, c2 = de_coefficients(kind, grid, mu, sigma)
    xb, fb, dfb = de_boundary(kind, mu, sigma)
    gm = GridModel(template, grid, order=2)
    gb = GridModel(template, [xb], order=1)
    model = initialize(template, config, fb)

    def loss_and_grad(theta, alpha, beta):
        r = gm.evaluate(theta, alpha, beta, jacobian=True)
        res = c0 * r["f"] + c1 * r["f1"] + c2 * r["f2"]
        dres = c0[:, None] * r["df"] + c1[:, None] * r["df1"] + c2[:, None] * r["df2"]
        b = gb.evaluate(theta, alpha, beta, jacobian=True)
        ev, ed = b["f"][0] - fb, b["f1"][0] - dfb
        loss = np.mean(res**2) + ev**2 + ed**2
        grad = 2 * res @ dres / res.size + 2 * ev * b["df"][0] + 2 * ed * b["df1"][0]
        return float(loss), grad

    return _optimize(model, loss_and_grad, config)


def train_bivariate(
    target: TargetSpec, template: QuantumModel, config: TrainConfig, grid=None
) -> TrainReport:
    if not (template.bivariate and target.bivariate):
        raise ValueError("train_bivariate needs a bivariate model and a binormal target")
    grid = make_training_grid(template.n) if grid is None else np.asarray(grid, dtype=float)
    t = target.grid_values(grid, grid)
    gm = GridModel(template, grid, grid)
    model = initialize(template, config, float(np.max(t)))

    def loss_and_grad(theta, alpha, beta):
        r = gm.evaluate(theta, alpha, beta, jacobian=True)
        err = r["f"] - t
        return float(np.mean(err**2)), 2 * np.tensordot(err, r["df"], axes=2) / err.size

    return _optimize(model, loss_and_grad, config)
