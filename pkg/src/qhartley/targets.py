"""Closed-form target densities and the two differential equations with their boundary data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("ou", "gbm", "exponential", "binormal", "de1", "de2")

# parameters that must be strictly positive, and their defaults per kind
POSITIVE = {"sigma", "nu", "t", "lam", "sigma_x", "sigma_y"}
DEFAULTS = {
    "ou": {"mu": 5.0, "sigma": 3.0, "nu": 0.5, "x_i": 24.0, "t": 1.0},
    "gbm": {"mu": 0.1, "sigma": 0.3, "x_i": 12.0, "t": 1.0},
    "exponential": {"lam": 0.5},
    "binormal": {"mu_x": 8.3, "mu_y": 8.6, "sigma_x": 1.5, "sigma_y": 1.8, "rho": 0.0},
    "de1": {"mu": 7.5, "sigma": 1.406},
    "de2": {"mu": 1.5, "sigma": 0.316},
}


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")
        merged = dict(DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        merged.update({k: float(v) for k, v in self.params.items()})
        for k, v in merged.items():
            if k in POSITIVE and not v > 0:
                raise ValueError(f"{k} must be > 0, got {v}")
        if "rho" in merged and not -1 < merged["rho"] < 1:
            raise ValueError(f"rho must lie in (-1, 1), got {merged['rho']}")
        object.__setattr__(self, "params", merged)

    @property
    def bivariate(self) -> bool:
        return self.kind == "binormal"

    @property
    def is_de(self) -> bool:
        return self.kind in ("de1", "de2")

    def pdf(self, x, y=None) -> np.ndarray:
        p = self.params
        if self.kind == "ou":
            return pdf_ou(x, p["t"], p["mu"], p["sigma"], p["nu"], p["x_i"])
        if self.kind == "gbm":
            return pdf_gbm(x, p["t"], p["mu"], p["sigma"], p["x_i"])
        if self.kind == "exponential":
            return pdf_exponential(x, p["lam"])
        if self.kind == "binormal":
            if y is None:
                raise ValueError("binormal target needs both x and y")
            return pdf_binormal(x, y, p["mu_x"], p["mu_y"], p["sigma_x"], p["sigma_y"], p["rho"])
        return de_solution(self.kind, x, p["mu"], p["sigma"])[0]

    def grid_values(self, xs, ys=None) -> np.ndarray:
        """Target on a training grid; GBM is set to 0 where x <= 0."""
        xs = np.asarray(xs, dtype=float)
        if self.kind == "gbm":
            out = np.zeros_like(xs)
            pos = xs > 0
            out[pos] = self.pdf(xs[pos])
            return out
        if self.kind == "binormal":
            gx, gy = np.meshgrid(xs, np.asarray(ys, dtype=float), indexing="ij")
            return self.pdf(gx, gy)
        return np.asarray(self.pdf(xs), dtype=float)


def _check_t(t):
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")


def pdf_ou(x, t, mu, sigma, nu, x_i):
    """Ornstein-Uhlenbeck transition density started from a point mass at ``x_i``."""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    decay = 1.0 - math.exp(-2.0 * nu * t)
    mean = mu + (x_i - mu) * math.exp(-nu * t)
    return np.sqrt(nu / (math.pi * decay * sigma**2)) * np.exp(
        -nu * (x - mean) ** 2 / (decay * sigma**2)
    )


def pdf_gbm(x, t, mu, sigma, x_i):
    """Log-normal density of geometric Brownian motion at time ``t``; needs ``x > 0``."""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("GBM density is defined for x > 0 only")
    z = np.log(x / x_i) - (mu - sigma**2 / 2) * t
    return np.exp(-(z**2) / (2 * sigma**2 * t)) / (np.sqrt(2 * math.pi * sigma**2 * t) * x)


def pdf_exponential(x, lam):
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("exponential density is defined for x >= 0 only")
    return lam * np.exp(-lam * x)


def pdf_binormal(x, y, mu_x, mu_y, sigma_x, sigma_y, rho):
    if not (sigma_x > 0 and sigma_y > 0):
        raise ValueError("standard deviations must be > 0")
    if not -1 < rho < 1:
        raise ValueError("rho must lie in (-1, 1)")
    zx = (np.asarray(x, dtype=float) - mu_x) / sigma_x
    zy = (np.asarray(y, dtype=float) - mu_y) / sigma_y
    q = (zx**2 + zy**2 - 2 * rho * zx * zy) / (2 * (1 - rho**2))
    return np.exp(-q) / (2 * math.pi * math.sqrt(1 - rho**2) * sigma_x * sigma_y)


# ---------------------------------------------------------------------------
# differential equations


def de_coefficients(kind: str, x, mu: float, sigma: float):
    """Coefficients ``(c0, c1, c2)`` with residual ``c0 f + c1 f' + c2 f''``."""
    x = np.asarray(x, dtype=float)
    s2 = sigma**2
    if kind == "de1":
        return np.full_like(x, 1.0 / s2), (x - mu) / s2, np.ones_like(x)
    if kind == "de2":
        if np.any(x <= 0):
            raise ValueError("de2 is defined for x > 0 only")
        return 1.0 / (s2 * x**2), (2 * s2 - mu + np.log(x)) / (s2 * x), np.ones_like(x)
    raise ValueError(f"unknown differential equation {kind!r}")


def de_residual(kind: str, f, df, d2f, x, mu: float, sigma: float):
    c0, c1, c2 = de_coefficients(kind, x, mu, sigma)
    return c0 * np.asarray(f) + c1 * np.asarray(df) + c2 * np.asarray(d2f)


def de_boundary(kind: str, mu: float, sigma: float) -> tuple[float, float, float]:
    """Boundary point, value there, and derivative there."""
    norm = 1.0 / math.sqrt(2 * math.pi * sigma**2)
    if kind == "de1":
        return mu, norm, 0.0
    if kind == "de2":
        return math.exp(mu - sigma**2), math.exp(sigma**2 / 2 - mu) * norm, 0.0
    raise ValueError(f"unknown differential equation {kind!r}")


def de_solution(kind: str, x, mu: float, sigma: float):
    """Analytic solution and its first two derivatives."""
    x = np.asarray(x, dtype=float)
    norm = 1.0 / math.sqrt(2 * math.pi * sigma**2)
    s2 = sigma**2
    if kind == "de1":
        u = (x - mu) / s2
        f = norm * np.exp(-0.5 * (x - mu) ** 2 / s2)
        return f, -u * f, (u**2 - 1 / s2) * f
    if kind == "de2":
        if np.any(x <= 0):
            raise ValueError("de2 solution is defined for x > 0 only")
        # f = norm * exp(-L^2 / (2 s2)) / x with L = ln x - mu; g = ln f
        L = np.log(x) - mu
        f = norm * np.exp(-0.5 * L**2 / s2) / x
        g1 = -(L / s2 + 1) / x
        g2 = (L / s2 + 1) / x**2 - 1 / (s2 * x**2)
        return f, g1 * f, (g2 + g1**2) * f
    raise ValueError(f"unknown differential equation {kind!r}")
