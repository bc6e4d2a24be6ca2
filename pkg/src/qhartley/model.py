"""Quantum models ``p(x) = alpha * <O> + beta`` and their derivatives.

``<O>`` is the probability of the all-zeros outcome of the full register
(ancillas included) after feature map(s), the optional correlation block and
the variational ansatz. No post-selection happens: the ancilla-0 branch
weight is absorbed into ``alpha``.

Two evaluation routes exist. :func:`evaluate`, :func:`grad_x`,
:func:`second_derivative_x` and :func:`grad_theta` simulate the whole circuit
(shift rules included) one point at a time. :class:`GridModel` gives the same
numbers for a whole grid at once by splitting the circuit into the feature
state and the first row of the ansatz; training uses it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import circuits as cl
from .circuits import Circuit, run

KINDS = ("hartley", "fourier", "bivariate-hartley")
MODEL_FORMAT = "qhartley-model/1"
SHIFT = math.pi / 2
FD_STEP_GRAD = 1e-4
FD_STEP_SECOND = 1e-3


class DomainError(ValueError):
    pass


@dataclass
class QuantumModel:
    kind: str
    n: int
    depth: int
    ansatz: str = "hera"
    scheme: str | None = None
    correlation: bool = True
    theta: np.ndarray = field(default=None)
    alpha: float = 1.0
    beta: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.ansatz not in ("hera", "hea"):
            raise ValueError(f"unknown ansatz {self.ansatz!r}")
        if self.ansatz == "hea" and self.scheme is None:
            raise ValueError("HEA ansatz needs a rotation scheme")
        if self.theta is None:
            self.theta = np.zeros(self.n_params)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (self.n_params,):
            raise ValueError(f"theta must have {self.n_params} entries, got {self.theta.shape}")
        self.alpha = float(self.alpha)
        self.beta = float(self.beta)

    # -- structure ---------------------------------------------------------

    @property
    def bivariate(self) -> bool:
        return self.kind == "bivariate-hartley"

    @property
    def ansatz_params(self) -> int:
        if self.ansatz == "hera":
            return self.n * (self.depth + 1)
        return cl.hea_param_count(self.n, self.depth, self.scheme)

    @property
    def n_params(self) -> int:
        if not self.bivariate:
            return self.ansatz_params
        extra = cl.correlation_param_count(self.n) if self.correlation else 0
        return 2 * self.ansatz_params + extra

    @property
    def latent_qubits(self) -> int:
        return 2 * self.n if self.bivariate else self.n

    @property
    def n_qubits(self) -> int:
        if self.kind == "fourier":
            return self.n
        return 2 * (self.n + 1) if self.bivariate else self.n + 1

    @property
    def x_max(self) -> float:
        # largest admissible input; the half-integer grid reaches 2**n - 1/2
        return 2**self.n - 0.5

    def ansatz_circuit(self) -> Circuit:
        if self.ansatz == "hera":
            return cl.build_hera(self.n, self.depth)
        return cl.build_hea(self.n, self.depth, self.scheme)

    def latent_circuit(self) -> Circuit:
        """Everything after the feature maps, on the data qubits only."""
        if not self.bivariate:
            return self.ansatz_circuit()
        n, pa = self.n, self.ansatz_params
        total = self.n_params
        parts = []
        if self.correlation:
            corr = cl.build_correlation_circuit(n)
            drop_ancillas = {1 + i: i for i in range(n)} | {n + 2 + i: n + i for i in range(n)}
            parts.append(corr.remap(drop_ancillas, 2 * n).offset_slots(2 * pa, total))
        a = self.ansatz_circuit()
        parts.append(a.remap(range(n), 2 * n).offset_slots(0, total))
        parts.append(a.remap(range(n, 2 * n), 2 * n).offset_slots(pa, total))
        if len(parts) == 2:
            parts.insert(0, Circuit(2 * n, (), total))
        return cl.concat(*[p.with_params(total) for p in parts])

    def feature_circuit(self, decomposed: bool = False) -> Circuit:
        n = self.n
        if self.kind == "fourier":
            return cl.build_phase_feature_map(n)
        fm = cl.build_hartley_feature_map(n, decomposed=decomposed)
        if not self.bivariate:
            return fm
        fy = cl.build_hartley_feature_map(n, feature=1, decomposed=decomposed)
        return fm.remap(range(n + 1), 2 * n + 2) + fy.remap(range(n + 1, 2 * n + 2), 2 * n + 2)

    def latent_wires(self) -> list[int]:
        if self.kind == "fourier":
            return list(range(self.n))
        if self.bivariate:
            return [1 + i for i in range(self.n)] + [self.n + 2 + i for i in range(self.n)]
        return [1 + i for i in range(self.n)]

    def full_circuit(self, decomposed: bool = False) -> Circuit:
        latent = self.latent_circuit().remap(self.latent_wires(), self.n_qubits)
        return self.feature_circuit(decomposed).with_params(self.n_params) + latent

    def copy(self, **changes) -> "QuantumModel":
        d = dict(
            kind=self.kind,
            n=self.n,
            depth=self.depth,
            ansatz=self.ansatz,
            scheme=self.scheme,
            correlation=self.correlation,
            theta=self.theta.copy(),
            alpha=self.alpha,
            beta=self.beta,
            seed=self.seed,
        )
        d.update(changes)
        return QuantumModel(**d)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "kind": self.kind,
            "n": self.n,
            "ansatz": {"kind": self.ansatz, "depth": self.depth, "scheme": self.scheme},
            "correlation": self.correlation,
            "theta": [float(t) for t in self.theta],
            "alpha": self.alpha,
            "beta": self.beta,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        a = d["ansatz"]
        return cls(
            kind=d["kind"],
            n=int(d["n"]),
            depth=int(a["depth"]),
            ansatz=a["kind"],
            scheme=a.get("scheme"),
            correlation=bool(d.get("correlation", True)),
            theta=np.asarray(d["theta"], dtype=float),
            alpha=d["alpha"],
            beta=d["beta"],
            seed=d.get("seed"),
        )

    def to_json(self, extra: dict | None = None) -> str:
        d = self.to_dict()
        if extra:
            d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "QuantumModel":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# circuit-level evaluation


def _check_domain(model: QuantumModel, *coords) -> None:
    for c in coords:
        if c is None:
            continue
        arr = np.asarray(c, dtype=float)
        if np.any(arr < 0) or np.any(arr > model.x_max) or not np.all(np.isfinite(arr)):
            raise DomainError(f"input outside the model domain [0, {model.x_max}]")


def expectation(model: QuantumModel, x, y=None, decomposed=False, shifts=None, params=None):
    """``<O>`` without the domain guard (used by finite differences and shift rules)."""
    if model.bivariate and y is None:
        raise ValueError("bivariate model needs both x and y")
    circ = model.full_circuit(decomposed)
    amps = run(circ, x=x, y=y, params=model.theta if params is None else params, shifts=shifts)
    return np.abs(amps[..., 0]) ** 2


def evaluate(model: QuantumModel, x, y=None):
    """Model value at ``x`` (or ``(x, y)``); arrays of points are evaluated in one batch."""
    _check_domain(model, x, y)
    val = model.alpha * expectation(model, x, y) + model.beta
    return float(val) if np.ndim(val) == 0 else val


def shift_plan(model: QuantumModel, wrt: int = 0) -> list[tuple[int, float]]:
    """(placement index, d angle / d x) for every x-dependent gate of the shift-rule circuit."""
    circ = model.full_circuit(decomposed=True)
    return [(i, circ.placements[i].angle.coef) for i in circ.feature_placements(wrt)]


def _shifted_batch(n_rows: int, assignments: list[dict[int, float]]) -> dict[int, np.ndarray]:
    out: dict[int, np.ndarray] = {}
    for row, shifts in enumerate(assignments):
        for idx, delta in shifts.items():
            out.setdefault(idx, np.zeros(n_rows))[row] += delta
    return out


def grad_x(model: QuantumModel, x, y=None, method: str = "shift", wrt: int = 0, stats=None) -> float:
    """Derivative of the model with respect to ``x`` (``wrt=1`` differentiates in ``y``)."""
    _check_domain(model, x, y)
    if method == "shift":
        plan = shift_plan(model, wrt)
        rows = []
        for idx, _ in plan:
            rows += [{idx: SHIFT}, {idx: -SHIFT}]
        vals = expectation(model, x, y, True, _shifted_batch(len(rows), rows))
        if stats is not None:
            stats["evaluations"] = len(rows)
        d = sum(c * (vals[2 * k] - vals[2 * k + 1]) / 2 for k, (_, c) in enumerate(plan))
        return float(model.alpha * d)
    if method == "central":
        h = FD_STEP_GRAD
        if wrt == 0:
            pts = (np.array([x + h, x - h]), y)
        else:
            pts = (x, np.array([y + h, y - h]))
        v = expectation(model, *pts)
        if stats is not None:
            stats["evaluations"] = 2
        return float(model.alpha * (v[0] - v[1]) / (2 * h))
    raise ValueError(f"unknown differentiation method {method!r}")


def second_derivative_x(
    model: QuantumModel, x, y=None, method: str = "shift", wrt: int = 0, stats=None
) -> float:
    _check_domain(model, x, y)
    if method == "shift":
        plan = shift_plan(model, wrt)
        rows: list[dict[int, float]] = [{}]
        weights = [0.0]
        for a, (ia, ca) in enumerate(plan):
            # diagonal: (f(+pi) - 2 f + f(-pi)) / 4
            rows += [{ia: 2 * SHIFT}, {ia: -2 * SHIFT}]
            weights += [ca * ca / 4, ca * ca / 4]
            weights[0] -= ca * ca / 2
            for ib, cb in plan[a + 1 :]:
                w = 2 * ca * cb / 4
                rows += [{ia: SHIFT, ib: SHIFT}, {ia: SHIFT, ib: -SHIFT},
                         {ia: -SHIFT, ib: SHIFT}, {ia: -SHIFT, ib: -SHIFT}]
                weights += [w, -w, -w, w]
        vals = expectation(model, x, y, True, _shifted_batch(len(rows), rows))
        if stats is not None:
            stats["evaluations"] = len(rows)
        return float(model.alpha * np.dot(weights, vals))
    if method == "central":
        h = FD_STEP_SECOND
        if wrt == 0:
            v = expectation(model, np.array([x + h, x, x - h]), y)
        else:
            v = expectation(model, x, np.array([y + h, y, y - h]))
        return float(model.alpha * (v[0] - 2 * v[1] + v[2]) / h**2)
    raise ValueError(f"unknown differentiation method {method!r}")


class ModelGradient(NamedTuple):
    theta: np.ndarray
    alpha: float
    beta: float


def grad_theta(model: QuantumModel, x, y=None) -> ModelGradient:
    """Shift-rule gradient with respect to every trainable angle, plus alpha and beta."""
    _check_domain(model, x, y)
    p = model.n_params
    params = np.repeat(model.theta[None, :], 2 * p + 1, axis=0)
    for i in range(p):
        params[2 * i, i] += SHIFT
        params[2 * i + 1, i] -= SHIFT
    vals = expectation(model, x, y, params=params)
    g = model.alpha * (vals[0 : 2 * p : 2] - vals[1 : 2 * p : 2]) / 2
    return ModelGradient(g, float(vals[-1]), 1.0)


def grad_theta_central(model: QuantumModel, x, y=None, h: float = 1e-5) -> np.ndarray:
    p = model.n_params
    params = np.repeat(model.theta[None, :], 2 * p, axis=0)
    for i in range(p):
        params[2 * i, i] += h
        params[2 * i + 1, i] -= h
    vals = expectation(model, x, y, params=params)
    return model.alpha * (vals[0::2] - vals[1::2]) / (2 * h)


# ---------------------------------------------------------------------------
# grid evaluation


def _rotation_feature_circuit(kind: str, n: int) -> Circuit:
    # every x-dependent gate is a Pauli rotation, so d/dangle U = U(angle + pi) / 2
    if kind == "fourier":
        pm = cl.build_phase_feature_map(n)
        return Circuit(n, tuple(
            cl.Placement("RZ", p.target, p.controls, p.angle) if p.kind == "P" else p
            for p in pm.placements
        ))
    return cl.build_hartley_feature_map(n, decomposed=True)


def feature_amplitudes(kind: str, n: int, xs, order: int = 0) -> list[np.ndarray]:
    """Feature-state amplitudes seen by the ansatz, and their x-derivatives.

    Returns ``[A0, A1, ...]`` up to ``order``, each (len(xs), 2**n). For Hartley
    maps this is the ancilla-0 block. Fourier phase gates are simulated as RZ
    rotations, which changes only an x-dependent global phase and leaves every
    derivative of ``|<v|A>|^2`` unchanged.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    circ = _rotation_feature_circuit("fourier" if kind == "fourier" else "hartley", n)
    plan = [(i, circ.placements[i].angle.coef) for i in circ.feature_placements(0)]
    combos: list[tuple[dict[int, float], list[tuple[int, float]]]] = [({}, [])]
    if order >= 1:
        combos += [({i: math.pi}, [(1, c / 2)]) for i, c in plan]
    if order >= 2:
        for a, (ia, ca) in enumerate(plan):
            combos.append(({ia: 2 * math.pi}, [(2, ca * ca / 4)]))
            for ib, cb in plan[a + 1 :]:
                combos.append(({ia: math.pi, ib: math.pi}, [(2, 2 * ca * cb / 4)]))
    m, size = len(xs), 2**n
    rows = _shifted_batch(len(combos), [c[0] for c in combos])
    big_x = np.repeat(xs, len(combos))
    big_shifts = {i: np.tile(v, m) for i, v in rows.items()}
    amps = run(circ, x=big_x, shifts=big_shifts).reshape(m, len(combos), -1)[:, :, :size]
    out = [amps[:, 0, :].copy()] + [np.zeros((m, size), dtype=np.complex128) for _ in range(order)]
    for j, (_, contributions) in enumerate(combos):
        for d, w in contributions:
            out[d] += w * amps[:, j, :]
    return out


def latent_row(model: QuantumModel, theta=None) -> tuple[np.ndarray, np.ndarray]:
    """First row ``v_k = <0|V|k>`` of the latent unitary and its Jacobian (P, 2**L)."""
    theta = model.theta if theta is None else np.asarray(theta, dtype=float)
    adj = model.latent_circuit().adjoint()
    p = model.n_params
    params = np.repeat(theta[None, :], p + 1, axis=0)
    params[np.arange(1, p + 1), np.arange(p)] += math.pi
    u = run(adj, params=params)
    return np.conj(u[0]), 0.5 * np.conj(u[1:])


class GridModel:
    """Exact model values, x-derivatives and parameter Jacobians on a fixed grid.

    For univariate models the grid is ``xs``; for bivariate models it is the
    Cartesian product ``xs x ys`` and results have shape (len(xs), len(ys)).
    """

    def __init__(self, model: QuantumModel, xs, ys=None, order: int = 0):
        self.template = model.copy()
        self.order = order
        self.xs = np.asarray(xs, dtype=float)
        self.features = feature_amplitudes(model.kind, model.n, self.xs, order)
        if model.bivariate:
            if order:
                raise ValueError("bivariate grid models support order 0 only")
            self.ys = np.asarray(xs if ys is None else ys, dtype=float)
            self.features_y = feature_amplitudes(model.kind, model.n, self.ys, 0)

    def _amplitudes(self, theta):
        v, dv = latent_row(self.template, theta)
        if not self.template.bivariate:
            a = [A @ v for A in self.features]
            da = [A @ dv.T for A in self.features]  # (M, P)
            return a, da
        size = 2**self.template.n
        W = v.reshape(size, size)
        dW = dv.reshape(-1, size, size)
        Ax, Ay = self.features[0], self.features_y[0]
        a = Ax @ W @ Ay.T
        da = np.einsum("ik,pkl,jl->ijp", Ax, dW, Ay, optimize=True)
        return [a], [da]

    def evaluate(self, theta, alpha, beta, jacobian: bool = False) -> dict:
        """Return ``f`` (and ``f1``, ``f2`` up to ``order``) plus Jacobians when requested.

        Jacobian entries ``d<name>`` have a trailing axis over (theta..., alpha, beta).
        """
        a, da = self._amplitudes(theta)
        q0 = np.abs(a[0]) ** 2
        out = {"f": alpha * q0 + beta, "q": q0}
        if self.order >= 1:
            q1 = 2 * np.real(np.conj(a[0]) * a[1])
            out["f1"] = alpha * q1
        if self.order >= 2:
            q2 = 2 * (np.abs(a[1]) ** 2 + np.real(np.conj(a[0]) * a[2]))
            out["f2"] = alpha * q2
        if not jacobian:
            return out
        a0 = a[0][..., None]
        ones = np.ones(q0.shape + (1,))
        zeros = np.zeros(q0.shape + (1,))
        dq0 = 2 * np.real(np.conj(a0) * da[0])
        out["df"] = np.concatenate([alpha * dq0, q0[..., None], ones], axis=-1)
        if self.order >= 1:
            a1 = a[1][..., None]
            dq1 = 2 * np.real(np.conj(da[0]) * a1 + np.conj(a0) * da[1])
            out["df1"] = np.concatenate([alpha * dq1, q1[..., None], zeros], axis=-1)
        if self.order >= 2:
            a2 = a[2][..., None]
            dq2 = 2 * (
                2 * np.real(np.conj(a1) * da[1])
                + np.real(np.conj(da[0]) * a2 + np.conj(a0) * da[2])
            )
            out["df2"] = np.concatenate([alpha * dq2, q2[..., None], zeros], axis=-1)
        return out
