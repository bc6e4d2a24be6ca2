"""Numerical checks of the transforms and the Hartley feature map, with margins."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuits as cl


@dataclass
class Check:
    name: str
    n: int
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value < self.tol)

    @property
    def margin(self) -> float:
        return self.tol - self.value

    def as_dict(self) -> dict:
        return {"check": self.name, "n": self.n, "value": self.value, "tol": self.tol,
                "margin": self.margin, "passed": self.passed}


def dft_matrix(n: int) -> np.ndarray:
    k = np.arange(2**n)
    return np.exp(2j * np.pi * np.outer(k, k) / 2**n) / 2 ** (n / 2)


def cas(t):
    return np.cos(t) + np.sin(t)


def dht_matrix(n: int) -> np.ndarray:
    k = np.arange(2**n)
    return cas(2 * np.pi * np.outer(k, k) / 2**n) / 2 ** (n / 2)


def qht_unitary(n: int, **kwargs) -> np.ndarray:
    return cl.circuit_to_unitary(cl.build_qht(n, **kwargs))


def hartley_states(n: int, xs, x_rotation: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Normalized ancilla-0 states (len(xs), 2**n) and the ancilla-0 branch probabilities."""
    circ = cl.build_hartley_feature_map(n, x_rotation=x_rotation)
    amps = cl.run(circ, x=np.atleast_1d(np.asarray(xs, dtype=float)))[:, : 2**n]
    prob = np.sum(np.abs(amps) ** 2, axis=1)
    return amps / np.sqrt(prob)[:, None], prob


def hartley_norm(n: int, x):
    """Norm factor of the ancilla-0 branch; the branch probability is half its square."""
    return np.sqrt(1 - np.sin(2 * np.pi * np.asarray(x, dtype=float)) / 2**n)


def overlap_map(n: int, step: float = 0.1, x_rotation: bool = True):
    """Squared overlaps of post-selected Hartley states on ``[0, 2**n - 1]``."""
    xs = np.arange(0, 2**n - 1 + step / 2, step)
    states, _ = hartley_states(n, xs, x_rotation)
    return xs, np.abs(np.conj(states) @ states.T) ** 2


def max_far_overlap(n: int, step: float = 0.1, gap: float = 0.5, x_rotation: bool = True) -> float:
    xs, ov = overlap_map(n, step, x_rotation)
    far = np.abs(xs[:, None] - xs[None, :]) >= gap - 1e-9
    return float(ov[far].max())


def run_checks(n: int, corrupt_qht: bool = False, seed: int = 0) -> list[Check]:
    size = 2**n
    out = [Check("qft_matrix", n, float(np.abs(cl.circuit_to_unitary(cl.build_qft(n)) - dft_matrix(n)).max()), 1e-10)]
    u = qht_unitary(n, omit_sqrt_x=corrupt_qht)
    out.append(Check("qht_dht_block", n, float(np.abs(u[:size, :size] - dht_matrix(n)).max()), 1e-10))
    sq = u @ u
    out.append(Check("qht_involution_ancilla0", n, float(np.abs(sq[:size, :size] - np.eye(size)).max()), 1e-10))
    leak = np.sum(np.abs(u[size:, :size]) ** 2, axis=0)
    out.append(Check("qht_ancilla_clean", n, float(leak.max()), 1e-12))
    for label, grid in (("integers", np.arange(size)), ("half_integers", np.arange(size) + 0.5)):
        s, _ = hartley_states(n, grid)
        gram = np.conj(s) @ s.T
        out.append(Check(f"feature_gram_{label}", n, float(np.abs(gram - np.eye(size)).max()), 1e-10))
    xs = np.random.default_rng(seed).uniform(0, size - 1, 100)
    _, prob = hartley_states(n, xs)
    out.append(Check("feature_norm", n, float(np.abs(np.sqrt(2 * prob) - hartley_norm(n, xs)).max()), 1e-10))
    return out
