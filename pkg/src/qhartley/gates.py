"""Single-qubit gate matrices.

Conventions: ``P(phi) = diag(1, e^{i phi})`` and ``RZ(phi) = diag(e^{-i phi/2}, e^{i phi/2})``.
Every parametric constructor accepts a scalar or a 1-D array of angles; arrays
give a stack of shape (B, 2, 2).
"""

import numpy as np

H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
I2 = np.eye(2, dtype=np.complex128)
SQRT_X_DAG = 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]], dtype=np.complex128)
SQRT_X = SQRT_X_DAG.conj().T


def _stack(a00, a01, a10, a11):
    m = np.array([[a00, a01], [a10, a11]], dtype=np.complex128)
    return m if m.ndim == 2 else np.moveaxis(m, -1, 0)


def rx(theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return _stack(c, -1j * s, -1j * s, c)


def ry(theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return _stack(c + 0j, -s + 0j, s + 0j, c + 0j)


def rz(theta):
    theta = np.asarray(theta, dtype=float)
    zero = np.zeros_like(theta)
    return _stack(np.exp(-0.5j * theta), zero, zero, np.exp(0.5j * theta))


def phase(theta):
    theta = np.asarray(theta, dtype=float)
    zero = np.zeros_like(theta)
    return _stack(np.ones_like(theta) + 0j, zero, zero, np.exp(1j * theta))


FIXED = {"H": H, "X": X, "Z": Z, "CNOT": X, "CZ": Z, "SXDG": SQRT_X_DAG, "SX": SQRT_X}
PARAMETRIC = {"RX": rx, "RY": ry, "RZ": rz, "P": phase}


def matrix(kind: str, angle=None) -> np.ndarray:
    if kind in FIXED:
        return FIXED[kind]
    if kind in PARAMETRIC:
        return PARAMETRIC[kind](angle)
    raise KeyError(f"unknown gate kind {kind!r}")
