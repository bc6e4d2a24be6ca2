"""Dense statevector simulation.

Qubit 0 is the most significant bit of a basis index, so ``|q0 q1 ... q_{n-1}>``
reads left to right as the binary expansion of the index. Amplitude arrays may
carry a leading batch axis: shape ``(2**n,)`` or ``(B, 2**n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 24
RNG_ALGORITHM = "numpy.random.Generator(PCG64)"

Controls = Sequence[tuple[int, int]]


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amps.shape}"
            )

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())


def check_qubit_count(n: int) -> None:
    if n < 1 or n > MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def zero_state(n: int) -> StateVector:
    check_qubit_count(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def basis_state(n: int, index: int) -> StateVector:
    check_qubit_count(n)
    if not 0 <= index < 2**n:
        raise IndexError(f"basis index {index} out of range for {n} qubits")
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def _check_indices(n: int, target: int | None, controls: Controls) -> None:
    qubits = [q for q, _ in controls]
    if target is not None:
        qubits.append(target)
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit index {q} out of range for {n} qubits")
    if target is not None and target in [q for q, _ in controls]:
        raise ValueError(f"target {target} is also a control")
    if len(set(q for q, _ in controls)) != len(controls):
        raise ValueError("duplicate control qubit")
    for _, pol in controls:
        if pol not in (0, 1):
            raise ValueError(f"control polarity must be 0 or 1, got {pol}")


def _tensor_view(amps: np.ndarray, n: int) -> np.ndarray:
    # leading axis is always the batch axis
    return amps.reshape((amps.shape[0],) + (2,) * n)


def apply_matrix_inplace(
    amps: np.ndarray, n: int, gate: np.ndarray, target: int, controls: Controls = ()
) -> None:
    """Apply a (controlled) single-qubit gate to ``amps`` of shape (B, 2**n) in place.

    ``gate`` is either one 2x2 matrix or a stack of shape (B, 2, 2) with one
    matrix per batch row.
    """
    t = _tensor_view(amps, n)
    idx: list = [slice(None)] * (n + 1)
    for q, pol in controls:
        idx[q + 1] = pol
    i0 = list(idx)
    i1 = list(idx)
    i0[target + 1] = 0
    i1[target + 1] = 1
    i0, i1 = tuple(i0), tuple(i1)
    a0 = t[i0]
    a1 = t[i1]
    if gate.ndim == 2:
        g00, g01, g10, g11 = gate[0, 0], gate[0, 1], gate[1, 0], gate[1, 1]
    else:
        # broadcast per-row matrix entries over the remaining qubit axes
        shape = (gate.shape[0],) + (1,) * (a0.ndim - 1)
        g00 = gate[:, 0, 0].reshape(shape)
        g01 = gate[:, 0, 1].reshape(shape)
        g10 = gate[:, 1, 0].reshape(shape)
        g11 = gate[:, 1, 1].reshape(shape)
    new0 = g00 * a0 + g01 * a1
    new1 = g10 * a0 + g11 * a1
    t[i0] = new0
    t[i1] = new1


def apply_permutation_inplace(
    amps: np.ndarray,
    n: int,
    qubits: Sequence[int],
    table: Sequence[int],
    controls: Controls = (),
) -> None:
    """Send basis value ``i`` of the qubit subset to ``table[i]`` (controls permitting)."""
    k = len(qubits)
    table = np.asarray(table, dtype=np.int64)
    t = _tensor_view(amps, n)
    control_qubits = [q for q, _ in controls]
    # move controls first (after batch), then the permuted subset last
    rest = [q for q in range(n) if q not in qubits and q not in control_qubits]
    order = [0] + [q + 1 for q in control_qubits] + [q + 1 for q in rest] + [q + 1 for q in qubits]
    moved = np.transpose(t, order)
    sel = (slice(None),) + tuple(pol for _, pol in controls)
    block = moved[sel]
    flat = block.reshape(block.shape[: block.ndim - k] + (2**k,))
    out = np.empty_like(flat)
    out[..., table] = flat
    block[...] = out.reshape(block.shape)
    # ``moved`` is a view of ``t`` which is a view of ``amps``: writes land in place


def validate_permutation(table: Sequence[int], size: int) -> None:
    table = np.asarray(table)
    if table.shape != (size,) or not np.array_equal(np.sort(table), np.arange(size)):
        raise ValueError("permutation table is not a bijection on the basis of the subset")


def _as_batch(amps: np.ndarray) -> np.ndarray:
    return amps[None, :] if amps.ndim == 1 else amps


def apply_gate(
    state: StateVector,
    gate: np.ndarray,
    target: int,
    controls: Iterable[tuple[int, int]] = (),
    atol: float = 1e-10,
) -> StateVector:
    """Return a new state with a controlled single-qubit unitary applied."""
    controls = tuple(controls)
    _check_indices(state.n_qubits, target, controls)
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2):
        raise ValueError(f"gate must be 2x2, got {gate.shape}")
    if not np.allclose(gate.conj().T @ gate, np.eye(2), atol=atol):
        raise ValueError("gate matrix is not unitary")
    out = state.copy()
    apply_matrix_inplace(_as_batch(out.amps), out.n_qubits, gate, target, controls)
    return out


def apply_permutation(
    state: StateVector,
    qubits: Sequence[int],
    table: Sequence[int],
    controls: Iterable[tuple[int, int]] = (),
) -> StateVector:
    controls = tuple(controls)
    _check_indices(state.n_qubits, None, controls)
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise IndexError(f"qubit index {q} out of range")
        if q in [c for c, _ in controls]:
            raise ValueError(f"qubit {q} is both permuted and a control")
    if len(set(qubits)) != len(qubits):
        raise ValueError("duplicate qubit in permutation subset")
    validate_permutation(table, 2 ** len(qubits))
    out = state.copy()
    apply_permutation_inplace(_as_batch(out.amps), out.n_qubits, qubits, table, controls)
    return out


def projector_expectation(state: StateVector, basis_index: int) -> float:
    if not 0 <= basis_index < 2**state.n_qubits:
        raise IndexError(f"basis index {basis_index} out of range")
    return float(abs(state.amps[basis_index]) ** 2)


class ZeroProbabilityError(ValueError):
    """Post-selection onto an outcome that cannot occur."""


def post_select(
    state: StateVector, qubit: int, outcome: int, tol: float = 1e-14
) -> tuple[StateVector, float]:
    """Condition ``qubit`` on ``outcome``; return the renormalized remainder and its probability.

    The returned state has ``n_qubits - 1`` qubits (the measured one is removed).
    """
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise IndexError(f"qubit index {qubit} out of range")
    if n < 2:
        raise ValueError("post-selection needs at least two qubits")
    t = state.amps.reshape((2,) * n)
    branch = np.take(t, outcome, axis=qubit).reshape(-1)
    prob = float(np.sum(np.abs(branch) ** 2))
    if prob <= tol:
        raise ZeroProbabilityError(
            f"outcome {outcome} on qubit {qubit} has probability {prob:.3e}"
        )
    return StateVector(n - 1, branch / np.sqrt(prob)), prob


def format_bits(index: int, width: int) -> str:
    return format(index, f"0{width}b")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_counts(
    state: StateVector, shots: int, seed: int, tol: float = 1e-9
) -> dict[str, int]:
    """Multinomial shot sampling in the computational basis.

    Keys are most-significant-first bit strings; only observed outcomes appear.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    probs = state.probabilities()
    total = probs.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"state is not normalized (sum of probabilities = {total!r})")
    if shots == 0:
        return {}
    draws = make_rng(seed).multinomial(shots, probs / total)
    nz = np.flatnonzero(draws)
    return {format_bits(int(i), state.n_qubits): int(draws[i]) for i in nz}
