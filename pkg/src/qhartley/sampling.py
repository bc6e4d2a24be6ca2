"""Sampling circuits for trained Hartley models, shot sampling, decoding and histograms.

Readout strings are most-significant-first over the whole sampling register.
Per register, qubit 0 is the inverse transform's ancilla, qubits ``1..S`` are
the extension and the bottom ``n`` qubits carry the adjoint ansatz. A readout
integer ``v`` decodes to the coordinate ``v / 2**S``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import circuits as cl
from .circuits import Circuit, run
from .model import QuantumModel
from .statevector import RNG_ALGORITHM, StateVector, sample_counts

VARIANTS = ("plain", "bitstring-network", "qft-chain")


class UnsupportedSamplingError(ValueError):
    pass


class AmbiguousSplitError(ValueError):
    pass


def _check_variant(S: int, variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown sampling variant {variant!r}")
    if S < 0:
        raise ValueError("S must be non-negative")
    if variant == "plain" and S != 0:
        raise UnsupportedSamplingError("the plain variant has no extended register (S must be 0)")
    if variant != "plain" and S < 1:
        raise UnsupportedSamplingError(f"variant {variant!r} needs S >= 1")
    if variant == "bitstring-network" and S != 1:
        raise UnsupportedSamplingError(
            f"no bitstring network is available for S={S}; use the qft-chain variant"
        )


def register_width(n: int, S: int) -> int:
    return n + 1 + S


def _register_readout(n: int, S: int, variant: str) -> Circuit:
    """Fixed circuit applied after the adjoint ansatz on one (n+1+S)-qubit register."""
    _check_variant(S, variant)
    w = register_width(n, S)
    if variant in ("plain", "bitstring-network"):
        # the inverse transform equals the forward one on the ancilla-0 subspace
        iqht = cl.build_qht(w - 1).adjoint()
        return iqht + cl.build_bitstring_network(S, w) if S else iqht
    small = list(range(S, w))
    iqht = cl.build_qht(n).adjoint().remap(small, w)
    qft = cl.build_qft(n + 1).remap(small, w)
    return cl.concat(iqht, qft, cl.build_iqft(w))


def _bind(circuit: Circuit, theta) -> Circuit:
    """Freeze trainable slots to constants so the sampling circuit is parameter-free."""
    ps = []
    for p in circuit.placements:
        a = p.angle
        if a is not None and a.slot is not None:
            a = cl.Angle(const=a.const + a.scale * float(theta[a.slot]), coef=a.coef, feature=a.feature)
        ps.append(cl.Placement(p.kind, p.target, p.controls, a, p.qubits, p.table))
    return Circuit(circuit.n_qubits, tuple(ps), 0)


def build_sampling_circuit(model: QuantumModel, S: int = 0, variant: str = "plain") -> Circuit:
    """Adjoint ansatz on the model qubits followed by the readout transform."""
    if model.kind != "hartley":
        raise ValueError(f"sampling needs a univariate hartley model, got {model.kind!r}")
    w = register_width(model.n, S)
    readout = _register_readout(model.n, S, variant)
    adj = _bind(model.ansatz_circuit(), model.theta).adjoint().remap(range(S + 1, w), w)
    return adj + readout


def build_fine_sampling_circuit(model: QuantumModel, S: int, variant: str = "bitstring-network") -> Circuit:
    if S < 1:
        raise ValueError("fine sampling needs S >= 1")
    return build_sampling_circuit(model, S, variant)


def build_bivariate_sampling_circuit(model: QuantumModel, S: int = 0, variant: str | None = None) -> Circuit:
    """Both adjoint ansatze, the adjoint correlation block, then one readout per register."""
    if not model.bivariate:
        raise ValueError("bivariate sampling needs a bivariate-hartley model")
    variant = variant or ("plain" if S == 0 else "bitstring-network")
    n, w = model.n, register_width(model.n, S)
    wires = list(range(S + 1, w)) + list(range(w + S + 1, 2 * w))
    latent = _bind(model.latent_circuit(), model.theta).adjoint().remap(wires, 2 * w)
    readout = _register_readout(n, S, variant)
    return cl.concat(latent, readout.remap(range(w), 2 * w), readout.remap(range(w, 2 * w), 2 * w))


# ---------------------------------------------------------------------------
# batches


def model_hash(model: QuantumModel) -> str:
    return hashlib.sha256(model.to_json().encode()).hexdigest()


@dataclass
class SampleBatch:
    counts: dict[str, int]
    n: int
    S: int
    variant: str
    shots: int
    seed: int
    bivariate: bool = False
    model_hash: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not add up to the number of shots")
        width = self.readout_length
        for k in self.counts:
            if len(k) != width:
                raise ValueError(f"readout {k!r} does not have length {width}")

    @property
    def readout_length(self) -> int:
        w = register_width(self.n, self.S)
        return 2 * w if self.bivariate else w

    def header(self) -> dict:
        return {
            "n": self.n,
            "S": self.S,
            "variant": self.variant,
            "shots": self.shots,
            "seed": self.seed,
            "model_sha256": self.model_hash,
            "rng": RNG_ALGORITHM,
            **self.meta,
        }


def exact_distribution(circuit: Circuit) -> np.ndarray:
    amps = run(circuit)
    return np.abs(amps) ** 2


def sample(
    model: QuantumModel, shots: int, seed: int, S: int = 0, variant: str | None = None
) -> SampleBatch:
    """Draw ``shots`` readouts from the sampling circuit of a trained model."""
    if model.bivariate:
        variant = variant or ("plain" if S == 0 else "bitstring-network")
        circ = build_bivariate_sampling_circuit(model, S, variant)
    else:
        variant = variant or ("plain" if S == 0 else "bitstring-network")
        circ = build_sampling_circuit(model, S, variant)
    state = StateVector(circ.n_qubits, run(circ))
    counts = sample_counts(state, shots, seed)
    return SampleBatch(counts, model.n, S, variant, shots, seed, model.bivariate, model_hash(model))


# ---------------------------------------------------------------------------
# decoding and histograms


def decode_bitstring(bits: str, n: int, S: int, variant: str = "plain") -> float:
    """Coordinate of one register readout: the unsigned integer value over ``2**S``."""
    _check_variant(S, variant)
    if len(bits) != register_width(n, S) or set(bits) - {"0", "1"}:
        raise ValueError(f"expected a {register_width(n, S)}-bit readout, got {bits!r}")
    return int(bits, 2) / 2**S


@dataclass
class Histogram:
    coords: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.coords.shape[0] != self.probs.shape[0]:
            raise ValueError("coordinate and probability lengths differ")

    def as_dict(self) -> dict[float, float]:
        return {float(c): float(p) for c, p in zip(self.coords, self.probs)}


@dataclass
class Histogram2D:
    xs: np.ndarray
    ys: np.ndarray
    probs: np.ndarray  # (len(xs), len(ys))

    def marginal_x(self) -> Histogram:
        return Histogram(self.xs, self.probs.sum(axis=1))

    def marginal_y(self) -> Histogram:
        return Histogram(self.ys, self.probs.sum(axis=0))


def _normalized(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    if total <= 0:
        raise ValueError("cannot normalize an empty histogram")
    return counts / total


def histogram(batch: SampleBatch, bins=None) -> Histogram:
    """Normalized decoded histogram over every coordinate the readout can produce.

    ``bins`` optionally restricts the output to the listed coordinates; mass
    elsewhere is discarded before normalizing.
    """
    if batch.bivariate:
        raise ValueError("use postprocess_bivariate for bivariate batches")
    if batch.shots == 0:
        raise ValueError("empty batch")
    w = register_width(batch.n, batch.S)
    counts = np.zeros(2**w)
    for bits, c in batch.counts.items():
        counts[int(bits, 2)] += c
    coords = np.arange(2**w) / 2**batch.S
    if bins is not None:
        bins = np.asarray(bins, dtype=float)
        idx = np.rint(bins * 2**batch.S).astype(int)
        if np.any(idx < 0) or np.any(idx >= 2**w) or not np.allclose(idx / 2**batch.S, bins):
            raise ValueError("bins do not lie on the readout grid")
        coords, counts = bins, counts[idx]
    return Histogram(coords, _normalized(counts))


def tvd(a, b) -> float:
    """Total variation distance between two histograms on the same bins."""
    if isinstance(a, Histogram) and isinstance(b, Histogram):
        if a.coords.shape != b.coords.shape or not np.allclose(a.coords, b.coords):
            raise ValueError("histograms use different bins")
        a, b = a.probs, b.probs
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"binning mismatch: {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def constant_zero_positions(counts: dict[str, int]) -> list[int]:
    keys = [k for k, c in counts.items() if c > 0]
    if not keys:
        raise ValueError("empty batch")
    return [i for i in range(len(keys[0])) if all(k[i] == "0" for k in keys)]


def postprocess_bivariate(batch: SampleBatch) -> Histogram2D:
    """Drop constant-zero ancilla bits, split into the x and y halves, decode, bin."""
    if not batch.bivariate:
        raise ValueError("postprocess_bivariate needs a bivariate batch")
    if batch.shots == 0:
        raise ValueError("empty batch")
    w = register_width(batch.n, batch.S)
    zeros = set(constant_zero_positions(batch.counts))
    structural = {0, w} if batch.variant != "qft-chain" else set()
    drop = sorted(zeros & structural)
    keep = [i for i in range(2 * w) if i not in drop]
    left = [i for i in keep if i < w]
    right = [i for i in keep if i >= w]
    if len(left) != len(right):
        raise AmbiguousSplitError(
            f"after dropping bits {drop} the registers have {len(left)} and {len(right)} bits"
        )
    m = len(left)
    counts = np.zeros((2**m, 2**m))
    for bits, c in batch.counts.items():
        vx = int("".join(bits[i] for i in left), 2)
        vy = int("".join(bits[i] for i in right), 2)
        counts[vx, vy] += c
    coords = np.arange(2**m) / 2**batch.S
    return Histogram2D(coords, coords.copy(), _normalized(counts))


def pearson(a, b) -> float:
    a = np.ravel(np.asarray(a, dtype=float))
    b = np.ravel(np.asarray(b, dtype=float))
    return float(np.corrcoef(a, b)[0, 1])


# ---------------------------------------------------------------------------
# CSV output


def _header_lines(meta: dict) -> list[str]:
    return [f"# {k}={meta[k]}" for k in sorted(meta)]


def raw_csv(batch: SampleBatch) -> str:
    lines = _header_lines(batch.header()) + ["bitstring,count"]
    lines += [f"{k},{batch.counts[k]}" for k in sorted(batch.counts)]
    return "\n".join(lines) + "\n"


def decoded_csv(batch: SampleBatch, x_max: float) -> str:
    """Decoded histogram with an ``in_domain`` diagnostic column (coordinates are never clipped)."""
    lines = _header_lines(batch.header())
    if batch.bivariate:
        h = postprocess_bivariate(batch)
        lines.append("x,y,probability,in_domain")
        for i, x in enumerate(h.xs):
            for j, y in enumerate(h.ys):
                ok = int(0 <= x <= x_max and 0 <= y <= x_max)
                lines.append(f"{x:.17g},{y:.17g},{h.probs[i, j]:.17g},{ok}")
    else:
        h = histogram(batch)
        lines.append("coordinate,probability,in_domain")
        for x, p in zip(h.coords, h.probs):
            lines.append(f"{x:.17g},{p:.17g},{int(0 <= x <= x_max)}")
    return "\n".join(lines) + "\n"
