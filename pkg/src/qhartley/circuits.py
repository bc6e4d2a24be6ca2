"""Parameterized circuits and the builders for every circuit used by the models.

A :class:`Circuit` is an immutable list of :class:`Placement` values. Gate
angles are affine expressions ``const + coef * feature + scale * params[slot]``
(see :class:`Angle`) so one circuit value serves simulation, shift-rule
differentiation, adjoints and dense-matrix extraction.

Register layout used throughout: the ancilla of a Hartley register is its top
wire, followed by the ``n`` data qubits, most significant first.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import gates
from .statevector import (
    apply_matrix_inplace,
    apply_permutation_inplace,
    check_qubit_count,
    validate_permutation,
)

TWO_PI = 2.0 * math.pi
UNITARY_MAX_QUBITS = 10
SELF_INVERSE = {"H", "X", "Z", "CNOT", "CZ"}
ROTATIONS = {"RX", "RY", "RZ", "P"}
ADJOINT_KIND = {"SXDG": "SX", "SX": "SXDG"}


@dataclass(frozen=True)
class Angle:
    """Affine gate angle: ``const + coef * features[feature] + scale * params[slot]``."""

    const: float = 0.0
    coef: float = 0.0
    feature: int = 0
    slot: int | None = None
    scale: float = 1.0

    def negated(self) -> "Angle":
        return Angle(-self.const, -self.coef, self.feature, self.slot, -self.scale)

    @property
    def is_constant(self) -> bool:
        return self.coef == 0.0 and self.slot is None

    def evaluate(self, features: np.ndarray, params: np.ndarray | None) -> np.ndarray:
        """Angle per batch row; ``features`` is (B, F), ``params`` is (B, P) or None."""
        value = np.full(features.shape[0], self.const)
        if self.coef != 0.0:
            value = value + self.coef * features[:, self.feature]
        if self.slot is not None:
            if params is None:
                raise ValueError("circuit has trainable slots but no parameters were bound")
            value = value + self.scale * params[:, self.slot]
        return value


@dataclass(frozen=True)
class Placement:
    kind: str
    target: int | None = None
    controls: tuple[tuple[int, int], ...] = ()
    angle: Angle | None = None
    # permutation placements only
    qubits: tuple[int, ...] = ()
    table: tuple[int, ...] = ()

    def qubits_touched(self) -> tuple[int, ...]:
        own = self.qubits if self.kind == "PERM" else (self.target,)
        return tuple(own) + tuple(q for q, _ in self.controls)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    placements: tuple[Placement, ...] = ()
    n_params: int = 0

    def __post_init__(self):
        for i, p in enumerate(self.placements):
            for q in p.qubits_touched():
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"placement {i} ({p.kind}) touches qubit {q} outside register")
            if p.kind == "PERM":
                validate_permutation(p.table, 2 ** len(p.qubits))
            if p.angle is not None and p.angle.slot is not None and p.angle.slot >= self.n_params:
                raise ValueError(f"placement {i} uses slot {p.angle.slot} >= n_params={self.n_params}")

    def __len__(self) -> int:
        return len(self.placements)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(
            self.n_qubits,
            self.placements + other.placements,
            max(self.n_params, other.n_params),
        )

    def adjoint(self) -> "Circuit":
        out = []
        for p in reversed(self.placements):
            if p.kind == "PERM":
                inv = np.empty(len(p.table), dtype=int)
                inv[np.asarray(p.table)] = np.arange(len(p.table))
                out.append(replace(p, table=tuple(int(v) for v in inv)))
            elif p.kind in ROTATIONS:
                out.append(replace(p, angle=p.angle.negated()))
            elif p.kind in ADJOINT_KIND:
                out.append(replace(p, kind=ADJOINT_KIND[p.kind]))
            else:
                out.append(p)
        return Circuit(self.n_qubits, tuple(out), self.n_params)

    def remap(self, mapping: Sequence[int] | Mapping[int, int], n_qubits: int) -> "Circuit":
        """Relabel qubit ``q`` as ``mapping[q]`` inside a register of ``n_qubits``."""
        m = dict(enumerate(mapping)) if not isinstance(mapping, Mapping) else dict(mapping)
        out = []
        for p in self.placements:
            out.append(
                replace(
                    p,
                    target=None if p.target is None else m[p.target],
                    controls=tuple((m[q], v) for q, v in p.controls),
                    qubits=tuple(m[q] for q in p.qubits),
                )
            )
        return Circuit(n_qubits, tuple(out), self.n_params)

    def offset_slots(self, offset: int, n_params: int | None = None) -> "Circuit":
        out = []
        for p in self.placements:
            if p.angle is not None and p.angle.slot is not None:
                p = replace(p, angle=replace(p.angle, slot=p.angle.slot + offset))
            out.append(p)
        total = self.n_params + offset if n_params is None else n_params
        return Circuit(self.n_qubits, tuple(out), total)

    def with_params(self, n_params: int) -> "Circuit":
        return Circuit(self.n_qubits, self.placements, n_params)

    def feature_placements(self, feature: int = 0) -> list[int]:
        """Indices of placements whose angle depends on the given feature."""
        return [
            i
            for i, p in enumerate(self.placements)
            if p.angle is not None and p.angle.coef != 0.0 and p.angle.feature == feature
        ]

    def slot_placements(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, p in enumerate(self.placements):
            if p.angle is not None and p.angle.slot is not None:
                out.setdefault(p.angle.slot, []).append(i)
        return out

    def to_text(self) -> str:
        return format_circuit(self)


def concat(*circuits: Circuit) -> Circuit:
    out = circuits[0]
    for c in circuits[1:]:
        out = out + c
    return out


# ---------------------------------------------------------------------------
# execution


def _batch_features(x, y, batch: int | None) -> tuple[np.ndarray, int]:
    xs = np.atleast_1d(np.asarray(0.0 if x is None else x, dtype=float))
    ys = np.atleast_1d(np.asarray(0.0 if y is None else y, dtype=float))
    b = max(xs.shape[0], ys.shape[0], batch or 1)
    for arr in (xs, ys):
        if arr.shape[0] not in (1, b):
            raise ValueError("feature batch sizes disagree")
    feats = np.stack([np.broadcast_to(xs, (b,)), np.broadcast_to(ys, (b,))], axis=1)
    return feats, b


def run(
    circuit: Circuit,
    state: np.ndarray | None = None,
    x=None,
    y=None,
    params=None,
    shifts: Mapping[int, float | np.ndarray] | None = None,
) -> np.ndarray:
    """Simulate ``circuit`` and return the output amplitudes.

    ``x``/``y`` are scalars or (B,) arrays; ``params`` is (P,) or (B, P);
    ``state`` is None (all zeros), (2**n,) or (B, 2**n). ``shifts`` adds an
    extra angle offset to selected placements, keyed by placement index.
    Output has shape (2**n,) when nothing is batched, else (B, 2**n).
    """
    n = circuit.n_qubits
    check_qubit_count(n)
    batched = False
    param_arr = None
    batch = 1
    if params is not None:
        param_arr = np.asarray(params, dtype=float)
        if param_arr.ndim == 2:
            batch = param_arr.shape[0]
            batched = True
        else:
            param_arr = param_arr[None, :]
        if param_arr.shape[1] < circuit.n_params:
            raise ValueError(
                f"expected {circuit.n_params} parameters, got {param_arr.shape[1]}"
            )
    if state is not None:
        state = np.asarray(state, dtype=np.complex128)
        if state.ndim == 2:
            batch = max(batch, state.shape[0])
            batched = True
    for v in (x, y):
        if v is not None and np.ndim(v) > 0:
            batched = True
    if shifts:
        for v in shifts.values():
            if np.ndim(v) > 0:
                batched = True
                batch = max(batch, np.shape(v)[0])
    feats, batch = _batch_features(x, y, batch)
    if param_arr is not None and param_arr.shape[0] == 1 and batch > 1:
        param_arr = np.broadcast_to(param_arr, (batch, param_arr.shape[1]))

    if state is None:
        amps = np.zeros((batch, 2**n), dtype=np.complex128)
        amps[:, 0] = 1.0
    else:
        if state.shape[-1] != 2**n:
            raise ValueError("state size does not match circuit width")
        amps = np.array(np.broadcast_to(state, (batch, 2**n)), dtype=np.complex128)

    shifts = shifts or {}
    for i, p in enumerate(circuit.placements):
        if p.kind == "PERM":
            apply_permutation_inplace(amps, n, p.qubits, p.table, p.controls)
            continue
        if p.kind in ROTATIONS:
            ang = p.angle.evaluate(feats, param_arr)
            if i in shifts:
                ang = ang + np.broadcast_to(np.asarray(shifts[i], dtype=float), ang.shape)
            if np.all(ang == ang[0]):
                mat = gates.matrix(p.kind, ang[0])
            else:
                mat = gates.matrix(p.kind, ang)
        else:
            mat = gates.matrix(p.kind)
        apply_matrix_inplace(amps, n, mat, p.target, p.controls)
    return amps if batched else amps[0]


def circuit_to_unitary(circuit: Circuit, x=None, y=None, params=None) -> np.ndarray:
    """Dense matrix of a bound circuit; column ``k`` is the image of basis state ``k``."""
    n = circuit.n_qubits
    if n > UNITARY_MAX_QUBITS:
        raise ValueError(f"dense unitary limited to {UNITARY_MAX_QUBITS} qubits, got {n}")
    basis = np.eye(2**n, dtype=np.complex128)
    out = run(circuit, state=basis, x=x, y=y, params=params)
    return out.T


# ---------------------------------------------------------------------------
# builders


def _h_layer(qubits: Iterable[int]) -> list[Placement]:
    return [Placement("H", q) for q in qubits]


def cnot(control: int, target: int) -> Placement:
    return Placement("CNOT", target, ((control, 1),))


def cz(a: int, b: int) -> Placement:
    return Placement("CZ", b, ((a, 1),))


def build_qft(n: int) -> Circuit:
    """QFT whose dense matrix is exactly ``F[k, j] = 2**(-n/2) exp(2 pi i k j / 2**n)``."""
    check_qubit_count(n)
    ps: list[Placement] = []
    for i in range(n):
        ps.append(Placement("H", i))
        for j in range(i + 1, n):
            ps.append(
                Placement("P", i, ((j, 1),), Angle(const=TWO_PI / 2 ** (j - i + 1)))
            )
    for i in range(n // 2):
        a, b = i, n - 1 - i
        ps += [cnot(a, b), cnot(b, a), cnot(a, b)]
    return Circuit(n, tuple(ps))


def build_iqft(n: int) -> Circuit:
    return build_qft(n).adjoint()


def build_phase_feature_map(n: int, feature: int = 0) -> Circuit:
    """Fourier feature map: Hadamards, then ``P(2 pi x / 2**l)`` on data qubit ``l`` (1-based)."""
    check_qubit_count(n)
    ps = _h_layer(range(n))
    for l in range(1, n + 1):
        ps.append(Placement("P", l - 1, angle=Angle(coef=TWO_PI / 2**l, feature=feature)))
    return Circuit(n, tuple(ps))


def build_hartley_feature_map(
    n: int, feature: int = 0, decomposed: bool = False, x_rotation: bool = True
) -> Circuit:
    """Hartley feature map on ``n + 1`` qubits (qubit 0 is the ancilla).

    On ``|0_a 0...0>`` the ancilla-0 coefficient of ``|k>`` is
    ``cas((2 pi k / 2**n - pi) x) / (sqrt(2) 2**(n/2))``.

    ``decomposed=True`` rewrites each pair ``P(phi_l)`` and ancilla-controlled
    ``P(-2 phi_l)`` on data qubit ``l`` as ``RZ_a(-phi_l)`` followed by
    ``CNOT . RZ_l(phi_l) . CNOT``; the unitary is identical and every
    x-dependent gate is then a Pauli rotation with a two-point shift rule.
    ``x_rotation=False`` drops the ``RZ(2 pi x)`` ancilla gate.
    """
    check_qubit_count(n + 1)
    ps = _h_layer(range(n + 1))
    for l in range(1, n + 1):
        w = TWO_PI / 2**l
        if decomposed:
            ps.append(Placement("RZ", 0, angle=Angle(coef=-w, feature=feature)))
            ps.append(cnot(0, l))
            ps.append(Placement("RZ", l, angle=Angle(coef=w, feature=feature)))
            ps.append(cnot(0, l))
        else:
            ps.append(Placement("P", l, angle=Angle(coef=w, feature=feature)))
    if not decomposed:
        for l in range(1, n + 1):
            w = TWO_PI / 2**l
            ps.append(Placement("P", l, ((0, 1),), Angle(coef=-2 * w, feature=feature)))
    ps.append(Placement("RZ", 0, angle=Angle(const=math.pi / 2)))
    if x_rotation:
        ps.append(Placement("RZ", 0, angle=Angle(coef=TWO_PI, feature=feature)))
    ps.append(Placement("H", 0))
    return Circuit(n + 1, tuple(ps))


def reflection_table(n: int) -> tuple[int, ...]:
    size = 2**n
    return tuple((-i) % size for i in range(size))


def build_controlled_reflection(n: int, decomposed: bool = False) -> Circuit:
    """Ancilla-controlled ``x -> (2**n - x) mod 2**n`` on the data register.

    The default form is a single controlled permutation. The decomposed form
    complements every data bit with ancilla-controlled X gates and then adds one
    with a multi-controlled increment.
    """
    check_qubit_count(n + 1)
    data = tuple(range(1, n + 1))
    if not decomposed:
        return Circuit(
            n + 1, (Placement("PERM", None, ((0, 1),), qubits=data, table=reflection_table(n)),)
        )
    ps = [cnot(0, q) for q in data]
    # increment, most significant bit first: flip bit q when all lower bits are 1
    for q in data:
        ctrls = ((0, 1),) + tuple((low, 1) for low in range(q + 1, n + 1))
        ps.append(Placement("X", q, ctrls))
    return Circuit(n + 1, tuple(ps))


def build_qht(n: int, decomposed_reflection: bool = False, omit_sqrt_x: bool = False) -> Circuit:
    """Quantum Hartley transform on ``n + 1`` qubits (ancilla on top, clean in and out).

    For every data basis state, ``|0_a j> -> |0_a> DHT_n |j>``.
    ``omit_sqrt_x`` removes the phase-fixing gate and exists only as a negative control.
    """
    reflect = build_controlled_reflection(n, decomposed=decomposed_reflection)
    qft = build_qft(n).remap(range(1, n + 1), n + 1)
    middle = () if omit_sqrt_x else (Placement("SXDG", 0),)
    ps = (
        (Placement("H", 0),)
        + qft.placements
        + reflect.placements
        + middle
        + reflect.adjoint().placements
        + (Placement("H", 0),)
    )
    return Circuit(n + 1, ps)


def _entangler_shift(n: int, block: int) -> int:
    # block m pairs qubit l with (l + m) mod n; wrap m into [1, n-1] so no CNOT is self-targeted
    return (block - 1) % (n - 1) + 1


def _entangling_layer(n: int, block: int) -> list[Placement]:
    if n < 2:
        return []
    s = _entangler_shift(n, block)
    return [cnot(l, (l + s) % n) for l in range(n)]


def build_hera(n: int, depth: int) -> Circuit:
    """Hardware-efficient real-amplitude ansatz with ``n * (depth + 1)`` RY slots."""
    check_qubit_count(n)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    ps = [Placement("RY", q, angle=Angle(slot=q)) for q in range(n)]
    for m in range(1, depth + 1):
        ps += _entangling_layer(n, m)
        ps += [Placement("RY", q, angle=Angle(slot=m * n + q)) for q in range(n)]
    return Circuit(n, tuple(ps), n * (depth + 1))


# each scheme lists rotations in matrix-product order, so the last one acts first
HEA_SCHEMES = {
    "RYRX": ("RY", "RX"),
    "RZRY": ("RZ", "RY"),
    "RXRZ": ("RX", "RZ"),
    "RX": ("RX",),
    "RY": ("RY",),
    "RZ": ("RZ",),
}
PAIR_SCHEMES = ("RYRX", "RZRY", "RXRZ")
SINGLE_SCHEMES = ("RX", "RY", "RZ")


def hea_param_count(n: int, depth: int, scheme: str) -> int:
    if scheme not in HEA_SCHEMES:
        raise ValueError(f"unknown HEA scheme {scheme!r}; choose from {sorted(HEA_SCHEMES)}")
    return len(HEA_SCHEMES[scheme]) * n * (depth + 1)


def build_hea(n: int, depth: int, scheme: str) -> Circuit:
    """Hardware-efficient ansatz with HERA entanglers and the chosen rotation layer."""
    total = hea_param_count(n, depth, scheme)
    rots = HEA_SCHEMES[scheme][::-1]
    k = len(rots)
    ps: list[Placement] = []
    for m in range(depth + 1):
        if m > 0:
            ps += _entangling_layer(n, m)
        for q in range(n):
            for r, kind in enumerate(rots):
                ps.append(Placement(kind, q, angle=Angle(slot=(m * n + q) * k + r)))
    return Circuit(n, tuple(ps), total)


def correlation_param_count(n: int) -> int:
    return 6 * n


def build_correlation_circuit(n: int) -> Circuit:
    """RY/CZ correlation block over two Hartley registers (``2n + 2`` qubits).

    Three RY layers on the data qubits, separated by CZ on odd pairs then even
    pairs within each register, closed by CZ between equal positions of the two
    registers. Ancillas (qubits 0 and n+1) are untouched.
    """
    check_qubit_count(2 * n + 2)
    xs = [1 + l for l in range(n)]
    ys = [n + 2 + l for l in range(n)]
    data = xs + ys
    ps: list[Placement] = []

    def ry_layer(layer):
        return [Placement("RY", q, angle=Angle(slot=layer * 2 * n + i)) for i, q in enumerate(data)]

    def pair_layer(start):
        out = []
        for reg in (xs, ys):
            for i in range(start, n - 1, 2):
                out.append(cz(reg[i], reg[i + 1]))
        return out

    ps += ry_layer(0) + pair_layer(0) + ry_layer(1) + pair_layer(1) + ry_layer(2)
    ps += [cz(a, b) for a, b in zip(xs, ys)]
    return Circuit(2 * n + 2, tuple(ps), correlation_param_count(n))


def build_bitstring_network(s: int, total_qubits: int) -> Circuit:
    """Post-transform readout network for an ``s``-qubit extended register.

    Qubit 0 is the transform ancilla. For ``s == 1`` the least significant qubit
    controls an X on every other register qubit, which maps an odd readout
    ``v`` to ``(-v) mod 2**(total_qubits - 1)`` and leaves even readouts alone.
    Larger ``s`` returns the identity.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if s != 1:
        return Circuit(total_qubits)
    if total_qubits < 3:
        raise ValueError("bitstring network needs at least three qubits")
    lsb = total_qubits - 1
    return Circuit(total_qubits, tuple(cnot(lsb, q) for q in range(1, lsb)))


# ---------------------------------------------------------------------------
# text format: one placement per line, ``KIND target=T controls=q:v,... angle=...``

_ANGLE_RE = re.compile(
    r"^(?P<const>[^,]+),(?P<coef>[^,]+)\*x(?P<feature>\d+)(?:,(?P<scale>[^,]+)\*t(?P<slot>\d+))?$"
)


def _format_angle(a: Angle) -> str:
    s = f"{a.const!r},{a.coef!r}*x{a.feature}"
    if a.slot is not None:
        s += f",{a.scale!r}*t{a.slot}"
    return s


def format_circuit(c: Circuit) -> str:
    lines = [f"# qubits={c.n_qubits} params={c.n_params}"]
    for p in c.placements:
        ctrl = ",".join(f"{q}:{v}" for q, v in p.controls) or "-"
        if p.kind == "PERM":
            body = f"qubits={','.join(map(str, p.qubits))} table={','.join(map(str, p.table))}"
        else:
            body = f"target={p.target}"
            if p.angle is not None:
                body += f" angle={_format_angle(p.angle)}"
        lines.append(f"{p.kind} {body} controls={ctrl}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    header = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
    ps = []
    for ln in lines[1:]:
        kind, *fields = ln.split()
        kv = dict(f.split("=", 1) for f in fields)
        controls = ()
        if kv["controls"] != "-":
            controls = tuple(tuple(int(t) for t in c.split(":")) for c in kv["controls"].split(","))
        if kind == "PERM":
            ps.append(
                Placement(
                    kind,
                    None,
                    controls,
                    qubits=tuple(int(t) for t in kv["qubits"].split(",")),
                    table=tuple(int(t) for t in kv["table"].split(",")),
                )
            )
            continue
        angle = None
        if "angle" in kv:
            m = _ANGLE_RE.match(kv["angle"])
            if m is None:
                raise ValueError(f"malformed angle expression {kv['angle']!r}")
            angle = Angle(
                float(m["const"]),
                float(m["coef"]),
                int(m["feature"]),
                None if m["slot"] is None else int(m["slot"]),
                1.0 if m["scale"] is None else float(m["scale"]),
            )
        ps.append(Placement(kind, int(kv["target"]), controls, angle))
    return Circuit(int(header["qubits"]), tuple(ps), int(header["params"]))
