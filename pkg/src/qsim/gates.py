"""Elementary gates, circuits, and their text serialization.

A gate is a 2x2 unitary together with an embedding that places it in the
register unitary group: on one wire (WireGate), on a target wire controlled
by a bit pattern on all other wires (ControlledGate), on a target wire
controlled only by the trailing wires (SuffixControlledGate), or mixing two
basis coordinates of the ambient space directly (TwoLevelGate).

Wires are numbered 1..n with wire 1 the leftmost Kronecker factor. A
circuit applies its gates in sequence order, so the realized matrix is the
reversed product: gates[k-1] @ ... @ gates[0].
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .algprob import DensityMatrix
from .linalg import as_matrix, identity, is_unitary
from .qpu import evolve

GATE_UNITARY_TOL = 1e-10
REDUCED_TOL = 1e-10


class CircuitParseError(ValueError):
    """Raised when circuit or factor text cannot be parsed."""


def rotation(alpha: float) -> np.ndarray:
    """The plane rotation [[cos a, -sin a], [sin a, cos a]]."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _check_block(v) -> np.ndarray:
    v = np.array(v, dtype=np.complex128)
    if v.shape != (2, 2):
        raise ValueError(f"gate block must be 2x2, got {v.shape}")
    if not is_unitary(v, GATE_UNITARY_TOL):
        raise ValueError("gate block is not unitary within tolerance")
    v.setflags(write=False)
    return v


def _check_bits(bits) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"control pattern {bits} contains non-bits")
    return bits


@dataclass(frozen=True, eq=False)
class WireGate:
    """v acting on wire j, identity elsewhere.

    angle records that v is rotation(angle), when built that way, so the
    serializer can emit the compact ROT form.
    """

    n: int
    j: int
    v: np.ndarray
    angle: float | None = None

    def __post_init__(self):
        if not 1 <= self.j <= self.n:
            raise ValueError(f"wire {self.j} out of range for n={self.n}")
        object.__setattr__(self, "v", _check_block(self.v))


@dataclass(frozen=True, eq=False)
class ControlledGate:
    """v on wire target iff every other wire matches the control pattern.

    pattern lists the control bits of wires 1..n skipping the target, in
    wire order (length n-1).
    """

    n: int
    target: int
    pattern: tuple[int, ...]
    v: np.ndarray

    def __post_init__(self):
        if not 1 <= self.target <= self.n:
            raise ValueError(f"target {self.target} out of range for n={self.n}")
        object.__setattr__(self, "pattern", _check_bits(self.pattern))
        if len(self.pattern) != self.n - 1:
            raise ValueError(
                f"pattern length {len(self.pattern)} != n-1 = {self.n - 1}"
            )
        object.__setattr__(self, "v", _check_block(self.v))


@dataclass(frozen=True, eq=False)
class SuffixControlledGate:
    """v on wire n-stage+1, controlled by the last stage-1 wires.

    Wires 1..n-stage are untouched (identity factor); suffix lists the
    control bits of wires n-stage+2..n in wire order. stage ranges over
    2..n; at stage = n this degenerates to a fully controlled gate with
    target wire 1.
    """

    n: int
    stage: int
    suffix: tuple[int, ...]
    v: np.ndarray
    angle: float | None = None

    def __post_init__(self):
        if not 2 <= self.stage <= self.n:
            raise ValueError(f"stage {self.stage} out of range for n={self.n}")
        object.__setattr__(self, "suffix", _check_bits(self.suffix))
        if len(self.suffix) != self.stage - 1:
            raise ValueError(
                f"suffix length {len(self.suffix)} != stage-1 = {self.stage - 1}"
            )
        object.__setattr__(self, "v", _check_block(self.v))

    @property
    def target(self) -> int:
        return self.n - self.stage + 1


@dataclass(frozen=True, eq=False)
class TwoLevelGate:
    """Identity except a 2x2 block mixing basis coordinates i < j (1-based).

    dim is the ambient dimension; inside a circuit it must equal 2^n.
    """

    dim: int
    i: int
    j: int
    v: np.ndarray

    def __post_init__(self):
        if not 1 <= self.i < self.j <= self.dim:
            raise ValueError(
                f"coordinates ({self.i}, {self.j}) invalid for dim {self.dim}"
            )
        object.__setattr__(self, "v", _check_block(self.v))


GateSpec = Union[WireGate, ControlledGate, SuffixControlledGate, TwoLevelGate]


def wire_gate(n: int, j: int, v) -> np.ndarray:
    """Realize v on wire j of an n-wire register."""
    g = WireGate(n=n, j=j, v=v)
    return realize_gate(g)


def control_projector(n: int, ell: int, z, v) -> np.ndarray:
    """The (non-unitary) building block that applies v on wire ell when the
    other wires match z, and annihilates every non-matching component.

    z lists the bits of wires 1..n skipping ell, in wire order. v may be an
    arbitrary 2x2 block here; no unitarity is required.
    """
    if not 1 <= ell <= n:
        raise ValueError(f"target {ell} out of range for n={n}")
    z = _check_bits(z)
    if len(z) != n - 1:
        raise ValueError(f"pattern length {len(z)} != n-1 = {n - 1}")
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (2, 2):
        raise ValueError(f"block must be 2x2, got {v.shape}")
    basis = (
        np.array([[1, 0], [0, 0]], dtype=np.complex128),
        np.array([[0, 0], [0, 1]], dtype=np.complex128),
    )
    out = np.ones((1, 1), dtype=np.complex128)
    bit_iter = iter(z)
    for wire in range(1, n + 1):
        factor = v if wire == ell else basis[next(bit_iter)]
        out = np.kron(out, factor)
    return out


def _pattern_base_index(n: int, ell: int, z: tuple[int, ...]) -> int:
    """Flat index contribution of the control bits (target bit zero)."""
    base = 0
    bit_iter = iter(z)
    for wire in range(1, n + 1):
        if wire == ell:
            continue
        base += next(bit_iter) << (n - wire)
    return base


def controlled_gate(n: int, ell: int, z, v) -> np.ndarray:
    """Unitary applying v on wire ell iff the other n-1 wires match z.

    Built directly as a two-level modification of the identity: only the
    two basis indices whose non-target bits match z are mixed by v.
    """
    if not 1 <= ell <= n:
        raise ValueError(f"target {ell} out of range for n={n}")
    z = _check_bits(z)
    if len(z) != n - 1:
        raise ValueError(f"pattern length {len(z)} != n-1 = {n - 1}")
    v = _check_block(v)
    out = identity(2**n)
    base = _pattern_base_index(n, ell, z)
    step = 1 << (n - ell)
    t0, t1 = base, base + step
    out[t0, t0] = v[0, 0]
    out[t0, t1] = v[0, 1]
    out[t1, t0] = v[1, 0]
    out[t1, t1] = v[1, 1]
    return out


def suffix_controlled_gate(n: int, stage: int, suffix, v) -> np.ndarray:
    """Realize a SuffixControlledGate: identity on the first n-stage wires,
    then v on the next wire controlled by the trailing stage-1 wires."""
    g = SuffixControlledGate(n=n, stage=stage, suffix=suffix, v=v)
    return realize_gate(g)


def realize_gate(g: GateSpec) -> np.ndarray:
    """Dense matrix of a single gate."""
    if isinstance(g, WireGate):
        left = identity(2 ** (g.j - 1))
        right = identity(2 ** (g.n - g.j))
        return np.kron(np.kron(left, g.v), right)
    if isinstance(g, ControlledGate):
        return controlled_gate(g.n, g.target, g.pattern, g.v)
    if isinstance(g, SuffixControlledGate):
        block = controlled_gate(g.stage, 1, g.suffix, g.v)
        return np.kron(identity(2 ** (g.n - g.stage)), block)
    if isinstance(g, TwoLevelGate):
        out = identity(g.dim)
        i, j = g.i - 1, g.j - 1
        out[i, i] = g.v[0, 0]
        out[i, j] = g.v[0, 1]
        out[j, i] = g.v[1, 0]
        out[j, j] = g.v[1, 1]
        return out
    raise TypeError(f"not a gate spec: {g!r}")


def _gate_dim(g: GateSpec) -> int:
    return g.dim if isinstance(g, TwoLevelGate) else 2**g.n


@dataclass(frozen=True, eq=False)
class Circuit:
    """Ordered gate sequence on n wires; gates[0] acts first.

    With strict=True, adjacent gates whose product is the identity (within
    REDUCED_TOL) are rejected, enforcing that the written-out sequence has
    no trivially cancelling neighbors.
    """

    n: int
    gates: tuple[GateSpec, ...] = field(default_factory=tuple)
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        dim = 2**self.n
        for g in self.gates:
            if _gate_dim(g) != dim:
                raise ValueError(
                    f"gate {g!r} acts on dim {_gate_dim(g)}, circuit needs {dim}"
                )
        if self.strict:
            for a, b in zip(self.gates, self.gates[1:]):
                prod = realize_gate(b) @ realize_gate(a)
                if float(np.linalg.norm(prod - identity(dim))) <= REDUCED_TOL:
                    raise ValueError(
                        "adjacent gates cancel to the identity (not reduced)"
                    )


def circuit_length(c: Circuit) -> int:
    """Number of elementary gates; the identity (empty) circuit has 0."""
    return len(c.gates)


def realize(c: Circuit) -> np.ndarray:
    """Dense matrix of the whole circuit: last gate leftmost."""
    out = identity(2**c.n)
    for g in c.gates:
        out = realize_gate(g) @ out
    return out


def apply(c: Circuit, rho: DensityMatrix) -> DensityMatrix:
    """Evolve a state through the circuit gate by gate."""
    for g in c.gates:
        rho = evolve(realize_gate(g), rho)
    return rho


def apply_vector(c: Circuit, psi) -> np.ndarray:
    """Apply the circuit to a state vector gate by gate."""
    psi = np.asarray(psi, dtype=np.complex128)
    for g in c.gates:
        psi = realize_gate(g) @ psi
    return psi


# --- serialization ---------------------------------------------------------
#
# Line-oriented text, one gate per line, '#' comments and blank lines
# ignored. Floats print with 17 significant digits so parsing reproduces
# every bit. Grammar (bit patterns are contiguous 0/1 strings, '-' when
# empty):
#
#   QSIM-CIRCUIT v1 n=<int>
#   ROT <wire> <alpha>
#   WIRE <wire> <8 floats: re im re im re im re im, row-major 2x2>
#   CTRL <target> <pattern over the other n-1 wires> <8 floats>
#   SUFFIX-CTRL <stage> <suffix over the last stage-1 wires> <8 floats>
#   TWO-LEVEL <i> <j> <8 floats>

_HEADER_RE = re.compile(r"^QSIM-CIRCUIT v1 n=(\d+)$")


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def _format_block(v: np.ndarray) -> str:
    parts = []
    for row in range(2):
        for col in range(2):
            parts.append(_format_float(float(v[row, col].real)))
            parts.append(_format_float(float(v[row, col].imag)))
    return " ".join(parts)


def _parse_block(parts: list[str]) -> np.ndarray:
    if len(parts) != 8:
        raise CircuitParseError(f"expected 8 block numbers, got {len(parts)}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise CircuitParseError(f"bad float in gate block: {exc}") from exc
    return np.array(
        [
            [complex(vals[0], vals[1]), complex(vals[2], vals[3])],
            [complex(vals[4], vals[5]), complex(vals[6], vals[7])],
        ]
    )


def _format_bits(bits: tuple[int, ...]) -> str:
    return "".join(str(b) for b in bits) if bits else "-"


def _parse_bits(token: str) -> tuple[int, ...]:
    if token == "-":
        return ()
    if not all(ch in "01" for ch in token):
        raise CircuitParseError(f"bad bit pattern {token!r}")
    return tuple(int(ch) for ch in token)


def format_gate(g: GateSpec) -> str:
    """One serialized line for a gate."""
    if isinstance(g, WireGate):
        if g.angle is not None:
            return f"ROT {g.j} {_format_float(g.angle)}"
        return f"WIRE {g.j} {_format_block(g.v)}"
    if isinstance(g, ControlledGate):
        return f"CTRL {g.target} {_format_bits(g.pattern)} {_format_block(g.v)}"
    if isinstance(g, SuffixControlledGate):
        return (
            f"SUFFIX-CTRL {g.stage} {_format_bits(g.suffix)} {_format_block(g.v)}"
        )
    if isinstance(g, TwoLevelGate):
        return f"TWO-LEVEL {g.i} {g.j} {_format_block(g.v)}"
    raise TypeError(f"not a gate spec: {g!r}")


def parse_gate(line: str, n: int) -> GateSpec:
    """Parse one gate line for an n-wire circuit."""
    parts = line.split()
    if not parts:
        raise CircuitParseError("empty gate line")
    kind = parts[0]
    try:
        if kind == "ROT":
            if len(parts) != 3:
                raise CircuitParseError(f"ROT needs wire and angle: {line!r}")
            wire = int(parts[1])
            alpha = float(parts[2])
            return WireGate(n=n, j=wire, v=rotation(alpha), angle=alpha)
        if kind == "WIRE":
            return WireGate(n=n, j=int(parts[1]), v=_parse_block(parts[2:]))
        if kind == "CTRL":
            return ControlledGate(
                n=n,
                target=int(parts[1]),
                pattern=_parse_bits(parts[2]),
                v=_parse_block(parts[3:]),
            )
        if kind == "SUFFIX-CTRL":
            return SuffixControlledGate(
                n=n,
                stage=int(parts[1]),
                suffix=_parse_bits(parts[2]),
                v=_parse_block(parts[3:]),
            )
        if kind == "TWO-LEVEL":
            return TwoLevelGate(
                dim=2**n,
                i=int(parts[1]),
                j=int(parts[2]),
                v=_parse_block(parts[3:]),
            )
    except CircuitParseError:
        raise
    except (ValueError, IndexError) as exc:
        raise CircuitParseError(f"bad gate line {line!r}: {exc}") from exc
    raise CircuitParseError(f"unknown gate kind {kind!r}")


def format_circuit(c: Circuit) -> str:
    """Full text form: header line then one line per gate."""
    lines = [f"QSIM-CIRCUIT v1 n={c.n}"]
    lines.extend(format_gate(g) for g in c.gates)
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Inverse of format_circuit; '#' comments and blank lines are skipped."""
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise CircuitParseError("missing circuit header")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise CircuitParseError(f"bad circuit header {lines[0]!r}")
    n = int(m.group(1))
    if n < 1:
        raise CircuitParseError(f"bad qubit count {n}")
    gates = [parse_gate(ln, n) for ln in lines[1:]]
    return Circuit(n=n, gates=tuple(gates))
