"""Bell-diagonal state algebra, Pauli error patterns and the parity-check syndrome.

Population order throughout is (Phi+, Psi+, Phi-, Psi-). Pauli phases are
dropped here; the statevector simulator keeps them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

__all__ = [
    "BellDiagonalState",
    "ChannelParams",
    "ErrorPattern",
    "PauliOp",
    "Syndrome",
    "all_patterns",
    "dephase_pair",
    "depolarize_bell_pair",
    "pattern_weight_probability",
    "phase_flip_probability",
    "syndrome_of",
    "werner_from_fidelity",
]

_NORM_TOL = 1e-12


def _check_probability(value: float, name: str, upper: float = 1.0) -> float:
    value = float(value)
    if not (0.0 <= value <= upper) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, {upper:g}], got {value!r}")
    return value


class PauliOp(str, Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def x(self) -> int:
        return int(self in (PauliOp.X, PauliOp.Y))

    @property
    def z(self) -> int:
        return int(self in (PauliOp.Z, PauliOp.Y))

    @classmethod
    def from_bits(cls, x: int, z: int) -> "PauliOp":
        return {(0, 0): cls.I, (1, 0): cls.X, (0, 1): cls.Z, (1, 1): cls.Y}[(x & 1, z & 1)]

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        # product modulo phase
        return PauliOp.from_bits(self.x ^ other.x, self.z ^ other.z)


@dataclass(frozen=True)
class BellDiagonalState:
    p_phi_plus: float
    p_psi_plus: float
    p_phi_minus: float
    p_psi_minus: float

    def __post_init__(self) -> None:
        probs = self.as_tuple()
        if any(p < 0.0 for p in probs):
            raise ValueError(f"negative Bell population in {probs}")
        if abs(sum(probs) - 1.0) > _NORM_TOL:
            raise ValueError(f"Bell populations sum to {sum(probs)!r}, not 1")

    @property
    def fidelity(self) -> float:
        return self.p_phi_plus

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_phi_plus, self.p_psi_plus, self.p_phi_minus, self.p_psi_minus)


class Syndrome(tuple):
    """Parity-check outcome ``(s0, s1)``.

    ``s0`` flags an odd number of bit flips (seen by the Z-type check) and
    ``s1`` an odd number of phase flips (seen by the X-type check).
    """

    def __new__(cls, s0: int, s1: int) -> "Syndrome":
        return super().__new__(cls, (int(s0) & 1, int(s1) & 1))

    @property
    def s0(self) -> int:
        return self[0]

    @property
    def s1(self) -> int:
        return self[1]

    @property
    def passed(self) -> bool:
        return self == (0, 0)

    def __xor__(self, other: "Syndrome") -> "Syndrome":
        return Syndrome(self[0] ^ other[0], self[1] ^ other[1])

    def describe(self) -> str:
        return {
            (0, 0): "pass",
            (0, 1): "fail: possible Z error",
            (1, 0): "fail: possible X error",
            (1, 1): "fail: possible Y error, or X and Z errors on different pairs",
        }[tuple(self)]


@dataclass(frozen=True)
class ErrorPattern:
    """One Pauli per transmitted qubit, i.e. Bob's halves q1, q3, q5, q7."""

    ops: tuple[PauliOp, PauliOp, PauliOp, PauliOp]

    def __post_init__(self) -> None:
        ops = tuple(PauliOp(op) for op in self.ops)
        if len(ops) != 4:
            raise ValueError(f"an error pattern has exactly 4 entries, got {len(ops)}")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def parse(cls, text: str | Sequence[str]) -> "ErrorPattern":
        return cls(tuple(PauliOp(c) for c in text))

    @property
    def weight(self) -> int:
        return sum(op is not PauliOp.I for op in self.ops)

    def __mul__(self, other: "ErrorPattern") -> "ErrorPattern":
        return ErrorPattern(tuple(a * b for a, b in zip(self.ops, other.ops)))

    def __str__(self) -> str:
        return "".join(op.value for op in self.ops)


@dataclass(frozen=True)
class ChannelParams:
    p_depol: float = 0.0
    q_z: float = 0.0

    def __post_init__(self) -> None:
        _check_probability(self.p_depol, "p_depol")
        _check_probability(self.q_z, "q_z", upper=0.5)


def all_patterns() -> Iterator[ErrorPattern]:
    """All 256 four-qubit patterns in lexicographic I < X < Y < Z order."""
    for ops in itertools.product(PauliOp, repeat=4):
        yield ErrorPattern(ops)


def werner_from_fidelity(f: float) -> BellDiagonalState:
    f = _check_probability(f, "fidelity")
    rest = (1.0 - f) / 3.0
    return BellDiagonalState(f, rest, rest, rest)


def depolarize_bell_pair(p: float) -> BellDiagonalState:
    """Send one half of |Phi+> through a depolarizing channel.

    X, Y and Z on one qubit take Phi+ to Psi+, Psi- and Phi- respectively, so
    the result is Werner with fidelity ``1 - p``.
    """
    p = _check_probability(p, "depolarizing probability")
    return BellDiagonalState(1.0 - p, p / 3.0, p / 3.0, p / 3.0)


def phase_flip_probability(t: float) -> float:
    """Per-qubit phase-flip probability after normalized storage time ``t``."""
    if t < 0:
        raise ValueError(f"storage time must be non-negative, got {t!r}")
    return 0.5 * (1.0 - math.exp(-t))


def dephase_pair(state: BellDiagonalState, q_z: float) -> BellDiagonalState:
    """Independent phase flips with probability ``q_z`` on both qubits of a pair.

    A single Z swaps Phi+ with Phi- and Psi+ with Psi-; two cancel.
    """
    q_z = _check_probability(q_z, "q_z", upper=0.5)
    swap = 2.0 * q_z * (1.0 - q_z)
    keep = 1.0 - swap
    pp, sp, pm, sm = state.as_tuple()
    return BellDiagonalState(
        keep * pp + swap * pm,
        keep * sp + swap * sm,
        keep * pm + swap * pp,
        keep * sm + swap * sp,
    )


def syndrome_of(pattern: ErrorPattern) -> Syndrome:
    s0 = sum(op.x for op in pattern.ops) & 1
    s1 = sum(op.z for op in pattern.ops) & 1
    return Syndrome(s0, s1)


def pattern_weight_probability(pattern: ErrorPattern, f: float) -> float:
    """Probability of ``pattern`` when every pair is an independent Werner state."""
    f = _check_probability(f, "fidelity")
    w = pattern.weight
    return f ** (4 - w) * ((1.0 - f) / 3.0) ** w
