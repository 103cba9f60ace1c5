"""Dense statevector simulation for the 8-qubit distillation circuit.

Qubit ``q0`` is the most significant bit of the basis index, so a state built
with ``np.kron(a, b)`` has ``a`` on the lower-numbered qubits. Pairs are
``(q0 q1) (q2 q3) (q4 q5) (q6 q7)``; Alice holds the even qubits, Bob the odd.

Circuits are plain text, one gate per line::

    H 0
    CNOT 0 1
    M 0

``#`` starts a comment. ``M q`` projects ``q`` onto a post-selected
computational-basis outcome (0 unless told otherwise) and renormalizes; the
qubit stays in the register.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bell import PauliOp

__all__ = [
    "ALICE",
    "BOB",
    "CircuitError",
    "Gate",
    "ImpossibleOutcomeError",
    "PAULI_MATRICES",
    "PauliString",
    "StateVector",
    "parse_circuit",
    "run_circuit",
]

ALICE = (0, 2, 4, 6)
BOB = (1, 3, 5, 7)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_MATRICES = {
    PauliOp.I: np.eye(2, dtype=complex),
    PauliOp.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliOp.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliOp.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


class CircuitError(ValueError):
    pass


class ImpossibleOutcomeError(RuntimeError):
    """A post-selected measurement branch has zero probability."""


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]

    def __str__(self) -> str:
        return " ".join([self.name, *map(str, self.qubits)])


class StateVector:
    """Pure state of ``n`` qubits; gate methods act in place and return ``self``."""

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError(f"length {amps.size} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        self.n_qubits = n
        self.amplitudes = amps

    @classmethod
    def zeros(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def _check(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise CircuitError(f"qubit {q} outside 0..{self.n_qubits - 1}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"repeated qubit in {qubits}")

    def apply_1q(self, matrix: np.ndarray, q: int) -> "StateVector":
        self._check(q)
        psi = np.tensordot(matrix, self._tensor(), axes=([1], [q]))
        self.amplitudes = np.moveaxis(psi, 0, q).reshape(-1)
        return self

    def h(self, q: int) -> "StateVector":
        return self.apply_1q(HADAMARD, q)

    def cnot(self, control: int, target: int) -> "StateVector":
        self._check(control, target)
        psi = self._tensor().copy()
        sel = [slice(None)] * self.n_qubits
        sel[control] = 1
        sub = psi[tuple(sel)]
        axis = target if target < control else target - 1
        psi[tuple(sel)] = np.flip(sub, axis=axis)
        self.amplitudes = psi.reshape(-1)
        return self

    def project(self, q: int, outcome: int) -> float:
        """Project ``q`` onto ``|outcome>``, renormalize, return the branch probability."""
        self._check(q)
        if outcome not in (0, 1):
            raise CircuitError(f"measurement outcome must be 0 or 1, got {outcome!r}")
        psi = self._tensor().copy()
        sel = [slice(None)] * self.n_qubits
        sel[q] = 1 - outcome
        psi[tuple(sel)] = 0.0
        prob = float(np.vdot(psi, psi).real)
        if prob < 1e-14:
            raise ImpossibleOutcomeError(f"outcome {outcome} on qubit {q} has probability {prob:.3g}")
        self.amplitudes = psi.reshape(-1) / np.sqrt(prob)
        return prob

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2

    def reduced_density_matrix(self, keep: Sequence[int]) -> np.ndarray:
        keep = list(keep)
        self._check(*keep)
        rest = [q for q in range(self.n_qubits) if q not in keep]
        t = np.transpose(self._tensor(), keep + rest).reshape(2 ** len(keep), -1)
        return t @ t.conj().T


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, phases kept."""

    ops: tuple[PauliOp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(PauliOp(o) for o in self.ops))

    @classmethod
    def on(cls, n_qubits: int, placement: Mapping[int, PauliOp | str]) -> "PauliString":
        ops = [PauliOp.I] * n_qubits
        for q, op in placement.items():
            ops[q] = PauliOp(op)
        return cls(tuple(ops))

    def apply(self, state: StateVector) -> StateVector:
        if len(self.ops) != state.n_qubits:
            raise ValueError(f"{len(self.ops)}-qubit Pauli on a {state.n_qubits}-qubit state")
        out = state.copy()
        for q, op in enumerate(self.ops):
            if op is not PauliOp.I:
                out.apply_1q(PAULI_MATRICES[op], q)
        return out

    def expectation(self, state: StateVector) -> float:
        return float(np.vdot(state.amplitudes, self.apply(state).amplitudes).real)

    def __str__(self) -> str:
        return "".join(op.value for op in self.ops)


def parse_circuit(text: str | Iterable[str]) -> list[Gate]:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    gates = []
    arity = {"H": 1, "CNOT": 2, "M": 1}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, *args = line.split()
        name = name.upper()
        if name not in arity:
            raise CircuitError(f"line {lineno}: unknown gate {name!r}")
        if len(args) != arity[name]:
            raise CircuitError(f"line {lineno}: {name} takes {arity[name]} qubit(s), got {len(args)}")
        try:
            qubits = tuple(int(a) for a in args)
        except ValueError:
            raise CircuitError(f"line {lineno}: bad qubit index in {line!r}") from None
        gates.append(Gate(name, qubits))
    return gates


def run_circuit(
    gates: str | Sequence[Gate],
    state: StateVector | None = None,
    n_qubits: int = 8,
    outcomes: Sequence[int] | None = None,
) -> tuple[StateVector, float]:
    """Run ``gates`` and return the post-selected state with its branch probability.

    ``outcomes`` lists the post-selected result of each ``M`` in order; the
    default selects 0 everywhere.
    """
    if isinstance(gates, str):
        gates = parse_circuit(gates)
    state = StateVector.zeros(n_qubits) if state is None else state.copy()
    n_meas = sum(g.name == "M" for g in gates)
    outcomes = [0] * n_meas if outcomes is None else list(outcomes)
    if len(outcomes) != n_meas:
        raise CircuitError(f"{n_meas} measurements but {len(outcomes)} outcomes given")
    prob = 1.0
    results = iter(outcomes)
    for g in gates:
        if g.name == "H":
            state.h(*g.qubits)
        elif g.name == "CNOT":
            state.cnot(*g.qubits)
        else:
            prob *= state.project(g.qubits[0], next(results))
    return state, prob
