"""Simulation-backed oracles for the [[4,2,2]] distillation protocol.

Everything here is derived from the 8-qubit statevector, never from the
closed-form maps, so the two can be checked against each other.

Code conventions: stabilizers ``XXXX`` and ``ZZZZ`` on each party's block,
logical operators ``X1 = XXII, Z1 = ZIZI, X2 = XIXI, Z2 = ZZII``. The encoder
takes logical qubit 1 on block position 2 and logical qubit 2 on block
position 1, with ancillas in ``|0>`` on positions 0 and 3. After decoding,
the logical Bell pairs therefore sit on ``(q4 q5)`` and ``(q2 q3)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .bell import ErrorPattern, PauliOp, _check_probability, all_patterns, pattern_weight_probability
from .statevector import (
    ALICE,
    BOB,
    Gate,
    PauliString,
    StateVector,
    parse_circuit,
    run_circuit,
)

__all__ = [
    "LOGICAL_PAIRS",
    "PREPARATION_CIRCUIT",
    "EnumerationResult",
    "PatternClass",
    "apply_error_pattern",
    "bell_pair_circuit",
    "build_logical_state",
    "classify_patterns",
    "decode",
    "decoder_circuit",
    "dephase_logical_state",
    "encode",
    "encoder_circuit",
    "enumerate_edc_oracle",
    "pair_fidelity",
    "random_unitaries",
    "run_encoding_circuit",
    "stabilizer",
    "stabilizing_z_fraction",
    "transpose_identity_check",
    "two_bell_pair_fidelity",
]

LOGICAL_PAIRS = ((4, 5), (2, 3))
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)

_TOL = 1e-10


def bell_pair_circuit(a: int, b: int) -> str:
    return f"H {a}\nCNOT {a} {b}\n"


def _parity_readout(block: Sequence[int]) -> str:
    # CNOT fan-out turns X on the head qubit into X on the whole block, so
    # H/M/H on the head between two fan-outs projects onto XXXX = +1.
    head, *rest = block
    fan = "".join(f"CNOT {head} {q}\n" for q in rest)
    return fan + f"H {head}\nM {head}\nH {head}\n" + fan


PREPARATION_CIRCUIT = (
    "# four Phi+ pairs\n"
    + "".join(bell_pair_circuit(a, b) for a, b in zip(ALICE, BOB))
    + "# Alice: X-type parity of q0 q2 q4 q6\n"
    + _parity_readout(ALICE)
    + "# Bob: X-type parity of q1 q3 q5 q7\n"
    + _parity_readout(BOB)
)


def encoder_circuit(block: Sequence[int]) -> str:
    b0, b1, b2, b3 = block
    return (
        f"CNOT {b1} {b3}\nCNOT {b2} {b3}\nH {b0}\n"
        f"CNOT {b0} {b1}\nCNOT {b0} {b2}\nCNOT {b0} {b3}\n"
    )


def decoder_circuit(block: Sequence[int]) -> str:
    # every gate is self-inverse
    return "\n".join(reversed(encoder_circuit(block).strip().splitlines())) + "\n"


def _kron_pairs(pairs: Sequence[np.ndarray]) -> np.ndarray:
    out = pairs[0]
    for p in pairs[1:]:
        out = np.kron(out, p)
    return out


def build_logical_state() -> StateVector:
    """``(|Phi+>^4 + |Psi+>^4) / sqrt(2)`` on pairs (q0 q1)(q2 q3)(q4 q5)(q6 q7)."""
    amps = _kron_pairs([PHI_PLUS] * 4) + _kron_pairs([PSI_PLUS] * 4)
    return StateVector(amps, normalize=True)


def run_encoding_circuit(
    gates: str | Sequence[Gate] = PREPARATION_CIRCUIT,
    outcomes: Sequence[int] | None = None,
) -> StateVector:
    """Run the preparation circuit from ``|0...0>`` and keep the passing branch.

    The passing branch is all measurements reading 0 unless ``outcomes`` says
    otherwise. Raises ``ImpossibleOutcomeError`` when the branch cannot occur.
    """
    state, _ = run_circuit(gates, n_qubits=8, outcomes=outcomes)
    return state


def encode(state: StateVector) -> StateVector:
    out, _ = run_circuit(encoder_circuit(ALICE) + encoder_circuit(BOB), state)
    return out


def decode(state: StateVector) -> StateVector:
    out, _ = run_circuit(decoder_circuit(ALICE) + decoder_circuit(BOB), state)
    return out


def pair_fidelity(state: StateVector, pair: tuple[int, int]) -> float:
    rho = state.reduced_density_matrix(pair)
    return float(np.real(PHI_PLUS.conj() @ rho @ PHI_PLUS))


def two_bell_pair_fidelity(state: StateVector) -> float:
    """Fidelity of the decoded logical pairs with ``|Phi+> |Phi+>``."""
    (a1, b1), (a2, b2) = LOGICAL_PAIRS
    rho = state.reduced_density_matrix([a2, b2, a1, b1])
    target = np.kron(PHI_PLUS, PHI_PLUS)
    return float(np.real(target.conj() @ rho @ target))


def stabilizer(kind: PauliOp | str, qubits: Sequence[int], n_qubits: int = 8) -> PauliString:
    return PauliString.on(n_qubits, {q: kind for q in qubits})


def apply_error_pattern(state: StateVector, pattern: ErrorPattern) -> StateVector:
    return PauliString.on(state.n_qubits, dict(zip(BOB, pattern.ops))).apply(state)


def transpose_identity_check(u: np.ndarray) -> bool:
    """Check ``(U x I)|Phi+> == (I x U^T)|Phi+>`` amplitude by amplitude."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(2), atol=_TOL, rtol=0):
        raise ValueError("matrix is not unitary")
    left = StateVector(PHI_PLUS).apply_1q(u, 0)
    right = StateVector(PHI_PLUS).apply_1q(u.T, 1)
    return bool(np.max(np.abs(left.amplitudes - right.amplitudes)) <= _TOL)


def random_unitaries(count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [unitary_group.rvs(2, random_state=rng) for _ in range(count)]


@dataclass(frozen=True)
class PatternClass:
    pattern: ErrorPattern
    passed: bool
    correct: bool
    # syndrome bits read off the simulated joint parities
    s0: int
    s1: int


@functools.lru_cache(maxsize=None)
def _classification(pair_index: int) -> tuple[PatternClass, ...]:
    logical = build_logical_state()
    x_check = stabilizer(PauliOp.X, range(8))
    z_check = stabilizer(PauliOp.Z, range(8))
    pair = LOGICAL_PAIRS[pair_index]
    classes = []
    for pattern in all_patterns():
        noisy = apply_error_pattern(logical, pattern)
        # joint parities are +-1 exactly for Pauli errors
        s0 = int(z_check.expectation(noisy) < 0)
        s1 = int(x_check.expectation(noisy) < 0)
        passed = s0 == 0 and s1 == 0
        correct = passed and pair_fidelity(decode(noisy), pair) > 1 - _TOL
        classes.append(PatternClass(pattern, passed, correct, s0, s1))
    return tuple(classes)


def classify_patterns(pair_index: int = 0) -> tuple[PatternClass, ...]:
    """Simulate all 256 Bob-side patterns on the logical state.

    A pattern passes when both joint parities ``X^8`` and ``Z^8`` (Alice's
    stabilizer outcome xor Bob's) stay at +1. It is correct when it passes and
    the decoded logical pair ``LOGICAL_PAIRS[pair_index]`` is still ``Phi+``.
    """
    return _classification(pair_index)


@dataclass
class EnumerationResult:
    pass_prob: float
    correct_prob: float
    class_counts: dict[tuple[int, str], int] = field(default_factory=dict)

    @property
    def f_out(self) -> float:
        return self.correct_prob / self.pass_prob

    def by_weight(self) -> dict[int, tuple[int, int]]:
        """``{weight: (passing, correct)}`` pattern counts."""
        out: dict[int, tuple[int, int]] = {}
        for (w, label), n in self.class_counts.items():
            passing, correct = out.get(w, (0, 0))
            if label != "rejected":
                passing += n
            if label == "accepted_correct":
                correct += n
            out[w] = (passing, correct)
        return dict(sorted(out.items()))


def enumerate_edc_oracle(f: float, pair_index: int = 0) -> EnumerationResult:
    f = _check_probability(f, "fidelity")
    result = EnumerationResult(0.0, 0.0)
    pass_terms, correct_terms = [], []
    for cls in classify_patterns(pair_index):
        label = "rejected"
        if cls.passed:
            label = "accepted_correct" if cls.correct else "accepted_error"
            weight = pattern_weight_probability(cls.pattern, f)
            pass_terms.append(weight)
            if cls.correct:
                correct_terms.append(weight)
        key = (cls.pattern.weight, label)
        result.class_counts[key] = result.class_counts.get(key, 0) + 1
    result.pass_prob = float(np.sum(pass_terms))
    result.correct_prob = float(np.sum(correct_terms))
    return result


@functools.lru_cache(maxsize=None)
def _z_pattern_overlaps() -> tuple[np.ndarray, np.ndarray]:
    """Weight and ``|<psi|Z_m|psi>|^2`` for every 8-qubit Z-pattern ``m``."""
    probs = np.abs(build_logical_state().amplitudes) ** 2
    basis = np.arange(256)
    weights = np.empty(256, dtype=int)
    overlaps = np.empty(256)
    for m in range(256):
        parity = np.array([bin(b & m).count("1") & 1 for b in basis])
        overlaps[m] = np.dot(probs, 1 - 2 * parity) ** 2
        weights[m] = bin(m).count("1")
    return weights, overlaps


def dephase_logical_state(t: float) -> float:
    """Fidelity of the stored logical state after normalized time ``t``.

    Every one of the 8 qubits takes an independent phase flip with
    probability ``(1 - exp(-t)) / 2``. Experimental: the exact stored-state
    decay law is not available, so this is a model, not a reproduction.
    """
    if t < 0:
        raise ValueError(f"storage time must be non-negative, got {t!r}")
    q = 0.5 * (1.0 - np.exp(-t))
    weights, overlaps = _z_pattern_overlaps()
    probs = q**weights * (1.0 - q) ** (8 - weights)
    return float(np.dot(probs, overlaps))


def stabilizing_z_fraction() -> float:
    """Fraction of Z-patterns that leave the logical state unchanged (the ``t -> inf`` limit)."""
    _, overlaps = _z_pattern_overlaps()
    return float(np.count_nonzero(overlaps > 1 - _TOL)) / overlaps.size
