"""Closed-form distillation maps for BBPSSW and the [[4,2,2]] detection protocol.

Both maps take a Werner fidelity and return the post-selected output fidelity
together with the pass probability. Multi-round iteration re-reads the output
fidelity as a Werner fidelity (twirling between rounds is assumed, not
modelled).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from scipy.optimize import bisect

from .bell import _check_probability

__all__ = [
    "BracketError",
    "ChainPlan",
    "DistillationStep",
    "MultiRoundTrace",
    "Protocol",
    "TargetUnreachable",
    "YieldPoint",
    "bbpssw_step",
    "chain_plan",
    "edc_step",
    "find_crossover",
    "find_purification_threshold",
    "iterate",
    "rounds_to_target",
    "step",
    "yield_bbpssw",
    "yield_edc",
    "yield_point",
]

ROOT_XTOL = 1e-9
DEFAULT_MAX_ROUNDS = 64
CROSSOVER_BRACKET = (0.6, 0.7)
THRESHOLD_BRACKET = (0.55, 0.7)


class Protocol(str, Enum):
    BBPSSW = "BBPSSW"
    EDC = "EDC"


class BracketError(ValueError):
    """The root bracket has no sign change."""


class TargetUnreachable(ValueError):
    """Iteration does not reach the requested fidelity within ``max_rounds``."""


@dataclass(frozen=True)
class DistillationStep:
    f_out: float
    p_pass: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p_pass <= 1.0 + 1e-15:
            raise ValueError(f"pass probability out of range: {self.p_pass!r}")
        if not -1e-15 <= self.f_out <= 1.0 + 1e-15:
            raise ValueError(f"output fidelity out of range: {self.f_out!r}")

    @property
    def p_correct(self) -> float:
        return self.f_out * self.p_pass


@dataclass(frozen=True)
class MultiRoundTrace:
    protocol: Protocol
    fidelities: list[float]
    pass_probs: list[float] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.fidelities) - 1


@dataclass(frozen=True)
class ChainPlan:
    protocol: Protocol
    rounds: int
    pairs_required: int
    joint_pass_prob: float
    final_fidelity: float
    round_pass_probs: tuple[float, ...] = ()


@dataclass(frozen=True)
class YieldPoint:
    f_in: float
    y_edc: float
    y_bbpssw: float


def bbpssw_step(f_in: float) -> DistillationStep:
    f = _check_probability(f_in, "input fidelity")
    e = 1.0 - f
    p_pass = f * f + (2.0 / 3.0) * f * e + (5.0 / 9.0) * e * e
    return DistillationStep((f * f + e * e / 9.0) / p_pass, p_pass)


def edc_step(f_in: float) -> DistillationStep:
    """One 4 -> 2 application of the [[4,2,2]] detection protocol.

    The coefficients count passing (18, 24, 21) and harmless (4, 4, 7) error
    patterns of weight 2, 3 and 4 on the four transmitted qubits.
    """
    f = _check_probability(f_in, "input fidelity")
    e = 1.0 - f
    p_pass = (
        f**4
        + 18.0 * f**2 * e**2 / 9.0
        + 24.0 * f * e**3 / 27.0
        + 21.0 * e**4 / 81.0
    )
    p_correct = (
        f**4
        + 4.0 * f**2 * e**2 / 9.0
        + 4.0 * f * e**3 / 27.0
        + 7.0 * e**4 / 81.0
    )
    return DistillationStep(p_correct / p_pass, p_pass)


_STEPS: dict[Protocol, Callable[[float], DistillationStep]] = {
    Protocol.BBPSSW: bbpssw_step,
    Protocol.EDC: edc_step,
}


def step(protocol: Protocol | str, f_in: float) -> DistillationStep:
    return _STEPS[Protocol(protocol)](f_in)


def yield_edc(f_in: float) -> float:
    # 4 pairs in, 2 out
    return 0.5 * edc_step(f_in).p_pass


def yield_bbpssw(f_in: float) -> float:
    # two parallel 2 -> 1 runs that must both pass
    return 0.5 * bbpssw_step(f_in).p_pass ** 2


def yield_point(f_in: float) -> YieldPoint:
    return YieldPoint(f_in, yield_edc(f_in), yield_bbpssw(f_in))


def iterate(protocol: Protocol | str, f0: float, rounds: int) -> MultiRoundTrace:
    if rounds < 0:
        raise ValueError(f"rounds must be non-negative, got {rounds}")
    protocol = Protocol(protocol)
    fidelities = [_check_probability(f0, "initial fidelity")]
    pass_probs: list[float] = []
    for _ in range(rounds):
        s = step(protocol, fidelities[-1])
        # clamp float noise so the next round's domain check holds
        fidelities.append(min(1.0, max(0.0, s.f_out)))
        pass_probs.append(s.p_pass)
    return MultiRoundTrace(protocol, fidelities, pass_probs)


def rounds_to_target(
    protocol: Protocol | str,
    f_in: float,
    f_target: float,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> int:
    """Smallest number of rounds after which the fidelity reaches ``f_target``.

    Raises :class:`TargetUnreachable` when ``max_rounds`` is exhausted, which is
    what happens below the protocol's purification threshold.
    """
    protocol = Protocol(protocol)
    if not f_in < f_target <= 1.0:
        raise ValueError(f"need f_in < f_target <= 1, got {f_in!r} -> {f_target!r}")
    f = _check_probability(f_in, "input fidelity")
    for r in range(1, max_rounds + 1):
        f = min(1.0, step(protocol, f).f_out)
        if f >= f_target:
            return r
    raise TargetUnreachable(
        f"{protocol.value} does not reach {f_target} from {f_in} within {max_rounds} rounds"
    )


def chain_plan(
    protocol: Protocol | str,
    f_in: float,
    f_target: float,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> ChainPlan:
    """Resources needed to deliver two final pairs at ``f_target``.

    BBPSSW builds two binary trees of depth ``r``; every node must pass, so a
    round-``i`` pass probability enters ``2**(r + 1 - i)`` times. For EDC a
    single 4 -> 2 block suffices at ``r = 1``; deeper chains stack blocks the
    same way, ``2**(r - i)`` of them in round ``i``.
    """
    protocol = Protocol(protocol)
    r = rounds_to_target(protocol, f_in, f_target, max_rounds)
    trace = iterate(protocol, f_in, r)
    if protocol is Protocol.BBPSSW:
        joint = 1.0
        for i, p in enumerate(trace.pass_probs, start=1):
            joint *= p ** (2 ** (r + 1 - i))
        pairs = 2 ** (r + 1)
    else:
        # each extra EDC round needs two more 4 -> 2 blocks per output pair
        joint = _edc_tree_probability(trace.pass_probs)
        pairs = 4 * 2 ** (r - 1)
    return ChainPlan(
        protocol=protocol,
        rounds=r,
        pairs_required=pairs,
        joint_pass_prob=joint,
        final_fidelity=trace.fidelities[-1],
        round_pass_probs=tuple(trace.pass_probs),
    )


def _edc_tree_probability(pass_probs: list[float]) -> float:
    r = len(pass_probs)
    joint = 1.0
    for i, p in enumerate(pass_probs, start=1):
        joint *= p ** (2 ** (r - i))
    return joint


def _bisect_root(fn: Callable[[float], float], lo: float, hi: float) -> float:
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo:.3g}, f(hi)={f_hi:.3g}")
    return float(bisect(fn, lo, hi, xtol=ROOT_XTOL, rtol=4 * 2.220446049250313e-16, maxiter=200))


def find_crossover(bracket: tuple[float, float] = CROSSOVER_BRACKET) -> float:
    """Input fidelity above which the EDC output beats BBPSSW."""
    return _bisect_root(lambda f: edc_step(f).f_out - bbpssw_step(f).f_out, *bracket)


def find_purification_threshold(bracket: tuple[float, float] = THRESHOLD_BRACKET) -> float:
    """Smallest input fidelity the EDC protocol still improves.

    ``f = 1`` is also a fixed point, so the bracket must exclude it.
    """
    return _bisect_root(lambda f: edc_step(f).f_out - f, *bracket)
