"""Entanglement distillation analysis for BBPSSW and the [[4,2,2]] detection protocol."""

__version__ = "0.1.0"

from .bell import (  # noqa: E402
    BellDiagonalState,
    ErrorPattern,
    PauliOp,
    Syndrome,
    depolarize_bell_pair,
    pattern_weight_probability,
    syndrome_of,
    werner_from_fidelity,
)
from .protocols import (  # noqa: E402
    Protocol,
    bbpssw_step,
    chain_plan,
    edc_step,
    find_crossover,
    find_purification_threshold,
    iterate,
    rounds_to_target,
    yield_bbpssw,
    yield_edc,
)
