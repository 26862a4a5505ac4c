"""Key failure rates of syndrome-based key generation.

block_failure:   P1 = 1 - F_B(t; n, ber), probability that one block has
                 more than t errors
key_failure_L:   P2 = 1 - (1 - P1)^L over L independent blocks
key_failure_mrr: P_fail = min_j P2_j over J reference responses
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy
from scipy.stats import binomtest

from ..exceptions import ParameterError

logger = logging.getLogger(__name__)


def _check_probability(value: float, name: str):
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")


def block_failure(n: int, t: int, ber: float) -> float:
    """Probability that an n-bit block with i.i.d. bit errors has more than t errors.

    The upper tail is summed term by term in log space with ``math.fsum``,
    so tiny failure rates keep their full relative precision.

    Args:
        n: Block length
        t: Correctable errors, 0 <= t < n
        ber: Bit error rate in [0, 1]

    Returns:
        P1 in [0, 1]

    Raises:
        ParameterError: If ber is outside [0, 1] or t is out of range
    """
    _check_probability(ber, "ber")
    if not 0 <= t < n:
        raise ParameterError(f"need 0 <= t < n, got t={t}, n={n}")
    if ber == 0.0:
        return 0.0
    if ber == 1.0:
        return 1.0

    i = np.arange(t + 1, n + 1, dtype=np.float64)
    log_terms = (
        gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
        + xlogy(i, ber) + xlog1py(n - i, -ber)
    )
    return min(1.0, math.fsum(np.exp(log_terms).tolist()))


def key_failure_L(p1: float, L: int) -> float:
    """P2 = 1 - (1 - p1)^L, evaluated as -expm1(L * log1p(-p1))."""
    _check_probability(p1, "p1")
    if L < 1:
        raise ParameterError(f"L must be at least 1, got {L}")
    if p1 == 1.0:
        return 1.0
    return -math.expm1(L * math.log1p(-p1))


def invert_key_failure_L(p2: float, L: int) -> float:
    """Per-block failure rate p1 that yields key failure p2 over L blocks."""
    _check_probability(p2, "p2")
    if L < 1:
        raise ParameterError(f"L must be at least 1, got {L}")
    if p2 == 1.0:
        return 1.0
    return -math.expm1(math.log1p(-p2) / L)


def key_failure_mrr(p2_list: Sequence[float]) -> float:
    """Conservative multi-reference failure rate: the smallest P2_j.

    The true failure probability of trying every reference is at most
    this value.
    """
    values = list(p2_list)
    if not values:
        raise ParameterError("need at least one P2 value")
    for value in values:
        _check_probability(value, "p2")
    return min(values)


@dataclass
class FailureBudget:
    """Ledger from per-reference BER to the key failure rate of one code."""

    per_reference_ber: List[float]
    code: Tuple[int, int, int]
    L: int
    p1: List[float] = field(default_factory=list)
    p2: List[float] = field(default_factory=list)
    p_fail: float = 1.0
    condition: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return {
            'condition': self.condition,
            'code': list(self.code),
            'L': self.L,
            'per_reference_ber': self.per_reference_ber,
            'p1': self.p1,
            'p2': self.p2,
            'p_fail': self.p_fail,
        }


def failure_budget(
    per_reference_ber: Sequence[float],
    code: Tuple[int, int, int],
    L: int,
    condition: str = '',
) -> FailureBudget:
    """Evaluate the P1 -> P2 -> P_fail chain for J references."""
    n, _, t = code
    bers = [float(b) for b in per_reference_ber]
    if not bers:
        raise ParameterError("need at least one reference BER")
    p1 = [block_failure(n, t, ber) for ber in bers]
    p2 = [key_failure_L(value, L) for value in p1]
    return FailureBudget(bers, tuple(code), L, p1, p2, key_failure_mrr(p2), condition)


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval of an empirical failure rate."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if not 0 <= failures <= trials:
        raise ParameterError("failures must lie in [0, trials]")
    ci = binomtest(failures, trials).proportion_ci(confidence_level=confidence, method='wilson')
    return float(ci.low), float(ci.high)
