"""Min-entropy accounting for syndrome helper data."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

from ..exceptions import ParameterError

logger = logging.getLogger(__name__)

BIAS_LOW = 0.42
BIAS_HIGH = 0.58


@dataclass
class EntropyReport:
    """Residual min-entropy after exposing the helper data."""

    response_bits: int
    helper_bits: int
    bias: float
    min_entropy_in: float
    residual_min_entropy: float
    key_bits: int
    key_flag: bool
    bias_flag: bool

    @property
    def per_bit_min_entropy(self) -> float:
        return self.min_entropy_in / self.response_bits if self.response_bits else 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['per_bit_min_entropy'] = self.per_bit_min_entropy
        return data


def entropy_report(response_bits: int, helper_bits: int, bias: float, key_bits: int = 128) -> EntropyReport:
    """Apply the n-k bound to biased response bits.

    Args:
        response_bits: Response bits consumed (L * n)
        helper_bits: Helper bits exposed (L * (n - k))
        bias: Fraction of ones in the response, in (0, 1)
        key_bits: Key length the residual must cover

    Returns:
        EntropyReport; ``key_flag`` when the residual is below key_bits,
        ``bias_flag`` when bias is outside [0.42, 0.58] (debias first)

    Raises:
        ParameterError: If bias is not strictly between 0 and 1
    """
    if not 0.0 < bias < 1.0:
        raise ParameterError(f"bias must lie strictly between 0 and 1, got {bias}")
    if response_bits < 0 or helper_bits < 0:
        raise ParameterError("bit counts must be non-negative")

    min_entropy_in = response_bits * -math.log2(max(bias, 1.0 - bias))
    residual = max(0.0, min_entropy_in - helper_bits)
    report = EntropyReport(
        response_bits=response_bits,
        helper_bits=helper_bits,
        bias=bias,
        min_entropy_in=min_entropy_in,
        residual_min_entropy=residual,
        key_bits=key_bits,
        key_flag=residual < key_bits,
        bias_flag=not BIAS_LOW <= bias <= BIAS_HIGH,
    )
    if report.key_flag:
        logger.warning(f"Residual min-entropy {residual:.1f} bits below key length {key_bits}")
    if report.bias_flag:
        logger.warning(f"Bias {bias:.4f} outside [{BIAS_LOW}, {BIAS_HIGH}], debiasing required")
    return report
