"""Debiasing of raw response bits.

Pair-based schemes split the input into consecutive pairs (b_2i, b_2i+1):

* classic von Neumann (CVN): 01 emits 0, 10 emits 1, equal pairs vanish;
* pair-output von Neumann with erasures (2O-VN): unequal pairs emit both
  bits, equal pairs emit two erasure marks so positions stay aligned.

Both return the pair selection mask; re-applying a stored mask to a later
(noisy) measurement of the same cells reproduces the enrolled positions.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from ..exceptions import ParameterError
from ..utils.bits import as_bits

logger = logging.getLogger(__name__)

ERASURE = -1
SCHEMES = ('cvn', '2o-vn')


@dataclass(frozen=True)
class DebiasMeta:
    """Enrollment-time pair selection, reused on every reconstruction."""

    scheme: str
    pair_mask: np.ndarray

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown debias scheme {self.scheme!r}, expected one of {SCHEMES}")

    @property
    def output_bits(self) -> int:
        """Bits left once erasures/discarded pairs are removed."""
        kept = int(np.count_nonzero(self.pair_mask))
        return kept if self.scheme == 'cvn' else 2 * kept

    def __eq__(self, other) -> bool:
        if not isinstance(other, DebiasMeta):
            return NotImplemented
        return self.scheme == other.scheme and np.array_equal(self.pair_mask, other.pair_mask)

    def to_dict(self) -> Dict[str, Any]:
        return {'scheme': self.scheme, 'pair_mask': self.pair_mask.astype(int).tolist()}


def _pairs(bits: np.ndarray) -> np.ndarray:
    data = as_bits(bits)
    if data.size % 2:
        logger.warning(f"Odd input length {data.size}, dropping trailing bit")
        data = data[:-1]
    return data.reshape(-1, 2)


def debias_cvn(bits: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Classic von Neumann extractor.

    Returns:
        (output bits, boolean mask over input pairs marking kept pairs)
    """
    pairs = _pairs(bits)
    kept = pairs[:, 0] != pairs[:, 1]
    return pairs[kept, 0].copy(), kept


def debias_pair_output_vn(bits: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Pair-output von Neumann with erasures.

    Returns:
        (int8 output of the input's even length with ERASURE marks,
        boolean mask over input pairs marking kept pairs)
    """
    pairs = _pairs(bits)
    kept = pairs[:, 0] != pairs[:, 1]
    out = pairs.astype(np.int8)
    out[~kept] = ERASURE
    return out.reshape(-1), kept


def apply_pair_selection(bits: np.ndarray, meta: DebiasMeta) -> np.ndarray:
    """Re-apply a stored pair selection to another measurement of the same cells.

    Erasures are dropped, so the result is a plain bit-vector of
    ``meta.output_bits`` bits.
    """
    pairs = _pairs(bits)
    if pairs.shape[0] != meta.pair_mask.size:
        raise ParameterError(
            f"selection covers {meta.pair_mask.size} pairs, input has {pairs.shape[0]}"
        )
    selected = pairs[meta.pair_mask]
    if meta.scheme == 'cvn':
        return selected[:, 0].copy()
    return selected.reshape(-1).copy()


def select_pairs(bits: np.ndarray, scheme: str) -> DebiasMeta:
    """Compute the reusable pair selection of ``scheme`` on enrollment bits."""
    if scheme == 'cvn':
        _, kept = debias_cvn(bits)
    elif scheme == '2o-vn':
        _, kept = debias_pair_output_vn(bits)
    else:
        raise ParameterError(f"unknown debias scheme {scheme!r}, expected one of {SCHEMES}")
    return DebiasMeta(scheme, kept)


def debias_hw(blocks: np.ndarray, width: int, delta: float) -> np.ndarray:
    """Hamming-weight based block selection.

    Args:
        blocks: Either a flat bit-vector (cut into consecutive ``width``-bit
            blocks, a trailing partial block is ignored) or a (B, width) array
        width: Block width w >= 2
        delta: Accepted distance of the weight from w/2, 0 <= delta <= w/2

    Returns:
        Boolean mask over blocks; True where the weight lies in
        [w/2 - delta, w/2 + delta]
    """
    if width < 2:
        raise ParameterError("block width must be at least 2")
    if not 0 <= delta <= width / 2:
        raise ParameterError(f"delta must lie in [0, {width / 2}]")
    data = np.asarray(blocks, dtype=np.uint8)
    if data.ndim == 1:
        data = data[: (data.size // width) * width].reshape(-1, width)
    if data.ndim != 2 or data.shape[1] != width:
        raise ParameterError(f"blocks must have width {width}")
    weight = data.sum(axis=1, dtype=np.int64)
    return np.abs(weight - width / 2) <= delta


def debias_hw_bits(bits: np.ndarray, width: int, delta: float) -> np.ndarray:
    """Concatenation of the blocks kept by :func:`debias_hw`."""
    data = as_bits(bits)
    data = data[: (data.size // width) * width].reshape(-1, width)
    return data[debias_hw(data, width, delta)].reshape(-1)
