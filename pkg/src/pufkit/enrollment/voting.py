"""Majority voting and reliable-cell preselection."""

from typing import Sequence, Tuple, Union

import numpy as np

from ..exceptions import ParameterError

RepeatsLike = Union[np.ndarray, Sequence[np.ndarray]]


def _stack(repeats: RepeatsLike) -> np.ndarray:
    if isinstance(repeats, np.ndarray):
        data = repeats
    else:
        rows = [np.asarray(r, dtype=np.uint8) for r in repeats]
        if len({row.shape for row in rows}) > 1:
            raise ParameterError("repeats must all have the same length")
        data = np.stack(rows) if rows else np.zeros((0, 0), dtype=np.uint8)
    if data.ndim != 2:
        raise ParameterError("repeats must form a (q, cells) array")
    return data.astype(np.uint8, copy=False)


def majority_vote(repeats: RepeatsLike) -> np.ndarray:
    """Per-bit majority: bit i is 1 iff at least ceil(q/2) repeats have it set.

    Raises:
        ParameterError: If q is even or zero, or the repeats are ragged
    """
    data = _stack(repeats)
    q = data.shape[0]
    if q < 1 or q % 2 == 0:
        raise ParameterError(f"majority voting needs an odd number of repeats, got {q}")
    ones = data.sum(axis=0, dtype=np.int64)
    return (ones >= (q + 1) // 2).astype(np.uint8)


def preselect(repeats: RepeatsLike) -> Tuple[np.ndarray, np.ndarray]:
    """Keep only the cells on which all repeats agree.

    Returns:
        (ascending cell addresses, agreed bit values at those addresses)

    Raises:
        ParameterError: If fewer than two repeats are given
    """
    data = _stack(repeats)
    if data.shape[0] < 2:
        raise ParameterError(f"preselection needs at least 2 repeats, got {data.shape[0]}")
    stable = np.all(data == data[0], axis=0)
    mask = np.flatnonzero(stable).astype(np.int64)
    return mask, data[0, mask].copy()
