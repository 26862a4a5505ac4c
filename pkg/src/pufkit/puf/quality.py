"""Response quality metrics: bias, reliability, uniqueness and BER."""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ..exceptions import ParameterError
from .dataset import PufDataset

logger = logging.getLogger(__name__)


@dataclass
class QualityReport:
    """Quality metrics of one chip (and, optionally, its population)."""

    bias: float
    intra_hd: float
    per_cell_flip_prob: np.ndarray
    inter_hd: Optional[float] = None

    @property
    def unstable_cells(self) -> int:
        """Number of cells that flipped at least once at the reference condition."""
        return int(np.count_nonzero(self.per_cell_flip_prob))

    def to_dict(self) -> Dict[str, Any]:
        """Summary for JSON output; the per-cell vector is condensed."""
        return {
            'bias': self.bias,
            'intra_hd': self.intra_hd,
            'inter_hd': self.inter_hd,
            'num_cells': int(self.per_cell_flip_prob.size),
            'unstable_cells': self.unstable_cells,
            'max_flip_prob': float(self.per_cell_flip_prob.max(initial=0.0)),
        }


def reference_majority(dataset: PufDataset, label: str) -> np.ndarray:
    """Per-cell majority over all repeats at ``label``; ties resolve to 1."""
    data = dataset.repeats(label)
    ones = data.sum(axis=0, dtype=np.int64)
    return (2 * ones >= data.shape[0]).astype(np.uint8)


def measure_quality(
    dataset: PufDataset,
    reference_condition: str,
    population: Sequence[PufDataset] = (),
) -> QualityReport:
    """Compute bias, reliability and (for several chips) uniqueness.

    Args:
        dataset: The chip under test
        reference_condition: Condition whose per-cell majority is the reference
        population: Further chips of the same size; when given, ``inter_hd``
            is the mean pairwise distance of all chips' reference majorities

    Returns:
        QualityReport

    Raises:
        ConditionLookupError: If the reference condition is unknown
    """
    reference = reference_majority(dataset, reference_condition)
    data = dataset.repeats(reference_condition)
    flips = (data != reference[None, :]).mean(axis=0)

    total_ones = sum(int(dataset.repeats(label).sum(dtype=np.int64)) for label in dataset.labels)
    total_bits = sum(dataset.repeats(label).size for label in dataset.labels)

    inter_hd = None
    if population:
        chips = [dataset, *population]
        for other in population:
            if other.num_cells != dataset.num_cells:
                raise ParameterError("all chips must have the same number of cells")
        majorities = [reference_majority(chip, reference_condition) for chip in chips]
        distances = [
            float(np.mean(a != b)) for a, b in itertools.combinations(majorities, 2)
        ]
        inter_hd = float(np.mean(distances))

    report = QualityReport(
        bias=total_ones / total_bits,
        intra_hd=float(flips.mean()),
        per_cell_flip_prob=flips,
        inter_hd=inter_hd,
    )
    logger.debug(f"Quality of {dataset.chip_id}: {report.to_dict()}")
    return report


def compute_ber(
    reference: np.ndarray,
    mask: np.ndarray,
    dataset: PufDataset,
    condition: str,
    start: int = 0,
) -> float:
    """Mean normalized Hamming distance of the masked cells to ``reference``.

    Args:
        reference: Reference bits, one per masked cell
        mask: Ascending cell addresses
        dataset: Measurements to compare against
        condition: Condition label whose repeats are used
        start: First repeat index to use (earlier repeats are enrollment data)

    Returns:
        BER in [0, 1]

    Raises:
        ParameterError: On an empty mask or mismatched reference length
        ConditionLookupError: If the condition is unknown
    """
    addresses = np.asarray(mask, dtype=np.int64)
    if addresses.size == 0:
        raise ParameterError("mask selects no cells")
    ref = np.asarray(reference, dtype=np.uint8)
    if ref.shape != addresses.shape:
        raise ParameterError(
            f"reference has {ref.size} bits but mask selects {addresses.size} cells"
        )
    data = dataset.repeats(condition)
    if start >= data.shape[0]:
        raise ParameterError(
            f"no repeats left at {condition}: start={start}, repeats={data.shape[0]}"
        )
    return float((data[start:, addresses] != ref[None, :]).mean())
