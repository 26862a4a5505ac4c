"""Server-side enrollment: challenge selection and reference responses."""

import base64
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..analytics.debias import DebiasMeta, apply_pair_selection, select_pairs
from ..exceptions import FormatError, ParameterError
from ..puf.dataset import PufDataset
from ..utils.bits import pack_lsb, unpack_lsb
from .voting import majority_vote, preselect

logger = logging.getLogger(__name__)

RECORD_VERSION = 1
STRATEGIES = ('none', 'mv', 'presel', 'presel+mv')
REFERENCE_STRATEGIES = ('none', 'mv', 'presel')


@dataclass(frozen=True)
class EnrollmentPlan:
    """How to turn a dataset into an enrollment record.

    ``strategy`` applies to the reference condition. References at the
    other conditions are majority votes over ``mv_repeats`` repeats,
    restricted to the reference-condition mask.
    """

    reference_condition: str
    other_conditions: Tuple[str, ...] = ()
    presel_repeats: int = 10
    mv_repeats: int = 9
    strategy: str = 'presel'
    debias: Optional[str] = None

    def __post_init__(self):
        if self.strategy not in REFERENCE_STRATEGIES:
            raise ParameterError(
                f"reference strategy must be one of {REFERENCE_STRATEGIES}, got {self.strategy!r}"
            )
        labels = [self.reference_condition, *self.other_conditions]
        if len(set(labels)) != len(labels):
            raise ParameterError(f"enrollment conditions must be distinct: {labels}")

    @property
    def holdout_start(self) -> int:
        """First repeat index not consumed by enrollment."""
        used = 1
        if self.strategy == 'presel':
            used = max(used, self.presel_repeats)
        elif self.strategy == 'mv':
            used = max(used, self.mv_repeats)
        if self.other_conditions:
            used = max(used, self.mv_repeats)
        return used

    @classmethod
    def from_config(cls, settings: Dict[str, Any]) -> 'EnrollmentPlan':
        """Build from :attr:`Config.enrollment_plan_defaults`.

        The pseudo-strategy ``mrr`` means a preselected reference plus
        majority-voted references at ``other_conditions``; every other
        strategy enrolls a single reference.
        """
        strategy = settings.get('strategy', 'presel')
        others: Tuple[str, ...] = ()
        if strategy == 'mrr':
            strategy = 'presel'
            others = tuple(settings.get('other_conditions') or ())
        return cls(
            reference_condition=settings['reference_condition'],
            other_conditions=others,
            presel_repeats=int(settings.get('presel_repeats', 10)),
            mv_repeats=int(settings.get('mv_repeats', 9)),
            strategy=strategy,
            debias=settings.get('debias'),
        )


@dataclass
class ReferenceResponse:
    """One enrolled reference response r_j."""

    bits: np.ndarray
    condition_label: str
    strategy: str
    temperature_c: Optional[int] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"unknown strategy {self.strategy!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReferenceResponse):
            return NotImplemented
        return (
            np.array_equal(self.bits, other.bits)
            and self.condition_label == other.condition_label
            and self.strategy == other.strategy
            and self.temperature_c == other.temperature_c
        )


@dataclass
class Challenge:
    """The public half of an enrollment: which cells to read and how to debias them."""

    chip_id: str
    num_cells: int
    mask: np.ndarray
    debias_meta: Optional[DebiasMeta] = None

    @property
    def response_bits(self) -> int:
        """Length of the response extracted with this challenge."""
        if self.debias_meta is not None:
            return self.debias_meta.output_bits
        return int(self.mask.size)

    def extract_response(self, measurement: np.ndarray) -> np.ndarray:
        """Apply the challenge to one raw power-up (or a (R, num_cells) stack)."""
        raw = np.asarray(measurement, dtype=np.uint8)
        if raw.shape[-1] != self.num_cells:
            raise ParameterError(
                f"measurement has {raw.shape[-1]} cells, challenge expects {self.num_cells}"
            )
        if raw.ndim == 2:
            return np.stack([self.extract_response(row) for row in raw])
        selected = raw[self.mask]
        if self.debias_meta is not None:
            selected = apply_pair_selection(selected, self.debias_meta)
        return selected

    def to_dict(self) -> Dict[str, Any]:
        mask_bits = np.zeros(self.num_cells, dtype=np.uint8)
        mask_bits[self.mask] = 1
        data: Dict[str, Any] = {
            'format_version': RECORD_VERSION,
            'chip_id': self.chip_id,
            'num_cells': self.num_cells,
            'challenge_mask': _b64(pack_lsb(mask_bits)),
            'debias': None,
        }
        if self.debias_meta is not None:
            data['debias'] = {
                'scheme': self.debias_meta.scheme,
                'num_pairs': int(self.debias_meta.pair_mask.size),
                'pair_mask': _b64(pack_lsb(self.debias_meta.pair_mask.astype(np.uint8))),
            }
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Challenge':
        if data.get('format_version') != RECORD_VERSION:
            raise FormatError(f"unsupported format_version {data.get('format_version')!r}")
        try:
            chip_id = str(data['chip_id'])
            num_cells = int(data['num_cells'])
            mask_bits = unpack_lsb(_unb64(data['challenge_mask']), num_cells)
            meta = None
            if data.get('debias'):
                debias = data['debias']
                pairs = unpack_lsb(_unb64(debias['pair_mask']), int(debias['num_pairs']))
                meta = DebiasMeta(str(debias['scheme']), pairs.astype(bool))
        except (KeyError, TypeError, ValueError, ParameterError) as e:
            raise FormatError(f"invalid challenge data ({e})") from e
        if mask_bits.size != num_cells:
            raise FormatError("challenge mask shorter than num_cells")
        return cls(
            chip_id=chip_id,
            num_cells=num_cells,
            mask=np.flatnonzero(mask_bits).astype(np.int64),
            debias_meta=meta,
        )


@dataclass
class EnrollmentRecord:
    """The server's secret: challenge plus J reference responses."""

    challenge: Challenge
    references: List[ReferenceResponse] = field(default_factory=list)

    def __post_init__(self):
        if not self.references:
            raise ParameterError("an enrollment record needs at least one reference")
        lengths = {int(ref.bits.size) for ref in self.references}
        if len(lengths) != 1:
            raise ParameterError(f"references differ in length: {sorted(lengths)}")
        if lengths.pop() != self.challenge.response_bits:
            raise ParameterError("reference length does not match the challenge")
        labels = [ref.condition_label for ref in self.references]
        if len(set(labels)) != len(labels):
            raise ParameterError(f"reference condition labels must be distinct: {labels}")
        mask = self.challenge.mask
        if mask.size and (np.any(np.diff(mask) <= 0) or mask[0] < 0 or mask[-1] >= self.challenge.num_cells):
            raise ParameterError("challenge addresses must be strictly increasing and in range")

    @property
    def chip_id(self) -> str:
        return self.challenge.chip_id

    @property
    def challenge_mask(self) -> np.ndarray:
        return self.challenge.mask

    @property
    def debias_meta(self) -> Optional[DebiasMeta]:
        return self.challenge.debias_meta

    @property
    def num_references(self) -> int:
        """J."""
        return len(self.references)

    @property
    def response_bits(self) -> int:
        return int(self.references[0].bits.size)

    def extract_response(self, measurement: np.ndarray) -> np.ndarray:
        return self.challenge.extract_response(measurement)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnrollmentRecord):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> Dict[str, Any]:
        data = self.challenge.to_dict()
        data['references'] = [
            {
                'condition_label': ref.condition_label,
                'temperature_c': ref.temperature_c,
                'strategy': ref.strategy,
                'num_bits': int(ref.bits.size),
                'bits': _b64(pack_lsb(ref.bits)),
            }
            for ref in self.references
        ]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EnrollmentRecord':
        challenge = Challenge.from_dict(data)
        try:
            references = [
                ReferenceResponse(
                    bits=unpack_lsb(_unb64(ref['bits']), int(ref['num_bits'])),
                    condition_label=str(ref['condition_label']),
                    strategy=str(ref['strategy']),
                    temperature_c=ref.get('temperature_c'),
                )
                for ref in data['references']
            ]
            return cls(challenge, references)
        except (KeyError, TypeError, ValueError, ParameterError) as e:
            raise FormatError(f"invalid enrollment record ({e})") from e


def _b64(raw: bytes) -> str:
    return base64.b64encode(raw).decode('ascii')


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode('ascii'), validate=True)


def _require_repeats(dataset: PufDataset, label: str, needed: int):
    available = dataset.num_repeats(label)
    if available < needed:
        raise ParameterError(
            f"condition {label} has {available} repeats, enrollment needs {needed}"
        )


def enroll(dataset: PufDataset, plan: EnrollmentPlan) -> EnrollmentRecord:
    """Build an enrollment record from repeated measurements.

    The reference condition fixes the challenge mask: every cell for the
    ``none``/``mv`` strategies, the stable cells of the first
    ``presel_repeats`` repeats for ``presel``. References at the other
    conditions are majority votes restricted to that mask (strategy
    ``presel+mv`` when the mask came from preselection, ``mv`` otherwise).

    Args:
        dataset: Measurements of the chip being enrolled
        plan: Enrollment plan

    Returns:
        EnrollmentRecord with J = 1 + len(plan.other_conditions)

    Raises:
        ConditionLookupError: If a named condition is missing
        ParameterError: If a condition has too few repeats
    """
    ref_label = plan.reference_condition
    ref_data = dataset.repeats(ref_label)

    if plan.strategy == 'presel':
        _require_repeats(dataset, ref_label, plan.presel_repeats)
        mask, ref_bits = preselect(ref_data[: plan.presel_repeats])
        if mask.size == 0:
            raise ParameterError(f"preselection at {ref_label} kept no cells")
    elif plan.strategy == 'mv':
        _require_repeats(dataset, ref_label, plan.mv_repeats)
        mask = np.arange(dataset.num_cells, dtype=np.int64)
        ref_bits = majority_vote(ref_data[: plan.mv_repeats])
    else:
        mask = np.arange(dataset.num_cells, dtype=np.int64)
        ref_bits = ref_data[0].copy()

    other_strategy = 'presel+mv' if plan.strategy == 'presel' else 'mv'
    raw_references = [(ref_label, plan.strategy, ref_bits)]
    for label in plan.other_conditions:
        _require_repeats(dataset, label, plan.mv_repeats)
        voted = majority_vote(dataset.repeats(label)[: plan.mv_repeats, mask])
        raw_references.append((label, other_strategy, voted))

    meta = None
    if plan.debias:
        meta = select_pairs(ref_bits, plan.debias)
        logger.info(
            f"Debiasing ({meta.scheme}) keeps {int(np.count_nonzero(meta.pair_mask))} "
            f"of {meta.pair_mask.size} pairs"
        )

    challenge = Challenge(dataset.chip_id, dataset.num_cells, mask, meta)
    references = []
    for label, strategy, bits in raw_references:
        if meta is not None:
            bits = apply_pair_selection(bits, meta)
        references.append(
            ReferenceResponse(
                bits=bits,
                condition_label=label,
                strategy=strategy,
                temperature_c=dataset.condition(label).temperature_c,
            )
        )

    record = EnrollmentRecord(challenge, references)
    logger.info(
        f"Enrolled {dataset.chip_id}: J={record.num_references}, "
        f"mask {mask.size}/{dataset.num_cells} cells, {record.response_bits} response bits"
    )
    return record


def reference_ber_table(
    record: EnrollmentRecord,
    dataset: PufDataset,
    holdout_start: int = 0,
    conditions: Optional[Sequence[str]] = None,
) -> Dict[str, Dict[str, float]]:
    """BER of every reference against held-out repeats at every condition.

    Args:
        record: Enrollment record of the chip
        dataset: Measurements of the same chip
        holdout_start: First repeat index not used for enrollment; when a
            condition has no repeats beyond it, all its repeats are used
        conditions: Evaluation conditions, all dataset conditions by default

    Returns:
        ``{reference label: {condition label: BER}}``
    """
    labels = list(conditions) if conditions is not None else dataset.labels
    table: Dict[str, Dict[str, float]] = {ref.condition_label: {} for ref in record.references}
    for label in labels:
        data = dataset.repeats(label)
        start = holdout_start
        if start >= data.shape[0]:
            logger.warning(
                f"No held-out repeats at {label} (start={start}), using all {data.shape[0]}"
            )
            start = 0
        responses = record.extract_response(data[start:])
        for ref in record.references:
            table[ref.condition_label][label] = float((responses != ref.bits[None, :]).mean())
    return table


def save_record(record: EnrollmentRecord, path: Union[str, Path]) -> Path:
    """Write a record as JSON (server side only)."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf-8') as f:
        json.dump(record.to_dict(), f, indent=2)
    return out


def load_record(path: Union[str, Path]) -> EnrollmentRecord:
    """Read a record written by :func:`save_record`."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise FormatError(f"{path}: record must be a JSON object")
    return EnrollmentRecord.from_dict(data)


def save_challenge(challenge: Challenge, path: Union[str, Path]) -> Path:
    """Write the public challenge (no response bits) for the token side."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf-8') as f:
        json.dump(challenge.to_dict(), f, indent=2)
    return out


def load_challenge(path: Union[str, Path]) -> Challenge:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise FormatError(f"{path}: challenge must be a JSON object")
    return Challenge.from_dict(data)
