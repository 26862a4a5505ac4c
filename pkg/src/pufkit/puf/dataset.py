"""Repeated power-up measurements and their on-disk format.

A dataset directory holds ``manifest.json`` plus one raw file per
condition. A raw file is the concatenation of its repeats, each repeat
``num_cells`` bits packed LSB-first and zero-padded to a byte boundary.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union

import numpy as np

from ..exceptions import ConditionLookupError, FormatError, ParameterError
from ..utils.bits import packed_length

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
MIN_TEMPERATURE_C = -55
MAX_TEMPERATURE_C = 125


@dataclass(frozen=True)
class Condition:
    """An operating condition (temperature) with a short unique label."""

    temperature_c: int
    label: str

    def __post_init__(self):
        if not MIN_TEMPERATURE_C <= self.temperature_c <= MAX_TEMPERATURE_C:
            raise ParameterError(
                f"temperature {self.temperature_c}C outside [{MIN_TEMPERATURE_C}, {MAX_TEMPERATURE_C}]"
            )
        if not self.label:
            raise ParameterError("condition label must not be empty")


class PufDataset:
    """Immutable repeated measurements of one chip.

    ``measurements[label]`` is a read-only ``(repeats, num_cells)`` uint8
    array.
    """

    def __init__(
        self,
        chip_id: str,
        num_cells: int,
        conditions: Tuple[Condition, ...],
        measurements: Mapping[str, np.ndarray],
    ):
        if num_cells < 1:
            raise ParameterError("num_cells must be positive")
        labels = [c.label for c in conditions]
        if len(set(labels)) != len(labels):
            raise ParameterError(f"duplicate condition labels: {labels}")

        self.chip_id = chip_id
        self.num_cells = int(num_cells)
        self.conditions = tuple(conditions)
        self._measurements: Dict[str, np.ndarray] = {}

        for condition in self.conditions:
            if condition.label not in measurements:
                raise ParameterError(f"no measurements for condition {condition.label}")
            data = np.array(measurements[condition.label], dtype=np.uint8)
            if data.ndim != 2 or data.shape[1] != self.num_cells or data.shape[0] < 1:
                raise ParameterError(
                    f"measurements for {condition.label} must have shape (R>=1, {self.num_cells}), "
                    f"got {data.shape}"
                )
            if data.size and data.max() > 1:
                raise ParameterError("measurements may only contain 0 and 1")
            data.setflags(write=False)
            self._measurements[condition.label] = data

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.conditions]

    def condition(self, label: str) -> Condition:
        """Look up a condition by label.

        Raises:
            ConditionLookupError: If the label is unknown
        """
        for condition in self.conditions:
            if condition.label == label:
                return condition
        raise ConditionLookupError(
            f"condition {label!r} not in dataset {self.chip_id} (have {', '.join(self.labels)})"
        )

    def repeats(self, label: str) -> np.ndarray:
        """All repeats measured at ``label`` as a (R, num_cells) array."""
        self.condition(label)
        return self._measurements[label]

    def num_repeats(self, label: str) -> int:
        return int(self.repeats(label).shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PufDataset):
            return NotImplemented
        return (
            self.chip_id == other.chip_id
            and self.num_cells == other.num_cells
            and self.conditions == other.conditions
            and all(
                np.array_equal(self._measurements[c.label], other._measurements[c.label])
                for c in self.conditions
            )
        )

    def __repr__(self) -> str:
        shape = ", ".join(f"{c.label}x{self.num_repeats(c.label)}" for c in self.conditions)
        return f"PufDataset(chip_id={self.chip_id!r}, cells={self.num_cells}, {shape})"


def _raw_file_name(label: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in label)
    return f"{safe}.bin"


def save_dataset(dataset: PufDataset, directory: Union[str, Path]) -> Path:
    """Write the dataset as manifest + raw files.

    Args:
        dataset: Dataset to store
        directory: Output directory, created if missing

    Returns:
        Path to the written manifest
    """
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for condition in dataset.conditions:
        data = dataset.repeats(condition.label)
        packed = np.packbits(data, axis=1, bitorder="little")
        file_name = _raw_file_name(condition.label)
        (out_dir / file_name).write_bytes(packed.tobytes())
        entries.append({
            'label': condition.label,
            'temperature_c': condition.temperature_c,
            'repeats': int(data.shape[0]),
            'file': file_name,
        })

    manifest = {
        'format_version': FORMAT_VERSION,
        'chip_id': dataset.chip_id,
        'num_cells': dataset.num_cells,
        'conditions': entries,
    }
    manifest_path = out_dir / MANIFEST_NAME
    with open(manifest_path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2)

    logger.info(f"Saved dataset {dataset.chip_id} to {manifest_path}")
    return manifest_path


def load_dataset(manifest_path: Union[str, Path]) -> PufDataset:
    """Read a dataset written by :func:`save_dataset` (or by measurement tooling).

    Args:
        manifest_path: Manifest file, or the directory containing it

    Returns:
        The loaded dataset

    Raises:
        FormatError: On a malformed manifest, an unknown format version,
            duplicate labels, or a missing or wrongly sized raw file
    """
    path = Path(manifest_path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.exists():
        raise FormatError(f"manifest not found: {path}")

    try:
        with open(path, 'r', encoding='utf-8') as f:
            manifest = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e

    if not isinstance(manifest, dict):
        raise FormatError(f"{path}: manifest must be a JSON object")
    version = manifest.get('format_version')
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version!r}")

    try:
        chip_id = str(manifest['chip_id'])
        num_cells = int(manifest['num_cells'])
        entries = list(manifest['conditions'])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path}: missing or invalid field ({e})") from e
    if num_cells < 1:
        raise FormatError(f"{path}: num_cells must be positive")

    for entry in entries:
        if not isinstance(entry, dict):
            raise FormatError(f"{path}: condition entries must be objects, got {entry!r}")
    labels = [entry.get('label') for entry in entries]
    if len(set(labels)) != len(labels):
        raise FormatError(f"{path}: duplicate condition labels {labels}")

    row_bytes = packed_length(num_cells)
    conditions = []
    measurements = {}
    for entry in entries:
        try:
            condition = Condition(int(entry['temperature_c']), str(entry['label']))
            repeats = int(entry['repeats'])
            raw_path = path.parent / entry['file']
        except (KeyError, TypeError, ValueError, ParameterError) as e:
            raise FormatError(f"{path}: invalid condition entry {entry!r} ({e})") from e

        if not raw_path.exists():
            raise FormatError(f"raw file missing: {raw_path}")
        raw = raw_path.read_bytes()
        expected = repeats * row_bytes
        if len(raw) != expected or repeats < 1:
            raise FormatError(
                f"raw file {raw_path} has {len(raw)} bytes, expected {expected} "
                f"({repeats} repeats x {row_bytes} bytes)"
            )

        packed = np.frombuffer(raw, dtype=np.uint8).reshape(repeats, row_bytes)
        bits = np.unpackbits(packed, axis=1, bitorder="little")[:, :num_cells]
        conditions.append(condition)
        measurements[condition.label] = bits

    logger.debug(f"Loaded dataset {chip_id} with {len(conditions)} conditions")
    return PufDataset(chip_id, num_cells, tuple(conditions), measurements)
