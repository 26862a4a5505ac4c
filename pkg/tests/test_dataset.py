import json

import numpy as np
import pytest

from pufkit.exceptions import ConditionLookupError, FormatError, ParameterError
from pufkit.puf import Condition, PufDataset, load_dataset, save_dataset
from pufkit.puf.dataset import MANIFEST_NAME


@pytest.fixture
def tiny_dataset():
    rows = np.array([[1, 0, 0, 0, 0, 0, 0, 0, 1, 1], [0, 1, 0, 0, 0, 0, 0, 0, 0, 1]], dtype=np.uint8)
    return PufDataset("tiny", 10, (Condition(25, "25C"),), {"25C": rows})


def _manifest(directory):
    return json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8"))


def _write_manifest(directory, manifest):
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest), encoding="utf-8")


def test_raw_file_is_lsb_first_and_padded(tiny_dataset, tmp_path):
    save_dataset(tiny_dataset, tmp_path)
    assert (tmp_path / "25C.bin").read_bytes() == bytes([0x01, 0x03, 0x02, 0x02])
    manifest = _manifest(tmp_path)
    assert manifest["format_version"] == 1
    assert manifest["conditions"][0]["repeats"] == 2


def test_save_and_load(small_dataset, tmp_path):
    manifest_path = save_dataset(small_dataset, tmp_path / "chip")
    assert load_dataset(manifest_path) == small_dataset
    assert load_dataset(tmp_path / "chip") == small_dataset


def test_missing_manifest(tmp_path):
    with pytest.raises(FormatError, match="manifest not found"):
        load_dataset(tmp_path)


def test_invalid_json(tmp_path):
    (tmp_path / MANIFEST_NAME).write_text("{not json", encoding="utf-8")
    with pytest.raises(FormatError, match="invalid JSON"):
        load_dataset(tmp_path)


def test_unknown_version(tiny_dataset, tmp_path):
    save_dataset(tiny_dataset, tmp_path)
    manifest = _manifest(tmp_path)
    manifest["format_version"] = 2
    _write_manifest(tmp_path, manifest)
    with pytest.raises(FormatError, match="format_version"):
        load_dataset(tmp_path)


def test_duplicate_labels(tiny_dataset, tmp_path):
    save_dataset(tiny_dataset, tmp_path)
    manifest = _manifest(tmp_path)
    manifest["conditions"].append(dict(manifest["conditions"][0]))
    _write_manifest(tmp_path, manifest)
    with pytest.raises(FormatError, match="duplicate"):
        load_dataset(tmp_path)


@pytest.mark.parametrize("entries", [["25C"], [["25C", 25]], [None]])
def test_condition_entries_must_be_objects(tiny_dataset, tmp_path, entries):
    save_dataset(tiny_dataset, tmp_path)
    manifest = _manifest(tmp_path)
    manifest["conditions"] = entries
    _write_manifest(tmp_path, manifest)
    with pytest.raises(FormatError, match="condition entries"):
        load_dataset(tmp_path)


def test_missing_raw_file(tiny_dataset, tmp_path):
    save_dataset(tiny_dataset, tmp_path)
    (tmp_path / "25C.bin").unlink()
    with pytest.raises(FormatError, match="25C.bin"):
        load_dataset(tmp_path)


def test_truncated_raw_file_names_the_file(tiny_dataset, tmp_path):
    save_dataset(tiny_dataset, tmp_path)
    raw = tmp_path / "25C.bin"
    raw.write_bytes(raw.read_bytes()[:-1])
    with pytest.raises(FormatError, match="25C.bin"):
        load_dataset(tmp_path)


def test_measurements_are_read_only(tiny_dataset):
    with pytest.raises(ValueError):
        tiny_dataset.repeats("25C")[0, 0] = 0


def test_unknown_condition(tiny_dataset):
    with pytest.raises(ConditionLookupError, match="80C"):
        tiny_dataset.repeats("80C")
    with pytest.raises(KeyError):
        tiny_dataset.condition("80C")


def test_shape_validation():
    with pytest.raises(ParameterError):
        PufDataset("x", 8, (Condition(25, "25C"),), {"25C": np.zeros((2, 7), dtype=np.uint8)})
    with pytest.raises(ParameterError):
        PufDataset("x", 8, (Condition(25, "25C"),), {})
    with pytest.raises(ParameterError):
        PufDataset("x", 4, (Condition(25, "25C"),), {"25C": np.full((1, 4), 3)})


def test_condition_range():
    with pytest.raises(ParameterError):
        Condition(130, "130C")
    with pytest.raises(ParameterError):
        Condition(25, "")
