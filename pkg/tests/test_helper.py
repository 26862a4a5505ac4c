import json
import struct

import numpy as np
import pytest

from pufkit.exceptions import ProtocolError
from pufkit.keygen import HelperData, load_helper, save_helper, token_generate
from pufkit.keygen.helper import MAGIC, WIRE_VERSION


@pytest.fixture(scope="module")
def helper(code_63):
    response = np.random.default_rng(3).integers(0, 2, 504, dtype=np.uint8)
    return token_generate(response, code_63).helper


def test_wire_layout(helper):
    raw = helper.to_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack(">BHHHH", raw[4:13]) == (WIRE_VERSION, 63, 16, 11, 8)
    assert len(raw) == 13 + 8 * 6 + 16
    assert raw[-16:] == helper.tag_u


def test_wire_form_parses_back(helper):
    assert HelperData.from_bytes(helper.to_bytes()) == helper


@pytest.mark.parametrize("mutate,message", [
    (lambda raw: b"XXXX" + raw[4:], "magic"),
    (lambda raw: raw[:4] + bytes([2]) + raw[5:], "version"),
    (lambda raw: raw[:-1], "bytes"),
    (lambda raw: raw[:10], "too short"),
])
def test_malformed_wire_form(helper, mutate, message):
    with pytest.raises(ProtocolError, match=message):
        HelperData.from_bytes(mutate(helper.to_bytes()))


def test_nonzero_padding_is_rejected(helper):
    raw = bytearray(helper.to_bytes())
    raw[13 + 5] |= 0x01  # last byte of block 0 holds 47 - 40 = 7 bits
    with pytest.raises(ProtocolError, match="padding"):
        HelperData.from_bytes(bytes(raw))


def test_invalid_code_in_header(helper):
    raw = bytearray(helper.to_bytes())
    raw[7:9] = struct.pack(">H", 63)
    with pytest.raises(ProtocolError):
        HelperData.from_bytes(bytes(raw))


def test_json_form(helper):
    data = helper.to_json()
    assert data["code"] == [63, 16, 11]
    assert all(len(block) == 47 and set(block) <= {"0", "1"} for block in data["blocks"])
    assert HelperData.from_json(data) == helper


def test_invalid_json_form(helper):
    data = helper.to_json()
    data["blocks"][0] = "012"
    with pytest.raises(ProtocolError):
        HelperData.from_json(data)
    data = helper.to_json()
    data["num_blocks"] = 9
    with pytest.raises(ProtocolError):
        HelperData.from_json(data)
    with pytest.raises(ProtocolError):
        HelperData.from_json({"format_version": 1})


@pytest.mark.parametrize("name", ["helper.bin", "helper.json"])
def test_helper_files(helper, tmp_path, name):
    path = save_helper(helper, tmp_path / name)
    assert load_helper(path) == helper


def test_json_file_is_readable(helper, tmp_path):
    path = save_helper(helper, tmp_path / "helper.json")
    assert json.loads(path.read_text(encoding="utf-8"))["tag_u"] == helper.tag_u.hex()
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ProtocolError):
        load_helper(path)
