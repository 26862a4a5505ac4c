"""Helper data (p, u) and its serializations.

Wire format, version 1 (big-endian)::

    b"PKHD" | version:u8 | n:u16 | k:u16 | t:u16 | L:u16
    | L syndrome blocks, each ceil((n-k)/8) bytes, MSB-first
    | tag u: 16 bytes

The tag input serialization is ``n | k | t | L`` (u16 each) followed, per
block, by the block's bit length (u16) and its MSB-first packed bits.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from ..bch.codec import SyndromeBlock
from ..exceptions import ProtocolError
from ..utils.bits import pack_msb, packed_length, unpack_msb
from .hashing import DIGEST_BYTES

MAGIC = b"PKHD"
WIRE_VERSION = 1
_HEADER = struct.Struct(">4sBHHHH")
_CODE_HEADER = struct.Struct(">HHHH")
_BLOCK_LEN = struct.Struct(">H")


@dataclass(frozen=True)
class HelperData:
    """Public helper data: L syndrome blocks, the code id and the tag u."""

    blocks: Tuple[SyndromeBlock, ...]
    code_id: Tuple[int, int, int]
    tag_u: bytes

    @property
    def num_blocks(self) -> int:
        """L."""
        return len(self.blocks)

    @property
    def helper_bits(self) -> int:
        return sum(len(block) for block in self.blocks)

    def tag_input(self) -> bytes:
        """Canonical serialization of (code_id, L, blocks) hashed into u."""
        return serialize_blocks(self.code_id, self.blocks)

    def to_bytes(self) -> bytes:
        """Binary wire form."""
        n, k, t = self.code_id
        parts = [_HEADER.pack(MAGIC, WIRE_VERSION, n, k, t, self.num_blocks)]
        parts.extend(pack_msb(block.bits) for block in self.blocks)
        parts.append(self.tag_u)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, raw: bytes) -> 'HelperData':
        """Parse the wire form.

        Raises:
            ProtocolError: On bad magic, version, lengths or code parameters
        """
        if len(raw) < _HEADER.size + DIGEST_BYTES:
            raise ProtocolError(f"helper data too short ({len(raw)} bytes)")
        magic, version, n, k, t, num_blocks = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise ProtocolError(f"bad helper magic {magic!r}")
        if version != WIRE_VERSION:
            raise ProtocolError(f"unsupported helper version {version}")
        if not 0 < k < n:
            raise ProtocolError(f"invalid code id ({n},{k},{t})")

        block_bytes = packed_length(n - k)
        expected = _HEADER.size + num_blocks * block_bytes + DIGEST_BYTES
        if len(raw) != expected:
            raise ProtocolError(
                f"helper data is {len(raw)} bytes, expected {expected} for L={num_blocks}"
            )

        blocks = []
        offset = _HEADER.size
        for _ in range(num_blocks):
            chunk = raw[offset: offset + block_bytes]
            bits = unpack_msb(chunk, n - k)
            if pack_msb(bits) != chunk:
                raise ProtocolError("non-zero padding in syndrome block")
            blocks.append(SyndromeBlock(bits))
            offset += block_bytes
        return cls(tuple(blocks), (n, k, t), bytes(raw[offset:]))

    def to_json(self) -> Dict[str, Any]:
        """Debug form; carries exactly the same information as the wire form."""
        return {
            'format_version': WIRE_VERSION,
            'code': list(self.code_id),
            'num_blocks': self.num_blocks,
            'blocks': [''.join(str(int(b)) for b in block.bits) for block in self.blocks],
            'tag_u': self.tag_u.hex(),
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> 'HelperData':
        try:
            if data['format_version'] != WIRE_VERSION:
                raise ProtocolError(f"unsupported helper version {data['format_version']}")
            n, k, t = (int(v) for v in data['code'])
            blocks = tuple(
                SyndromeBlock(np.array([int(ch) for ch in text], dtype=np.uint8))
                for text in data['blocks']
            )
            tag = bytes.fromhex(data['tag_u'])
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"invalid helper JSON ({e})") from e
        if len(blocks) != int(data.get('num_blocks', len(blocks))):
            raise ProtocolError("num_blocks does not match the block list")
        if any(block.bits.max(initial=0) > 1 for block in blocks):
            raise ProtocolError("syndrome blocks may only contain 0 and 1")
        return cls(blocks, (n, k, t), tag)


def serialize_blocks(code_id: Tuple[int, int, int], blocks) -> bytes:
    n, k, t = code_id
    parts = [_CODE_HEADER.pack(n, k, t, len(blocks))]
    for block in blocks:
        parts.append(_BLOCK_LEN.pack(len(block)))
        parts.append(pack_msb(block.bits))
    return b"".join(parts)


def save_helper(helper: HelperData, path: Union[str, Path]) -> Path:
    """Write the helper; ``.json`` paths get the debug form, others the wire form."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == '.json':
        with open(out, 'w', encoding='utf-8') as f:
            json.dump(helper.to_json(), f, indent=2)
    else:
        out.write_bytes(helper.to_bytes())
    return out


def load_helper(path: Union[str, Path]) -> HelperData:
    """Read a helper written by :func:`save_helper`.

    Raises:
        ProtocolError: If the file content is not valid helper data
    """
    source = Path(path)
    raw = source.read_bytes()
    if source.suffix == '.json':
        try:
            data = json.loads(raw.decode('utf-8'))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ProtocolError(f"{source}: invalid helper JSON ({e})") from e
        if not isinstance(data, dict):
            raise ProtocolError(f"{source}: helper JSON must be an object")
        return HelperData.from_json(data)
    return HelperData.from_bytes(raw)
