"""Fuzzy extractor and reverse fuzzy extractor roles.

Reverse FE: the token runs the cheap Gen (syndrome generation) on a fresh
response and sends (p, u); the server runs the expensive Rep against each
enrolled reference until the tag verifies. The classic FE is the mirror
image and is kept as a baseline.
"""

import hmac
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..bch.catalog import blocks_needed
from ..bch.codec import BchCode, DecodeFailure, build_code, decode_syndrome, gen_syndrome
from ..enrollment.enroller import EnrollmentRecord
from ..exceptions import ParameterError, ProtocolError
from ..utils.bits import as_bits, pack_msb, unpack_msb
from .hashing import DIGEST_BYTES, fingerprint, hash128
from .helper import HelperData, serialize_blocks

logger = logging.getLogger(__name__)

KEY_BITS = 128


@dataclass(frozen=True)
class SecretKey:
    """A 128-bit key derived from response bits by the entropy extractor."""

    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.bits.size != KEY_BITS:
            raise ParameterError(f"secret key must be {KEY_BITS} bits")

    @classmethod
    def from_bytes(cls, raw: bytes) -> 'SecretKey':
        return cls(unpack_msb(raw, KEY_BITS))

    def to_bytes(self) -> bytes:
        return pack_msb(self.bits)

    def hex(self) -> str:
        return self.to_bytes().hex()

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.to_bytes())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SecretKey):
            return NotImplemented
        return hmac.compare_digest(self.to_bytes(), other.to_bytes())

    def __hash__(self) -> int:
        return hash(self.to_bytes())


@dataclass(frozen=True)
class TokenOutput:
    """Result of token-side Gen; only ``helper`` leaves the token."""

    helper: HelperData
    sk: SecretKey


@dataclass
class RecoveryResult:
    """Outcome of a recovery attempt series."""

    success: bool
    attempts: int
    sk: Optional[SecretKey] = None
    used_reference_index: Optional[int] = None
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'success': self.success,
            'attempts': self.attempts,
            'used_reference_index': self.used_reference_index,
            'key_fingerprint': self.sk.fingerprint if self.sk is not None else None,
            'failures': list(self.failures),
        }


def derive_key(response_bits: np.ndarray) -> SecretKey:
    """sk = hash128(response bits packed MSB-first)."""
    return SecretKey.from_bytes(hash128(pack_msb(response_bits)))


def compute_tag(sk: SecretKey, code_id: Tuple[int, int, int], blocks) -> bytes:
    """u = hash128(sk || serialized helper blocks)."""
    return hash128(sk.to_bytes() + serialize_blocks(code_id, blocks))


def _split_blocks(response: np.ndarray, code: BchCode, num_blocks: int) -> np.ndarray:
    needed = num_blocks * code.n
    if response.size < needed:
        raise ParameterError(
            f"response has {response.size} bits, {num_blocks} x BCH n={code.n} needs {needed}"
        )
    return response[:needed].reshape(num_blocks, code.n)


def token_generate(r_prime: np.ndarray, code: BchCode, key_bits: int = KEY_BITS) -> TokenOutput:
    """Token-side Gen: helper data and session key from a fresh response.

    Args:
        r_prime: Response extracted with the enrollment challenge
        code: Block code
        key_bits: Key length, 128

    Returns:
        TokenOutput with L = ceil(key_bits / k) syndrome blocks

    Raises:
        ParameterError: If the response is shorter than L * n bits
    """
    if key_bits != KEY_BITS:
        raise ParameterError(f"key_bits must be {KEY_BITS}")
    response = as_bits(r_prime)
    num_blocks = blocks_needed(code.k, key_bits)
    blocks = tuple(gen_syndrome(code, block) for block in _split_blocks(response, code, num_blocks))
    sk = derive_key(response[: num_blocks * code.n])
    helper = HelperData(blocks, code.code_id, compute_tag(sk, code.code_id, blocks))
    logger.debug(f"Token generated {num_blocks} blocks with {code}")
    return TokenOutput(helper, sk)


def _validated_code(helper: HelperData, key_bits: int = KEY_BITS) -> BchCode:
    n, k, t = helper.code_id
    try:
        code = build_code(n, k, t)
    except ParameterError as e:
        raise ProtocolError(f"helper names an invalid code: {e}") from e
    expected_blocks = blocks_needed(code.k, key_bits)
    if helper.num_blocks != expected_blocks:
        raise ProtocolError(
            f"helper carries {helper.num_blocks} blocks, {code} needs {expected_blocks}"
        )
    for index, block in enumerate(helper.blocks):
        if len(block) != code.redundancy:
            raise ProtocolError(
                f"block {index} has {len(block)} bits, expected {code.redundancy}"
            )
    if len(helper.tag_u) != DIGEST_BYTES:
        raise ProtocolError(f"tag must be {DIGEST_BYTES} bytes")
    return code


def _reproduce(response: np.ndarray, helper: HelperData, code: BchCode) -> Tuple[Optional[SecretKey], str]:
    """Rep against one response; returns (key, '') or (None, reason)."""
    blocks = _split_blocks(as_bits(response), code, helper.num_blocks)
    recovered = []
    for index, (block, syndrome) in enumerate(zip(blocks, helper.blocks)):
        decoded = decode_syndrome(code, block, syndrome)
        if isinstance(decoded, DecodeFailure):
            return None, f"block {index}: {decoded.reason}"
        recovered.append(decoded)
    sk = derive_key(np.concatenate(recovered))
    if not hmac.compare_digest(compute_tag(sk, helper.code_id, helper.blocks), helper.tag_u):
        return None, "tag mismatch"
    return sk, ""


def attempt_order(record: EnrollmentRecord, ambient_temperature_c: Optional[float] = None) -> List[int]:
    """Reference indices in the order the server tries them.

    Nearest enrollment temperature first when the ambient temperature is
    known, enrollment order otherwise (and for ties).
    """
    indices = list(range(record.num_references))
    if ambient_temperature_c is None:
        return indices

    def distance(index: int) -> float:
        temperature = record.references[index].temperature_c
        if temperature is None:
            return float('inf')
        return abs(temperature - ambient_temperature_c)

    return sorted(indices, key=distance)


def server_recover(
    helper: HelperData,
    record: EnrollmentRecord,
    ambient_temperature_c: Optional[float] = None,
    order: Optional[Sequence[int]] = None,
) -> RecoveryResult:
    """Server-side Rep with multiple reference responses.

    Args:
        helper: Helper data received from the token
        record: The token's enrollment record
        ambient_temperature_c: Optional temperature reported out-of-band,
            used only to order attempts
        order: Explicit attempt order, overriding the temperature ordering

    Returns:
        RecoveryResult; success on the first reference whose reconstruction
        reproduces the tag u

    Raises:
        ProtocolError: If the helper is structurally malformed
        ParameterError: If the references are shorter than L * n bits
    """
    code = _validated_code(helper)
    needed = helper.num_blocks * code.n
    if record.response_bits < needed:
        raise ParameterError(
            f"references hold {record.response_bits} bits, {helper.num_blocks} x {code} needs {needed}"
        )

    sequence = list(order) if order is not None else attempt_order(record, ambient_temperature_c)
    failures = []
    for attempt, index in enumerate(sequence, start=1):
        reference = record.references[index]
        sk, reason = _reproduce(reference.bits, helper, code)
        if sk is not None:
            logger.debug(
                f"Recovered key with reference {index} ({reference.condition_label}) on attempt {attempt}"
            )
            return RecoveryResult(True, attempt, sk, index, failures)
        failures.append(f"{reference.condition_label}: {reason}")

    logger.info(f"Recovery failed after {len(sequence)} attempts")
    return RecoveryResult(False, len(sequence), failures=failures)


def fe_enroll(r: np.ndarray, code: BchCode, key_bits: int = KEY_BITS) -> Tuple[HelperData, SecretKey]:
    """Classic FE Gen on the enrolled reference."""
    output = token_generate(r, code, key_bits)
    return output.helper, output.sk


def fe_reproduce(r_prime: np.ndarray, helper: HelperData) -> RecoveryResult:
    """Classic FE Rep on the device: reconstruct the enrolled key from r'."""
    code = _validated_code(helper)
    sk, reason = _reproduce(r_prime, helper, code)
    if sk is None:
        return RecoveryResult(False, 1, failures=[reason])
    return RecoveryResult(True, 1, sk, 0)


def save_key(sk: SecretKey, path: Union[str, Path]) -> Path:
    """Store the token-local key as hex text."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(sk.hex() + "\n", encoding='utf-8')
    return out


def load_key(path: Union[str, Path]) -> SecretKey:
    text = Path(path).read_text(encoding='utf-8').strip()
    try:
        raw = bytes.fromhex(text)
    except ValueError as e:
        raise ProtocolError(f"{path}: invalid key file ({e})") from e
    if len(raw) != KEY_BITS // 8:
        raise ProtocolError(f"{path}: key must be {KEY_BITS // 8} bytes")
    return SecretKey.from_bytes(raw)
