"""Binary narrow-sense primitive BCH codes in syndrome form.

Bit-vector convention: index ``i`` of an n-bit block holds the coefficient
of ``x^(n-1-i)``, so the first bit is the most significant coefficient. A
syndrome block is ``r(x) mod g(x)`` written the same way with n-k bits.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import galois
import numpy as np

from ..exceptions import ParameterError
from ..utils.bits import as_bits
from .field import FieldTables, cyclotomic_coset, field_tables, galois_field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BchCode:
    """One secure-sketch block code BCH(n, k, t) over GF(2^m).

    ``generator_poly`` and ``primitive_poly`` are integers whose bit ``i`` is
    the coefficient of ``x^i``.
    """

    n: int
    k: int
    t: int
    m: int
    generator_poly: int
    primitive_poly: int
    syndrome_matrix: np.ndarray = field(repr=False, compare=False)
    tables: FieldTables = field(repr=False, compare=False)

    @property
    def redundancy(self) -> int:
        """Syndrome length n - k."""
        return self.n - self.k

    @property
    def code_id(self):
        return (self.n, self.k, self.t)

    def __str__(self) -> str:
        return f"BCH({self.n},{self.k},{self.t})"


@dataclass(frozen=True)
class SyndromeBlock:
    """n-k helper bits of one block."""

    bits: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, SyndromeBlock):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __len__(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True)
class DecodeFailure:
    """More errors than the decoder could locate; a value, never raised."""

    reason: str


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Integer to ``width`` bits, most significant first."""
    return np.array([(value >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.uint8)


def _syndrome_matrix(n: int, redundancy: int, generator: int) -> np.ndarray:
    """Row i holds x^(n-1-i) mod g(x) as ``redundancy`` MSB-first bits."""
    matrix = np.zeros((n, redundancy), dtype=np.uint8)
    remainder = 1
    for row in range(n - 1, -1, -1):
        matrix[row] = int_to_bits(remainder, redundancy)
        remainder <<= 1
        if (remainder >> redundancy) & 1:
            remainder ^= generator
    return matrix


def generator_polynomial(m: int, t: int) -> galois.Poly:
    """LCM of the minimal polynomials of alpha, alpha^2, ..., alpha^2t."""
    gf = galois_field(m)
    n = (1 << m) - 1
    alpha = gf.primitive_element
    seen = set()
    minimal_polys = []
    for i in range(1, 2 * t + 1):
        if i % n in seen:
            continue
        seen.update(cyclotomic_coset(i, n))
        minimal_polys.append((alpha ** i).minimal_poly())
    if len(minimal_polys) == 1:
        return minimal_polys[0]
    return galois.lcm(*minimal_polys)


@lru_cache(maxsize=64)
def build_code(n: int, k: int, t: int) -> BchCode:
    """Construct BCH(n, k, t).

    Args:
        n: Block length, must equal 2^m - 1 with 3 <= m <= 10
        k: Code dimension
        t: Designed error-correction capability

    Returns:
        Immutable BchCode with precomputed syndrome matrix and field tables

    Raises:
        ParameterError: If n is not a supported primitive length or the
            generator built for t does not have degree n - k
    """
    m = (n + 1).bit_length() - 1
    if n < 1 or (1 << m) - 1 != n:
        raise ParameterError(f"n={n} is not of the form 2^m - 1")
    if not 0 < k < n or t < 1 or 2 * t >= n:
        raise ParameterError(f"inconsistent BCH parameters ({n},{k},{t})")

    tables = field_tables(m)
    generator = int(generator_polynomial(m, t))
    degree = generator.bit_length() - 1
    if degree != n - k:
        raise ParameterError(
            f"BCH({n},{k},{t}): generator degree {degree} does not match n-k={n - k}"
        )

    logger.debug(f"Built BCH({n},{k},{t}), g={generator:#x}")
    return BchCode(
        n=n,
        k=k,
        t=t,
        m=m,
        generator_poly=generator,
        primitive_poly=tables.primitive_poly,
        syndrome_matrix=_syndrome_matrix(n, n - k, generator),
        tables=tables,
    )


def _check_block(code: BchCode, block: np.ndarray, name: str) -> np.ndarray:
    bits = as_bits(block)
    if bits.size != code.n:
        raise ParameterError(f"{name} must be {code.n} bits, got {bits.size}")
    return bits


def syndrome_bits(code: BchCode, blocks: np.ndarray) -> np.ndarray:
    """Syndromes of one block (shape ``(n,)``) or many (shape ``(B, n)``)."""
    product = blocks.astype(np.int64) @ code.syndrome_matrix.astype(np.int64)
    return (product & 1).astype(np.uint8)


def gen_syndrome(code: BchCode, r_block: np.ndarray) -> SyndromeBlock:
    """Helper data p = r(x) mod g(x) of one n-bit block."""
    bits = _check_block(code, r_block, "response block")
    return SyndromeBlock(syndrome_bits(code, bits))


def encode_message(code: BchCode, message: np.ndarray) -> np.ndarray:
    """Systematic codeword: the k message bits followed by n-k parity bits."""
    msg = as_bits(message)
    if msg.size != code.k:
        raise ParameterError(f"message must be {code.k} bits, got {msg.size}")
    shifted = np.concatenate([msg, np.zeros(code.redundancy, dtype=np.uint8)])
    return np.concatenate([msg, syndrome_bits(code, shifted)])


def _power_syndromes(code: BchCode, remainder: np.ndarray) -> list:
    """S_j = s(alpha^j) for j = 1..2t, s(x) the remainder polynomial."""
    tables = code.tables
    degrees = (code.redundancy - 1) - np.flatnonzero(remainder)
    js = np.arange(1, 2 * code.t + 1, dtype=np.int64)[:, None]
    terms = tables.exp[(js * degrees[None, :]) % code.n]
    return np.bitwise_xor.reduce(terms, axis=1).tolist()


def _berlekamp_massey(tables: FieldTables, syndromes: list) -> tuple:
    """Shortest LFSR generating S_1..S_2t.

    Returns:
        (locator coefficients Lambda_0..Lambda_L with Lambda_0 = 1, L)
    """
    size = len(syndromes)
    locator = [1] + [0] * size
    previous = [1] + [0] * size
    length = 0
    shift = 1
    last_discrepancy = 1

    for i, syndrome in enumerate(syndromes):
        discrepancy = syndrome
        for j in range(1, length + 1):
            discrepancy ^= tables.mul(locator[j], syndromes[i - j])

        if discrepancy == 0:
            shift += 1
            continue

        coef = tables.mul(discrepancy, tables.inv(last_discrepancy))
        snapshot = locator[:]
        for j in range(size + 1 - shift):
            locator[j + shift] ^= tables.mul(coef, previous[j])

        if 2 * length <= i:
            length = i + 1 - length
            previous = snapshot
            last_discrepancy = discrepancy
            shift = 1
        else:
            shift += 1

    return locator[: length + 1], length


def _chien_roots(code: BchCode, locator: list) -> np.ndarray:
    """Degrees d in [0, n) with Lambda(alpha^-d) = 0."""
    tables = code.tables
    n = code.n
    d = np.arange(n, dtype=np.int64)
    acc = np.zeros(n, dtype=np.int64)
    for j, coef in enumerate(locator):
        if coef == 0:
            continue
        acc ^= tables.exp[(tables.log_list[coef] - j * d) % n]
    return np.flatnonzero(acc == 0)


def decode_syndrome(
    code: BchCode, r_prime: np.ndarray, p: SyndromeBlock
) -> Union[np.ndarray, DecodeFailure]:
    """Recover the enrolled block r from a noisy r' and its helper syndrome p.

    Args:
        code: The block code the helper was generated with
        r_prime: Noisy n-bit response block
        p: Enrolled syndrome block

    Returns:
        The corrected n-bit block, or a DecodeFailure when more than t
        errors are detected. Some patterns beyond t decode to a wrong
        block without being detected here.

    Raises:
        ParameterError: On wrong block or syndrome length
    """
    received = _check_block(code, r_prime, "r_prime")
    helper = as_bits(p.bits)
    if helper.size != code.redundancy:
        raise ParameterError(f"syndrome must be {code.redundancy} bits, got {helper.size}")

    remainder = syndrome_bits(code, received) ^ helper
    if not remainder.any():
        return received.copy()

    syndromes = _power_syndromes(code, remainder)
    locator, length = _berlekamp_massey(code.tables, syndromes)

    if length > code.t:
        return DecodeFailure(f"error locator length {length} exceeds t={code.t}")
    if length == 0 or locator[length] == 0:
        return DecodeFailure(f"error locator degree does not match its length {length}")

    roots = _chien_roots(code, locator)
    if roots.size != length:
        return DecodeFailure(f"locator of degree {length} has {roots.size} roots in the field")

    corrected = received.copy()
    corrected[code.n - 1 - roots] ^= 1
    if not np.array_equal(syndrome_bits(code, corrected), helper):
        return DecodeFailure("corrected block does not reproduce the helper syndrome")
    return corrected
