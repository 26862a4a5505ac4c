"""Catalog of candidate BCH block codes and their cost models."""

import logging
from typing import Iterable, List, NamedTuple, Sequence, Tuple

from ..exceptions import ParameterError
from .field import MAX_M, MIN_M, cyclotomic_coset

logger = logging.getLogger(__name__)


class CodeParams(NamedTuple):
    """(n, k, t) triple of a narrow-sense primitive BCH code."""

    n: int
    k: int
    t: int

    def __str__(self) -> str:
        return f"BCH({self.n},{self.k},{self.t})"


def bch_dimension(m: int, t: int) -> int:
    """Dimension k of the narrow-sense BCH code of length 2^m - 1 designed for t.

    Computed from cyclotomic cosets only; no polynomial arithmetic.
    """
    n = (1 << m) - 1
    covered = set()
    for i in range(1, 2 * t + 1):
        if i % n not in covered:
            covered.update(cyclotomic_coset(i, n))
    return n - len(covered)


def codes_for_length(m: int) -> List[CodeParams]:
    """All narrow-sense BCH codes of length 2^m - 1, largest t per dimension.

    Returns:
        Codes sorted by decreasing k
    """
    if not MIN_M <= m <= MAX_M:
        raise ParameterError(f"m={m} outside supported range [{MIN_M}, {MAX_M}]")
    n = (1 << m) - 1
    best_t = {}
    for t in range(1, (n - 1) // 2 + 1):
        k = bch_dimension(m, t)
        if k < 1:
            break
        best_t[k] = t
    return [CodeParams(n, k, t) for k, t in sorted(best_t.items(), reverse=True)]


def default_catalog(
    ms: Iterable[int] = (6, 7),
    extra: Iterable[Sequence[int]] = ((15, 7, 2),),
) -> List[CodeParams]:
    """Every narrow-sense code for each m in ``ms`` plus explicit extra triples."""
    catalog = []
    for m in ms:
        catalog.extend(codes_for_length(int(m)))
    for triple in extra:
        params = CodeParams(*(int(v) for v in triple))
        if params not in catalog:
            catalog.append(params)
    logger.debug(f"Catalog holds {len(catalog)} codes")
    return catalog


def blocks_needed(k: int, key_bits: int) -> int:
    """L = ceil(key_bits / k)."""
    if k < 1:
        raise ParameterError("code dimension must be positive")
    return -(-key_bits // k)


def encode_cost(n: int, k: int, blocks: int) -> int:
    """Bit operations of syndrome generation on the token: L * n * (n - k)."""
    return blocks * n * (n - k)


def decode_cost(n: int, k: int, t: int, blocks: int) -> int:
    """Bit-operation proxy for syndrome decoding of ``blocks`` blocks.

    Per block: recomputing the syndrome (n(n-k)), 2t power syndromes over the
    n-k remainder bits, Berlekamp-Massey (about 2t^2 field multiplications)
    and a Chien search over n positions with t+1 coefficients. A GF(2^m)
    multiplication is counted as m^2 bit operations.
    """
    m = (n + 1).bit_length() - 1
    field_mults = 2 * t * (n - k) + 2 * t * t + (t + 1) * n
    return blocks * (n * (n - k) + m * m * field_mults)


def parse_code(text: str) -> Tuple[int, int, int]:
    """Parse ``"63,16,11"`` into a triple."""
    try:
        n, k, t = (int(part) for part in text.split(','))
    except ValueError as e:
        raise ParameterError(f"code must look like n,k,t, got {text!r}") from e
    return n, k, t
