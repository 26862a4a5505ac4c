"""GF(2^m) arithmetic tables for the BCH codec.

The heavy lifting (field construction, minimal polynomials, LCM) is done by
``galois``; decoding runs on plain integer log/antilog tables extracted from
the galois field because the inner loops of Berlekamp-Massey are scalar.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List

import galois
import numpy as np

from ..exceptions import ParameterError

# Primitive polynomials, bit i = coefficient of x^i. Lowest-weight entries of
# the standard table (Lin & Costello, Table 2.7; Peterson & Weldon, App. C).
PRIMITIVE_POLYS = {
    3: 0b1011,            # x^3 + x + 1
    4: 0b10011,           # x^4 + x + 1
    5: 0b100101,          # x^5 + x^2 + 1
    6: 0b1000011,         # x^6 + x + 1
    7: 0b10001001,        # x^7 + x^3 + 1
    8: 0b100011101,       # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,      # x^9 + x^4 + 1
    10: 0b10000001001,    # x^10 + x^3 + 1
}

MIN_M = min(PRIMITIVE_POLYS)
MAX_M = max(PRIMITIVE_POLYS)


@dataclass(frozen=True)
class FieldTables:
    """Antilog/log tables of GF(2^m) under a fixed primitive polynomial.

    ``exp`` has length ``2n`` so that ``exp[log a + log b]`` needs no
    reduction; ``log[0]`` is -1.
    """

    m: int
    primitive_poly: int
    exp: np.ndarray = field(repr=False, compare=False)
    log: np.ndarray = field(repr=False, compare=False)
    exp_list: List[int] = field(repr=False, compare=False)
    log_list: List[int] = field(repr=False, compare=False)

    @property
    def order(self) -> int:
        """Multiplicative group order n = 2^m - 1."""
        return (1 << self.m) - 1

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp_list[self.log_list[a] + self.log_list[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^m)")
        return self.exp_list[(self.order - self.log_list[a]) % self.order]


def galois_field(m: int):
    """Return the galois ``FieldArray`` class for GF(2^m) with alpha = x."""
    if m not in PRIMITIVE_POLYS:
        raise ParameterError(f"field degree m={m} outside supported range [{MIN_M}, {MAX_M}]")
    return galois.GF(
        2 ** m,
        irreducible_poly=galois.Poly.Int(PRIMITIVE_POLYS[m]),
        primitive_element=2,
    )


@lru_cache(maxsize=None)
def field_tables(m: int) -> FieldTables:
    """Build (and cache) the integer tables for GF(2^m)."""
    gf = galois_field(m)
    n = (1 << m) - 1
    alpha = gf.primitive_element
    cycle = np.array([int(alpha ** i) for i in range(n)], dtype=np.int64)
    powers = np.concatenate([cycle, cycle])

    log = np.full(n + 1, -1, dtype=np.int64)
    log[powers[:n]] = np.arange(n, dtype=np.int64)

    return FieldTables(
        m=m,
        primitive_poly=PRIMITIVE_POLYS[m],
        exp=powers,
        log=log,
        exp_list=powers.tolist(),
        log_list=log.tolist(),
    )


def cyclotomic_coset(i: int, n: int) -> List[int]:
    """The 2-cyclotomic coset of ``i`` modulo ``n``, in generation order."""
    coset = []
    j = i % n
    while j not in coset:
        coset.append(j)
        j = (2 * j) % n
    return coset
