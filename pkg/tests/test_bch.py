import itertools

import galois
import numpy as np
import pytest

from pufkit.bch import (
    CodeParams,
    DecodeFailure,
    blocks_needed,
    build_code,
    decode_cost,
    decode_syndrome,
    default_catalog,
    encode_cost,
    encode_message,
    gen_syndrome,
)
from pufkit.bch.catalog import bch_dimension, codes_for_length, parse_code
from pufkit.bch.codec import SyndromeBlock, generator_polynomial, syndrome_bits
from pufkit.bch.field import cyclotomic_coset, field_tables, galois_field
from pufkit.exceptions import ParameterError


def _gf16_mul(a, b):
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & 0x10:
            a ^= 0b10011
    return result


def _gf16_eval(poly, x):
    value = 0
    for degree in range(poly.bit_length() - 1, -1, -1):
        value = _gf16_mul(value, x) ^ ((poly >> degree) & 1)
    return value


def _brute_force_generator():
    """Lowest-degree binary polynomial with alpha^1..alpha^4 as roots in GF(16)."""
    powers = [1]
    for _ in range(4):
        powers.append(_gf16_mul(powers[-1], 2))
    for poly in range(2, 1 << 9):
        if all(_gf16_eval(poly, powers[j]) == 0 for j in range(1, 5)):
            return poly
    return None


def _random_error(rng, n, weight):
    error = np.zeros(n, dtype=np.uint8)
    error[rng.choice(n, size=weight, replace=False)] = 1
    return error


class TestField:
    def test_gf16_power_table(self):
        tables = field_tables(4)
        assert tables.exp[:6].tolist() == [1, 2, 4, 8, 3, 6]
        assert tables.log[0] == -1
        assert tables.exp.size == 2 * tables.order

    def test_every_nonzero_element_has_an_inverse(self):
        tables = field_tables(6)
        for a in range(1, 64):
            assert tables.mul(a, tables.inv(a)) == 1
        with pytest.raises(ZeroDivisionError):
            tables.inv(0)

    def test_cyclotomic_cosets(self):
        assert cyclotomic_coset(1, 15) == [1, 2, 4, 8]
        assert cyclotomic_coset(3, 15) == [3, 6, 12, 9]
        assert cyclotomic_coset(5, 15) == [5, 10]

    def test_unsupported_degree(self):
        with pytest.raises(ParameterError):
            galois_field(11)


class TestGenerator:
    def test_15_7_2_generator(self):
        assert int(generator_polynomial(4, 2)) == 0b111010001

    def test_15_7_2_matches_brute_force(self):
        assert build_code(15, 7, 2).generator_poly == _brute_force_generator()

    @pytest.mark.parametrize("n,k,t", [(63, 16, 11), (127, 15, 27), (63, 18, 10), (15, 7, 2)])
    def test_generator_degree_and_divisibility(self, n, k, t):
        code = build_code(n, k, t)
        assert code.generator_poly.bit_length() - 1 == n - k
        remainder = galois.Poly.Degrees([n, 0]) % galois.Poly.Int(code.generator_poly)
        assert int(remainder) == 0

    def test_dimension_from_cosets(self):
        assert bch_dimension(7, 27) == 15
        assert bch_dimension(6, 11) == 16
        assert bch_dimension(6, 10) == 18
        assert bch_dimension(4, 2) == 7

    @pytest.mark.parametrize("n,k,t", [(64, 16, 11), (63, 17, 11), (63, 16, 0), (15, 7, 8)])
    def test_invalid_parameters(self, n, k, t):
        with pytest.raises(ParameterError):
            build_code(n, k, t)

    def test_code_identity(self, code_63):
        assert code_63.code_id == (63, 16, 11)
        assert code_63.redundancy == 47
        assert str(code_63) == "BCH(63,16,11)"
        assert code_63.primitive_poly == 0b1000011


class TestSyndrome:
    def test_constant_term_maps_to_last_syndrome_bit(self, code_63):
        block = np.zeros(63, dtype=np.uint8)
        block[62] = 1
        expected = np.zeros(47, dtype=np.uint8)
        expected[-1] = 1
        assert np.array_equal(gen_syndrome(code_63, block).bits, expected)

    def test_pinned_15_7_2_vector(self, code_15):
        block = np.zeros(15, dtype=np.uint8)
        block[6] = 1  # x^8
        assert gen_syndrome(code_15, block).bits.tolist() == [1, 1, 0, 1, 0, 0, 0, 1]

    def test_syndrome_is_linear(self, code_127, rng):
        a = rng.integers(0, 2, 127, dtype=np.uint8)
        b = rng.integers(0, 2, 127, dtype=np.uint8)
        combined = gen_syndrome(code_127, a ^ b).bits
        assert np.array_equal(combined, gen_syndrome(code_127, a).bits ^ gen_syndrome(code_127, b).bits)

    def test_codewords_have_zero_syndrome(self, code_63, rng):
        for _ in range(20):
            message = rng.integers(0, 2, 16, dtype=np.uint8)
            codeword = encode_message(code_63, message)
            assert np.array_equal(codeword[:16], message)
            assert not gen_syndrome(code_63, codeword).bits.any()

    def test_batched_syndromes_match_single(self, code_15, rng):
        blocks = rng.integers(0, 2, (5, 15), dtype=np.uint8)
        batched = syndrome_bits(code_15, blocks)
        for row, syndrome in zip(blocks, batched):
            assert np.array_equal(gen_syndrome(code_15, row).bits, syndrome)

    def test_wrong_block_length(self, code_15):
        with pytest.raises(ParameterError):
            gen_syndrome(code_15, np.zeros(14, dtype=np.uint8))

    def test_non_binary_block(self, code_15):
        with pytest.raises(ParameterError):
            gen_syndrome(code_15, np.full(15, 2, dtype=np.uint8))


class TestDecode:
    def test_no_errors_returns_copy(self, code_63, rng):
        r = rng.integers(0, 2, 63, dtype=np.uint8)
        decoded = decode_syndrome(code_63, r, gen_syndrome(code_63, r))
        assert np.array_equal(decoded, r)
        assert decoded is not r

    def test_exhaustive_15_7_2(self, code_15):
        offset = np.array([1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1], dtype=np.uint8)
        patterns = [()] + [(i,) for i in range(15)] + list(itertools.combinations(range(15), 2))
        assert len(patterns) == 121
        for value in range(128):
            message = np.array([(value >> (6 - j)) & 1 for j in range(7)], dtype=np.uint8)
            r = encode_message(code_15, message) ^ offset
            p = gen_syndrome(code_15, r)
            for positions in patterns:
                r_prime = r.copy()
                r_prime[np.array(positions, dtype=np.int64)] ^= 1
                decoded = decode_syndrome(code_15, r_prime, p)
                assert not isinstance(decoded, DecodeFailure), (value, positions)
                assert np.array_equal(decoded, r), (value, positions)

    @pytest.mark.parametrize("code_name", ["code_63", "code_127"])
    def test_random_errors_up_to_t(self, code_name, request, rng):
        code = request.getfixturevalue(code_name)
        for weight in range(1, code.t + 1):
            for _ in range(8):
                r = rng.integers(0, 2, code.n, dtype=np.uint8)
                r_prime = r ^ _random_error(rng, code.n, weight)
                decoded = decode_syndrome(code, r_prime, gen_syndrome(code, r))
                assert np.array_equal(decoded, r), weight

    @pytest.mark.parametrize("code_name", ["code_15", "code_63", "code_127"])
    def test_beyond_t_never_returns_reference(self, code_name, request, rng):
        code = request.getfixturevalue(code_name)
        failures = 0
        for _ in range(100):
            r = rng.integers(0, 2, code.n, dtype=np.uint8)
            r_prime = r ^ _random_error(rng, code.n, code.t + 1)
            decoded = decode_syndrome(code, r_prime, gen_syndrome(code, r))
            if isinstance(decoded, DecodeFailure):
                failures += 1
                assert decoded.reason
            else:
                assert not np.array_equal(decoded, r)
                assert np.count_nonzero(decoded != r_prime) <= code.t
        assert failures > 0

    def test_wrong_syndrome_length(self, code_63):
        r = np.zeros(63, dtype=np.uint8)
        with pytest.raises(ParameterError):
            decode_syndrome(code_63, r, SyndromeBlock(np.zeros(46, dtype=np.uint8)))

    @pytest.mark.slow
    @pytest.mark.parametrize("code_name", ["code_63", "code_127"])
    def test_randomized_campaign_per_weight(self, code_name, request):
        code = request.getfixturevalue(code_name)
        rng = np.random.default_rng(7)
        for weight in range(1, code.t + 1):
            for _ in range(10_000):
                r = rng.integers(0, 2, code.n, dtype=np.uint8)
                r_prime = r ^ _random_error(rng, code.n, weight)
                assert np.array_equal(decode_syndrome(code, r_prime, gen_syndrome(code, r)), r)


class TestCatalog:
    def test_default_catalog_contains_reference_codes(self):
        catalog = default_catalog()
        for triple in [(127, 15, 27), (63, 16, 11), (15, 7, 2), (63, 18, 10), (127, 8, 31)]:
            assert CodeParams(*triple) in catalog

    def test_largest_t_per_dimension(self):
        codes = codes_for_length(6)
        ks = [code.k for code in codes]
        assert ks == sorted(ks, reverse=True)
        assert len(set(ks)) == len(ks)
        assert CodeParams(63, 7, 15) in codes
        assert all(code.n == 63 for code in codes)

    def test_every_catalog_code_builds(self):
        for code in codes_for_length(6):
            assert build_code(*code).k == code.k

    def test_block_counts(self):
        assert blocks_needed(15, 128) == 9
        assert blocks_needed(16, 128) == 8
        assert blocks_needed(7, 128) == 19
        assert blocks_needed(128, 128) == 1

    def test_costs(self):
        assert encode_cost(127, 15, 9) == 128016
        assert encode_cost(63, 16, 8) == 23688
        assert encode_cost(63, 18, 8) == 22680
        assert decode_cost(63, 16, 11, 8) > encode_cost(63, 16, 8)

    def test_parse_code(self):
        assert parse_code("63,16,11") == (63, 16, 11)
        with pytest.raises(ParameterError):
            parse_code("63,16")
