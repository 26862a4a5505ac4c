import pytest

from pufkit.keygen.hashing import DIGEST_BYTES, fingerprint, hash128

from blake2s_reference import blake2s


def _corpus():
    lengths = [0, 1, 2, 3] + [64 * k + d for k in range(1, 21) for d in (-1, 0, 1)]
    return [bytes((7 * i + n) % 251 for i in range(n)) for n in lengths]


CORPUS = _corpus()


def test_corpus_has_64_vectors():
    assert len(CORPUS) == 64
    assert CORPUS[0] == b""
    assert {len(v) for v in CORPUS} >= {0, 1, 63, 64, 65, 1279, 1280, 1281}


def test_reference_matches_published_vector():
    expected = "508c5e8c327c14e2e1a72ba34eeb452f37458b209ed63a294d999b4c86675982"
    assert blake2s(b"abc").hex() == expected


@pytest.mark.parametrize("data", CORPUS, ids=lambda d: f"len{len(d)}")
def test_hash128_matches_reference(data):
    digest = hash128(data)
    assert len(digest) == DIGEST_BYTES
    assert digest == blake2s(data, digest_size=16)


def test_hash128_is_not_a_truncated_256_bit_digest():
    assert hash128(b"abc") != blake2s(b"abc")[:16]


def test_fingerprint_uses_personalised_hash():
    key = bytes(range(16))
    assert fingerprint(key) == blake2s(key, digest_size=8, person=b"pufkfp").hex()
    assert fingerprint(key) != hash128(key)[:8].hex()
