"""BLAKE2s-128, the entropy extractor and tag hash of the protocol."""

import hashlib

DIGEST_BYTES = 16


def hash128(data: bytes) -> bytes:
    """Unkeyed BLAKE2s with a 16-byte digest."""
    return hashlib.blake2s(bytes(data), digest_size=DIGEST_BYTES).digest()


def fingerprint(key: bytes) -> str:
    """Short, non-invertible identifier of a key for logs and reports."""
    return hashlib.blake2s(bytes(key), digest_size=8, person=b'pufkfp').hexdigest()
