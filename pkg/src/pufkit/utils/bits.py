"""Bit-vector helpers.

A bit-vector throughout pufkit is a one-dimensional ``numpy.uint8`` array
holding only 0 and 1.
"""

import numpy as np

from ..exceptions import ParameterError


def as_bits(values) -> np.ndarray:
    """Coerce ``values`` to a validated uint8 bit-vector (copy-free when possible)."""
    bits = np.asarray(values, dtype=np.uint8)
    if bits.ndim != 1:
        raise ParameterError(f"bit-vector must be one-dimensional, got shape {bits.shape}")
    if bits.size and bits.max() > 1:
        raise ParameterError("bit-vector may only contain 0 and 1")
    return bits


def packed_length(num_bits: int) -> int:
    """Bytes needed to hold ``num_bits`` bits."""
    return (num_bits + 7) // 8


def pack_lsb(bits: np.ndarray) -> bytes:
    """Pack bits least-significant-bit first, zero-padded to a byte boundary."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def unpack_lsb(data: bytes, num_bits: int) -> np.ndarray:
    """Inverse of :func:`pack_lsb`."""
    raw = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:num_bits].copy()


def pack_msb(bits: np.ndarray) -> bytes:
    """Pack bits most-significant-bit first, zero-padded to a byte boundary."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="big").tobytes()


def unpack_msb(data: bytes, num_bits: int) -> np.ndarray:
    """Inverse of :func:`pack_msb`."""
    raw = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(raw, bitorder="big")[:num_bits].copy()
