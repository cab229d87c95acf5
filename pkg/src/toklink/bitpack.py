"""MSB-first packing of variable-width unsigned integers.

Values are written big-endian bit by bit, concatenated without alignment,
and the final buffer is zero-padded to a byte boundary. Widths up to 32
bits are supported.
"""

from __future__ import annotations

import numpy as np

MAX_WIDTH = 32


def pack_values(values: np.ndarray, widths: np.ndarray) -> tuple[bytes, int]:
    """Pack ``values[i]`` into ``widths[i]`` bits each.

    Returns (packed bytes, total bit count before padding).
    """
    values = np.asarray(values, dtype=np.uint64)
    widths = np.asarray(widths, dtype=np.int64)
    if values.shape != widths.shape or values.ndim != 1:
        raise ValueError("values and widths must be 1-D arrays of equal length")
    if values.size == 0:
        return b"", 0
    if widths.min() < 1 or widths.max() > MAX_WIDTH:
        raise ValueError(f"widths must lie in [1, {MAX_WIDTH}]")
    limit = np.uint64(1) << widths.astype(np.uint64)
    if np.any(values >= limit):
        bad = int(np.argmax(values >= limit))
        raise ValueError(
            f"value {int(values[bad])} does not fit in {int(widths[bad])} bits"
        )

    offsets = np.zeros(values.size, dtype=np.int64)
    np.cumsum(widths[:-1], out=offsets[1:])
    total_bits = int(offsets[-1] + widths[-1])

    bitbuf = np.zeros(total_bits, dtype=np.uint8)
    for w in np.unique(widths):
        rows = np.flatnonzero(widths == w)
        # big-endian byte view -> per-value 32 bit columns, keep the low w
        vals32 = values[rows].astype(">u4")
        bits = np.unpackbits(vals32.view(np.uint8).reshape(-1, 4), axis=1)
        positions = offsets[rows][:, None] + np.arange(w, dtype=np.int64)[None, :]
        bitbuf[positions.ravel()] = bits[:, 32 - w:].ravel()
    return np.packbits(bitbuf).tobytes(), total_bits


def unpack_values(data: bytes, widths: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pack_values`; returns a uint32 array."""
    widths = np.asarray(widths, dtype=np.int64)
    if widths.size == 0:
        return np.zeros(0, dtype=np.uint32)
    if widths.min() < 1 or widths.max() > MAX_WIDTH:
        raise ValueError(f"widths must lie in [1, {MAX_WIDTH}]")

    offsets = np.zeros(widths.size, dtype=np.int64)
    np.cumsum(widths[:-1], out=offsets[1:])
    total_bits = int(offsets[-1] + widths[-1])
    if len(data) * 8 < total_bits:
        raise ValueError(
            f"buffer holds {len(data) * 8} bits, need {total_bits}"
        )

    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=total_bits)
    out = np.zeros(widths.size, dtype=np.uint64)
    for w in np.unique(widths):
        rows = np.flatnonzero(widths == w)
        positions = offsets[rows][:, None] + np.arange(w, dtype=np.int64)[None, :]
        gathered = bits[positions].astype(np.uint64)
        weights = np.uint64(1) << np.arange(w - 1, -1, -1, dtype=np.uint64)
        out[rows] = gathered @ weights
    return out.astype(np.uint32)


def pack_bitmask(flat_bits: np.ndarray) -> bytes:
    """Pack a flat 0/1 array MSB-first, zero-padded to a byte boundary."""
    flat = np.asarray(flat_bits, dtype=np.uint8).ravel()
    if flat.size and flat.max() > 1:
        raise ValueError("bitmask values must be 0 or 1")
    return np.packbits(flat).tobytes()


def unpack_bitmask(data: bytes, count: int) -> np.ndarray:
    """Read ``count`` MSB-first bits back out of ``data``."""
    if len(data) * 8 < count:
        raise ValueError(f"buffer holds {len(data) * 8} bits, need {count}")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count)
