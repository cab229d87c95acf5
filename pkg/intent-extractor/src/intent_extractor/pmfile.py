"""Binary pixel-mask container.

Layout: an 18-byte little-endian header (magic ``TCPM``, u16 version,
u32 frame count, height, width) followed by one bit plane per frame.
Planes are packed row-major, most significant bit first, and each
frame's plane is padded up to a whole byte so frames stay
byte-aligned.
"""

import struct

import numpy as np

from .backends import ExtractError

MAGIC = b"TCPM"
VERSION = 1
_HEADER = struct.Struct("<4sHIII")


def write_mask_file(path, masks: np.ndarray) -> None:
    masks = np.asarray(masks)
    if masks.ndim != 3:
        raise ExtractError("mask stack must be (frames, height, width)")
    if not np.isin(masks, (0, 1)).all():
        raise ExtractError("mask stack must be binary")
    t, h, w = masks.shape
    parts = [_HEADER.pack(MAGIC, VERSION, t, h, w)]
    for frame in masks.astype(np.uint8):
        parts.append(np.packbits(frame.reshape(-1)).tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_mask_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ExtractError("malformed mask file: shorter than header")
    magic, version, t, h, w = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ExtractError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ExtractError(f"unsupported mask file version {version}")
    frame_bytes = (h * w + 7) // 8
    body = raw[_HEADER.size :]
    if len(body) != t * frame_bytes:
        raise ExtractError(
            f"mask file body is {len(body)} bytes, expected {t * frame_bytes}"
        )
    frames = []
    for k in range(t):
        chunk = body[k * frame_bytes : (k + 1) * frame_bytes]
        bits = np.unpackbits(np.frombuffer(chunk, dtype=np.uint8))[: h * w]
        frames.append(bits.reshape(h, w))
    return np.stack(frames).astype(np.uint8)
