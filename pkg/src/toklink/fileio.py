"""Binary file formats for token grids and masks.

All formats are little-endian with a 4-byte ASCII magic and a u16 version.

  TokenGrid (`.tg`):          TCTG | ver | u32 N | u32 T,H,W | u16 d_t,d_s
                              | t*h*w u32 indices, row-major (tau, i, j).
  PixelMaskSequence (`.pm`):  TCPM | ver | u32 T,H,W | packed mask bits,
                              MSB-first, each frame padded to a byte boundary.
  SemanticTokenMask (`.tm`):  TCTM | ver | u32 t,h,w | f32 theta | packed
                              bits, each temporal slice padded as above.
"""

from __future__ import annotations

import struct

import numpy as np

from .bitpack import pack_bitmask, unpack_bitmask
from .tokens import Geometry, PixelMaskSequence, SemanticTokenMask, TokenGrid

GRID_MAGIC = b"TCTG"
PIXEL_MASK_MAGIC = b"TCPM"
TOKEN_MASK_MAGIC = b"TCTM"
FORMAT_VERSION = 1

_GRID_HEADER = struct.Struct("<4sHIIIIHH")
_PIXEL_MASK_HEADER = struct.Struct("<4sHIII")
_TOKEN_MASK_HEADER = struct.Struct("<4sHIIIf")


class FileFormatError(ValueError):
    """Raised when a file does not match its declared binary format."""


def _read_exact(data: bytes, offset: int, size: int, what: str) -> bytes:
    if len(data) < offset + size:
        raise FileFormatError(f"truncated file: expected {what}")
    return data[offset : offset + size]


def _check_magic(data: bytes, magic: bytes, header: struct.Struct):
    if len(data) < header.size:
        raise FileFormatError("malformed header: file shorter than header")
    if data[:4] != magic:
        raise FileFormatError(
            f"malformed header: bad magic {data[:4]!r}, expected {magic!r}"
        )
    version = struct.unpack_from("<H", data, 4)[0]
    if version != FORMAT_VERSION:
        raise FileFormatError(f"malformed header: unsupported version {version}")


def grid_to_bytes(grid: TokenGrid) -> bytes:
    g = grid.geometry
    header = _GRID_HEADER.pack(
        GRID_MAGIC,
        FORMAT_VERSION,
        grid.codebook_size,
        g.frames,
        g.height,
        g.width,
        g.d_t,
        g.d_s,
    )
    return header + grid.indices.astype("<u4").tobytes()


def grid_from_bytes(data: bytes) -> TokenGrid:
    _check_magic(data, GRID_MAGIC, _GRID_HEADER)
    _, _, n, frames, height, width, d_t, d_s = _GRID_HEADER.unpack_from(data)
    if min(n, frames, height, width, d_t, d_s) < 1:
        raise FileFormatError("malformed header: zero dimension")
    try:
        geometry = Geometry(
            frames=frames, height=height, width=width, d_t=d_t, d_s=d_s
        )
    except ValueError as exc:
        raise FileFormatError(str(exc)) from exc
    count = geometry.token_count
    body = _read_exact(data, _GRID_HEADER.size, 4 * count, f"{count} u32 indices")
    if len(data) != _GRID_HEADER.size + 4 * count:
        raise FileFormatError("trailing bytes after index data")
    indices = np.frombuffer(body, dtype="<u4").reshape(
        geometry.t, geometry.h, geometry.w
    )
    if indices.size and indices.max() >= n:
        raise FileFormatError("index out of codebook range")
    return TokenGrid(codebook_size=n, geometry=geometry, indices=indices)


def save_token_grid(path, grid: TokenGrid):
    with open(path, "wb") as fh:
        fh.write(grid_to_bytes(grid))


def load_token_grid(path) -> TokenGrid:
    with open(path, "rb") as fh:
        return grid_from_bytes(fh.read())


def _pack_planes(planes: np.ndarray) -> bytes:
    # planes: (n, rows, cols) of 0/1; each plane padded to a byte boundary
    return b"".join(pack_bitmask(plane.ravel()) for plane in planes)


def _unpack_planes(
    data: bytes, offset: int, n: int, rows: int, cols: int, what: str
) -> np.ndarray:
    plane_bits = rows * cols
    plane_bytes = (plane_bits + 7) // 8
    out = np.empty((n, rows, cols), dtype=np.uint8)
    for k in range(n):
        chunk = _read_exact(data, offset, plane_bytes, f"{what} plane {k}")
        out[k] = unpack_bitmask(chunk, plane_bits).reshape(rows, cols)
        offset += plane_bytes
    if len(data) != offset:
        raise FileFormatError(f"trailing bytes after {what} data")
    return out


def pixel_masks_to_bytes(masks: PixelMaskSequence) -> bytes:
    header = _PIXEL_MASK_HEADER.pack(
        PIXEL_MASK_MAGIC,
        FORMAT_VERSION,
        masks.frames,
        masks.height,
        masks.width,
    )
    return header + _pack_planes(masks.masks)


def pixel_masks_from_bytes(data: bytes) -> PixelMaskSequence:
    _check_magic(data, PIXEL_MASK_MAGIC, _PIXEL_MASK_HEADER)
    _, _, frames, height, width = _PIXEL_MASK_HEADER.unpack_from(data)
    if min(frames, height, width) < 1:
        raise FileFormatError("malformed header: zero dimension")
    planes = _unpack_planes(
        data, _PIXEL_MASK_HEADER.size, frames, height, width, "pixel mask"
    )
    return PixelMaskSequence(masks=planes)


def save_pixel_masks(path, masks: PixelMaskSequence):
    with open(path, "wb") as fh:
        fh.write(pixel_masks_to_bytes(masks))


def load_pixel_masks(path) -> PixelMaskSequence:
    with open(path, "rb") as fh:
        return pixel_masks_from_bytes(fh.read())


def token_mask_to_bytes(mask: SemanticTokenMask) -> bytes:
    header = _TOKEN_MASK_HEADER.pack(
        TOKEN_MASK_MAGIC,
        FORMAT_VERSION,
        mask.t,
        mask.h,
        mask.w,
        mask.theta,
    )
    return header + _pack_planes(mask.mask)


def token_mask_from_bytes(data: bytes) -> SemanticTokenMask:
    _check_magic(data, TOKEN_MASK_MAGIC, _TOKEN_MASK_HEADER)
    _, _, t, h, w, theta = _TOKEN_MASK_HEADER.unpack_from(data)
    if min(t, h, w) < 1:
        raise FileFormatError("malformed header: zero dimension")
    if not (0.0 < theta <= 1.0):
        raise FileFormatError(f"malformed header: theta {theta} out of (0, 1]")
    planes = _unpack_planes(
        data, _TOKEN_MASK_HEADER.size, t, h, w, "token mask"
    )
    return SemanticTokenMask(mask=planes, theta=theta)


def save_token_mask(path, mask: SemanticTokenMask):
    with open(path, "wb") as fh:
        fh.write(token_mask_to_bytes(mask))


def load_token_mask(path) -> SemanticTokenMask:
    with open(path, "rb") as fh:
        return token_mask_from_bytes(fh.read())
