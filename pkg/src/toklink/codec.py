"""Two-class token coding: full-precision intended tokens, clipped
differential coding for the rest, plus bitstream (de)serialization and the
closed-form rate accounting (payload bits, bits per pixel, side-info ratio).

The first temporal slice is the reference: it is always carried at full
precision and anchors both the differential encoder and the erasure
fallback downstream. For every later token the encoder emits either the
raw codebook index (intended class, b_full bits) or

    sym = clip(Z - Z_ref, -Q, Q) + Q,    Q = 2^(b_delta - 1) - 1

in b_delta bits. Decoding inverts the shift and clips the reconstruction
into the codebook range, so any bit pattern of the right length decodes.
"""

from __future__ import annotations

import hashlib
import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .bitpack import pack_values, unpack_values
from .fileio import FileFormatError, token_mask_to_bytes
from .tokens import Geometry, SemanticTokenMask, TokenGrid, intended_ratio

BITSTREAM_MAGIC = b"TCBS"
BITSTREAM_VERSION = 1

_BITSTREAM_HEADER = struct.Struct("<4sHBBIIIIHH32s")


class CodecError(ValueError):
    """Invalid codec configuration or mismatched encode/decode inputs."""


class IntegrityError(ValueError):
    """Checksum or mask-digest mismatch on a serialized bitstream."""


@dataclass(frozen=True)
class CodecConfig:
    """Bit widths for the two token classes over a codebook of size N."""

    codebook_size: int
    b_full: int
    b_delta: int

    def __post_init__(self):
        if self.codebook_size < 3:
            raise CodecError("codebook_size must be at least 3")
        required = math.ceil(math.log2(self.codebook_size))
        if self.b_full != required:
            raise CodecError(
                f"b_full must be ceil(log2 N) = {required}, got {self.b_full}"
            )
        if not (2 <= self.b_delta <= self.b_full):
            raise CodecError(
                f"b_delta must lie in [2, {self.b_full}], got {self.b_delta}"
            )

    @classmethod
    def for_codebook(cls, codebook_size: int, b_delta: int | None = None):
        """Config with b_full derived from N; b_delta defaults to b_full."""
        b_full = math.ceil(math.log2(codebook_size)) if codebook_size >= 2 else 1
        return cls(
            codebook_size=codebook_size,
            b_full=b_full,
            b_delta=b_full if b_delta is None else b_delta,
        )

    @property
    def clip_radius(self) -> int:
        """Q: differences survive coding exactly iff |diff| <= Q."""
        return 2 ** (self.b_delta - 1) - 1


def mask_digest(mask: SemanticTokenMask) -> bytes:
    """32-byte digest binding a bitstream to the mask used to encode it."""
    return hashlib.sha256(token_mask_to_bytes(mask)).digest()


@dataclass(frozen=True)
class TokenBitstream:
    """Encoded token grid: reference slice plus per-token payload symbols.

    payload_values holds the emitted symbols for slices tau >= 1 in
    row-major (tau, i, j) order; payload_widths holds the matching bit
    width per symbol (b_full or b_delta).
    """

    config: CodecConfig
    geometry: Geometry
    mask_sha256: bytes
    reference_values: np.ndarray
    payload_values: np.ndarray
    payload_widths: np.ndarray

    def __post_init__(self):
        if len(self.mask_sha256) != 32:
            raise CodecError("mask_sha256 must be 32 bytes")
        g = self.geometry
        ref = np.ascontiguousarray(self.reference_values, dtype=np.uint32)
        if ref.shape != (g.h * g.w,):
            raise CodecError("reference slice length must equal h*w")
        vals = np.ascontiguousarray(self.payload_values, dtype=np.uint32)
        widths = np.ascontiguousarray(self.payload_widths, dtype=np.uint8)
        expected = (g.t - 1) * g.h * g.w
        if vals.shape != (expected,) or widths.shape != (expected,):
            raise CodecError(
                f"payload must hold {expected} symbols for tau >= 1"
            )
        for arr, name in ((ref, "reference_values"), (vals, "payload_values"),
                          (widths, "payload_widths")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def reference_bit_length(self) -> int:
        return self.reference_values.size * self.config.b_full

    @property
    def payload_bit_length(self) -> int:
        """Exact payload bits before byte padding."""
        return int(self.payload_widths.astype(np.int64).sum())

    @property
    def token_bit_length(self) -> int:
        """Reference plus payload bits (headers and padding excluded)."""
        return self.reference_bit_length + self.payload_bit_length


def encode(
    grid: TokenGrid, mask: SemanticTokenMask, cfg: CodecConfig
) -> TokenBitstream:
    """Encode a grid against its semantic mask.

    Raises CodecError when the mask shape or codebook size disagrees with
    the grid.
    """
    if not mask.matches_grid(grid):
        raise CodecError(
            f"dimension mismatch: mask {mask.mask.shape} vs grid "
            f"({grid.geometry.t}, {grid.geometry.h}, {grid.geometry.w})"
        )
    if cfg.codebook_size != grid.codebook_size:
        raise CodecError(
            f"codebook mismatch: config N={cfg.codebook_size}, "
            f"grid N={grid.codebook_size}"
        )
    idx = grid.indices.astype(np.int64)
    reference = idx[0]
    rest = idx[1:]
    intended = mask.mask[1:].astype(bool)
    q = cfg.clip_radius
    diffs = np.clip(rest - reference[None, :, :], -q, q)
    symbols = np.where(intended, rest, diffs + q)
    widths = np.where(intended, cfg.b_full, cfg.b_delta)
    return TokenBitstream(
        config=cfg,
        geometry=grid.geometry,
        mask_sha256=mask_digest(mask),
        reference_values=reference.ravel().astype(np.uint32),
        payload_values=symbols.ravel().astype(np.uint32),
        payload_widths=widths.ravel().astype(np.uint8),
    )


def decode(
    stream: TokenBitstream, mask: SemanticTokenMask, strict: bool = True
) -> TokenGrid:
    """Reconstruct a TokenGrid from a bitstream and its mask.

    Intended positions take the transmitted index; non-intended positions
    take clip(Z_ref + sym - Q) into [0, N-1]. Differential symbols above
    2Q (unused code points) clamp to 2Q. With strict=True a transmitted
    intended index >= N raises; with strict=False it clips to N-1, making
    decoding total over arbitrary bit patterns.
    """
    _check_mask_binding(stream, mask)
    g = stream.geometry
    cfg = stream.config
    n = cfg.codebook_size
    q = cfg.clip_radius

    reference = stream.reference_values.astype(np.int64).reshape(g.h, g.w)
    intended = mask.mask[1:].astype(bool)
    symbols = stream.payload_values.astype(np.int64).reshape(
        g.t - 1, g.h, g.w
    )

    if strict:
        bad_ref = reference >= n
        bad_full = intended & (symbols >= n)
        if bad_ref.any() or bad_full.any():
            raise CodecError(
                "transmitted intended value out of codebook range: "
                f"{int(bad_ref.sum()) + int(bad_full.sum())} value(s) >= {n}"
            )
    reference = np.minimum(reference, n - 1)

    deltas = np.minimum(symbols, 2 * q)
    differential = np.clip(reference[None, :, :] + deltas - q, 0, n - 1)
    full = np.minimum(symbols, n - 1)
    rest = np.where(intended, full, differential)

    indices = np.concatenate([reference[None, :, :], rest], axis=0)
    return TokenGrid(codebook_size=n, geometry=g, indices=indices)


def _check_mask_binding(stream: TokenBitstream, mask: SemanticTokenMask):
    g = stream.geometry
    if mask.mask.shape != (g.t, g.h, g.w):
        raise CodecError(
            f"dimension mismatch: mask {mask.mask.shape} vs stream "
            f"({g.t}, {g.h}, {g.w})"
        )
    if mask_digest(mask) != stream.mask_sha256:
        raise IntegrityError("mask digest mismatch: wrong mask for bitstream")
    expected = np.where(
        mask.mask[1:].astype(bool), stream.config.b_full, stream.config.b_delta
    ).ravel()
    if not np.array_equal(expected, stream.payload_widths):
        raise IntegrityError("payload widths disagree with mask classes")


def payload_bits(mask: SemanticTokenMask, cfg: CodecConfig) -> int:
    """Total coded bits over the whole grid: N_s*b_full + N_n*b_delta."""
    return (
        mask.intended_count * cfg.b_full
        + mask.non_intended_count * cfg.b_delta
    )


def transmitted_counts(mask: SemanticTokenMask) -> tuple[int, int]:
    """Token counts per transmission class.

    The reference slice always ships with the intended class regardless of
    its mask labels, so the class-s count is h*w plus the intended tokens
    of later slices.
    """
    later = mask.mask[1:]
    n_s = mask.h * mask.w + int(later.sum())
    n_n = int(later.size - later.sum())
    return n_s, n_n


def bpp(mask: SemanticTokenMask, cfg: CodecConfig, geometry: Geometry) -> float:
    """Coded bits per source pixel (RGB): mean token bits / (3*d_t*d_s^2)."""
    rho = intended_ratio(mask)
    mean_bits = rho * cfg.b_full + (1.0 - rho) * cfg.b_delta
    return mean_bits / (3.0 * geometry.d_t * geometry.d_s**2)


def side_info_overhead(
    temporal_tokens: int,
    block_size: int,
    mv_bits: float,
    rho_s: float,
    cfg: CodecConfig,
) -> float:
    """Mask side-information bits relative to mean token payload bits.

    The first slice costs one mask bit per token; each later slice costs
    mv_bits per block_size^2-token block.
    """
    if temporal_tokens <= 0:
        raise CodecError("temporal_tokens must be positive")
    if block_size <= 0:
        raise CodecError("block_size must be positive")
    t = temporal_tokens
    per_token_side = 1.0 / t + ((t - 1) / t) * mv_bits / block_size**2
    mean_payload = rho_s * cfg.b_full + (1.0 - rho_s) * cfg.b_delta
    return per_token_side / mean_payload


def bitstream_to_bytes(stream: TokenBitstream) -> bytes:
    """Serialize: header, padded reference section, padded payload section,
    then a CRC32 over everything before it."""
    g = stream.geometry
    cfg = stream.config
    header = _BITSTREAM_HEADER.pack(
        BITSTREAM_MAGIC,
        BITSTREAM_VERSION,
        cfg.b_full,
        cfg.b_delta,
        cfg.codebook_size,
        g.frames,
        g.height,
        g.width,
        g.d_t,
        g.d_s,
        stream.mask_sha256,
    )
    ref_widths = np.full(stream.reference_values.size, cfg.b_full, np.uint8)
    ref_bytes, _ = pack_values(stream.reference_values, ref_widths)
    payload_bytes, _ = pack_values(stream.payload_values, stream.payload_widths)
    body = header + ref_bytes + payload_bytes
    return body + struct.pack("<I", zlib.crc32(body))


def bitstream_from_bytes(data: bytes, mask: SemanticTokenMask) -> TokenBitstream:
    """Parse a serialized bitstream; the mask supplies the payload widths.

    Raises FileFormatError on malformed/truncated input, IntegrityError on
    checksum or mask-digest mismatch.
    """
    if len(data) < _BITSTREAM_HEADER.size + 4:
        raise FileFormatError("malformed header: file shorter than header")
    if data[:4] != BITSTREAM_MAGIC:
        raise FileFormatError(
            f"malformed header: bad magic {data[:4]!r}, expected "
            f"{BITSTREAM_MAGIC!r}"
        )
    (
        _,
        version,
        b_full,
        b_delta,
        n,
        frames,
        height,
        width,
        d_t,
        d_s,
        digest,
    ) = _BITSTREAM_HEADER.unpack_from(data)
    if version != BITSTREAM_VERSION:
        raise FileFormatError(f"malformed header: unsupported version {version}")

    body, checksum_bytes = data[:-4], data[-4:]
    (stored_crc,) = struct.unpack("<I", checksum_bytes)
    if zlib.crc32(body) != stored_crc:
        raise IntegrityError("checksum mismatch: bitstream corrupted")

    try:
        cfg = CodecConfig(codebook_size=n, b_full=b_full, b_delta=b_delta)
        geometry = Geometry(
            frames=frames, height=height, width=width, d_t=d_t, d_s=d_s
        )
    except ValueError as exc:
        raise FileFormatError(f"malformed header: {exc}") from exc

    if mask.mask.shape != (geometry.t, geometry.h, geometry.w):
        raise FileFormatError(
            f"dimension mismatch: mask {mask.mask.shape} vs header "
            f"({geometry.t}, {geometry.h}, {geometry.w})"
        )
    if mask_digest(mask) != digest:
        raise IntegrityError("mask digest mismatch: wrong mask for bitstream")

    ref_count = geometry.h * geometry.w
    ref_bytes_len = (ref_count * b_full + 7) // 8
    widths = np.where(mask.mask[1:].astype(bool), b_full, b_delta)
    widths = widths.ravel().astype(np.uint8)
    payload_bytes_len = (int(widths.astype(np.int64).sum()) + 7) // 8

    offset = _BITSTREAM_HEADER.size
    expected_len = offset + ref_bytes_len + payload_bytes_len + 4
    if len(data) != expected_len:
        raise FileFormatError(
            f"truncated payload: file is {len(data)} bytes, expected "
            f"{expected_len}"
        )
    ref_section = data[offset : offset + ref_bytes_len]
    offset += ref_bytes_len
    payload_section = data[offset : offset + payload_bytes_len]

    reference = unpack_values(
        ref_section, np.full(ref_count, b_full, np.uint8)
    )
    payload = unpack_values(payload_section, widths)
    return TokenBitstream(
        config=cfg,
        geometry=geometry,
        mask_sha256=digest,
        reference_values=reference,
        payload_values=payload,
        payload_widths=widths,
    )


def save_bitstream(path, stream: TokenBitstream):
    with open(path, "wb") as fh:
        fh.write(bitstream_to_bytes(stream))


def load_bitstream(path, mask: SemanticTokenMask) -> TokenBitstream:
    with open(path, "rb") as fh:
        return bitstream_from_bytes(fh.read(), mask)
