"""Token grids, pixel masks, token-level semantic masks, and mask pooling.

A video of T frames at H x W pixels is represented by a t x h x w grid of
integer codebook indices, where t = T/d_t and h, w = H/d_s, W/d_s for the
tokenizer's temporal and spatial downsampling factors. A pixel-level binary
relevance mask sequence is pooled onto that grid to classify each token as
intended (1) or non-intended (0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TokenModelError(ValueError):
    """Raised for invalid grid/mask construction or mismatched shapes."""


def _frozen_array(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Geometry:
    """Source video dims plus downsampling factors; token dims are derived."""

    frames: int
    height: int
    width: int
    d_t: int
    d_s: int

    def __post_init__(self):
        for name in ("frames", "height", "width", "d_t", "d_s"):
            if getattr(self, name) <= 0:
                raise TokenModelError(f"{name} must be positive")
        if self.frames % self.d_t != 0:
            raise TokenModelError(
                f"dimension mismatch: frames {self.frames} not divisible by "
                f"temporal factor {self.d_t}"
            )
        if self.height % self.d_s != 0 or self.width % self.d_s != 0:
            raise TokenModelError(
                f"dimension mismatch: {self.height}x{self.width} not divisible "
                f"by spatial factor {self.d_s}"
            )

    @property
    def t(self) -> int:
        return self.frames // self.d_t

    @property
    def h(self) -> int:
        return self.height // self.d_s

    @property
    def w(self) -> int:
        return self.width // self.d_s

    @property
    def token_count(self) -> int:
        return self.t * self.h * self.w


@dataclass(frozen=True)
class TokenGrid:
    """t x h x w codebook indices, immutable after construction."""

    codebook_size: int
    geometry: Geometry
    indices: np.ndarray

    def __post_init__(self):
        if self.codebook_size <= 0:
            raise TokenModelError("codebook_size must be positive")
        g = self.geometry
        idx = np.asarray(self.indices)
        if idx.shape != (g.t, g.h, g.w):
            raise TokenModelError(
                f"dimension mismatch: indices shape {idx.shape} != "
                f"({g.t}, {g.h}, {g.w})"
            )
        if idx.size and (idx.min() < 0 or idx.max() >= self.codebook_size):
            raise TokenModelError("index out of codebook range")
        object.__setattr__(self, "indices", _frozen_array(idx, np.uint32))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TokenGrid)
            and self.codebook_size == other.codebook_size
            and self.geometry == other.geometry
            and np.array_equal(self.indices, other.indices)
        )


@dataclass(frozen=True)
class PixelMaskSequence:
    """T x H x W binary masks, one per source frame."""

    masks: np.ndarray
    frames: int = field(init=False)
    height: int = field(init=False)
    width: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.masks)
        if m.ndim != 3 or min(m.shape) < 1:
            raise TokenModelError("masks must be a non-empty T x H x W array")
        if not np.isin(m, (0, 1)).all():
            raise TokenModelError("mask values must be 0 or 1")
        object.__setattr__(self, "masks", _frozen_array(m, np.uint8))
        object.__setattr__(self, "frames", m.shape[0])
        object.__setattr__(self, "height", m.shape[1])
        object.__setattr__(self, "width", m.shape[2])

    def __eq__(self, other) -> bool:
        return isinstance(other, PixelMaskSequence) and np.array_equal(
            self.masks, other.masks
        )


@dataclass(frozen=True)
class SemanticTokenMask:
    """t x h x w intended/non-intended token labels plus the threshold used."""

    mask: np.ndarray
    theta: float

    def __post_init__(self):
        m = np.asarray(self.mask)
        if m.ndim != 3 or min(m.shape) < 1:
            raise TokenModelError("mask must be a non-empty t x h x w array")
        if not np.isin(m, (0, 1)).all():
            raise TokenModelError("mask values must be 0 or 1")
        if not (0.0 < self.theta <= 1.0):
            raise TokenModelError("theta must lie in (0, 1]")
        object.__setattr__(self, "mask", _frozen_array(m, np.uint8))

    @property
    def t(self) -> int:
        return self.mask.shape[0]

    @property
    def h(self) -> int:
        return self.mask.shape[1]

    @property
    def w(self) -> int:
        return self.mask.shape[2]

    @property
    def intended_count(self) -> int:
        return int(self.mask.sum())

    @property
    def non_intended_count(self) -> int:
        return int(self.mask.size - self.mask.sum())

    def matches_grid(self, grid: TokenGrid) -> bool:
        g = grid.geometry
        return self.mask.shape == (g.t, g.h, g.w)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SemanticTokenMask)
            and self.theta == other.theta
            and np.array_equal(self.mask, other.mask)
        )


def pool_pixel_masks(
    pixel_masks: PixelMaskSequence, geometry: Geometry, theta: float
) -> SemanticTokenMask:
    """Pool a pixel mask sequence onto the token grid and threshold it.

    For token (tau, i, j) the pooled value is the mean relevant-pixel
    fraction over the d_t frames and the d_s x d_s pixel cell it covers;
    the token is marked intended iff that mean strictly exceeds theta.
    """
    if not (0.0 < theta <= 1.0):
        raise TokenModelError("theta must lie in (0, 1]")
    if (
        pixel_masks.frames != geometry.frames
        or pixel_masks.height != geometry.height
        or pixel_masks.width != geometry.width
    ):
        raise TokenModelError(
            f"dimension mismatch: pixel masks "
            f"{pixel_masks.frames}x{pixel_masks.height}x{pixel_masks.width} "
            f"vs geometry {geometry.frames}x{geometry.height}x{geometry.width}"
        )
    t, h, w = geometry.t, geometry.h, geometry.w
    cells = pixel_masks.masks.reshape(
        t, geometry.d_t, h, geometry.d_s, w, geometry.d_s
    )
    pooled = cells.mean(axis=(1, 3, 5), dtype=np.float64)
    return SemanticTokenMask(mask=(pooled > theta).astype(np.uint8), theta=theta)


def intended_ratio(mask: SemanticTokenMask) -> float:
    """Fraction of tokens labelled intended, in [0, 1]."""
    return mask.intended_count / mask.mask.size
