"""Patch-mask generation: threshold, optional dilation, pixel upsampling."""

import numpy as np

from .backends import ExtractError
from .heatmap import HeatmapGrid


def threshold_patches(heatmap: HeatmapGrid, level: float) -> np.ndarray:
    """Strictly-greater comparison, so level=1.0 selects nothing."""
    if not (0.0 <= level <= 1.0):
        raise ExtractError("threshold must lie in [0, 1]")
    return (heatmap.normalized > level).astype(np.uint8)


def dilate_patches(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a (2r+1) square structuring element."""
    if radius < 0:
        raise ExtractError("dilation radius must be >= 0")
    if radius == 0:
        return mask.copy()
    padded = np.pad(mask, radius)
    out = np.zeros_like(mask)
    h, w = mask.shape
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            out |= padded[dy : dy + h, dx : dx + w]
    return out


def upsample_to_pixels(patch_mask: np.ndarray, patch_size: int) -> np.ndarray:
    """Nearest-neighbor: each patch label fills its p x p pixel block."""
    return np.kron(
        patch_mask, np.ones((patch_size, patch_size), np.uint8)
    ).astype(np.uint8)


def intended_fraction(mask: np.ndarray) -> float:
    return float(mask.mean())


def first_frame_mask(
    heatmap: HeatmapGrid, level: float, dilation_radius: int = 0
) -> tuple[np.ndarray, float]:
    patches = threshold_patches(heatmap, level)
    patches = dilate_patches(patches, dilation_radius)
    pixels = upsample_to_pixels(patches, heatmap.patch_size)
    return pixels, intended_fraction(pixels)
