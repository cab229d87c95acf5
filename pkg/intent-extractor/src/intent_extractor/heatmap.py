"""Prompt-conditioned similarity heatmap on the first frame's patch grid."""

import logging
from dataclasses import dataclass

import numpy as np

from .backends import EmbeddingBackend, ExtractError

NORMALIZATION_EPSILON = 1e-8

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeatmapGrid:
    """Cosine similarities per patch, raw and min-max normalized."""

    raw: np.ndarray
    normalized: np.ndarray
    patch_size: int

    def __post_init__(self):
        if self.raw.shape != self.normalized.shape or self.raw.ndim != 2:
            raise ExtractError("heatmap grids must be matching 2-d arrays")

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.raw.shape


def to_gray(frame: np.ndarray) -> np.ndarray:
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    if arr.ndim != 2:
        raise ExtractError(f"frame must be (H, W) or (H, W, C), got {arr.shape}")
    return arr


def crop_to_patch_multiple(frame: np.ndarray, patch_size: int) -> np.ndarray:
    """Drop right/bottom remainders so both dims divide by the patch size."""
    h, w = frame.shape[:2]
    ch, cw = (h // patch_size) * patch_size, (w // patch_size) * patch_size
    if ch == 0 or cw == 0:
        raise ExtractError(
            f"frame {h}x{w} smaller than one {patch_size}px patch"
        )
    if (ch, cw) != (h, w):
        log.info("cropping frame %dx%d to %dx%d for patch size %d",
                 h, w, ch, cw, patch_size)
    return frame[:ch, :cw]


def normalize_scores(raw: np.ndarray) -> np.ndarray:
    lo = float(raw.min())
    hi = float(raw.max())
    # constant input divides ~0 by epsilon and lands on all zeros
    return (raw - lo) / (hi - lo + NORMALIZATION_EPSILON)


def compute_heatmap(
    frame: np.ndarray,
    prompt: str,
    patch_size: int,
    backend: EmbeddingBackend,
) -> HeatmapGrid:
    if not prompt or not prompt.strip():
        raise ExtractError("prompt must be a non-empty string")
    if patch_size < 1:
        raise ExtractError("patch size must be >= 1")
    gray = crop_to_patch_multiple(to_gray(frame), patch_size)

    patches = np.asarray(backend.embed_patches(gray, patch_size), np.float64)
    text = np.asarray(backend.embed_text(prompt), np.float64)
    if patches.ndim != 3 or text.shape != (patches.shape[2],):
        raise ExtractError("backend returned mismatched embedding shapes")

    norms = np.linalg.norm(patches, axis=2)
    text_norm = np.linalg.norm(text)
    denom = np.maximum(norms * text_norm, 1e-12)
    raw = (patches @ text) / denom
    return HeatmapGrid(
        raw=raw, normalized=normalize_scores(raw), patch_size=patch_size
    )
