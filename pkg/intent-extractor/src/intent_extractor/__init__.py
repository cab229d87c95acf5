"""Prompt-conditioned mask extraction for token-class video links.

Pipeline: embed the first frame's patches and the text prompt, score
patches by cosine similarity, threshold and upsample to a pixel mask,
then propagate that mask across the sequence with a displacement field.
The result is written as a bit-packed pixel-mask sequence file.
"""

from .backends import (
    EmbeddingBackend,
    ExtractError,
    FeatureHashBackend,
    MockBackend,
    get_backend,
)
from .flow import constant_flow, propagate, warp_backward, warp_splat, zero_flow
from .heatmap import (
    NORMALIZATION_EPSILON,
    HeatmapGrid,
    compute_heatmap,
    crop_to_patch_multiple,
    normalize_scores,
    to_gray,
)
from .maskgen import (
    dilate_patches,
    first_frame_mask,
    intended_fraction,
    threshold_patches,
    upsample_to_pixels,
)
from .pmfile import read_mask_file, write_mask_file

__all__ = [
    "EmbeddingBackend",
    "ExtractError",
    "FeatureHashBackend",
    "HeatmapGrid",
    "MockBackend",
    "NORMALIZATION_EPSILON",
    "compute_heatmap",
    "constant_flow",
    "crop_to_patch_multiple",
    "dilate_patches",
    "first_frame_mask",
    "get_backend",
    "intended_fraction",
    "normalize_scores",
    "propagate",
    "read_mask_file",
    "threshold_patches",
    "to_gray",
    "upsample_to_pixels",
    "warp_backward",
    "warp_splat",
    "write_mask_file",
    "zero_flow",
]
