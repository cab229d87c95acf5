"""Embedding backends for the prompt-conditioned heatmap.

A backend supplies two callables: per-patch image embeddings and a text
embedding, living in the same vector space so cosine similarity is
meaningful. Heavy pretrained encoders plug in through the same protocol;
this package ships only deterministic, weights-free implementations so
the pipeline runs and tests everywhere.
"""

import hashlib
from typing import Protocol

import numpy as np


class ExtractError(ValueError):
    pass


class EmbeddingBackend(Protocol):
    def embed_patches(self, frame: np.ndarray, patch_size: int) -> np.ndarray:
        """Return a (grid_h, grid_w, dim) array for a (H, W) gray frame."""
        ...

    def embed_text(self, prompt: str) -> np.ndarray:
        """Return a (dim,) vector for the prompt."""
        ...


def _patch_view(frame: np.ndarray, p: int) -> np.ndarray:
    gh, gw = frame.shape[0] // p, frame.shape[1] // p
    return frame[: gh * p, : gw * p].reshape(gh, p, gw, p).transpose(0, 2, 1, 3)


class MockBackend:
    """Fixed embeddings for tests: ignores pixel content entirely."""

    def __init__(self, patch_embeddings: np.ndarray, text_embedding: np.ndarray):
        self.patch_embeddings = np.asarray(patch_embeddings, dtype=np.float64)
        self.text_embedding = np.asarray(text_embedding, dtype=np.float64)
        if self.patch_embeddings.ndim != 3:
            raise ExtractError("patch embeddings must be (grid_h, grid_w, dim)")
        if self.text_embedding.shape != (self.patch_embeddings.shape[2],):
            raise ExtractError("text embedding dimension mismatch")

    def embed_patches(self, frame, patch_size):
        gh = frame.shape[0] // patch_size
        gw = frame.shape[1] // patch_size
        if (gh, gw) != self.patch_embeddings.shape[:2]:
            raise ExtractError(
                f"mock grid {self.patch_embeddings.shape[:2]} does not match "
                f"frame grid {(gh, gw)}"
            )
        return self.patch_embeddings

    def embed_text(self, prompt):
        return self.text_embedding


class FeatureHashBackend:
    """Deterministic stand-in for a pretrained encoder.

    Patches embed as simple intensity statistics; the prompt seeds a unit
    vector in the same space, so different prompts weight those statistics
    differently. Output is stable across runs and platforms. This is a
    plumbing backend, not a semantic model.
    """

    DIM = 8

    def embed_patches(self, frame, patch_size):
        patches = _patch_view(frame.astype(np.float64), patch_size)
        gh, gw = patches.shape[:2]
        flat = patches.reshape(gh, gw, -1)
        gx = np.abs(np.diff(patches, axis=3)).mean(axis=(2, 3))
        gy = np.abs(np.diff(patches, axis=2)).mean(axis=(2, 3))
        feats = np.stack(
            [
                flat.mean(axis=2),
                flat.std(axis=2),
                flat.min(axis=2),
                flat.max(axis=2),
                gx,
                gy,
                np.quantile(flat, 0.25, axis=2),
                np.quantile(flat, 0.75, axis=2),
            ],
            axis=2,
        )
        norm = np.linalg.norm(feats, axis=2, keepdims=True)
        return feats / np.maximum(norm, 1e-12)

    def embed_text(self, prompt):
        digest = hashlib.sha256(prompt.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "little")
        rng = np.random.default_rng(seed)
        vec = rng.standard_normal(self.DIM)
        return vec / np.linalg.norm(vec)


def get_backend(name: str) -> EmbeddingBackend:
    if name == "features":
        return FeatureHashBackend()
    raise ExtractError(f"unknown backend {name!r} (available: features)")
