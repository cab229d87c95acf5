import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import toklink as tk
from toklink.fileio import (
    grid_from_bytes,
    grid_to_bytes,
    pixel_masks_from_bytes,
    pixel_masks_to_bytes,
    token_mask_from_bytes,
    token_mask_to_bytes,
)

from conftest import make_geometry, make_jittered_grid


def small_geometry():
    return tk.Geometry(frames=2, height=2, width=2, d_t=1, d_s=1)


class TestTokenGridFormat:
    def test_zero_grid_loads(self, tmp_path):
        g = small_geometry()
        grid = tk.TokenGrid(
            codebook_size=64000, geometry=g, indices=np.zeros((2, 2, 2))
        )
        path = tmp_path / "z.tg"
        tk.save_token_grid(path, grid)
        loaded = tk.load_token_grid(path)
        assert loaded == grid
        assert (loaded.indices == 0).all()

    def test_roundtrip_byte_identical_seed42(self, tmp_path):
        grid = make_jittered_grid(42, make_geometry())
        p1 = tmp_path / "a.tg"
        p2 = tmp_path / "b.tg"
        tk.save_token_grid(p1, grid)
        tk.save_token_grid(p2, tk.load_token_grid(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_index_at_codebook_size_rejected(self):
        g = small_geometry()
        grid = tk.TokenGrid(
            codebook_size=64001, geometry=g, indices=np.full((2, 2, 2), 64000)
        )
        raw = bytearray(grid_to_bytes(grid))
        # shrink the stored codebook size so every index is out of range
        raw[6:10] = struct.pack("<I", 64000)
        with pytest.raises(
            tk.FileFormatError, match="index out of codebook range"
        ):
            grid_from_bytes(bytes(raw))

    def test_bad_magic_rejected(self):
        with pytest.raises(tk.FileFormatError, match="malformed header"):
            grid_from_bytes(b"XXXX" + b"\x00" * 30)

    def test_short_file_rejected(self):
        with pytest.raises(tk.FileFormatError, match="malformed header"):
            grid_from_bytes(b"TCTG\x01")

    def test_unsupported_version_rejected(self):
        g = small_geometry()
        grid = tk.TokenGrid(
            codebook_size=10, geometry=g, indices=np.zeros((2, 2, 2))
        )
        raw = bytearray(grid_to_bytes(grid))
        raw[4:6] = struct.pack("<H", 9)
        with pytest.raises(tk.FileFormatError, match="unsupported version"):
            grid_from_bytes(bytes(raw))

    def test_indivisible_dims_rejected(self):
        g = small_geometry()
        grid = tk.TokenGrid(
            codebook_size=10, geometry=g, indices=np.zeros((2, 2, 2))
        )
        raw = bytearray(grid_to_bytes(grid))
        raw[10:14] = struct.pack("<I", 3)  # frames=3 with d_t=1 ok; use d_t
        raw[22:24] = struct.pack("<H", 2)  # d_t=2 does not divide frames=3
        with pytest.raises(tk.FileFormatError, match="not divisible"):
            grid_from_bytes(bytes(raw))

    def test_truncated_body_rejected(self):
        g = small_geometry()
        grid = tk.TokenGrid(
            codebook_size=10, geometry=g, indices=np.zeros((2, 2, 2))
        )
        raw = grid_to_bytes(grid)
        with pytest.raises(tk.FileFormatError, match="truncated"):
            grid_from_bytes(raw[:-4])

    def test_trailing_bytes_rejected(self):
        g = small_geometry()
        grid = tk.TokenGrid(
            codebook_size=10, geometry=g, indices=np.zeros((2, 2, 2))
        )
        with pytest.raises(tk.FileFormatError, match="trailing"):
            grid_from_bytes(grid_to_bytes(grid) + b"\x00")


class TestPixelMaskFormat:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        masks = (rng.random((3, 5, 7)) < 0.4).astype(np.uint8)
        seq = tk.PixelMaskSequence(masks=masks)
        path = tmp_path / "m.pm"
        tk.save_pixel_masks(path, seq)
        assert tk.load_pixel_masks(path) == seq

    def test_frame_padding_is_per_frame(self):
        # 3x3 frames need 2 bytes each, so 2 frames serialize to 4 body bytes
        masks = np.ones((2, 3, 3), dtype=np.uint8)
        raw = pixel_masks_to_bytes(tk.PixelMaskSequence(masks=masks))
        header = struct.calcsize("<4sHIII")
        assert len(raw) == header + 4
        # 9 ones MSB-first: 0xff then 0x80
        assert raw[header:] == b"\xff\x80\xff\x80"

    def test_bad_magic(self):
        with pytest.raises(tk.FileFormatError, match="malformed header"):
            pixel_masks_from_bytes(b"NOPE" + b"\x00" * 20)

    def test_truncated_plane(self):
        masks = np.ones((2, 3, 3), dtype=np.uint8)
        raw = pixel_masks_to_bytes(tk.PixelMaskSequence(masks=masks))
        with pytest.raises(tk.FileFormatError, match="truncated"):
            pixel_masks_from_bytes(raw[:-1])


class TestTokenMaskFormat:
    def test_roundtrip_mask_bits(self, tmp_path):
        rng = np.random.default_rng(8)
        m = (rng.random((4, 8, 8)) < 0.3).astype(np.uint8)
        mask = tk.SemanticTokenMask(mask=m, theta=0.3)
        path = tmp_path / "m.tm"
        tk.save_token_mask(path, mask)
        loaded = tk.load_token_mask(path)
        assert np.array_equal(loaded.mask, mask.mask)
        # theta goes through f32; value is preserved to f32 precision
        assert loaded.theta == pytest.approx(0.3, abs=1e-7)

    def test_file_roundtrip_byte_identical(self, tmp_path):
        m = np.ones((2, 3, 3), dtype=np.uint8)
        mask = tk.SemanticTokenMask(mask=m, theta=0.3)
        p1 = tmp_path / "a.tm"
        p2 = tmp_path / "b.tm"
        tk.save_token_mask(p1, mask)
        tk.save_token_mask(p2, tk.load_token_mask(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_theta_out_of_range_rejected(self):
        m = np.ones((1, 1, 1), dtype=np.uint8)
        raw = bytearray(token_mask_to_bytes(tk.SemanticTokenMask(mask=m, theta=0.5)))
        raw[18:22] = struct.pack("<f", 1.5)
        with pytest.raises(tk.FileFormatError, match="theta"):
            token_mask_from_bytes(bytes(raw))


@settings(max_examples=40, deadline=None)
@given(
    t=st.integers(1, 3),
    h=st.integers(1, 5),
    w=st.integers(1, 5),
    n=st.integers(3, 64000),
    seed=st.integers(0, 2**31),
)
def test_grid_roundtrip_property(t, h, w, n, seed):
    g = tk.Geometry(frames=t, height=h, width=w, d_t=1, d_s=1)
    rng = np.random.default_rng(seed)
    grid = tk.TokenGrid(
        codebook_size=n,
        geometry=g,
        indices=rng.integers(0, n, size=(t, h, w)),
    )
    assert grid_from_bytes(grid_to_bytes(grid)) == grid


@settings(max_examples=40, deadline=None)
@given(
    t=st.integers(1, 3),
    h=st.integers(1, 6),
    w=st.integers(1, 6),
    theta=st.floats(0.125, 1.0, width=32),
    seed=st.integers(0, 2**31),
)
def test_token_mask_roundtrip_property(t, h, w, theta, seed):
    rng = np.random.default_rng(seed)
    m = (rng.random((t, h, w)) < 0.5).astype(np.uint8)
    mask = tk.SemanticTokenMask(mask=m, theta=float(np.float32(theta)))
    out = token_mask_from_bytes(token_mask_to_bytes(mask))
    assert out == mask
