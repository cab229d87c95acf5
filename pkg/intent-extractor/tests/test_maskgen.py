import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from intent_extractor import (
    ExtractError,
    HeatmapGrid,
    dilate_patches,
    first_frame_mask,
    intended_fraction,
    threshold_patches,
    upsample_to_pixels,
)

from conftest import make_heatmap


class TestThreshold:
    def test_zero_level_selects_everything_positive(self):
        # normalized scores all strictly positive, so level 0 takes the lot
        scores = np.array([[0.2, 0.9], [0.5, 1.0]])
        hm = HeatmapGrid(raw=scores, normalized=scores, patch_size=32)
        mask = threshold_patches(hm, 0.0)
        assert mask.sum() == 4
        _, rho = first_frame_mask(hm, 0.0)
        assert rho == 1.0

    def test_level_one_selects_nothing(self):
        # strict > means even the 1.0 maximum fails at level 1
        hm = make_heatmap([[0.2, 0.9], [0.5, 1.0]])
        assert threshold_patches(hm, 1.0).sum() == 0
        _, rho = first_frame_mask(hm, 1.0)
        assert rho == 0.0

    def test_strictness_at_interior_level(self):
        hm = make_heatmap([[0.0, 0.6], [0.601, 1.0]])
        mask = threshold_patches(hm, 0.6)
        assert mask.tolist() == [[0, 0], [1, 1]]

    def test_level_out_of_range(self):
        hm = make_heatmap([[0.0, 1.0]])
        with pytest.raises(ExtractError, match=r"\[0, 1\]"):
            threshold_patches(hm, 1.5)


class TestUpsample:
    def test_one_hot_counting(self):
        # single selected patch at p=32 covers exactly one 32x32 block
        patch = np.zeros((2, 2), dtype=np.uint8)
        patch[0, 1] = 1
        pixels = upsample_to_pixels(patch, 32)
        assert pixels.shape == (64, 64)
        assert int(pixels.sum()) == 1024
        assert pixels[:32, 32:].all()
        assert not pixels[:, :32].any()
        assert not pixels[32:, :].any()
        assert intended_fraction(pixels) == 0.25

    def test_fraction_preserved(self):
        rng = np.random.default_rng(5)
        patch = (rng.uniform(size=(3, 5)) > 0.5).astype(np.uint8)
        pixels = upsample_to_pixels(patch, 8)
        assert intended_fraction(pixels) == pytest.approx(patch.mean())


class TestDilate:
    def test_radius_zero_is_copy(self):
        mask = np.eye(4, dtype=np.uint8)
        out = dilate_patches(mask, 0)
        assert np.array_equal(out, mask)
        assert out is not mask

    def test_center_pixel_radius_one(self):
        mask = np.zeros((5, 5), dtype=np.uint8)
        mask[2, 2] = 1
        out = dilate_patches(mask, 1)
        expect = np.zeros((5, 5), dtype=np.uint8)
        expect[1:4, 1:4] = 1
        assert np.array_equal(out, expect)

    def test_edge_clipping(self):
        mask = np.zeros((3, 3), dtype=np.uint8)
        mask[0, 0] = 1
        out = dilate_patches(mask, 1)
        assert out.tolist() == [[1, 1, 0], [1, 1, 0], [0, 0, 0]]

    def test_negative_radius(self):
        with pytest.raises(ExtractError, match="radius"):
            dilate_patches(np.zeros((2, 2), np.uint8), -1)

    @given(
        hnp.arrays(
            np.uint8,
            hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8),
            elements=st.integers(0, 1),
        ),
        st.integers(0, 3),
    )
    def test_dilation_is_monotone(self, mask, radius):
        out = dilate_patches(mask, radius)
        # never removes a set pixel, so the fraction cannot drop
        assert np.all(out >= mask)
        assert intended_fraction(out) >= intended_fraction(mask)


class TestFirstFrameMask:
    def test_composition(self):
        hm = make_heatmap([[0.1, 0.9], [0.2, 0.3]], patch_size=4)
        pixels, rho = first_frame_mask(hm, 0.5, dilation_radius=0)
        assert pixels.shape == (8, 8)
        assert rho == 0.25
        pixels_d, rho_d = first_frame_mask(hm, 0.5, dilation_radius=1)
        assert rho_d == 1.0
        assert np.all(pixels_d >= pixels)
