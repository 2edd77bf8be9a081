import numpy as np
import pytest

from octscreen.patches import (
    PatchGeometry,
    TilingError,
    anisotropic_geometry,
    extract_patches,
    extract_patches_batch,
    square_geometry,
    toy_geometry,
)


def brute_force_windows(image, g):
    """Independent window enumeration: nested loops, no arithmetic shared
    with the implementation."""
    rows = []
    y = 0
    while y + g.patch_h <= g.image_h:
        x = 0
        while x + g.patch_w <= g.image_w:
            rows.append(image[y : y + g.patch_h, x : x + g.patch_w].flatten())
            x += g.stride_w
        y += g.stride_h
    return np.array(rows)


class TestGeometry:
    def test_reference_geometry_token_parity(self):
        g = anisotropic_geometry()
        assert g.token_count == 196
        assert g.rows == 28 and g.cols == 7
        assert square_geometry(224, 224).token_count == 196

    def test_toy_geometry(self):
        g = toy_geometry()
        assert (g.rows, g.cols, g.token_count) == (16, 7, 112)

    def test_square_fallback_toy(self):
        g = square_geometry(64, 64)
        assert (g.patch_h, g.patch_w, g.token_count) == (8, 8, 64)

    def test_bad_tiling_names_dimension(self):
        with pytest.raises(TilingError, match="horizontal"):
            PatchGeometry(64, 64, 4, 16, 4, 9)
        with pytest.raises(TilingError, match="vertical"):
            PatchGeometry(64, 64, 3, 16, 4, 8)

    def test_nonpositive_rejected(self):
        with pytest.raises(TilingError):
            PatchGeometry(64, 64, 0, 16, 4, 8)


class TestExtract:
    def test_whole_image_patch(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(size=(6, 10))
        g = PatchGeometry(6, 10, 6, 10, 3, 5)  # strides arbitrary-valid
        out = extract_patches(img, g)
        assert out.shape == (1, 60)
        assert np.array_equal(out[0], img.reshape(-1))

    def test_toy_geometry_against_brute_force(self):
        rng = np.random.default_rng(1)
        img = rng.uniform(size=(64, 64))
        g = toy_geometry()
        out = extract_patches(img, g)
        assert out.shape == (112, 64)
        assert np.array_equal(out, brute_force_windows(img, g))
        # token 0 is rows 0-3, cols 0-15
        assert np.array_equal(out[0], img[0:4, 0:16].reshape(-1))

    def test_reference_geometry_against_brute_force(self):
        rng = np.random.default_rng(2)
        img = rng.uniform(size=(224, 224))
        g = anisotropic_geometry()
        out = extract_patches(img, g)
        assert out.shape == (196, 8 * 56)
        assert np.array_equal(out, brute_force_windows(img, g))

    def test_horizontal_overlap_present(self):
        img = np.arange(64 * 64, dtype=float).reshape(64, 64)
        g = toy_geometry()
        out = extract_patches(img, g)
        # token 0 cols 8..15 == token 1 cols 0..7 (stride_w < patch_w)
        t0 = out[0].reshape(4, 16)
        t1 = out[1].reshape(4, 16)
        assert np.array_equal(t0[:, 8:], t1[:, :8])

    def test_wrong_image_shape(self):
        with pytest.raises(TilingError, match="does not match"):
            extract_patches(np.zeros((32, 64)), toy_geometry())

    def test_batch_stacks(self):
        rng = np.random.default_rng(3)
        imgs = rng.uniform(size=(3, 64, 64))
        out = extract_patches_batch(imgs, toy_geometry())
        assert out.shape == (3, 112, 64)
        for i in range(3):
            assert np.array_equal(out[i], extract_patches(imgs[i], toy_geometry()))
