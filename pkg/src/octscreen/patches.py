"""Anisotropic patch tiling for layered retinal images.

Retinal structure in a B-scan is organized in thin horizontal layers, so the
tiling here uses short, wide windows that overlap horizontally. With the
224x224 / 8x56 / stride 8x28 configuration the number of tokens (196)
matches the plain 16x16 square tiling, so the transformer sees the same
sequence length either way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TilingError(ValueError):
    """Patch/stride configuration does not tile the image exactly."""


@dataclass(frozen=True)
class PatchGeometry:
    image_h: int
    image_w: int
    patch_h: int
    patch_w: int
    stride_h: int
    stride_w: int

    def __post_init__(self):
        for name in ("image_h", "image_w", "patch_h", "patch_w", "stride_h", "stride_w"):
            if getattr(self, name) <= 0:
                raise TilingError(f"{name} must be positive, got {getattr(self, name)}")
        if self.patch_h > self.image_h or self.patch_w > self.image_w:
            raise TilingError(
                f"patch {self.patch_h}x{self.patch_w} exceeds image {self.image_h}x{self.image_w}"
            )
        if (self.image_h - self.patch_h) % self.stride_h != 0:
            raise TilingError(
                f"vertical tiling not exact: (image_h - patch_h) = "
                f"{self.image_h - self.patch_h} is not a multiple of stride_h = {self.stride_h}"
            )
        if (self.image_w - self.patch_w) % self.stride_w != 0:
            raise TilingError(
                f"horizontal tiling not exact: (image_w - patch_w) = "
                f"{self.image_w - self.patch_w} is not a multiple of stride_w = {self.stride_w}"
            )

    @property
    def rows(self) -> int:
        return (self.image_h - self.patch_h) // self.stride_h + 1

    @property
    def cols(self) -> int:
        return (self.image_w - self.patch_w) // self.stride_w + 1

    @property
    def token_count(self) -> int:
        return self.rows * self.cols

    @property
    def patch_dim(self) -> int:
        return self.patch_h * self.patch_w


def anisotropic_geometry() -> PatchGeometry:
    """Reference tiling at 224x224: 8x56 patches, 28 px horizontal overlap."""
    return PatchGeometry(224, 224, 8, 56, 8, 28)


def toy_geometry() -> PatchGeometry:
    """Desk-scale tiling at 64x64 keeping the wide/short/overlapping shape."""
    return PatchGeometry(64, 64, 4, 16, 4, 8)


def square_geometry(image_h: int, image_w: int) -> PatchGeometry:
    """Square non-overlapping fallback: 16 px patches at 224 scale, 8 px below."""
    p = 16 if image_h % 16 == 0 and image_h >= 224 else 8
    if image_h % p != 0 or image_w % p != 0:
        raise TilingError(f"square fallback: {image_h}x{image_w} not divisible by {p}")
    return PatchGeometry(image_h, image_w, p, p, p, p)


def extract_patches(image: np.ndarray, g: PatchGeometry) -> np.ndarray:
    """Flattened sliding windows, row-major over (row, col) window positions.

    Returns a (token_count, patch_h * patch_w) array; windows overlap
    horizontally whenever stride_w < patch_w.
    """
    image = np.asarray(image)
    if image.shape != (g.image_h, g.image_w):
        raise TilingError(
            f"image shape {image.shape} does not match geometry "
            f"{(g.image_h, g.image_w)}"
        )
    out = np.empty((g.token_count, g.patch_dim), dtype=image.dtype)
    k = 0
    for r in range(g.rows):
        y = r * g.stride_h
        for c in range(g.cols):
            x = c * g.stride_w
            out[k] = image[y : y + g.patch_h, x : x + g.patch_w].reshape(-1)
            k += 1
    return out


def extract_patches_batch(images: np.ndarray, g: PatchGeometry) -> np.ndarray:
    """Stacked extract_patches for a (n, image_h, image_w) array."""
    images = np.asarray(images)
    if images.ndim != 3:
        raise TilingError(f"expected (n, h, w) batch, got shape {images.shape}")
    return np.stack([extract_patches(im, g) for im in images], axis=0)
