"""Anisotropic vs square patch tiling.

Shows why the wide, short, horizontally overlapping windows suit layered
retinal structure: same token budget as the square 16x16 tiling at 224x224,
but each token spans a wider stretch of one layer.
"""

import numpy as np

from octscreen.patches import anisotropic_geometry, extract_patches, square_geometry
from octscreen.synthoct import render_frame

aniso = anisotropic_geometry()
square = square_geometry(224, 224)
print(f"anisotropic: patch {aniso.patch_h}x{aniso.patch_w}, strides "
      f"{aniso.stride_h}x{aniso.stride_w} -> {aniso.rows}x{aniso.cols} = {aniso.token_count} tokens")
print(f"square:      patch {square.patch_h}x{square.patch_w} -> {square.token_count} tokens")
assert aniso.token_count == square.token_count

# a synthetic B-scan at 64x64 with the toy tiling
from octscreen.patches import toy_geometry

frame = render_frame(-9.0, 0.0, np.zeros((64, 64)), 64, 64)
g = toy_geometry()
tokens = extract_patches(frame, g)
print(f"\ntoy frame tokens: {tokens.shape} (rows={g.rows}, cols={g.cols})")
print("horizontal neighbours share half their pixels (28px overlap at paper scale):")
t0 = tokens[0].reshape(g.patch_h, g.patch_w)
t1 = tokens[1].reshape(g.patch_h, g.patch_w)
print("  right half of token 0 == left half of token 1:",
      bool(np.array_equal(t0[:, g.stride_w:], t1[:, : g.patch_w - g.stride_w])))
