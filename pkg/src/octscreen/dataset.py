"""On-disk dataset format: one binary file per frame plus a TSV manifest.

Frame file: magic "SOCT", u32 height, u32 width (little-endian), then
height*width float32 pixels, row-major, little-endian, values in [0, 1].
Manifest: UTF-8 lines, tab-separated fields volume_id, frame_index,
relative_path, se_d, se_struct_d, al_mm, split; the header line starts
with '#'. Floats are written with repr() so a read-back is bit-exact.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

FRAME_MAGIC = b"SOCT"
MANIFEST_NAME = "manifest.tsv"
_FIELDS = ("volume_id", "frame_index", "relative_path", "se_d", "se_struct_d", "al_mm", "split")
SPLITS = ("train", "val", "test")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSample:
    volume_id: str
    frame_index: int
    image: np.ndarray  # (h, w) float32 in [0, 1]
    se_d: float
    se_struct_d: float
    al_mm: float
    split: str

    def relative_path(self) -> str:
        return f"{self.volume_id}/frame{self.frame_index:03d}.soct"


def write_frame(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype="<f4")
    if image.ndim != 2:
        raise DatasetError(f"frame must be 2-d, got shape {image.shape}")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(FRAME_MAGIC)
        fh.write(np.array([h, w], dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(image).tobytes())


def read_frame(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12:
        raise DatasetError(f"unexpected end of frame file {path}")
    if raw[:4] != FRAME_MAGIC:
        raise DatasetError(f"bad magic in frame file {path}")
    h, w = np.frombuffer(raw[4:12], dtype="<u4")
    expected = 12 + 4 * int(h) * int(w)
    if len(raw) < expected:
        raise DatasetError(f"unexpected end of frame file {path}")
    if len(raw) > expected:
        raise DatasetError(f"trailing bytes in frame file {path}")
    return np.frombuffer(raw[12:], dtype="<f4").reshape(int(h), int(w)).copy()


def write_dataset(directory, samples: list[SyntheticSample]) -> None:
    os.makedirs(directory, exist_ok=True)
    lines = ["#" + "\t".join(_FIELDS)]
    for s in samples:
        rel = s.relative_path()
        frame_path = os.path.join(directory, rel)
        os.makedirs(os.path.dirname(frame_path), exist_ok=True)
        write_frame(frame_path, s.image)
        lines.append(
            "\t".join(
                (
                    s.volume_id,
                    str(s.frame_index),
                    rel,
                    repr(float(s.se_d)),
                    repr(float(s.se_struct_d)),
                    repr(float(s.al_mm)),
                    s.split,
                )
            )
        )
    with open(os.path.join(directory, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dataset(directory) -> list[SyntheticSample]:
    manifest = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest):
        raise DatasetError(f"manifest not found in {directory}")
    samples = []
    with open(manifest, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != len(_FIELDS):
                raise DatasetError(f"manifest line {lineno}: expected {len(_FIELDS)} fields")
            vol, frame_idx, rel, se, se_struct, al, split = parts
            if split not in SPLITS:
                raise DatasetError(f"manifest line {lineno}: unknown split '{split}'")
            samples.append(
                SyntheticSample(
                    volume_id=vol,
                    frame_index=int(frame_idx),
                    image=read_frame(os.path.join(directory, rel)),
                    se_d=float(se),
                    se_struct_d=float(se_struct),
                    al_mm=float(al),
                    split=split,
                )
            )
    return samples


def group_volumes(samples: list[SyntheticSample]) -> dict[str, list[SyntheticSample]]:
    """Samples grouped by volume, frames ordered by index, volumes by id."""
    by_vol: dict[str, list[SyntheticSample]] = {}
    for s in samples:
        by_vol.setdefault(s.volume_id, []).append(s)
    return {
        vid: sorted(frames, key=lambda s: s.frame_index)
        for vid, frames in sorted(by_vol.items())
    }


def split_samples(samples: list[SyntheticSample], split: str) -> list[SyntheticSample]:
    if split not in SPLITS:
        raise DatasetError(f"unknown split '{split}'")
    return [s for s in samples if s.split == split]
