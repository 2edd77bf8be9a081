"""Deterministic OCT-like synthetic volumes with controlled label noise.

Each volume carries two spherical equivalents: the labeled one (se_d, drawn
uniformly) and a structural one (se_struct_d = se_d + eps) that actually
renders the pixels. The per-volume eps is the label-noise mechanism: labels
derive from se_d while the image only reflects se_struct_d, so volumes near
the criterion can carry labels the pixels contradict - the model can never
predict eps from the image.

Frames show a bright curved band (the retinal cross-section stand-in) whose
curvature and thickness grow with myopia severity, plus per-frame jitter and
additive speckle. All randomness is counter-based: every stream is keyed by
(seed, volume_index, frame_index, stream name) through a hash, so any frame
regenerates identically in isolation, in any order, on any machine.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .dataset import SyntheticSample
from .labels import biased_label

AL_ANCHOR_MM = 26.0
AL_ANCHOR_SE_D = -6.0
AL_SLOPE_MM_PER_D = -1.0 / 3.0
AL_NOISE_MM = 0.25

_BAND_PEAK = 0.85
_BACKGROUND = 0.06
_SPECKLE_SIGMA = 0.04
_JITTER_FRAC = 0.015
_DROP0_FRAC = 0.02      # band edge drop at se_struct = 0, fraction of height
_DROP_PER_D_FRAC = 0.015
_THICK0_FRAC = 0.025
_THICK_PER_D_FRAC = 0.0035
_Y0_FRAC = 0.32


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    n_volumes: int = 60
    frames_per_volume: int = 8
    image_h: int = 64
    image_w: int = 64
    noise_sigma_d: float = 0.75
    se_range: tuple[float, float] = (-12.0, 0.0)
    seed: int = 0
    # cohort concentration: with probability se_focus_weight a volume's SE is
    # drawn from se_focus_range instead of se_range, mimicking a screening
    # population that clusters around the inclusion criterion
    se_focus_weight: float = 0.0
    se_focus_range: tuple[float, float] = (-7.0, -5.0)

    def __post_init__(self):
        if self.noise_sigma_d < 0:
            raise ValueError(f"noise_sigma_d must be >= 0, got {self.noise_sigma_d}")
        lo, hi = self.se_range
        if not lo < hi:
            raise ValueError(f"se_range must satisfy lo < hi, got {self.se_range}")
        if not 0.0 <= self.se_focus_weight <= 1.0:
            raise ValueError(f"se_focus_weight must be in [0,1], got {self.se_focus_weight}")
        flo, fhi = self.se_focus_range
        if not flo < fhi:
            raise ValueError(f"se_focus_range must satisfy lo < hi, got {self.se_focus_range}")


def _stream(*parts) -> np.random.Generator:
    """Philox generator keyed by a hash of the identifying parts."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:16], "little")))


def split_for(volume_index: int, n_volumes: int) -> str:
    """Volume-level 60/20/20 split, deterministic in the index."""
    n_train = int(round(n_volumes * 0.6))
    n_val = int(round(n_volumes * 0.2))
    if volume_index < n_train:
        return "train"
    if volume_index < n_train + n_val:
        return "val"
    return "test"


def render_frame(
    se_struct_d: float,
    jitter_px: float,
    speckle: np.ndarray,
    image_h: int,
    image_w: int,
) -> np.ndarray:
    """One B-scan stand-in: curved bright band over a speckled background."""
    severity = max(0.0, -float(se_struct_d))
    drop = (_DROP0_FRAC + _DROP_PER_D_FRAC * severity) * image_h
    kappa = drop / (image_w / 2.0) ** 2
    thickness = (_THICK0_FRAC + _THICK_PER_D_FRAC * severity) * image_h
    y0 = _Y0_FRAC * image_h + jitter_px

    x = np.arange(image_w, dtype=np.float64)
    y_center = y0 + kappa * (x - image_w / 2.0) ** 2
    if y_center.min() < 1.0 or y_center.max() > image_h - 2.0:
        raise GenerationError(
            f"band for structural SE {se_struct_d} D leaves the "
            f"{image_h}x{image_w} image (center rows "
            f"{y_center.min():.1f}..{y_center.max():.1f})"
        )
    rows = np.arange(image_h, dtype=np.float64)[:, None]
    band = _BAND_PEAK * np.exp(-((rows - y_center[None, :]) ** 2) / (2.0 * thickness**2))
    frame = _BACKGROUND + band + speckle
    return np.clip(frame, 0.0, 1.0).astype(np.float32)


def generate_volume(volume_index: int, cfg: GenConfig) -> list[SyntheticSample]:
    """All frames of one volume; identical output for identical arguments."""
    vol_rng = _stream(cfg.seed, volume_index, "volume")
    if cfg.se_focus_weight > 0.0 and vol_rng.uniform() < cfg.se_focus_weight:
        lo, hi = cfg.se_focus_range
    else:
        lo, hi = cfg.se_range
    se_d = float(vol_rng.uniform(lo, hi))
    eps = float(vol_rng.normal(0.0, cfg.noise_sigma_d)) if cfg.noise_sigma_d > 0 else 0.0
    al_mm = AL_ANCHOR_MM + AL_SLOPE_MM_PER_D * (se_d - AL_ANCHOR_SE_D) + float(
        vol_rng.normal(0.0, AL_NOISE_MM)
    )
    se_struct_d = se_d + eps
    volume_id = f"vol{volume_index:04d}"
    split = split_for(volume_index, cfg.n_volumes)

    samples = []
    for frame_index in range(cfg.frames_per_volume):
        frng = _stream(cfg.seed, volume_index, frame_index, "frame")
        jitter = float(frng.normal(0.0, _JITTER_FRAC * cfg.image_h))
        speckle = frng.normal(0.0, _SPECKLE_SIGMA, size=(cfg.image_h, cfg.image_w))
        image = render_frame(se_struct_d, jitter, speckle, cfg.image_h, cfg.image_w)
        samples.append(
            SyntheticSample(
                volume_id=volume_id,
                frame_index=frame_index,
                image=image,
                se_d=se_d,
                se_struct_d=se_struct_d,
                al_mm=al_mm,
                split=split,
            )
        )
    return samples


def generate_dataset(cfg: GenConfig) -> list[SyntheticSample]:
    samples = []
    for v in range(cfg.n_volumes):
        samples.extend(generate_volume(v, cfg))
    return samples


def label_flip_rate(samples: list[SyntheticSample], delta: float) -> float:
    """Fraction of volumes whose label differs between se_d and se_struct_d.

    This is the effective label-noise rate the classifier faces at a given
    adjustment coefficient: the image encodes se_struct_d but supervision
    comes from se_d.
    """
    if not samples:
        raise ValueError("label_flip_rate: empty dataset")
    per_volume: dict[str, tuple[float, float]] = {}
    for s in samples:
        per_volume.setdefault(s.volume_id, (s.se_d, s.se_struct_d))
    flips = sum(
        1
        for se, se_struct in per_volume.values()
        if biased_label(se, delta) != biased_label(se_struct, delta)
    )
    return flips / len(per_volume)
