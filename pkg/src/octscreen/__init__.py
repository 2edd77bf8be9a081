"""Adjustable high-myopia screening on synthetic OCT volumes.

A desk-scale screening stack: a minimal reverse-mode tensor engine, a small
vision transformer with anisotropic patch embedding and an adjustable class
embedding, a shifted label-noise transition matrix, a deterministic
synthetic-volume generator, a training loop with binary checkpoints, and a
volume-screening service with uncertainty scores.
"""

from .autodiff import Tape, Tensor, backward, finite_diff_grad, no_grad
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .dataset import (
    DatasetError,
    SyntheticSample,
    group_volumes,
    read_dataset,
    split_samples,
    write_dataset,
)
from .labels import ADJUST_SPAN_D, BENCHMARK_SE_D, biased_label
from .model import (
    ModelConfig,
    ScreeningModel,
    ace_embedding,
    tiny_config,
    toy_config,
)
from .patches import (
    PatchGeometry,
    TilingError,
    anisotropic_geometry,
    extract_patches,
    square_geometry,
    toy_geometry,
)
from .screening import (
    DEFAULT_SWEEP_DELTAS,
    ScreeningReport,
    pr_sweep,
    pr_sweep_tsv,
    screen_volume,
    select_center_frames,
    uncertainty_scores,
)
from .synthoct import GenConfig, generate_dataset, generate_volume, label_flip_rate
from .training import TrainConfig, augment, fit, frame_accuracy, train_step
from .transition import (
    Posterior,
    SSTParams,
    TransitionMatrix,
    clean_from_noisy,
    extended_transition,
    noisy_posterior,
    total_loss,
    transition,
    volume_loss,
)

__version__ = "0.1.0"
