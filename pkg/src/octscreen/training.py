"""Training loop: per-sample criterion sampling, augmentation, joint updates.

Each training sample draws its own adjustment coefficient uniformly from
[-1, 1], so one run covers the whole adjustment range. The loss couples the
benchmark token (criterion at zero shift) and the adjusted token (criterion
at the drawn shift) through the shared noise model, and everything - encoder,
patch projection, class vectors, head, and the three transition scalars -
updates in the same step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tape, Tensor, backward
from .labels import biased_label
from .model import ModelConfig, ScreeningModel
from .optim import Adam
from .patches import extract_patches_batch
from .transition import SSTParams, transition_diagonals, volume_loss_graph


class TrainingDiverged(RuntimeError):
    """Non-finite loss; carries the step index and per-term values."""

    def __init__(self, step: int, terms: dict[str, float]):
        self.step = step
        self.terms = terms
        pretty = ", ".join(f"{k}={v}" for k, v in terms.items())
        super().__init__(f"non-finite loss at step {step}: {pretty}")


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 3e-4
    betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    seed: int = 0
    augment: bool = True
    max_shift_frac: float = 0.1
    weight_cls_bench: float = 1.0
    weight_cls_adj: float = 1.0
    weight_volume: float = 1.0
    theta_init: tuple[float, float, float] = (2.0, 2.0, 2.0)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


# --- augmentation -----------------------------------------------------------


def hflip(image: np.ndarray) -> np.ndarray:
    return image[:, ::-1].copy()


def vtranslate(image: np.ndarray, rows: int, direction: int) -> np.ndarray:
    """Shift by `rows` pixels (direction +1 down, -1 up); vacated rows are zero."""
    if rows == 0:
        return image.copy()
    out = np.zeros_like(image)
    if direction > 0:
        out[rows:] = image[:-rows]
    else:
        out[:-rows] = image[rows:]
    return out


def augment(image: np.ndarray, rng: np.random.Generator, max_shift_frac: float = 0.1) -> np.ndarray:
    """Horizontal flip with probability 0.5, then a random vertical shift.

    The shift magnitude is a uniform fraction of the height in
    [0, max_shift_frac]; the direction is chosen uniformly whenever the
    rounded pixel count is nonzero.
    """
    if rng.random() < 0.5:
        image = hflip(image)
    frac = rng.uniform(0.0, max_shift_frac)
    rows = int(frac * image.shape[0])
    if rows:
        direction = 1 if rng.random() < 0.5 else -1
        image = vtranslate(image, rows, direction)
    return image


# --- loss graph --------------------------------------------------------------


def _ce_picked(p0: Tensor, p1: Tensor, labels: np.ndarray) -> Tensor:
    """Mean -log q_y over the batch given per-sample 0/1 labels."""
    y = np.asarray(labels, dtype=p0.dtype)
    picked = ad.add(ad.mul(p1, y), ad.mul(p0, 1.0 - y))
    return ad.mul(ad.tsum(ad.log(picked)), -1.0 / len(labels))


def batch_loss(
    model: ScreeningModel,
    theta: Tensor,
    patches: np.ndarray,
    deltas: np.ndarray,
    se_d: np.ndarray,
    cfg: TrainConfig,
) -> tuple[Tensor, dict[str, Tensor]]:
    """Total loss over one batch, plus its named terms for diagnostics.

    Benchmark CE at zero shift + adjusted CE at the per-sample shift +
    envelope volume. With the noise model ablated the cross entropies read
    the clean posteriors directly and the volume term is dropped.
    """
    n = len(deltas)
    labels0 = np.array([biased_label(s, 0.0) for s in se_d])
    labels_d = np.array([biased_label(s, d) for s, d in zip(se_d, deltas)])

    bench, adj = model.forward_from_patches(patches, deltas)
    pb0, pb1 = bench[:, 0], bench[:, 1]
    pa0, pa1 = adj[:, 0], adj[:, 1]

    if model.config.use_sst:
        t11_0, t22_0 = transition_diagonals(theta, np.zeros(n, dtype=model.dtype))
        nb0 = ad.add(ad.mul(t11_0, pb0), ad.mul(ad.sub(1.0, t22_0), pb1))
        nb1 = ad.add(ad.mul(ad.sub(1.0, t11_0), pb0), ad.mul(t22_0, pb1))
        t11_d, t22_d = transition_diagonals(theta, deltas.astype(model.dtype))
        na0 = ad.add(ad.mul(t11_d, pa0), ad.mul(ad.sub(1.0, t22_d), pa1))
        na1 = ad.add(ad.mul(ad.sub(1.0, t11_d), pa0), ad.mul(t22_d, pa1))
        terms = {
            "cls_bench": _ce_picked(nb0, nb1, labels0),
            "cls_adj": _ce_picked(na0, na1, labels_d),
            "volume": volume_loss_graph(theta),
        }
        total = ad.add(
            ad.add(
                ad.mul(terms["cls_bench"], cfg.weight_cls_bench),
                ad.mul(terms["cls_adj"], cfg.weight_cls_adj),
            ),
            ad.mul(terms["volume"], cfg.weight_volume),
        )
    else:
        terms = {
            "cls_bench": _ce_picked(pb0, pb1, labels0),
            "cls_adj": _ce_picked(pa0, pa1, labels_d),
        }
        total = ad.add(
            ad.mul(terms["cls_bench"], cfg.weight_cls_bench),
            ad.mul(terms["cls_adj"], cfg.weight_cls_adj),
        )
    return total, terms


# --- steps and the full loop --------------------------------------------------


@dataclass
class TrainState:
    model: ScreeningModel
    theta: Tensor
    opt: Adam
    cfg: TrainConfig
    step: int = 0
    loss_trace: list[float] = field(default_factory=list)

    @property
    def sst_params(self) -> SSTParams:
        t = self.theta.data.astype(np.float64)
        return SSTParams(float(t[0]), float(t[1]), float(t[2]))


def make_state(model_cfg: ModelConfig, cfg: TrainConfig, dtype=np.float32) -> TrainState:
    model = ScreeningModel.init(model_cfg, seed=cfg.seed, dtype=dtype)
    theta = Tensor(np.asarray(cfg.theta_init, dtype=dtype), requires_grad=True)
    trainable = dict(model.params)
    if model_cfg.use_sst:
        trainable["sst.theta"] = theta
    opt = Adam(trainable, lr=cfg.learning_rate, betas=cfg.betas, eps=cfg.adam_eps)
    return TrainState(model=model, theta=theta, opt=opt, cfg=cfg)


def train_step(
    state: TrainState,
    images: np.ndarray,
    se_d: np.ndarray,
    rng: np.random.Generator,
    fixed_delta: float | None = None,
) -> float:
    """One optimizer step on a batch of frames; returns the batch loss."""
    cfg = state.cfg
    model = state.model
    n = len(images)
    deltas = (
        np.full(n, fixed_delta, dtype=np.float64)
        if fixed_delta is not None
        else rng.uniform(-1.0, 1.0, size=n)
    )
    if cfg.augment:
        images = np.stack([augment(im, rng, cfg.max_shift_frac) for im in images])
    patches = extract_patches_batch(images, model.config.effective_geometry).astype(model.dtype)

    with Tape():
        loss, terms = batch_loss(model, state.theta, patches, deltas, se_d, cfg)
        value = float(loss.data)
        if not np.isfinite(value):
            raise TrainingDiverged(
                state.step, {k: float(v.data) for k, v in terms.items()}
            )
        backward(loss)
    state.opt.step()
    state.step += 1
    state.loss_trace.append(value)
    return value


def fit(
    samples: list,
    model_cfg: ModelConfig,
    cfg: TrainConfig,
    max_steps: int | None = None,
) -> TrainState:
    """Train on a list of dataset samples (uses .image and .se_d fields)."""
    state = make_state(model_cfg, cfg)
    rng = np.random.default_rng(cfg.seed)
    images = np.stack([s.image for s in samples])
    ses = np.array([s.se_d for s in samples], dtype=np.float64)
    n = len(samples)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            train_step(state, images[idx], ses[idx], rng)
            if max_steps is not None and state.step >= max_steps:
                return state
    return state


def frame_accuracy(model: ScreeningModel, images: np.ndarray, se_d: np.ndarray, delta: float) -> float:
    """Fraction of frames whose thresholded positive probability matches the label."""
    probs = model.positive_probs(images, delta)
    preds = (probs > 0.5).astype(int)
    labels = np.array([biased_label(s, delta) for s in se_d])
    return float(np.mean(preds == labels))
