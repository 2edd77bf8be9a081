"""Finite-difference verification of the full training gradient.

Runs the complete forward + loss graph at float64 and compares the tape
gradients of every parameter group against central differences. Groups
follow the model structure: patch projection, positional embeddings,
encoder blocks, head, the two class vectors, and the transition scalars.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tape, Tensor, backward, no_grad
from .model import ModelConfig, ScreeningModel
from .training import TrainConfig, batch_loss


def max_rel_err(a: np.ndarray, b: np.ndarray, floor: float = 1e-6) -> float:
    """Worst elementwise relative error, with an absolute floor for zeros."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def parameter_group(name: str) -> str:
    if name.startswith("patch_proj"):
        return "ape_projection"
    if name == "pos_embed":
        return "positional_embeddings"
    if name == "ace.v1":
        return "v1"
    if name == "ace.v2":
        return "v2"
    if name == "ace.fixed":
        return "class_token"
    if name == "sst.theta":
        return "theta"
    if name.startswith("head"):
        return "head"
    return "encoder"


def _coord_subset(size: int, cap: int | None) -> np.ndarray:
    if cap is None or size <= cap:
        return np.arange(size)
    # deterministic stratified subset: even coverage across the tensor
    return np.unique(np.linspace(0, size - 1, cap).astype(int))


@dataclass
class GradCheckResult:
    group_errors: dict[str, float]
    param_errors: dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(e < self.tolerance for e in self.group_errors.values())


def check_model_gradients(
    config: ModelConfig,
    eps: float = 1e-5,
    seed: int = 0,
    batch: int = 2,
    tolerance: float = 1e-4,
    max_coords_per_param: int | None = None,
) -> GradCheckResult:
    """Compare tape gradients of the total training loss to central differences.

    Everything runs in float64. With max_coords_per_param set, large tensors
    are probed on a deterministic evenly spaced coordinate subset; the tape
    gradient itself is always computed exactly.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = np.random.default_rng(seed)
    model = ScreeningModel.init(config, seed=seed, dtype=np.float64)
    theta = Tensor(np.array([2.0, 2.0, 2.0]), requires_grad=True)
    g = config.effective_geometry
    images = rng.uniform(0.0, 1.0, size=(batch, g.image_h, g.image_w))
    deltas = rng.uniform(-1.0, 1.0, size=batch)
    se_d = rng.uniform(-12.0, 0.0, size=batch)
    cfg = TrainConfig(augment=False)
    from .patches import extract_patches_batch

    patches = extract_patches_batch(images, g)

    def loss_value() -> float:
        with no_grad():
            loss, _ = batch_loss(model, theta, patches, deltas, se_d, cfg)
        return float(loss.data)

    with Tape():
        loss, _ = batch_loss(model, theta, patches, deltas, se_d, cfg)
        backward(loss)

    targets = dict(model.params)
    if config.use_sst:
        targets["sst.theta"] = theta
    param_errors: dict[str, float] = {}
    for name, tensor in targets.items():
        flat = tensor.data.reshape(-1)
        coords = _coord_subset(flat.size, max_coords_per_param)
        fd = np.empty(coords.size, dtype=np.float64)
        for j, i in enumerate(coords):
            orig = flat[i]
            flat[i] = orig + eps
            fp = loss_value()
            flat[i] = orig - eps
            fm = loss_value()
            flat[i] = orig
            fd[j] = (fp - fm) / (2.0 * eps)
        analytic = tensor.grad.reshape(-1)[coords]
        param_errors[name] = max_rel_err(analytic, fd)

    group_errors: dict[str, float] = {}
    for name, err in param_errors.items():
        grp = parameter_group(name)
        group_errors[grp] = max(group_errors.get(grp, 0.0), err)
    return GradCheckResult(group_errors=group_errors, param_errors=param_errors, tolerance=tolerance)
