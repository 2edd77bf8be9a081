"""Shifted label-noise transition matrices for the adjustable criterion.

A 2x2 column-stochastic matrix T maps clean class-posteriors to the noisy
ones the labels actually follow. Three unconstrained scalars generate a
whole family T(delta): both diagonals stay in (0.5, 1), each column sums to
one exactly, and moving delta slides probability mass toward the class the
loosened criterion favours. The envelope of the family is a single extended
matrix whose log-volume is the regularizer minimized during training.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np
from scipy.special import expit

from . import autodiff as ad
from .autodiff import Tensor
from .labels import check_delta

POSTERIOR_ATOL = 1e-9


@dataclass(frozen=True)
class SSTParams:
    """Unconstrained generators: theta0 is shared, theta1/theta2 per column."""

    theta0: float = 2.0
    theta1: float = 2.0
    theta2: float = 2.0

    def __post_init__(self):
        for name in ("theta0", "theta1", "theta2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.theta0, self.theta1, self.theta2], dtype=np.float64)


@dataclass(frozen=True)
class TransitionMatrix:
    """Stores the diagonals; off-diagonals are the column complements."""

    t11: float
    t22: float

    @property
    def det(self) -> float:
        return self.t11 + self.t22 - 1.0

    def as_array(self) -> np.ndarray:
        return np.array(
            [[self.t11, 1.0 - self.t22], [1.0 - self.t11, self.t22]], dtype=np.float64
        )


@dataclass(frozen=True)
class Posterior:
    p0: float
    p1: float

    def __post_init__(self):
        if self.p0 < 0 or self.p1 < 0 or abs(self.p0 + self.p1 - 1.0) > POSTERIOR_ATOL:
            raise ValueError(f"not a posterior: ({self.p0}, {self.p1})")

    @property
    def positive(self) -> float:
        return self.p1


def _diag(delta: float, s0: float, si: float, sign: float) -> float:
    return (1.0 + s0 * si) / 2.0 + (1.0 - s0) / 4.0 * (1.0 + sign * delta)


def transition(delta: float, params: SSTParams) -> TransitionMatrix:
    """T(delta): column-1 diagonal shrinks with delta, column-2 grows."""
    delta = check_delta(delta)
    s0 = expit(params.theta0)
    return TransitionMatrix(
        t11=_diag(delta, s0, expit(params.theta1), -1.0),
        t22=_diag(delta, s0, expit(params.theta2), +1.0),
    )


def extended_transition(params: SSTParams) -> TransitionMatrix:
    """Envelope of the family: t11 from T(-1), t22 from T(+1)."""
    s0 = expit(params.theta0)
    return TransitionMatrix(
        t11=1.0 + (s0 * expit(params.theta1) - s0) / 2.0,
        t22=1.0 + (s0 * expit(params.theta2) - s0) / 2.0,
    )


def noisy_posterior(clean: Posterior, t: TransitionMatrix) -> Posterior:
    return Posterior(
        p0=t.t11 * clean.p0 + (1.0 - t.t22) * clean.p1,
        p1=(1.0 - t.t11) * clean.p0 + t.t22 * clean.p1,
    )


def clean_from_noisy(noisy: Posterior, t: TransitionMatrix, det_tol: float = 1e-9) -> Posterior:
    """Invert the 2x2 map; guards against corrupted parameters only."""
    det = t.det
    if det <= det_tol:
        raise ValueError(f"transition matrix is singular (det={det})")
    p0 = (t.t22 * noisy.p0 - (1.0 - t.t22) * noisy.p1) / det
    p1 = (t.t11 * noisy.p1 - (1.0 - t.t11) * noisy.p0) / det
    return Posterior(p0=p0, p1=p1)


def volume_loss(t_ext: TransitionMatrix) -> float:
    """Log-determinant of the envelope matrix (2x2 simplex log-volume)."""
    det = t_ext.det
    if det <= 0:
        raise ValueError(f"volume_loss needs det > 0, got {det}")
    return math.log(det)


def cross_entropy(posterior: Posterior, label: int) -> float:
    q = posterior.p1 if label == 1 else posterior.p0
    return -math.log(q)


def total_loss(
    clean_bench: Posterior,
    clean_adj: Posterior,
    delta: float,
    se_d: float,
    params: SSTParams,
    use_sst: bool = True,
) -> float:
    """Benchmark CE at delta=0 + adjusted CE at delta + envelope volume.

    With use_sst=False the transition is frozen to the identity and the
    volume term is dropped, leaving two plain cross entropies.
    """
    from .labels import biased_label

    delta = check_delta(delta)
    y0 = biased_label(se_d, 0.0)
    y1 = biased_label(se_d, delta)
    if not use_sst:
        return cross_entropy(clean_bench, y0) + cross_entropy(clean_adj, y1)
    loss = cross_entropy(noisy_posterior(clean_bench, transition(0.0, params)), y0)
    loss += cross_entropy(noisy_posterior(clean_adj, transition(delta, params)), y1)
    loss += volume_loss(extended_transition(params))
    return loss


# --- differentiable forms used by the training graph -----------------------
#
# theta is a length-3 tensor; deltas is a constant per-sample vector. The
# returned diagonals are tensors with the same leading shape as deltas, so
# the per-sample noisy posteriors stay elementwise.


def transition_diagonals(theta: Tensor, deltas: np.ndarray) -> tuple[Tensor, Tensor]:
    s0 = ad.sigmoid(theta[0])
    s1 = ad.sigmoid(theta[1])
    s2 = ad.sigmoid(theta[2])
    d = Tensor(np.asarray(deltas, dtype=theta.dtype))
    half = ad.mul(ad.add(ad.mul(s0, s1), 1.0), 0.5)
    quarter = ad.mul(ad.sub(1.0, s0), 0.25)
    t11 = ad.add(half, ad.mul(quarter, ad.sub(1.0, d)))
    half2 = ad.mul(ad.add(ad.mul(s0, s2), 1.0), 0.5)
    t22 = ad.add(half2, ad.mul(quarter, ad.add(1.0, d)))
    return t11, t22


def extended_diagonals(theta: Tensor) -> tuple[Tensor, Tensor]:
    s0 = ad.sigmoid(theta[0])
    s1 = ad.sigmoid(theta[1])
    s2 = ad.sigmoid(theta[2])
    e11 = ad.add(1.0, ad.mul(ad.sub(ad.mul(s0, s1), s0), 0.5))
    e22 = ad.add(1.0, ad.mul(ad.sub(ad.mul(s0, s2), s0), 0.5))
    return e11, e22


def volume_loss_graph(theta: Tensor) -> Tensor:
    e11, e22 = extended_diagonals(theta)
    return ad.log(ad.sub(ad.add(e11, e22), 1.0))
