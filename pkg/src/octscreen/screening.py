"""Volume-level screening: majority vote plus three uncertainty scores.

Decisions come from the clean adjusted-token posterior of each selected
frame; a volume is positive when at least half its frames are (odd frame
counts make ties impossible, and the service enforces odd counts). The
three uncertainty scores are normalized to [0, 1]:

- posterior score: 1 - 2*|mean positive probability - 0.5| (0.5 is maximal
  confusion);
- disagreement score: twice the minority fraction of frame votes;
- sweep score: variance of the mean positive probability over a grid of
  adjustment coefficients, divided by 0.25 (the largest variance a [0, 1]
  variable can have).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .labels import biased_label, check_delta

DEFAULT_SWEEP_DELTAS = tuple(np.linspace(-1.0, 1.0, 9).tolist())


class FrameScorer(Protocol):
    """Anything that maps (frames, delta) to per-frame positive probabilities."""

    def positive_probs(self, frames: np.ndarray, delta: float) -> np.ndarray: ...


@dataclass(frozen=True)
class ScreeningReport:
    volume_id: str
    delta: float
    frame_posteriors: list[float]
    decision: int
    u_posterior: float
    u_disagreement: float
    u_sweep: float
    sweep: list[tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "volume_id": self.volume_id,
            "delta": self.delta,
            "frame_posteriors": self.frame_posteriors,
            "decision": self.decision,
            "u_posterior": self.u_posterior,
            "u_disagreement": self.u_disagreement,
            "u_sweep": self.u_sweep,
            "sweep": [[d, p] for d, p in self.sweep],
        }


def select_center_frames(frames: Sequence, k: int) -> Sequence:
    """The k frames centered on the middle index, order preserved."""
    n = len(frames)
    if k > n:
        raise ValueError(f"cannot select {k} center frames from {n}")
    if k % 2 == 0:
        raise ValueError(f"frame count must be odd, got {k}")
    start = (n - k) // 2
    return frames[start : start + k]


def majority_decision(frame_probs: np.ndarray) -> int:
    votes = int(np.sum(frame_probs > 0.5))
    return 1 if 2 * votes >= len(frame_probs) else 0


def uncertainty_scores(
    frame_probs: Sequence[float], sweep_probs: Sequence[float]
) -> tuple[float, float, float]:
    frame_probs = np.asarray(frame_probs, dtype=np.float64)
    sweep_probs = np.asarray(sweep_probs, dtype=np.float64)
    if frame_probs.size == 0 or sweep_probs.size == 0:
        raise ValueError("uncertainty_scores: empty probability list")
    u_posterior = 1.0 - 2.0 * abs(float(frame_probs.mean()) - 0.5)
    votes = int(np.sum(frame_probs > 0.5))
    minority = min(votes, len(frame_probs) - votes)
    u_disagreement = 2.0 * minority / len(frame_probs)
    u_sweep = float(sweep_probs.var()) / 0.25
    clamp = lambda v: float(min(1.0, max(0.0, v)))
    return clamp(u_posterior), clamp(u_disagreement), clamp(u_sweep)


def screen_volume(
    frames: np.ndarray,
    delta: float,
    scorer: FrameScorer,
    volume_id: str = "",
    sweep_deltas: Sequence[float] = DEFAULT_SWEEP_DELTAS,
) -> ScreeningReport:
    """Deterministic screening report for one stack of frames."""
    delta = check_delta(delta)
    frames = np.asarray(frames)
    probs = np.asarray(scorer.positive_probs(frames, delta), dtype=np.float64)
    sweep = [
        (float(d), float(np.mean(scorer.positive_probs(frames, check_delta(d)))))
        for d in sweep_deltas
    ]
    u_post, u_dis, u_swp = uncertainty_scores(probs, [p for _, p in sweep])
    return ScreeningReport(
        volume_id=volume_id,
        delta=delta,
        frame_posteriors=[float(p) for p in probs],
        decision=majority_decision(probs),
        u_posterior=u_post,
        u_disagreement=u_dis,
        u_sweep=u_swp,
        sweep=sweep,
    )


def pr_sweep(
    volumes: dict[str, tuple[np.ndarray, float]],
    scorer: FrameScorer,
    deltas: Sequence[float],
) -> list[dict]:
    """Precision/recall/accuracy against criterion-shifted labels, per delta.

    volumes maps volume_id -> (frames array, labeled SE). Decisions use the
    same majority vote as screen_volume; ground truth is biased_label at the
    same delta.
    """
    if not volumes:
        raise ValueError("pr_sweep: empty dataset")
    rows = []
    for delta in deltas:
        delta = check_delta(delta)
        tp = fp = fn = tn = 0
        for _, (frames, se_d) in sorted(volumes.items()):
            probs = np.asarray(scorer.positive_probs(frames, delta))
            pred = majority_decision(probs)
            truth = biased_label(se_d, delta)
            tp += pred == 1 and truth == 1
            fp += pred == 1 and truth == 0
            fn += pred == 0 and truth == 1
            tn += pred == 0 and truth == 0
        precision = tp / (tp + fp) if (tp + fp) else (1.0 if fn == 0 else 0.0)
        recall = tp / (tp + fn) if (tp + fn) else 1.0
        rows.append(
            {
                "delta": delta,
                "tp": tp,
                "fp": fp,
                "fn": fn,
                "tn": tn,
                "predicted_positive": tp + fp,
                "true_positive_labels": tp + fn,
                "precision": precision,
                "recall": recall,
                "accuracy": (tp + tn) / (tp + fp + fn + tn),
            }
        )
    return rows


def pr_sweep_tsv(rows: list[dict]) -> str:
    """Tab-separated table of a pr_sweep result, one row per delta."""
    cols = (
        "delta",
        "tp",
        "fp",
        "fn",
        "tn",
        "predicted_positive",
        "true_positive_labels",
        "precision",
        "recall",
        "accuracy",
    )
    lines = ["\t".join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(f"{v:.6f}" if isinstance(v, float) else str(v))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
