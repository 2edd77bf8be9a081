"""End-to-end: generate, train briefly, screen a volume across the dial.

Trains a small model for a couple of minutes, then screens one volume at
several adjustment coefficients and prints the full uncertainty report.
"""

import numpy as np

from octscreen.dataset import group_volumes, split_samples
from octscreen.model import toy_config
from octscreen.screening import screen_volume, select_center_frames
from octscreen.synthoct import GenConfig, generate_dataset
from octscreen.training import TrainConfig, fit

gen = GenConfig(
    n_volumes=60,
    frames_per_volume=12,
    noise_sigma_d=0.75,
    seed=0,
    se_range=(-11.0, -1.0),
    se_focus_weight=0.6,
)
samples = generate_dataset(gen)
train = split_samples(samples, "train")
print(f"training on {len(train)} frames ...")
state = fit(train, toy_config(), TrainConfig(epochs=10, batch_size=16, seed=0, learning_rate=1e-3))
print(f"done: {state.step} steps, loss {state.loss_trace[0]:.3f} -> {state.loss_trace[-1]:.3f}")
print(f"learned transition scalars: {state.theta.data.round(3)}")

vols = group_volumes(samples)
near = min(vols, key=lambda vid: abs(vols[vid][0].se_d + 6.0))
frames = np.stack([s.image for s in select_center_frames(vols[near], 7)])
print(f"\nscreening {near} (se_d = {vols[near][0].se_d:+.2f} D, near the criterion)")
for delta in (-1.0, 0.0, 1.0):
    rep = screen_volume(frames, delta, state.model, volume_id=near)
    print(
        f"  delta={delta:+.1f}: decision={rep.decision} "
        f"mean_p={np.mean(rep.frame_posteriors):.3f} "
        f"u_post={rep.u_posterior:.2f} u_dis={rep.u_disagreement:.2f} u_swp={rep.u_sweep:.3f}"
    )
rep = screen_volume(frames, 0.0, state.model, volume_id=near)
print("  sweep:", " ".join(f"{d:+.2f}:{p:.2f}" for d, p in rep.sweep))
