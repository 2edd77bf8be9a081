"""The shifted transition-matrix family and its envelope.

Three scalars generate every T(delta). Moving delta slides the noisy-class
simplex; the envelope matrix bounds the whole family and its log-volume is
the training regularizer.
"""

import numpy as np

from octscreen.transition import (
    Posterior,
    SSTParams,
    clean_from_noisy,
    extended_transition,
    noisy_posterior,
    transition,
    volume_loss,
)

params = SSTParams(theta0=1.0, theta1=0.5, theta2=-0.5)
print("delta    t11     t22     det")
for delta in np.linspace(-1, 1, 9):
    t = transition(float(delta), params)
    print(f"{delta:+.2f}   {t.t11:.4f}  {t.t22:.4f}  {t.det:.4f}")

ext = extended_transition(params)
print(f"\nenvelope: t11={ext.t11:.4f} (=T(-1) t11), t22={ext.t22:.4f} (=T(+1) t22)")
print(f"log-volume regularizer: {volume_loss(ext):+.4f}")

clean = Posterior(0.3, 0.7)
t = transition(0.5, params)
noisy = noisy_posterior(clean, t)
back = clean_from_noisy(noisy, t)
print(f"\nclean {clean.p0:.3f}/{clean.p1:.3f} -> noisy {noisy.p0:.3f}/{noisy.p1:.3f}"
      f" -> recovered {back.p0:.3f}/{back.p1:.3f}")
