import numpy as np


def grad_close(analytic, fd, rtol=1e-4, atol=3e-8):
    """True when |a - b| <= atol + rtol * max(|a|, |b|) everywhere.

    atol sits at the float64 rounding floor of central differences with
    eps=1e-6, so saturated regions with uniformly tiny true gradients do not
    fail on finite-difference noise.
    """
    a = np.asarray(analytic, dtype=np.float64)
    b = np.asarray(fd, dtype=np.float64)
    return bool(np.all(np.abs(a - b) <= atol + rtol * np.maximum(np.abs(a), np.abs(b))))


def max_rel_err(a, b, floor=1e-6):
    """Worst-case elementwise relative error with an absolute floor.

    Entries whose magnitudes sit below ``floor`` are compared on an absolute
    scale (divided by the floor) so that finite-difference noise on true
    zeros does not blow up the ratio.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0
