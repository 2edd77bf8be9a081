"""Inclusion-criterion labels for high-myopia screening.

The benchmark criterion is spherical equivalent (SE) <= -6.0 dioptres. The
adjustment coefficient delta in [-1, 1] shifts that criterion by
0.25 * delta dioptres, so the positive set only grows as delta increases.
The 0.25 D span is a module constant, not a tunable truth: callers that
need a different adjustment span pass ``span_d`` explicitly.
"""

from __future__ import annotations

BENCHMARK_SE_D = -6.0
ADJUST_SPAN_D = 0.25


def check_delta(delta: float) -> float:
    """Validate and return the adjustment coefficient; never clamps."""
    delta = float(delta)
    if not -1.0 <= delta <= 1.0:
        raise ValueError("delta must be in [-1,1]")
    return delta


def biased_label(se_d: float, delta: float, span_d: float = ADJUST_SPAN_D) -> int:
    """Label under the shifted criterion: 1 iff -span*delta + se <= -6.0 D.

    Boundary equality counts as positive.
    """
    delta = check_delta(delta)
    return 1 if (-span_d * delta + float(se_d)) <= BENCHMARK_SE_D else 0
