"""Scalar information observables on the 3-state simplex, in nats.

Probabilities below 1e-15 are treated as exactly zero (0 ln 0 = 0), which
keeps propagator round-off from producing -inf terms.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .trajectory import ProbTrajectory

ZERO_CLIP = 1e-15


@dataclass(frozen=True)
class OvershootResult:
    h_max: float          # entropy at the first global maximum (nats)
    t_max: float          # time of that maximum
    h_min_after: float    # minimum entropy over t >= t_max
    delta_h: float        # h_max - h_min_after


def shannon_entropy(p):
    """-sum p_i ln p_i over the last axis; scalar for a single vector."""
    arr = np.asarray(p, dtype=np.float64)
    safe = np.where(arr > ZERO_CLIP, arr, 1.0)
    h = -np.sum(np.where(arr > ZERO_CLIP, arr * np.log(safe), 0.0), axis=-1)
    h = np.where(h < 0.0, 0.0, h)
    return float(h) if h.ndim == 0 else h


def kl_to_stationary(p, pi):
    """sum p_i ln(p_i / pi_i) over the last axis; >= 0, 0 iff p = pi."""
    ref = np.asarray(pi, dtype=np.float64)
    if np.any(ref <= 0.0):
        raise DomainError("stationary distribution must be strictly positive")
    arr = np.asarray(p, dtype=np.float64)
    safe = np.where(arr > ZERO_CLIP, arr, 1.0)
    d = np.sum(np.where(arr > ZERO_CLIP, arr * (np.log(safe) - np.log(ref)), 0.0),
               axis=-1)
    d = np.where(d < 0.0, 0.0, d)
    return float(d) if d.ndim == 0 else d


def entropy_overshoot(traj: ProbTrajectory) -> OvershootResult:
    """Entropy overshoot: first global maximum of H, then the later minimum.

    Ties for the maximum are broken toward the earliest sample within an
    absolute tolerance of 1e-12.
    """
    if len(traj) < 2:
        raise DomainError("overshoot needs at least 2 samples")
    h = shannon_entropy(traj.states)
    i_max = int(np.flatnonzero(h >= np.max(h) - 1e-12)[0])
    h_max = float(h[i_max])
    h_min_after = float(np.min(h[i_max:]))
    return OvershootResult(h_max, float(traj.times[i_max]),
                           h_min_after, h_max - h_min_after)
