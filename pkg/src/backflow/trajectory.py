"""Sampled time-series containers shared across the model modules."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# propagator round-off allowances
NEG_CLIP = 1e-10     # probabilities above -NEG_CLIP are clipped to 0
SUM_TOL = 1e-8       # per-row |sum(p) - 1| tolerance along a path


def _check_times(times, n_min):
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 1 or t.shape[0] < n_min:
        raise DomainError(f"need at least {n_min} time points")
    if not np.all(np.isfinite(t)):
        raise DomainError("times must be finite")
    if np.any(np.diff(t) <= 0.0):
        raise DomainError("times must be strictly increasing")
    return t


@dataclass
class Trajectory:
    """Scalar observable samples I(t) on a strictly increasing grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = _check_times(self.times, 2)
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.times.shape:
            raise DomainError("times and values must have equal length")
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        self.values = v

    def __len__(self):
        return self.times.shape[0]


@dataclass
class ProbTrajectory:
    """Probability-vector samples p(t) on a strictly increasing grid.

    Rows are clipped at -1e-10 (round-off negatives become 0) and must sum
    to 1 within 1e-8; anything worse is rejected as a propagator failure.
    """

    times: np.ndarray
    states: np.ndarray
    stderr: np.ndarray | None = field(default=None)  # Monte Carlo only

    def __post_init__(self):
        self.times = _check_times(self.times, 1)
        s = np.asarray(self.states, dtype=np.float64)
        if s.ndim != 2 or s.shape != (self.times.shape[0], 3):
            raise DomainError("states must have shape (len(times), 3)")
        if not np.all(np.isfinite(s)):
            raise DomainError("states must be finite")
        if np.any(s < -NEG_CLIP):
            raise _simplex_violation(s)
        s = np.where(s < 0.0, 0.0, s)
        if np.max(np.abs(s.sum(axis=1) - 1.0)) > SUM_TOL:
            raise _simplex_violation(s)
        self.states = s

    def __len__(self):
        return self.times.shape[0]


def _simplex_violation(s):
    from .errors import NumericalError

    worst = float(np.max(np.abs(s.sum(axis=1) - 1.0)))
    return NumericalError(
        f"probability rows leave the simplex (worst |sum-1| = {worst:.2e}, "
        f"min entry = {float(s.min()):.2e})")


def validate_simplex(p, tol=1e-12):
    """Return p as a float64 3-vector after simplex validation."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape != (3,):
        raise DomainError("probability vector must have exactly 3 entries")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError("probabilities must be finite and >= 0")
    if abs(float(arr.sum()) - 1.0) > tol:
        raise DomainError(f"probabilities must sum to 1 within {tol}")
    return arr
