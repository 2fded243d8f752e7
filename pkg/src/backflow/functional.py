"""Backflow of a sampled scalar observable.

Total backflow is the sum of rises over maximal intervals on which the
samples increase, the discrete telescoped form of integrating the positive
part of the derivative. Flat segments (steps below 1e-12 of the value
scale) never split a rise in two; intervals whose total rise is <= epsilon
are discarded, which suppresses sampling noise in Monte Carlo inputs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .trajectory import Trajectory

FLAT_REL = 1e-12     # flat-step threshold relative to max|I|


@dataclass(frozen=True)
class BackflowResult:
    n_i: float                 # total backflow, units of I
    intervals: tuple           # (t_start, t_end, rise) per surviving interval
    epsilon: float             # rise threshold that was applied


def backflow_functional(traj: Trajectory, epsilon: float = 0.0) -> BackflowResult:
    """Sum the rises of I(t) over maximal increasing intervals.

    Intervals are maximal runs of increasing samples, merged across flat
    segments and trimmed to the first/last strictly rising step; a run
    survives only if its total rise exceeds epsilon.
    """
    if not epsilon >= 0.0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    t = traj.times
    v = traj.values
    d = np.diff(v)
    ftol = FLAT_REL * float(np.max(np.abs(v)))
    pos = d > ftol
    neg = d < -ftol
    idx = np.flatnonzero(pos | neg)
    intervals = []
    if idx.size:
        kind = pos[idx]
        prev = np.concatenate(([False], kind[:-1]))
        nxt = np.concatenate((kind[1:], [False]))
        starts = np.flatnonzero(kind & ~prev)
        ends = np.flatnonzero(kind & ~nxt)
        for a, b in zip(starts, ends):
            j0 = int(idx[a])
            j1 = int(idx[b]) + 1
            rise = float(v[j1] - v[j0])
            if rise > epsilon:
                intervals.append((float(t[j0]), float(t[j1]), rise))
    total = math.fsum(r for _, _, r in intervals)
    return BackflowResult(total, tuple(intervals), float(epsilon))


def positive_intervals(traj: Trajectory, epsilon: float = 0.0) -> list:
    """(t_start, t_end) bounds of the surviving increasing intervals."""
    res = backflow_functional(traj, epsilon)
    return [(t0, t1) for t0, t1, _ in res.intervals]
