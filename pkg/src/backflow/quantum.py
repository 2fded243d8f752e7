"""Two-state revival signal with a fractional relaxation envelope.

The observable is b(t) = 1/4 [E_alpha(-(lam t)^alpha)]^2 sin^2(omega t):
coherent oscillations at omega under an algebraically decaying envelope.
Its backflow is horizon-regularized -- the infinite-horizon integral
diverges for alpha < 1/2, where per-cycle rises fall off slower than 1/t.
Every reported value is therefore n_qe(T) at an explicit horizon
(default 200/lam), and the horizon-scaling exponent is the principled
detector of that divergence boundary.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError
from .functional import BackflowResult, backflow_functional
from .mittag import ml_envelope
from .trajectory import Trajectory

GRID_CAP = 100_000_000
DEFAULT_PPP = 64
DEFAULT_HORIZON_LAM = 200.0   # default horizon in units of 1/lam
BISECT_ITERS = 40
FD_STEP = 1e-6                # envelope-derivative step in min(1/lam, 1/omega)


@dataclass(frozen=True)
class QuantumParams:
    """Model parameters: fractional order, dissipative rate, frequency."""

    alpha: float
    lam: float
    omega: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must be in (0, 1], got {self.alpha}")
        if not self.lam > 0.0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not self.omega >= 0.0:
            raise DomainError(f"omega must be >= 0, got {self.omega}")


def b_qe(params: QuantumParams, t):
    """Signal value(s) at t >= 0; bounded by the squared envelope over 4."""
    env = ml_envelope(params.alpha, params.lam, t)
    return 0.25 * env * env * np.sin(params.omega * np.asarray(t, float)) ** 2


def _grid(params, horizon, ppp):
    if not horizon > 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if ppp < 16:
        raise DomainError(f"points_per_period must be >= 16, got {ppp}")
    if params.omega > 0.0:
        n = max(1024, math.ceil(horizon * params.omega * ppp / (2.0 * math.pi))) + 1
    else:
        n = int(max(1024, horizon * params.lam * 64))
    if n > GRID_CAP:
        raise ResourceError(f"grid of {n} points exceeds the cap {GRID_CAP}")
    return np.linspace(0.0, horizon, n)


def sample_bqe(params: QuantumParams, horizon, points_per_period=DEFAULT_PPP):
    """Sample b(t) on [0, horizon], resolving each period with >= ppp points."""
    t = _grid(params, horizon, points_per_period)
    return Trajectory(t, b_qe(params, t))


def _slope_factor(params, t, h):
    """Sign-carrying factor of db/dt (the positive envelope divided out).

    db/dt = (env/2) [env' sin^2(omega t) + env omega sin(omega t) cos(omega t)],
    with env' taken by central differences of the envelope.
    """
    ts = np.concatenate([np.maximum(t - h, 0.0), t, t + h])
    env = ml_envelope(params.alpha, params.lam, ts)
    n = t.shape[0]
    denv = (env[2 * n:] - env[:n]) / (2.0 * h)
    wt = params.omega * t
    return 2.0 * denv * np.sin(wt) ** 2 + env[n:2 * n] * params.omega * np.sin(2.0 * wt)


def _refine_extrema(params, t, v):
    """Bisect each discrete slope sign change to the analytic extremum."""
    s = np.sign(np.diff(v))
    flips = np.flatnonzero(s[:-1] * s[1:] < 0.0)
    if flips.size == 0:
        return None, None
    lo = t[flips].copy()
    hi = t[flips + 2].copy()
    side = s[flips]            # slope sign at the left bracket edge
    h = FD_STEP * min(1.0 / params.lam, 1.0 / params.omega)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        same = _slope_factor(params, mid, h) * side > 0.0
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    tm = 0.5 * (lo + hi)
    return tm, b_qe(params, tm)


def n_qe_result(params: QuantumParams, horizon=None,
                points_per_period=DEFAULT_PPP):
    """Backflow of the sampled signal with refined extrema, plus run metadata."""
    if horizon is None:
        horizon = DEFAULT_HORIZON_LAM / params.lam
    traj = sample_bqe(params, horizon, points_per_period)
    refined = 0
    if params.omega > 0.0:
        rt, rv = _refine_extrema(params, traj.times, traj.values)
        if rt is not None:
            refined = rt.shape[0]
            ta = np.concatenate([traj.times, rt])
            va = np.concatenate([traj.values, rv])
            order = np.argsort(ta, kind="stable")
            ta, va = ta[order], va[order]
            keep = np.concatenate([[True], np.diff(ta) > 0.0])
            traj = Trajectory(ta[keep], va[keep])
    res = backflow_functional(traj)
    meta = {"horizon": float(horizon), "grid_points": len(traj),
            "refined_extrema": refined}
    return res, meta


def n_qe(params: QuantumParams, horizon=None,
         points_per_period=DEFAULT_PPP) -> float:
    """Total backflow of the revival signal up to the horizon."""
    return n_qe_result(params, horizon, points_per_period)[0].n_i
