"""Parameter sweeps: phase grids over model parameters and initial states.

Cells are independent pure computations, so any cell recomputed in isolation
reproduces its sweep value bitwise (deterministic models) or from the same
derived seed (Monte Carlo). Sweeps fix lam = 1: the revival model is
invariant under (lam, omega, T) -> (c lam, c omega, T/c), so only the ratio
omega/lam carries information.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import Generator3, MemoryConfig, propagate
from .errors import DegenerateError, DomainError
from .functional import backflow_functional
from .measures import entropy_overshoot, kl_to_stationary, shannon_entropy
from .quantum import DEFAULT_PPP, QuantumParams, n_qe
from .trajectory import ProbTrajectory, Trajectory

METRICS = ("delta_h", "n_h", "n_dkl")


@dataclass
class PhaseGrid:
    """2-D array of a swept scalar with named, ordered axes.

    Barycentric grids (from simplex_map) set meta['mask'] = 'barycentric';
    there the lattice only fills cells with i + j <= resolution and the
    unreachable corner is NaN. Every other grid must be finite everywhere.
    """

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis1_values = np.asarray(self.axis1_values, dtype=np.float64)
        self.axis2_values = np.asarray(self.axis2_values, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        n1, n2 = self.axis1_values.shape[0], self.axis2_values.shape[0]
        if self.values.shape != (n1, n2):
            raise DomainError(
                f"values shape {self.values.shape} does not match axes "
                f"({n1}, {n2})")
        finite = np.isfinite(self.values)
        if self.meta.get("mask") == "barycentric":
            i, j = np.indices(self.values.shape)
            valid = (i + j) <= (n1 - 1)
            if not (np.all(finite[valid]) and not np.any(finite[~valid])):
                raise DomainError("barycentric grid must be finite exactly "
                                  "on the lattice cells")
        elif not np.all(finite):
            raise DomainError("grid values must be finite")


@dataclass
class SimplexGrid:
    """All barycentric lattice points (i/n, j/n, k/n) with i + j + k = n."""

    resolution: int
    include_boundary: bool = True
    points: np.ndarray = None

    def __post_init__(self):
        n = self.resolution
        if n < 1:
            raise DomainError("resolution must be >= 1")
        pts = []
        for i in range(n + 1):
            for j in range(n + 1 - i):
                k = n - i - j
                if not self.include_boundary and min(i, j, k) == 0:
                    continue
                pts.append((i / n, j / n, k / n))
        self.points = np.array(pts)
        if self.include_boundary:
            assert self.points.shape[0] == (n + 1) * (n + 2) // 2


def _metric_value(metric, times, states, pi):
    if metric == "delta_h":
        return entropy_overshoot(ProbTrajectory(times, states)).delta_h
    if metric == "n_h":
        info = shannon_entropy(states)
    else:
        info = kl_to_stationary(states, pi)
    return backflow_functional(Trajectory(times, info)).n_i


def _check_metric(metric):
    if metric not in METRICS:
        raise DomainError(f"metric must be one of {METRICS}, got {metric!r}")


def _cell_abort(err, **coords):
    where = ", ".join(f"{k}={v}" for k, v in coords.items())
    return type(err)(f"sweep cell ({where}): {err}")


def quantum_phase_diagram(alpha_range=(0.1, 1.0), ratio_range=(0.5, 20.0),
                          grid_sizes=(33, 33), horizon=200.0,
                          points_per_period=DEFAULT_PPP) -> PhaseGrid:
    """Revival backflow over the (alpha, omega/lam) plane at lam = 1.

    horizon is in units of 1/lam. Ranges may be (lo, hi) pairs, expanded
    linearly to grid_sizes, or explicit value arrays.
    """
    alphas = _expand_range(alpha_range, grid_sizes[0], "alpha")
    ratios = _expand_range(ratio_range, grid_sizes[1], "ratio")
    if np.any(alphas <= 0.0) or np.any(alphas > 1.0):
        raise DomainError("alpha values must lie in (0, 1]")
    if np.any(ratios < 0.0):
        raise DomainError("ratio values must be >= 0")
    values = np.empty((alphas.shape[0], ratios.shape[0]))
    for i, a in enumerate(alphas):
        for j, r in enumerate(ratios):
            try:
                values[i, j] = n_qe(QuantumParams(float(a), 1.0, float(r)),
                                    horizon=horizon,
                                    points_per_period=points_per_period)
            except Exception as err:
                raise _cell_abort(err, alpha=a, ratio=r) from err
    meta = {"model": "quantum_revival", "lam": 1.0, "horizon": horizon,
            "points_per_period": points_per_period,
            "grid_sizes": list(grid_sizes)}
    return PhaseGrid("alpha", alphas, "omega_over_lambda", ratios,
                     values, meta)


def _expand_range(rng, size, name):
    arr = np.asarray(rng, dtype=np.float64)
    if arr.shape == (2,) and size != 2:
        return np.linspace(arr[0], arr[1], size)
    if arr.ndim == 1 and arr.shape[0] == size:
        return arr
    raise DomainError(f"{name} range must be a (lo, hi) pair or an array "
                      f"of length {size}")


def _cell_seed(seed, i, j):
    """Stable per-cell Monte Carlo seed from the global seed and cell index."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(i), int(j)))
    return int(ss.generate_state(1, np.uint64)[0])


def _cell_memory(memory, i, j):
    if memory.kind != "erlang2_montecarlo":
        return memory
    return MemoryConfig(memory.kind, n_traj=memory.n_traj,
                        seed=_cell_seed(memory.seed, i, j))


def simplex_map(gen: Generator3, memory: MemoryConfig, metric: str,
                res: int = 40, horizon: float = 20.0,
                steps: int = 801) -> PhaseGrid:
    """Metric over all initial states on the barycentric lattice.

    Cell (i, j) holds the metric for p0 = (i/res, j/res, 1 - (i+j)/res);
    cells with i + j > res do not correspond to probability vectors and
    are NaN (meta['mask'] = 'barycentric').
    """
    _check_metric(metric)
    if res < 4:
        raise DomainError("simplex resolution must be >= 4")
    if steps < 2:
        raise DomainError("steps must be >= 2")
    if not horizon > 0.0:
        raise DomainError("horizon must be positive")
    grid_t = np.linspace(0.0, horizon, steps)
    values = np.full((res + 1, res + 1), np.nan)
    for i in range(res + 1):
        for j in range(res + 1 - i):
            p0 = np.array([i, j, res - i - j]) / res
            try:
                traj = propagate(gen, _cell_memory(memory, i, j), p0, grid_t)
                values[i, j] = _metric_value(metric, traj.times, traj.states,
                                             gen.pi)
            except Exception as err:
                raise _cell_abort(err, i=i, j=j) from err
    meta = {"model": memory.kind, "metric": metric, "resolution": res,
            "horizon": horizon, "steps": steps, "mask": "barycentric",
            "generator": gen.rates.tolist()}
    if memory.gamma is not None:
        meta["gamma"] = memory.gamma
    if memory.alpha is not None:
        meta["alpha"] = memory.alpha
    if memory.kind == "erlang2_montecarlo":
        meta["n_traj"] = memory.n_traj
        meta["seed"] = memory.seed
    frac = np.arange(res + 1) / res
    return PhaseGrid("p_1", frac, "p_2", frac.copy(), values, meta)


def _log_time_grid(horizon, n=2000):
    """Geometric grid resolving both the startup and the slow tail."""
    return np.concatenate([[0.0], np.geomspace(horizon * 1e-6, horizon, n)])


def classical_alpha_sweep(gen: Generator3, alpha_range, p0_set, metric: str,
                          horizons=(10.0, 100.0, 1000.0)) -> PhaseGrid:
    """Fractional-order profile of a backflow metric.

    Cell (alpha, p0 index) is the metric over [0, max(horizons)]; the
    per-horizon values (the growth record across the horizon list) are kept
    in meta['growth'] as one grid per horizon.
    """
    _check_metric(metric)
    alphas = np.asarray(alpha_range, dtype=np.float64)
    if alphas.ndim != 1 or alphas.shape[0] < 2:
        raise DomainError("alpha_range must hold at least 2 values")
    if np.any(alphas <= 0.0) or np.any(alphas > 1.0):
        raise DomainError("alpha values must lie in (0, 1]")
    p0s = [np.asarray(p, dtype=np.float64) for p in p0_set]
    if not p0s:
        raise DomainError("p0_set must be non-empty")
    horizons = sorted(float(h) for h in horizons)
    if horizons[0] <= 0.0:
        raise DomainError("horizons must be positive")
    grid_t = _log_time_grid(horizons[-1])
    cuts = [np.searchsorted(grid_t, h, side="right") for h in horizons]
    growth = np.empty((len(horizons), alphas.shape[0], len(p0s)))
    for i, a in enumerate(alphas):
        for j, p0 in enumerate(p0s):
            try:
                traj = propagate(gen, MemoryConfig("fractional", alpha=float(a)),
                                 p0, grid_t)
            except Exception as err:
                raise _cell_abort(err, alpha=a, p0=j) from err
            for h, c in enumerate(cuts):
                growth[h, i, j] = _metric_value(
                    metric, traj.times[:c], traj.states[:c], gen.pi)
    meta = {"model": "fractional", "metric": metric, "horizons": horizons,
            "p0_set": [p.tolist() for p in p0s],
            "generator": gen.rates.tolist(),
            "growth": growth.tolist()}
    return PhaseGrid("alpha", alphas, "p0_index",
                     np.arange(len(p0s), dtype=np.float64),
                     growth[-1], meta)


def boundary_extract(grid: PhaseGrid, mode: str = "gradient",
                     level_fraction: float = 0.5) -> list:
    """Boundary points (axis1 location, axis2 value) of a phase grid.

    gradient mode: per axis2 column, the axis1 location of the largest
    |finite-difference slope| (central differences; masked cells skipped).
    level mode: linearly interpolated crossings of
    value = level_fraction * max(grid), possibly several per column.
    """
    vals = grid.values
    x = grid.axis1_values
    finite = np.isfinite(vals)
    if not np.any(finite):
        raise DegenerateError("grid has no finite cells")
    lo, hi = np.min(vals[finite]), np.max(vals[finite])
    if hi - lo <= 1e-300 * max(abs(hi), 1.0):
        raise DegenerateError("constant grid has no boundary")
    out = []
    if mode == "gradient":
        for j, y in enumerate(grid.axis2_values):
            col = vals[:, j]
            ok = np.flatnonzero(np.isfinite(col))
            if ok.size < 3:
                continue
            xs, cs = x[ok], col[ok]
            slope = (cs[2:] - cs[:-2]) / (xs[2:] - xs[:-2])
            k = int(np.argmax(np.abs(slope)))
            out.append((float(xs[k + 1]), float(y)))
        return out
    if mode == "level":
        if not 0.0 < level_fraction < 1.0:
            raise DomainError("level_fraction must be in (0, 1)")
        level = level_fraction * hi
        for j, y in enumerate(grid.axis2_values):
            col = vals[:, j]
            ok = np.flatnonzero(np.isfinite(col))
            xs, cs = x[ok], col[ok]
            for a, b, xa, xb in zip(cs[:-1], cs[1:], xs[:-1], xs[1:]):
                if (a - level) * (b - level) < 0.0:
                    out.append((float(xa + (level - a) * (xb - xa) / (b - a)),
                                float(y)))
                elif a == level and b != level:
                    out.append((float(xa), float(y)))
        return out
    raise DomainError(f"mode must be 'gradient' or 'level', got {mode!r}")
