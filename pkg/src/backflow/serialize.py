"""CSV, JSON, and SVG output.

CSV is the canonical numeric format. Floats are written with repr (shortest
round-trip form), so a deterministic run rewrites byte-identical files and a
reader recovers the exact binary values. JSON carries metadata (including
wall time, which legitimately varies between reruns); SVG heatmaps are pure
functions of the grid.
"""

import io
import json

import numpy as np

from . import __version__
from .errors import OutputError
from .functional import BackflowResult
from .sweeps import PhaseGrid
from .trajectory import ProbTrajectory, Trajectory


def _fmt(x):
    return repr(float(x))


def trajectory_csv(traj) -> str:
    """One header line naming columns and units, then one row per sample."""
    buf = io.StringIO()
    if isinstance(traj, ProbTrajectory):
        cols = ["t [time]", "p1 [prob]", "p2 [prob]", "p3 [prob]"]
        body = [traj.times] + [traj.states[:, i] for i in range(3)]
        if traj.stderr is not None:
            cols += [f"se{i + 1} [prob]" for i in range(3)]
            body += [traj.stderr[:, i] for i in range(3)]
    else:
        cols = ["t [time]", "value [info]"]
        body = [traj.times, traj.values]
    buf.write(",".join(cols) + "\n")
    for row in zip(*body):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def phase_grid_csv(grid: PhaseGrid) -> str:
    """Axis-1 values down the first column, axis-2 values across the header."""
    buf = io.StringIO()
    head = [f"{grid.axis1_name}\\{grid.axis2_name}"]
    head += [_fmt(v) for v in grid.axis2_values]
    buf.write(",".join(head) + "\n")
    for x, row in zip(grid.axis1_values, grid.values):
        buf.write(",".join([_fmt(x)] + [_fmt(v) for v in row]) + "\n")
    return buf.getvalue()


def read_phase_grid_csv(text: str, meta=None) -> PhaseGrid:
    lines = [ln for ln in text.splitlines() if ln]
    head = lines[0].split(",")
    names = head[0].split("\\")
    if len(names) != 2:
        raise OutputError("phase grid CSV header must be 'axis1\\axis2,...'")
    axis2 = np.array([float(v) for v in head[1:]])
    axis1, rows = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        axis1.append(float(parts[0]))
        rows.append([float(v) for v in parts[1:]])
    return PhaseGrid(names[0], np.array(axis1), names[1], axis2,
                     np.array(rows), dict(meta) if meta else {})


def backflow_json(result: BackflowResult) -> str:
    doc = {"n_i": result.n_i, "epsilon": result.epsilon,
           "intervals": [[t0, t1, rise] for (t0, t1, rise) in result.intervals]}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def meta_json(config: dict, wall_time: float, extra=None) -> str:
    doc = {"config": config, "version": __version__,
           "wall_time_s": wall_time}
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


# three-stop linear color scale, dark blue -> teal -> yellow
_STOPS = ((0.0, (13, 8, 135)), (0.5, (33, 145, 140)), (1.0, (253, 231, 37)))


def _color(frac):
    frac = min(max(frac, 0.0), 1.0)
    for (f0, c0), (f1, c1) in zip(_STOPS[:-1], _STOPS[1:]):
        if frac <= f1:
            w = 0.0 if f1 == f0 else (frac - f0) / (f1 - f0)
            return tuple(round(a + w * (b - a)) for a, b in zip(c0, c1))
    return _STOPS[-1][1]


def phase_grid_svg(grid: PhaseGrid, cell: int = 12) -> str:
    """Heatmap: one rect per finite cell, axis labels, and a colorbar.

    Axis 1 runs upward (rows bottom-to-top), axis 2 runs right. The color
    scale is linear between the finite minimum and maximum.
    """
    vals = grid.values
    finite = np.isfinite(vals)
    if not np.any(finite):
        raise OutputError("cannot render a grid with no finite cells")
    lo = float(np.min(vals[finite]))
    hi = float(np.max(vals[finite]))
    span = hi - lo if hi > lo else 1.0
    n1, n2 = vals.shape
    mleft, mbot, mtop = 46, 34, 10
    bar_w, bar_gap = 16, 14
    w = mleft + n2 * cell + bar_gap + bar_w + 42
    h = mtop + n1 * cell + mbot
    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" '
              f'viewBox="0 0 {w} {h}" font-family="sans-serif" '
              f'font-size="9">\n')
    for i in range(n1):
        y = mtop + (n1 - 1 - i) * cell
        for j in range(n2):
            if not finite[i, j]:
                continue
            r, g, b = _color((vals[i, j] - lo) / span)
            out.write(f'<rect x="{mleft + j * cell}" y="{y}" '
                      f'width="{cell}" height="{cell}" '
                      f'fill="rgb({r},{g},{b})"/>\n')
    ax = mtop + n1 * cell
    out.write(f'<text x="{mleft}" y="{ax + 12}">'
              f'{_fmt(grid.axis2_values[0])}</text>\n')
    out.write(f'<text x="{mleft + n2 * cell}" y="{ax + 12}" '
              f'text-anchor="end">{_fmt(grid.axis2_values[-1])}</text>\n')
    out.write(f'<text x="{mleft + n2 * cell / 2}" y="{ax + 26}" '
              f'text-anchor="middle">{grid.axis2_name}</text>\n')
    out.write(f'<text x="{mleft - 4}" y="{ax}" text-anchor="end">'
              f'{_fmt(grid.axis1_values[0])}</text>\n')
    out.write(f'<text x="{mleft - 4}" y="{mtop + 9}" text-anchor="end">'
              f'{_fmt(grid.axis1_values[-1])}</text>\n')
    out.write(f'<text x="12" y="{mtop + n1 * cell / 2}" '
              f'transform="rotate(-90 12 {mtop + n1 * cell / 2})" '
              f'text-anchor="middle">{grid.axis1_name}</text>\n')
    bx = mleft + n2 * cell + bar_gap
    steps = 48
    for k in range(steps):
        r, g, b = _color(1.0 - k / (steps - 1))
        yk = mtop + k * (n1 * cell) / steps
        out.write(f'<rect x="{bx}" y="{yk:.2f}" width="{bar_w}" '
                  f'height="{(n1 * cell) / steps + 0.5:.2f}" '
                  f'fill="rgb({r},{g},{b})"/>\n')
    out.write(f'<text x="{bx + bar_w + 4}" y="{mtop + 9}">{hi:.4g}</text>\n')
    out.write(f'<text x="{bx + bar_w + 4}" y="{ax}">{lo:.4g}</text>\n')
    out.write('</svg>\n')
    return out.getvalue()


def read_trajectory_csv(text: str):
    """Inverse of trajectory_csv: (times, columns) with exact float values."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise OutputError("empty trajectory CSV")
    ncol = len(lines[0].split(","))
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != ncol:
            raise OutputError(f"ragged CSV row: {ln!r}")
        rows.append([float(v) for v in parts])
    if not rows:
        raise OutputError("trajectory CSV has no data rows")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1:]
