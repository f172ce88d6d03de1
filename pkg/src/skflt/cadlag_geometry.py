"""Step paths on [0, 1], their completed graphs, and the Skorohod M2 distance.

Graph points are compared with the max-metric ``|t1 - t2| v |y1 - y2|``. A
completed graph of a step path consists of axis-aligned segments. The
max-metric distance from a point to such a segment is the larger of the two
coordinate gaps to the segment's bounding box. That structure is what lets
the M2 distance be computed exactly.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StepPath",
    "CompletedGraph",
    "completed_graph",
    "m2_distance",
    "m2_distance_oracle",
    "uniform_distance",
    "read_path_csv",
    "write_path_csv",
]


@dataclass(frozen=True, eq=False)
class StepPath:
    """Right-continuous step function on [0, 1].

    The path equals ``initial_value`` on ``[0, times[0])`` and ``values[k]`` on
    ``[times[k], times[k+1])``. The last value holds up to and including 1.
    """

    times: np.ndarray
    values: np.ndarray
    initial_value: float = 0.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if times.shape != values.shape:
            raise ValueError(f"times and values differ in length ({times.size} vs {values.size})")
        if times.size:
            if times[0] <= 0.0 or times[-1] > 1.0:
                raise ValueError("jump times must lie in (0, 1]")
            if np.any(np.diff(times) <= 0.0):
                raise ValueError("jump times must be strictly increasing")
        if not (np.all(np.isfinite(values)) and math.isfinite(self.initial_value)):
            raise ValueError("path values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    @classmethod
    def constant(cls, c: float) -> "StepPath":
        return cls(np.empty(0), np.empty(0), c)

    @property
    def levels(self) -> np.ndarray:
        """``[initial_value, values...]``: the value after each jump count."""
        return np.concatenate(([self.initial_value], self.values))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.levels[np.searchsorted(self.times, t, side="right")]
        return out.item() if out.ndim == 0 else out

    def left_limit(self, t):
        t = np.asarray(t, dtype=float)
        out = self.levels[np.searchsorted(self.times, t, side="left")]
        out = np.where(t <= 0.0, self.initial_value, out)
        return out.item() if out.ndim == 0 else out

    def __mul__(self, c) -> "StepPath":
        return StepPath(self.times, self.values * c, self.initial_value * c)

    __rmul__ = __mul__

    def __add__(self, c) -> "StepPath":
        return StepPath(self.times, self.values + c, self.initial_value + c)

    def __repr__(self):
        return f"StepPath(jumps={self.times.size}, initial_value={self.initial_value!r})"


@dataclass(frozen=True, eq=False)
class CompletedGraph:
    """Oriented axis-aligned segments ``(t0, y0) -> (t1, y1)`` in time order.

    Plateaus have ``y0 == y1``. Jump connectors have ``t0 == t1`` and run from
    the left limit to the new value.
    """

    segments: np.ndarray  # shape (m, 4): t0, y0, t1, y1

    @property
    def boxes(self) -> np.ndarray:
        """Bounding boxes ``(t_lo, t_hi, y_lo, y_hi)`` per segment."""
        s = self.segments
        return np.column_stack(
            (s[:, 0], s[:, 2], np.minimum(s[:, 1], s[:, 3]), np.maximum(s[:, 1], s[:, 3]))
        )

    @property
    def lengths(self) -> np.ndarray:
        s = self.segments
        return np.abs(s[:, 2] - s[:, 0]) + np.abs(s[:, 3] - s[:, 1])

    def __len__(self):
        return len(self.segments)


def completed_graph(x: StepPath) -> CompletedGraph:
    """One plateau per constancy interval and one vertical connector per nonzero jump."""
    levels = x.levels
    jump = np.flatnonzero(levels[1:] != levels[:-1])
    jt = x.times[jump]
    before, after = levels[jump], levels[jump + 1]
    # plateau k spans [bounds[k], bounds[k+1]] at level plateau_y[k]
    bounds = np.concatenate(([0.0], jt, [1.0]))
    plateau_y = np.concatenate(([x.initial_value], after))
    segs = []
    for k in range(len(plateau_y)):
        a, b = bounds[k], bounds[k + 1]
        if b > a or len(plateau_y) == 1:
            segs.append((a, plateau_y[k], b, plateau_y[k]))
        if k < len(jt):
            segs.append((jt[k], before[k], jt[k], after[k]))
    return CompletedGraph(np.array(segs, dtype=float).reshape(-1, 4))


def uniform_distance(x1: StepPath, x2: StepPath) -> float:
    """``sup_t |x1(t) - x2(t)|`` over [0, 1]."""
    grid = np.union1d(np.union1d(x1.times, x2.times), [0.0])
    return float(np.max(np.abs(x1(grid) - x2(grid))))


# --- exact M2 -----------------------------------------------------------------


def _interval_dist(z, lo, hi):
    return np.maximum(np.maximum(lo - z, z - hi), 0.0)


def _sup_gap(lo, hi, r_lo, r_hi) -> float:
    """``sup_{z in [r_lo, r_hi]} dist(z, union of [lo_i, hi_i])``."""
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    best = max(lo[0] - r_lo, r_hi - reach[-1], 0.0)
    # interior gaps (reach[i], lo[i+1])
    g1, g2 = reach[:-1], lo[1:]
    open_ = g2 > g1
    if np.any(open_):
        g1, g2 = g1[open_], g2[open_]
        c1, c2 = np.maximum(g1, r_lo), np.minimum(g2, r_hi)
        ok = c2 >= c1
        if np.any(ok):
            g1, g2, c1, c2 = g1[ok], g2[ok], c1[ok], c2[ok]
            z = np.clip(0.5 * (g1 + g2), c1, c2)
            best = max(best, float(np.max(np.minimum(z - g1, g2 - z))))
    return best


def _segment_sup(h, f_lo, f_hi, r_lo, r_hi) -> float:
    """Exact ``sup_{z in [r_lo, r_hi]} min_j max(h_j, dist(z, [f_lo_j, f_hi_j]))``.

    With candidates sorted by ``h``, the value is
    ``min_k max(h_(k), D_k)``, where ``D_k`` is the largest distance from the
    range to the union of the first ``k`` free-coordinate intervals. ``h`` is
    nondecreasing in ``k`` and ``D_k`` is nonincreasing, so the optimum sits
    where they cross and can be found by bisection.
    """
    if len(h) <= _SMALL_CANDIDATES:
        return _segment_sup_scan(h.tolist(), f_lo.tolist(), f_hi.tolist(), r_lo, r_hi)
    order = np.argsort(h, kind="stable")
    h, f_lo, f_hi = h[order], f_lo[order], f_hi[order]
    m = len(h)

    def d(k):
        return _sup_gap(f_lo[:k], f_hi[:k], r_lo, r_hi)

    lo, hi = 1, m  # smallest k with d(k) <= h[k-1], if any
    if d(m) > h[m - 1]:
        return d(m)
    while lo < hi:
        mid = (lo + hi) // 2
        if d(mid) <= h[mid - 1]:
            hi = mid
        else:
            lo = mid + 1
    best = h[lo - 1]
    if lo > 1:
        best = min(best, d(lo - 1))
    return float(best)


_SMALL_CANDIDATES = 128


def _sup_gap_list(ivals, r_lo, r_hi) -> float:
    """``_sup_gap`` for a short list of ``(lo, hi)`` pairs already sorted by ``lo``."""
    best = max(ivals[0][0] - r_lo, 0.0)
    reach = ivals[0][1]
    for lo, hi in ivals[1:]:
        if lo > reach:
            c1, c2 = max(reach, r_lo), min(lo, r_hi)
            if c2 >= c1:
                z = min(max(0.5 * (reach + lo), c1), c2)
                best = max(best, min(z - reach, lo - z))
        reach = max(reach, hi)
    return max(best, r_hi - reach)


def _segment_sup_scan(h, f_lo, f_hi, r_lo, r_hi) -> float:
    """Same value as ``_segment_sup``, by a linear scan over ``k``; for few candidates."""
    order = sorted(range(len(h)), key=h.__getitem__)
    best = math.inf
    ivals = []
    for k in order:
        if h[k] >= best:
            break
        bisect.insort(ivals, (f_lo[k], f_hi[k]))
        best = min(best, max(h[k], _sup_gap_list(ivals, r_lo, r_hi)))
    return float(best)


class _RangeExtrema:
    """Sparse tables answering min/max over index ranges of a fixed array."""

    def __init__(self, a):
        self.mins = [a]
        self.maxs = [a]
        w = 1
        while 2 * w <= len(a):
            pm, px = self.mins[-1], self.maxs[-1]
            self.mins.append(np.minimum(pm[:-w], pm[w:]))
            self.maxs.append(np.maximum(px[:-w], px[w:]))
            w *= 2

    def query(self, i, j):
        """Elementwise min and max over ``a[i..j]`` (inclusive)."""
        span = j - i + 1
        lvl = np.floor(np.log2(span)).astype(int)
        w = 1 << lvl
        mn = np.empty(len(i))
        mx = np.empty(len(i))
        for L in np.unique(lvl):
            sel = lvl == L
            ii, jj = i[sel], j[sel] - w[sel] + 1
            mn[sel] = np.minimum(self.mins[L][ii], self.mins[L][jj])
            mx[sel] = np.maximum(self.maxs[L][ii], self.maxs[L][jj])
        return mn, mx


def _upper_bounds(g1: CompletedGraph, x2: StepPath) -> np.ndarray:
    """Per-segment upper bounds on ``sup_{a in seg} d(a, graph of x2)``.

    Plateau at level c over [a, b]: the points ``(t, x2(t))`` give
    ``max_t |c - x2(t)|``. Connector at s: interpolating between the two
    endpoint gaps gives ``max(|y0 - x2(s-)|, |y1 - x2(s)|)``.
    """
    s = g1.segments
    t0, y0, t1, y1 = s.T
    levels = x2.levels
    rng = _RangeExtrema(levels)
    i = np.searchsorted(x2.times, t0, side="right")
    j = np.searchsorted(x2.times, t1, side="right")
    mn, mx = rng.query(i, j)
    plateau = np.maximum(np.abs(y0 - mn), np.abs(y0 - mx))
    vertical = np.maximum(np.abs(y0 - x2.left_limit(t0)), np.abs(y1 - x2(t0)))
    return np.where(t1 > t0, plateau, vertical)


def _directed(g1: CompletedGraph, g2: CompletedGraph, x2: StepPath) -> float:
    """``sup_{a in g1} inf_{b in g2} d(a, b)``."""
    ub = _upper_bounds(g1, x2)
    seg1 = g1.segments
    box2 = g2.boxes
    t_lo2, t_hi2, y_lo2, y_hi2 = box2.T
    # time extents of g2 segments are nondecreasing in index
    best = 0.0
    for idx in np.argsort(-ub, kind="stable"):
        bound = ub[idx]
        if bound <= best:
            break
        t0, y0, t1, y1 = seg1[idx]
        slack = bound * (1.0 + 1e-12) + 1e-300
        lo = np.searchsorted(t_hi2, t0 - slack, side="left")
        hi = np.searchsorted(t_lo2, t1 + slack, side="right")
        c_tlo, c_thi = t_lo2[lo:hi], t_hi2[lo:hi]
        c_ylo, c_yhi = y_lo2[lo:hi], y_hi2[lo:hi]
        if t1 > t0:
            # plateau at level y0 over [t0, t1]
            h = _interval_dist(y0, c_ylo, c_yhi)
            keep = h <= slack
            val = _segment_sup(h[keep], c_tlo[keep], c_thi[keep], t0, t1)
        else:
            # connector (or isolated point) at time t0
            ylo, yhi = min(y0, y1), max(y0, y1)
            h = _interval_dist(t0, c_tlo, c_thi)
            y_gap = np.maximum(np.maximum(c_ylo - yhi, ylo - c_yhi), 0.0)
            keep = (h <= slack) & (y_gap <= slack)
            val = _segment_sup(h[keep], c_ylo[keep], c_yhi[keep], ylo, yhi)
        best = max(best, val)
    return best


def m2_distance(x1: StepPath, x2: StepPath) -> float:
    """Exact Hausdorff distance between the completed graphs under the max-metric."""
    g1, g2 = completed_graph(x1), completed_graph(x2)
    return max(_directed(g1, g2, x2), _directed(g2, g1, x1))


# --- brute-force oracle -------------------------------------------------------


def _sample_graph(g: CompletedGraph, step: float) -> np.ndarray:
    pts = []
    for (t0, y0, t1, y1), length in zip(g.segments, g.lengths):
        k = max(int(math.ceil(length / step)), 1)
        w = np.linspace(0.0, 1.0, k + 1)
        pts.append(np.column_stack((t0 + w * (t1 - t0), y0 + w * (y1 - y0))))
    return np.concatenate(pts)


def _point_to_graph(points: np.ndarray, g: CompletedGraph, chunk: int = 4096) -> np.ndarray:
    b = g.boxes
    out = np.empty(len(points))
    for s in range(0, len(points), chunk):
        p = points[s:s + chunk]
        dt = _interval_dist(p[:, :1], b[:, 0], b[:, 1])
        dy = _interval_dist(p[:, 1:], b[:, 2], b[:, 3])
        out[s:s + chunk] = np.min(np.maximum(dt, dy), axis=1)
    return out


def m2_distance_oracle(x1: StepPath, x2: StepPath, grid_step: float) -> tuple[float, float]:
    """Bracket the M2 distance by sampling each graph along its arclength.

    Samples are spaced at most ``grid_step`` apart, and each sample's exact
    distance to the other graph is computed by brute force over all of its
    segments. Every graph point lies within ``grid_step / 2`` of a sample and
    the distance to a set is 1-Lipschitz. So the largest sampled value is a
    lower bound, and adding ``grid_step`` gives a conservative upper bound.
    """
    if not grid_step > 0.0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    g1, g2 = completed_graph(x1), completed_graph(x2)
    lower = max(
        float(np.max(_point_to_graph(_sample_graph(g1, grid_step), g2))),
        float(np.max(_point_to_graph(_sample_graph(g2, grid_step), g1))),
    )
    return lower, lower + grid_step


# --- CSV exchange -------------------------------------------------------------


def write_path_csv(path: StepPath, fh_or_name) -> None:
    """Rows ``t,value``; the first data row is ``t = 0`` with the initial value."""
    own = isinstance(fh_or_name, (str, bytes)) or hasattr(fh_or_name, "__fspath__")
    fh = open(fh_or_name, "w", newline="") if own else fh_or_name
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value"])
        w.writerow(["0", repr(path.initial_value)])
        for t, v in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(v))])
    finally:
        if own:
            fh.close()


def read_path_csv(fh_or_name) -> StepPath:
    own = isinstance(fh_or_name, (str, bytes)) or hasattr(fh_or_name, "__fspath__")
    fh = open(fh_or_name, newline="") if own else fh_or_name
    try:
        rows = [row for row in csv.reader(fh) if row and row[0].strip()]
    finally:
        if own:
            fh.close()
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise ValueError("path CSV has no data rows")
    data = np.array([[float(r[0]), float(r[1])] for r in rows])
    if data[0, 0] != 0.0:
        raise ValueError("first path row must be t = 0 carrying the initial value")
    return StepPath(data[1:, 0], data[1:, 1], data[0, 1])


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
