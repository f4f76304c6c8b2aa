"""Independent reference implementations used to cross-check the library.

Everything here is written the slow, obvious way on purpose: full-matrix
dynamic programs, O(n^3) geometry, explicit pair enumeration.  None of it
shares code with the package.
"""

from __future__ import annotations

import math

import numpy as np


def dtw_full_matrix(first: np.ndarray, second: np.ndarray, beta: int) -> float:
    """Banded DTW cost by the textbook O(L^2) full-matrix recurrence.

    Cell (i, j) matches second[:, i] against first[:, j]; steps are
    diagonal, vertical (i-1, j), horizontal (i, j-1); |j - i| <= beta.
    """
    a = np.atleast_2d(np.asarray(first, dtype=np.float64))
    b = np.atleast_2d(np.asarray(second, dtype=np.float64))
    length = a.shape[1]
    cell = np.full((length, length), np.inf)
    for i in range(length):
        for j in range(length):
            if abs(j - i) <= beta:
                cell[i, j] = math.dist(b[:, i], a[:, j])
    acc = np.full((length, length), np.inf)
    for i in range(length):
        for j in range(length):
            if not np.isfinite(cell[i, j]):
                continue
            if i == 0 and j == 0:
                acc[i, j] = cell[i, j]
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = min(best, acc[i - 1, j - 1])
            if i > 0:
                best = min(best, acc[i - 1, j])
            if j > 0:
                best = min(best, acc[i, j - 1])
            acc[i, j] = cell[i, j] + best
    return float(acc[length - 1, length - 1])


def path_is_valid(pairs, length: int, beta: int) -> bool:
    """Monotone, banded, fully incremental path from (0,0) to (L-1,L-1)."""
    if pairs[0] != (0, 0) or pairs[-1] != (length - 1, length - 1):
        return False
    for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
        di, dj = i1 - i0, j1 - j0
        if (di, dj) not in ((1, 0), (0, 1), (1, 1)):
            return False
    return all(abs(j - i) <= beta for i, j in pairs)


def path_cost(pairs, first: np.ndarray, second: np.ndarray) -> float:
    """Summed Euclidean cell distance along an alignment path."""
    a = np.atleast_2d(np.asarray(first, dtype=np.float64))
    b = np.atleast_2d(np.asarray(second, dtype=np.float64))
    return float(sum(math.dist(b[:, i], a[:, j]) for i, j in pairs))


def detect_events_runscan(densities, lam: float, merge_gap: int):
    """Reference event segmentation: boolean diff run scan, greedy merge,
    then per-event backward ramp extension with a previous-event floor.

    Returns a list of (pre_start, coord_start, coord_end) tuples.
    """
    d = np.asarray(densities, dtype=np.float64)
    above = np.concatenate([[False], d > lam, [False]])
    edges = np.flatnonzero(above[1:] != above[:-1])
    runs = [(int(edges[k]), int(edges[k + 1]) - 1) for k in range(0, len(edges), 2)]

    merged = []
    for run in runs:
        if merged and run[0] - merged[-1][1] - 1 <= merge_gap:
            merged[-1] = (merged[-1][0], run[1])
        else:
            merged.append(run)

    events = []
    floor = 0
    for start, end in merged:
        pre = start
        while pre > floor and d[pre] > d[pre - 1]:
            pre -= 1
        events.append((pre, start, end))
        floor = end + 1
    return events


def percentile_nearest_rank(values, pct: float) -> float:
    """Nearest-rank percentile: the ceil(pct/100 * N)-th smallest value."""
    ranked = sorted(float(v) for v in values)
    rank = max(1, math.ceil(pct / 100.0 * len(ranked)))
    return ranked[rank - 1]


def hull_vertices_cubic(points: np.ndarray) -> set[tuple[float, float]]:
    """Hull vertex set by the O(n^3) edge test.

    A directed pair (p, q) is a hull edge when no other point sits strictly
    right of the line p -> q and every collinear point lies inside the
    closed segment [p, q]; the accepted edges' endpoints are exactly the
    hull vertices, collinear boundary runs included.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    n = len(pts)
    if n <= 2:
        return {tuple(p) for p in pts}
    vertices: set[tuple[float, float]] = set()
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            pa, pb = pts[a], pts[b]
            ok = True
            for c in range(n):
                if c in (a, b):
                    continue
                pc = pts[c]
                cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (
                    pb[1] - pa[1]
                ) * (pc[0] - pa[0])
                if cross < 0:
                    ok = False
                    break
                if cross == 0 and not (
                    min(pa[0], pb[0]) <= pc[0] <= max(pa[0], pb[0])
                    and min(pa[1], pb[1]) <= pc[1] <= max(pa[1], pb[1])
                ):
                    ok = False
                    break
            if ok:
                vertices.add(tuple(pa))
                vertices.add(tuple(pb))
    return vertices


def strictly_outside_cubic(points: np.ndarray, probe) -> bool:
    """Strict outside-the-hull test via the cubic oracle.

    A probe not coincident with an input point is strictly outside the hull
    exactly when it becomes a vertex of the union's hull; a boundary probe
    never does, matching the convention that the boundary counts as inside.
    """
    pts = np.asarray(points, dtype=np.float64)
    probe = np.asarray(probe, dtype=np.float64)
    if any(np.all(p == probe) for p in pts):
        return False
    union = np.vstack([pts, probe[None, :]])
    return tuple(probe) in hull_vertices_cubic(union)


def tau_b_outer(x, y) -> float:
    """Tau-b via numpy sign outer products instead of an explicit pair loop."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    n = xv.shape[0]
    sx = np.sign(xv[:, None] - xv[None, :])
    sy = np.sign(yv[:, None] - yv[None, :])
    upper = np.triu_indices(n, k=1)
    prod = sx[upper] * sy[upper]
    concordant = int((prod > 0).sum())
    discordant = int((prod < 0).sum())
    ties_x = int((sx[upper] == 0).sum())
    ties_y = int((sy[upper] == 0).sum())
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0:
        return 0.0
    return (concordant - discordant) / denom


def pagerank_linear_solve(weights: np.ndarray, damping: float) -> np.ndarray:
    """Stationary PageRank by solving the linear system directly."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    out = w.sum(axis=1)
    trans = np.full((n, n), 1.0 / n)
    nonzero = out > 0
    trans[nonzero] = w[nonzero] / out[nonzero, None]
    lhs = np.eye(n) - damping * trans.T
    rhs = np.full(n, (1.0 - damping) / n)
    return np.linalg.solve(lhs, rhs)


def vch_votes_loop(speeds: np.ndarray, step: int) -> list[int]:
    """Velocity range-exit indicators, spelled out one entity at a time."""
    prev = [float(v) for v in speeds[:, step - 1]]
    hi, lo = max(prev), min(prev)
    votes = []
    for value in speeds[:, step]:
        value = float(value)
        if value > hi * (1 + 1e-9):
            votes.append(1)
        elif value < lo * (1 - 1e-9):
            votes.append(-1)
        else:
            votes.append(0)
    return votes
