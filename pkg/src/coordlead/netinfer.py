"""Follower networks, the density signal, and coordination-event segmentation.

A window's signed scores become a directed graph (edges run follower ->
leader, weighted by |score|), the per-window edge densities form a signal
in [0, 1], and maximal runs above a threshold — optionally merged across
small gaps and extended backward through the density ramp — become
coordination events.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from coordlead.timeseries import FollowScores

__all__ = [
    "FollowingNetworks",
    "CoordinationEvent",
    "infer_networks",
    "density",
    "density_series",
    "resolve_threshold",
    "detect_events",
    "backtrack_pre_start",
    "default_merge_gap",
]


@dataclass(frozen=True)
class FollowingNetworks:
    """Per-window directed weighted graphs on the same node set.

    ``weights[k, a, b] > 0`` means entity a follows entity b on window k,
    with weight equal to the absolute signed score.  At most one direction
    per pair is nonzero and the diagonal is always zero.
    """

    entity_ids: tuple[str, ...]
    weights: np.ndarray  # (K, n, n)
    epsilon: float

    @property
    def n_windows(self) -> int:
        return self.weights.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True, order=True)
class CoordinationEvent:
    """Window-index triple (pre_start i, coord_start j, coord_end l), i <= j <= l."""

    pre_start: int
    coord_start: int
    coord_end: int

    def __post_init__(self) -> None:
        if not 0 <= self.pre_start <= self.coord_start <= self.coord_end:
            raise ValueError(
                f"event indices must satisfy 0 <= i <= j <= l, got "
                f"({self.pre_start}, {self.coord_start}, {self.coord_end})"
            )


def infer_networks(scores: FollowScores, epsilon: float = 0.0) -> FollowingNetworks:
    """Directed follower -> leader graphs from the signed score grid.

    For each window and unordered pair, the entity with positive score
    toward the other is the follower; an edge is added when |score| exceeds
    ``epsilon``, weighted |score|.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    k_total = scores.n_windows
    n = len(scores.entity_ids)
    ai = np.fromiter((p[0] for p in scores.pairs), dtype=np.intp)
    bi = np.fromiter((p[1] for p in scores.pairs), dtype=np.intp)
    s = scores.scores
    weights = np.zeros((k_total, n, n))
    weights[:, ai, bi] = np.where(s > epsilon, s, 0.0)
    weights[:, bi, ai] = np.where(s < -epsilon, -s, 0.0)
    return FollowingNetworks(scores.entity_ids, weights, float(epsilon))


def density(weights: np.ndarray) -> float:
    """Density 2|E| / (n(n-1)) of one window's weight matrix."""
    n = weights.shape[0]
    if n < 2:
        raise ValueError("density needs at least 2 nodes")
    edges = int(np.count_nonzero(weights))
    return 2.0 * edges / (n * (n - 1))


def density_series(networks: FollowingNetworks) -> np.ndarray:
    """Density of every window's graph, as a (K,) array in [0, 1]."""
    n = networks.n_nodes
    edges = np.count_nonzero(networks.weights, axis=(1, 2))
    return 2.0 * edges / (n * (n - 1))


def resolve_threshold(densities: Sequence[float] | np.ndarray, policy: str) -> float:
    """Threshold from the density distribution.

    ``policy`` is ``"mean"``, ``"median"``, or ``"pNN"`` for the nearest-rank
    NN-th percentile (e.g. ``"p75"``), NN in (0, 100].
    """
    d = np.asarray(densities, dtype=np.float64)
    if d.size == 0:
        raise ValueError("density series is empty")
    if policy == "mean":
        return float(d.mean())
    if policy == "median":
        return float(np.median(d))
    if policy.startswith("p"):
        try:
            pct = float(policy[1:])
        except ValueError:
            raise ValueError(f"unknown threshold policy {policy!r}") from None
        if not 0 < pct <= 100:
            raise ValueError(f"percentile must be in (0, 100], got {pct}")
        ranked = np.sort(d)
        rank = max(1, int(np.ceil(pct / 100.0 * d.size)))
        return float(ranked[rank - 1])
    raise ValueError(f"unknown threshold policy {policy!r}")


def backtrack_pre_start(
    densities: Sequence[float] | np.ndarray, coord_start: int, floor: int = 0
) -> int:
    """Extend a coordination start backward through the density ramp.

    Walks left from ``coord_start`` while the forward difference
    d(k) - d(k-1) stays positive, stopping at the first non-increase, at
    index 0, or at ``floor`` (one past the previous event's end).
    """
    d = np.asarray(densities, dtype=np.float64)
    if coord_start < 0:
        raise ValueError("coord_start must be >= 0")
    k = coord_start
    while k > floor and d[k] - d[k - 1] > 0:
        k -= 1
    return k


def detect_events(
    densities: Sequence[float] | np.ndarray, lam: float, merge_gap: int = 0
) -> list[CoordinationEvent]:
    """Segment the density series into coordination events.

    Maximal runs with density strictly above ``lam`` become coordination
    intervals [j, l]; runs separated by at most ``merge_gap`` windows merge
    left-to-right; each merged interval is extended backward with
    ``backtrack_pre_start``, clamped one past the previous event's end.
    """
    if merge_gap < 0:
        raise ValueError(f"merge_gap must be >= 0, got {merge_gap}")
    d = np.asarray(densities, dtype=np.float64)
    above = d > lam
    runs: list[tuple[int, int]] = []
    k = 0
    while k < d.size:
        if above[k]:
            start = k
            while k + 1 < d.size and above[k + 1]:
                k += 1
            runs.append((start, k))
        k += 1

    merged: list[tuple[int, int]] = []
    for start, end in runs:
        if merged and start - merged[-1][1] - 1 <= merge_gap:
            merged[-1] = (merged[-1][0], end)
        else:
            merged.append((start, end))

    events: list[CoordinationEvent] = []
    floor = 0
    for start, end in merged:
        pre = backtrack_pre_start(d, start, floor)
        events.append(CoordinationEvent(pre, start, end))
        floor = end + 1
    return events


def default_merge_gap(spec_beta: int, spec_delta: int) -> int:
    """Warping band converted to whole windows: ceil(beta / delta)."""
    return -(-spec_beta // spec_delta)
