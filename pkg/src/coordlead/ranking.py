"""Per-event leadership rankings, aggregation, support, and rank-correlation features.

Three measures rank entities inside an event's pre-coordination interval:
PageRank on the follower networks (per window), and two convex-hull
indicators (per time step) — whether an entity's speed leaves the
population's previous speed range (VCH), and whether its position exits
the group's previous spatial hull toward the group heading (PCH).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from coordlead.netinfer import CoordinationEvent, FollowingNetworks
from coordlead.timeseries import Dataset, WindowSpec, velocity_matrix

__all__ = [
    "PageRankResult",
    "RankOrder",
    "AggregatedRanking",
    "FeatureVector",
    "MEASURES",
    "pagerank",
    "vch_indicator",
    "vch_column",
    "convex_hull_2d",
    "pch_indicator",
    "pch_column",
    "rank_order",
    "aggregate_mean_rank",
    "event_window_range",
    "event_step_range",
    "event_ranking",
    "analyze_events",
    "RankingAnalysis",
    "support",
    "position_precision",
    "kendall_tau",
    "corr_global_local",
    "corr_cross",
    "feature_vector",
]

MEASURES = ("pagerank", "vch", "pch")


@dataclass(frozen=True)
class PageRankResult:
    weights: np.ndarray
    iterations: int
    converged: bool


def pagerank(
    weights: np.ndarray,
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> PageRankResult:
    """Power iteration on one directed weighted graph.

    Out-weights are normalized per node so mass flows along edges
    (follower -> leader); dangling nodes redistribute uniformly; uniform
    teleportation with factor (1 - damping).  Returns the weight vector
    (sums to 1), the iteration count, and a convergence flag (L1 change
    below ``tol`` within ``max_iter``).
    """
    if not 0 < damping < 1:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    out = w.sum(axis=1)
    spread = w.copy()
    nonzero = out > 0
    spread[nonzero] /= out[nonzero, None]
    dangling = ~nonzero
    x = np.full(n, 1.0 / n)
    for iteration in range(1, max_iter + 1):
        nxt = damping * (spread.T @ x + x[dangling].sum() / n) + (1.0 - damping) / n
        change = np.abs(nxt - x).sum()
        x = nxt
        if change < tol:
            return PageRankResult(x, iteration, True)
    return PageRankResult(x, max_iter, False)


_VCH_RTOL = 1e-9


def vch_column(speeds: np.ndarray, step: int) -> np.ndarray:
    """Velocity convex-hull indicators for every entity at one time step.

    +1 when an entity's speed strictly exceeds the previous step's
    population maximum, -1 when strictly below the minimum, else 0.
    Exceedance is judged with a relative tolerance: speeds that agree to
    within ~9 significant digits count as equal, so unit-vector rounding
    noise cannot fabricate a record.  The purely multiplicative margin
    keeps the indicator exactly scale-invariant.
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    prev = speeds[:, step - 1]
    cur = speeds[:, step]
    hi = prev.max()
    lo = prev.min()
    return np.where(
        cur > hi * (1.0 + _VCH_RTOL),
        1,
        np.where(cur < lo * (1.0 - _VCH_RTOL), -1, 0),
    )


def vch_indicator(speeds: np.ndarray, entity: int, step: int) -> int:
    """Velocity convex-hull indicator for one entity at one time step."""
    return int(vch_column(speeds, step)[entity])


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


# Relative slack for the strict-exit test below.  A cross product of three
# near-collinear points computes to rounding dust instead of zero, and a
# point riding exactly along a hull edge must not read as an escape.
_HULL_RTOL = 1e-9


def _cross_sign(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> int:
    """Sign of the cross product with a scale-relative dead zone."""
    c = _cross(o, a, b)
    span = max(
        abs(a[0] - o[0]), abs(a[1] - o[1]), abs(b[0] - o[0]), abs(b[1] - o[1])
    )
    margin = _HULL_RTOL * span * span
    if c > margin:
        return 1
    if c < -margin:
        return -1
    return 0


def convex_hull_2d(points: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """Convex hull of planar points as a counterclockwise vertex array.

    Andrew's monotone chain on the deduplicated point set.  Degenerate
    inputs collapse: collinear points give the extreme segment, a single
    distinct point gives itself.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    if len(pts) == 1:
        return pts

    def chain(seq: np.ndarray) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return np.array(hull)


def _outside_hull(hull: np.ndarray, point: np.ndarray) -> bool:
    """Strictly outside test against a CCW hull; boundary counts as inside."""
    h = len(hull)
    if h == 1:
        return bool(np.any(hull[0] != point))
    if h == 2:
        a, b = hull
        if _cross_sign(a, b, point) != 0:
            return True
        slack = _HULL_RTOL * max(abs(b[0] - a[0]), abs(b[1] - a[1]))
        inside_box = (
            min(a[0], b[0]) - slack <= point[0] <= max(a[0], b[0]) + slack
            and min(a[1], b[1]) - slack <= point[1] <= max(a[1], b[1]) + slack
        )
        return not inside_box
    for idx in range(h):
        if _cross_sign(hull[idx], hull[(idx + 1) % h], point) < 0:
            return True
    return False


def pch_column(dataset: Dataset, step: int) -> np.ndarray:
    """Position convex-hull indicators for every entity at one time step.

    An entity strictly outside the hull of all previous-step positions gets
    +1 when its heading is within 90 degrees of the population heading
    (the sum of entity headings), -1 when beyond; entities inside or on the
    hull, or with a zero-length heading, get 0.
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if dataset.n_dims != 2:
        raise ValueError("position hull indicators are defined for m = 2 only")
    prev = dataset.values[:, :, step - 1]
    cur = dataset.values[:, :, step]
    hull = convex_hull_2d(prev)
    headings = cur - prev
    pop = headings.sum(axis=0)
    pop_zero = not pop.any()
    out = np.zeros(dataset.n_entities, dtype=np.int64)
    for i in range(dataset.n_entities):
        if not _outside_hull(hull, cur[i]):
            continue
        head = headings[i]
        if pop_zero or not head.any():
            continue
        out[i] = 1 if float(head @ pop) >= 0.0 else -1
    return out


def pch_indicator(dataset: Dataset, hull: np.ndarray, entity: int, step: int) -> int:
    """Position convex-hull indicator for one entity against a given hull."""
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if dataset.n_dims != 2:
        raise ValueError("position hull indicators are defined for m = 2 only")
    cur = dataset.values[entity, :, step]
    if not _outside_hull(np.asarray(hull, dtype=np.float64), cur):
        return 0
    head = cur - dataset.values[entity, :, step - 1]
    pop = (dataset.values[:, :, step] - dataset.values[:, :, step - 1]).sum(axis=0)
    if not head.any() or not pop.any():
        return 0
    return 1 if float(head @ pop) >= 0.0 else -1


@dataclass(frozen=True)
class RankOrder:
    """Permutation of entity ids, position 1 = highest-ranked."""

    ordering: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.ordering)) != len(self.ordering):
            raise ValueError("ordering must be a permutation (no repeats)")

    def positions(self) -> dict[str, int]:
        """Map entity id -> 1-based rank position."""
        return {eid: pos for pos, eid in enumerate(self.ordering, start=1)}


@dataclass(frozen=True)
class AggregatedRanking:
    """A RankOrder plus the mean positions that produced it."""

    order: RankOrder
    mean_ranks: dict[str, float]


def rank_order(scores: Sequence[float] | np.ndarray, entity_ids: Sequence[str]) -> RankOrder:
    """Stable descending sort; ties broken by entity id ascending."""
    vals = np.asarray(scores, dtype=np.float64)
    if vals.shape[0] != len(entity_ids):
        raise ValueError("one score per entity required")
    order = sorted(range(len(entity_ids)), key=lambda i: (-vals[i], entity_ids[i]))
    return RankOrder(tuple(entity_ids[i] for i in order))


def aggregate_mean_rank(orders: Sequence[RankOrder]) -> AggregatedRanking:
    """Mean position per entity across orders, re-ranked ascending (ties by id)."""
    if not orders:
        raise ValueError("need at least one rank order")
    ids = sorted(orders[0].ordering)
    totals = {eid: 0 for eid in ids}
    for order in orders:
        if sorted(order.ordering) != ids:
            raise ValueError("all rank orders must cover the same entity set")
        for pos, eid in enumerate(order.ordering, start=1):
            totals[eid] += pos
    means = {eid: totals[eid] / len(orders) for eid in ids}
    final = sorted(ids, key=lambda e: (means[e], e))
    return AggregatedRanking(RankOrder(tuple(final)), means)


def fractional_positions(scores: Sequence[float] | np.ndarray) -> np.ndarray:
    """Descending 1-based positions with tied scores sharing their average.

    This is the per-snapshot vote used when aggregating rankings over an
    interval: entities the snapshot cannot distinguish (equal centrality,
    equal indicator value) all receive the same fractional position, so
    quiet windows and quiet steps do not systematically favor any entity.
    """
    v = np.asarray(scores, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("scores must be one-dimensional")
    order = np.argsort(-v, kind="stable")
    out = np.empty(v.shape[0])
    i = 0
    while i < v.shape[0]:
        j = i
        while j < v.shape[0] and v[order[j]] == v[order[i]]:
            j += 1
        out[order[i:j]] = (i + 1 + j) / 2.0
        i = j
    return out


def _aggregate_votes(votes: np.ndarray, entity_ids: Sequence[str]) -> AggregatedRanking:
    """Mean the per-snapshot fractional positions and re-rank (ties by id)."""
    means = votes.mean(axis=0)
    final = sorted(range(len(entity_ids)), key=lambda i: (means[i], entity_ids[i]))
    mean_ranks = {eid: float(means[i]) for i, eid in enumerate(entity_ids)}
    return AggregatedRanking(RankOrder(tuple(entity_ids[i] for i in final)), mean_ranks)


def event_window_range(event: CoordinationEvent) -> range:
    """Formation windows [i, j], crossing window included.

    A sharp onset can put the whole rise inside window j, leaving [i, j)
    with nothing but quiet pre-onset windows; ranking through j keeps the
    votes anchored to windows that actually saw the departure.
    """
    return range(event.pre_start, event.coord_start + 1)


def event_step_range(event: CoordinationEvent, spec: WindowSpec) -> range:
    """Formation time steps [i*delta, j*delta + omega), clamped to start >= 1.

    Mirrors ``event_window_range``: the steps spanned by windows i through j
    inclusive, so step-level measures see the departure even when the onset
    fits entirely inside the crossing window.
    """
    start = max(1, event.pre_start * spec.delta)
    stop = event.coord_start * spec.delta + spec.omega
    if stop <= start:
        stop = start + 1
    return range(start, stop)


def event_ranking(
    measure: str,
    dataset: Dataset,
    networks: FollowingNetworks,
    event: CoordinationEvent,
    spec: WindowSpec,
    *,
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 200,
    speeds: np.ndarray | None = None,
) -> AggregatedRanking:
    """Aggregated per-event ranking for one measure over the pre-coordination
    interval (per window for pagerank, per time step for vch/pch).

    Each window or step votes with fractional positions (average rank for
    ties), and the votes are mean-aggregated into the event's ranking.
    """
    votes = _event_votes(
        measure, dataset, networks, event, spec,
        damping=damping, tol=tol, max_iter=max_iter, speeds=speeds,
    )
    return _aggregate_votes(votes, dataset.entity_ids)


def _event_votes(
    measure: str,
    dataset: Dataset,
    networks: FollowingNetworks,
    event: CoordinationEvent,
    spec: WindowSpec,
    *,
    damping: float,
    tol: float,
    max_iter: int,
    speeds: np.ndarray | None,
) -> np.ndarray:
    """(snapshots, n) fractional positions for one event and measure."""
    if measure == "pagerank":
        return np.array(
            [
                fractional_positions(
                    pagerank(networks.weights[k], damping, tol, max_iter).weights
                )
                for k in event_window_range(event)
            ]
        )
    if measure == "vch":
        if speeds is None:
            speeds = velocity_matrix(dataset)
        steps = event_step_range(event, spec)
        return np.array(
            [
                fractional_positions(vch_column(speeds, step))
                for step in steps
                if step < speeds.shape[1]
            ]
        )
    if measure == "pch":
        steps = event_step_range(event, spec)
        return np.array(
            [
                fractional_positions(pch_column(dataset, step))
                for step in steps
                if step < dataset.n_times
            ]
        )
    raise ValueError(f"unknown measure {measure!r}")


@dataclass(frozen=True)
class RankingAnalysis:
    """Per-event and global rankings for every available measure."""

    entity_ids: tuple[str, ...]
    events: tuple[CoordinationEvent, ...]
    measures: tuple[str, ...]
    event_rankings: dict[str, tuple[AggregatedRanking, ...]]
    global_rankings: dict[str, AggregatedRanking]
    support: dict[str, dict[str, float]]


def analyze_events(
    dataset: Dataset,
    networks: FollowingNetworks,
    events: Sequence[CoordinationEvent],
    spec: WindowSpec,
    *,
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 200,
    measures: Sequence[str] = MEASURES,
) -> RankingAnalysis:
    """Rank every event under every requested measure.

    The global ranking per measure aggregates the pooled per-step (or
    per-window) orders of all events, mirroring the per-event aggregation.
    PCH is skipped automatically when the dataset is not planar.
    """
    if not events:
        raise ValueError("no coordination events to analyze")
    chosen = tuple(m for m in measures if m != "pch" or dataset.n_dims == 2)
    speeds = velocity_matrix(dataset) if "vch" in chosen else None
    per_event: dict[str, tuple[AggregatedRanking, ...]] = {}
    global_rankings: dict[str, AggregatedRanking] = {}
    sup: dict[str, dict[str, float]] = {}
    for measure in chosen:
        rankings = []
        pooled: list[np.ndarray] = []
        for event in events:
            votes = _event_votes(
                measure, dataset, networks, event, spec,
                damping=damping, tol=tol, max_iter=max_iter, speeds=speeds,
            )
            pooled.append(votes)
            rankings.append(_aggregate_votes(votes, dataset.entity_ids))
        per_event[measure] = tuple(rankings)
        global_rankings[measure] = _aggregate_votes(
            np.concatenate(pooled, axis=0), dataset.entity_ids
        )
        sup[measure] = support(rankings, dataset.entity_ids)
    return RankingAnalysis(
        dataset.entity_ids, tuple(events), chosen, per_event, global_rankings, sup
    )


def support(
    rankings: Sequence[AggregatedRanking], entity_ids: Sequence[str]
) -> dict[str, float]:
    """Fraction of events in which each entity is ranked first."""
    if not rankings:
        raise ValueError("support needs at least one event ranking")
    counts = {eid: 0 for eid in entity_ids}
    for ranking in rankings:
        counts[ranking.order.ordering[0]] += 1
    return {eid: counts[eid] / len(rankings) for eid in entity_ids}


def position_precision(
    rankings: Sequence[AggregatedRanking], truth_id: str, position: int
) -> float:
    """Fraction of events whose rank-``position`` entity is ``truth_id``."""
    if not rankings:
        raise ValueError("position_precision needs at least one event ranking")
    hits = sum(
        1 for ranking in rankings if ranking.order.ordering[position - 1] == truth_id
    )
    return hits / len(rankings)


def tau_b(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Tie-corrected Kendall rank correlation (tau-b) of two value vectors.

    Pairs tied in either vector are excluded from the numerator and the
    corresponding normalizer term; an all-tied vector yields 0.0.
    """
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ValueError("tau_b needs two equal-length vectors")
    n = xv.shape[0]
    concordant = discordant = ties_x = ties_y = 0
    for p in range(n):
        for q in range(p + 1, n):
            dx = xv[p] - xv[q]
            dy = yv[p] - yv[q]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0:
        return 0.0
    return (concordant - discordant) / denom


def kendall_tau(a: RankOrder, b: RankOrder) -> float:
    """Kendall rank correlation (tau-b) of two rank orders."""
    ids = sorted(a.ordering)
    if sorted(b.ordering) != ids:
        raise ValueError("rank orders must cover the same entity set")
    pa = a.positions()
    pb = b.positions()
    return tau_b([pa[e] for e in ids], [pb[e] for e in ids])


def _mean_rank_vector(ranking: AggregatedRanking, ids: Sequence[str]) -> list[float]:
    return [ranking.mean_ranks[e] for e in ids]


def corr_global_local(
    global_ranking: AggregatedRanking, event_rankings: Sequence[AggregatedRanking]
) -> float:
    """Mean Kendall correlation of each event's ranking against the global one.

    Computed on the mean-rank vectors, so entities an interval leaves tied
    stay tied (tau-b's tie correction handles them).
    """
    if not event_rankings:
        raise ValueError("need at least one event ranking")
    ids = sorted(global_ranking.mean_ranks)
    gv = _mean_rank_vector(global_ranking, ids)
    taus = [tau_b(gv, _mean_rank_vector(r, ids)) for r in event_rankings]
    return sum(taus) / len(taus)


def corr_cross(
    rankings_a: Sequence[AggregatedRanking], rankings_b: Sequence[AggregatedRanking]
) -> float:
    """Mean per-event Kendall correlation between two measures' rankings."""
    if len(rankings_a) != len(rankings_b) or not rankings_a:
        raise ValueError("need matching nonempty ranking sequences")
    taus = []
    for ra, rb in zip(rankings_a, rankings_b):
        ids = sorted(ra.mean_ranks)
        taus.append(tau_b(_mean_rank_vector(ra, ids), _mean_rank_vector(rb, ids)))
    return sum(taus) / len(taus)


@dataclass(frozen=True)
class FeatureVector:
    """Five classification features from the rank correlations and support."""

    corr_p: float
    corr_v: float
    corr_p_pr: float
    corr_v_pr: float
    max_support_pr: float

    def __post_init__(self) -> None:
        for name in ("corr_p", "corr_v", "corr_p_pr", "corr_v_pr"):
            val = getattr(self, name)
            if not (math.isfinite(val) and -1.0 <= val <= 1.0 + 1e-12):
                raise ValueError(f"{name} must be finite in [-1, 1], got {val}")
        if not (math.isfinite(self.max_support_pr) and 0.0 <= self.max_support_pr <= 1.0):
            raise ValueError(f"max_support_pr must be in [0, 1], got {self.max_support_pr}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.corr_p, self.corr_v, self.corr_p_pr, self.corr_v_pr, self.max_support_pr)


def feature_vector(analysis: RankingAnalysis) -> FeatureVector:
    """Assemble the five-feature vector from a ranking analysis.

    When the position-hull measure is unavailable (non-planar data), its two
    correlations are reported as 0.0.
    """
    if not analysis.events:
        raise ValueError("feature vector undefined without coordination events")
    has_pch = "pch" in analysis.measures
    corr_p = (
        corr_global_local(analysis.global_rankings["pch"], analysis.event_rankings["pch"])
        if has_pch
        else 0.0
    )
    corr_v = corr_global_local(
        analysis.global_rankings["vch"], analysis.event_rankings["vch"]
    )
    corr_p_pr = (
        corr_cross(analysis.event_rankings["pch"], analysis.event_rankings["pagerank"])
        if has_pch
        else 0.0
    )
    corr_v_pr = corr_cross(
        analysis.event_rankings["vch"], analysis.event_rankings["pagerank"]
    )
    max_sup = max(analysis.support["pagerank"].values())
    return FeatureVector(corr_p, corr_v, corr_p_pr, corr_v_pr, max_sup)
