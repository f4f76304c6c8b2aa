"""Dataset model, sliding-window indexing, and banded multidimensional DTW.

The central primitive is a Sakoe-Chiba banded dynamic time warping over
equal-length multidimensional slices, plus the signed warping-path score
that turns one alignment into a directed "who follows whom" measurement.
Everything here is pure and deterministic; the batched engine produces
bit-identical results to the single-pair routine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "Dataset",
    "WindowSpec",
    "WarpingPath",
    "FollowScores",
    "window_count",
    "window_interval",
    "dtw_d",
    "signed_path_score",
    "pairwise_follow_scores",
    "velocity_matrix",
]

# Sentinel for unreachable DP cells.  Deliberately finite: the banded row
# update runs prefix sums over cell costs, and +inf would poison adjacent
# sums, while 1e30 simply stays "much larger than any real path cost".
_BIG = 1e30


@dataclass(frozen=True)
class WindowSpec:
    """Sliding-window geometry.

    Parameters
    ----------
    omega : int
        Window length in time steps (>= 2).
    delta : int
        Shift between consecutive windows, in [1, omega].
    beta : int
        Warping band half-width in time steps, in [1, omega].
    """

    omega: int
    delta: int
    beta: int

    def __post_init__(self) -> None:
        if self.omega < 2:
            raise ValueError(f"omega must be >= 2, got {self.omega}")
        if not 1 <= self.delta <= self.omega:
            raise ValueError(f"delta must be in [1, omega], got {self.delta}")
        if not 1 <= self.beta <= self.omega:
            raise ValueError(f"beta must be in [1, omega], got {self.beta}")


def window_count(t: int, spec: WindowSpec) -> int:
    """Number of valid windows for a series of length ``t``."""
    if t < spec.omega:
        return 0
    return (t - spec.omega) // spec.delta + 1


def window_interval(k: int, spec: WindowSpec, t: int) -> tuple[int, int]:
    """Half-open time interval ``[k*delta, k*delta + omega)`` of window ``k``.

    Raises ``IndexError`` when the window does not fit in a series of
    length ``t``.
    """
    if k < 0:
        raise IndexError(f"window index must be >= 0, got {k}")
    start = k * spec.delta
    stop = start + spec.omega
    if stop > t:
        raise IndexError(
            f"window {k} spans [{start}, {stop}) beyond series length {t}"
        )
    return start, stop


@dataclass(frozen=True)
class Dataset:
    """n entities x m dimensions x t time steps of finite observations."""

    entity_ids: tuple[str, ...]
    values: np.ndarray
    sample_interval: float = 1.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise ValueError(f"values must be (n, m, t), got shape {values.shape}")
        n, m, t = values.shape
        if n < 2 or m < 1 or t < 2:
            raise ValueError(f"need n >= 2, m >= 1, t >= 2, got ({n}, {m}, {t})")
        ids = tuple(str(e) for e in self.entity_ids)
        if len(ids) != n:
            raise ValueError(f"{len(ids)} entity ids for {n} series")
        if len(set(ids)) != n:
            raise ValueError("entity ids must be unique")
        if not np.isfinite(values).all():
            raise ValueError("values must be finite (no NaN/inf)")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        object.__setattr__(self, "entity_ids", ids)
        object.__setattr__(self, "values", values)

    @property
    def n_entities(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    @property
    def n_times(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class WarpingPath:
    """Monotone alignment path.

    Each pair ``(i, j)`` matches index ``i`` of the second series to index
    ``j`` of the first series of the ``dtw_d`` call that produced it.
    """

    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def signed_path_score(path: WarpingPath) -> float:
    """Mean of ``sign(j - i)`` over the path pairs, in [-1, 1].

    Positive means the first series of the producing alignment follows
    (lags) the second; negative the reverse; zero is symmetric.
    """
    pairs = path.pairs if isinstance(path, WarpingPath) else tuple(path)
    if not pairs:
        raise ValueError("path must be nonempty")
    total = 0
    for i, j in pairs:
        if j > i:
            total += 1
        elif j < i:
            total -= 1
    return total / len(pairs)


def _banded_dtw(first: np.ndarray, second: np.ndarray, beta: int):
    """Batched banded DTW fill.

    Parameters
    ----------
    first, second : (B, m, L) arrays
        Batches of equal-length slices.  DP rows index ``second``; the band
        offset ``o`` maps to a first-series index ``j = i + o - beta``.
    beta : int
        Band half-width (clipped to L - 1 internally).

    Returns
    -------
    cost : (B,) array
        Optimal cumulative Euclidean cell distances.
    ptr : (B, L, W) int8 array
        Backtracking moves per cell: 0 diagonal, 1 vertical (previous row,
        same first-index), 2 horizontal (same row, previous first-index).
    be : int
        Effective band half-width actually used (W = 2 * be + 1).
    """
    nbatch, ndim, length = first.shape
    be = min(beta, length - 1)
    width = 2 * be + 1

    # Cell costs in banded storage: C[b, i, o] = ||second[b,:,i] - first[b,:,j]||.
    pad = np.zeros((nbatch, ndim, be))
    padded = np.concatenate([pad, first, pad], axis=2)
    csq = np.zeros((nbatch, length, width))
    for d in range(ndim):
        lanes = sliding_window_view(padded[:, d, :], width, axis=1)
        csq += (lanes - second[:, d, :, None]) ** 2
    cost_band = np.sqrt(csq, out=csq)
    jj = np.arange(length)[:, None] + np.arange(width)[None, :] - be
    cost_band[:, (jj < 0) | (jj >= length)] = _BIG

    ptr = np.zeros((nbatch, length, width), dtype=np.int8)
    prev = np.full((nbatch, width), _BIG)
    for i in range(length):
        lo = max(0, be - i)
        hi = min(width - 1, length - 1 - i + be)
        sl = slice(lo, hi + 1)
        crow = cost_band[:, i, sl]
        if i == 0:
            nonh = np.full(crow.shape, _BIG)
            nonh[:, be - lo] = 0.0
            amin = np.zeros(crow.shape, dtype=np.int8)
        else:
            diag = prev[:, sl]
            vert = np.full(crow.shape, _BIG)
            stop = min(hi + 2, width)
            vert[:, : stop - lo - 1] = prev[:, lo + 1 : stop]
            nonh = np.minimum(diag, vert)
            amin = np.where(diag <= vert, 0, 1).astype(np.int8)
        # Min-plus prefix scan: with P the exclusive prefix sum of the row's
        # cell costs, D[o] = P[o] + C[o] + min_{u<=o}(nonh[u] - P[u]), and a
        # horizontal move is optimal exactly when that min is strict.
        pre = np.cumsum(crow, axis=1) - crow
        gap = nonh - pre
        best = np.minimum.accumulate(gap, axis=1)
        ptr[:, i, sl] = np.where(best < gap, 2, amin)
        prev.fill(_BIG)
        prev[:, sl] = best + pre + crow
    return prev[:, be].copy(), ptr, be


def _signed_stats(ptr: np.ndarray, be: int) -> tuple[np.ndarray, np.ndarray]:
    """Backtrack every lane; return (sum of sign(j - i), path length) per lane."""
    nbatch, length, _ = ptr.shape
    lanes = np.arange(nbatch)
    row = np.full(nbatch, length - 1)
    off = np.full(nbatch, be)
    signs = np.zeros(nbatch, dtype=np.int64)
    plen = np.ones(nbatch, dtype=np.int64)
    active = np.ones(nbatch, dtype=bool)
    for _ in range(2 * length):
        if not active.any():
            break
        move = ptr[lanes, row, off]
        drow = np.where(move == 2, 0, 1)
        doff = np.where(move == 0, 0, np.where(move == 1, 1, -1))
        row = np.where(active, row - drow, row)
        off = np.where(active, off + doff, off)
        signs += np.where(active, np.sign(off - be), 0)
        plen += active
        active &= ~((row == 0) & (off == be))
    if active.any():  # pragma: no cover - guards against a corrupt pointer table
        raise RuntimeError("warping-path backtrack failed to terminate")
    return signs, plen


def _extract_path(ptr: np.ndarray, be: int, length: int) -> list[tuple[int, int]]:
    """Reconstruct the (i, j) pair sequence for a single lane's pointer table."""
    i, o = length - 1, be
    rev = [(i, i + o - be)]
    while not (i == 0 and o == be):
        move = ptr[i, o]
        if move == 0:
            i -= 1
        elif move == 1:
            i -= 1
            o += 1
        else:
            o -= 1
        rev.append((i, i + o - be))
    rev.reverse()
    return rev


def dtw_d(
    first: Sequence[float] | np.ndarray,
    second: Sequence[float] | np.ndarray,
    beta: int,
) -> tuple[float, WarpingPath]:
    """Banded DTW between two equal-length slices.

    Parameters
    ----------
    first, second : (m, L) or (L,) array-like
        Equal-shape slices; 1-D input is treated as a single dimension.
    beta : int
        Band half-width: every matched pair satisfies ``|j - i| <= beta``.

    Returns
    -------
    cost : float
        Minimum cumulative Euclidean cell distance under step rules
        {(1,0), (0,1), (1,1)} within the band.
    path : WarpingPath
        One optimizer, recovered with the fixed tie-break order
        diagonal > vertical > horizontal (deterministic).
    """
    a = np.atleast_2d(np.asarray(first, dtype=np.float64))
    b = np.atleast_2d(np.asarray(second, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ValueError("slices must be 1-D or 2-D arrays")
    length = a.shape[1]
    if length < 2:
        raise ValueError(f"slices must have length >= 2, got {length}")
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    cost, ptr, be = _banded_dtw(a[None], b[None], int(beta))
    pairs = _extract_path(ptr[0], be, length)
    return float(cost[0]), WarpingPath(tuple(pairs))


@dataclass(frozen=True)
class FollowScores:
    """Signed follow scores on the (window x entity-pair) grid.

    ``scores[k, p]`` is the signed path score of aligning the pair
    ``pairs[p] = (a, b)`` (indices into ``entity_ids``, a < b) on window k,
    with entity a's slice as the first series: positive means a follows b.
    One alignment is computed per unordered pair, so the reverse-direction
    score is the exact negation.
    """

    entity_ids: tuple[str, ...]
    pairs: tuple[tuple[int, int], ...]
    scores: np.ndarray
    spec: WindowSpec

    @property
    def n_windows(self) -> int:
        return self.scores.shape[0]

    def score(self, a: int, b: int, k: int) -> float:
        """Signed score of entity ``a`` against ``b`` on window ``k``."""
        if a == b:
            return 0.0
        lo, hi = (a, b) if a < b else (b, a)
        val = float(self.scores[k, self._pair_index[(lo, hi)]])
        return val if a < b else -val

    @property
    def _pair_index(self) -> dict[tuple[int, int], int]:
        idx = getattr(self, "_pair_index_cache", None)
        if idx is None:
            idx = {pair: p for p, pair in enumerate(self.pairs)}
            object.__setattr__(self, "_pair_index_cache", idx)
        return idx

    def score_matrix(self, k: int) -> np.ndarray:
        """Antisymmetric (n, n) matrix of signed scores at window ``k``."""
        n = len(self.entity_ids)
        mat = np.zeros((n, n))
        ai = np.fromiter((p[0] for p in self.pairs), dtype=np.intp)
        bi = np.fromiter((p[1] for p in self.pairs), dtype=np.intp)
        mat[ai, bi] = self.scores[k]
        mat[bi, ai] = -self.scores[k]
        return mat


def pairwise_follow_scores(
    dataset: Dataset, spec: WindowSpec, *, chunk_windows: int = 32
) -> FollowScores:
    """Signed follow score for every unordered entity pair on every window.

    Computes one banded DTW per pair per window (batched over lanes of
    ``chunk_windows`` windows at a time) and stores the signed path score
    with the lower-index entity as the first series.
    """
    t = dataset.n_times
    k_total = window_count(t, spec)
    if k_total == 0:
        raise ValueError(
            f"series length {t} is shorter than one window (omega={spec.omega})"
        )
    n = dataset.n_entities
    ai, bi = np.triu_indices(n, k=1)
    n_pairs = ai.size

    starts = np.arange(k_total) * spec.delta
    slab = sliding_window_view(dataset.values, spec.omega, axis=2)[:, :, starts, :]

    scores = np.empty((k_total, n_pairs))
    for k0 in range(0, k_total, chunk_windows):
        k1 = min(k0 + chunk_windows, k_total)
        kc = k1 - k0
        sub = slab[:, :, k0:k1, :]
        firsts = sub[ai].transpose(0, 2, 1, 3).reshape(n_pairs * kc, dataset.n_dims, spec.omega)
        seconds = sub[bi].transpose(0, 2, 1, 3).reshape(n_pairs * kc, dataset.n_dims, spec.omega)
        _, ptr, be = _banded_dtw(firsts, seconds, spec.beta)
        signs, plen = _signed_stats(ptr, be)
        scores[k0:k1, :] = (signs / plen).reshape(n_pairs, kc).T
    pairs = tuple(zip(ai.tolist(), bi.tolist()))
    return FollowScores(dataset.entity_ids, pairs, scores, spec)


def velocity_matrix(dataset: Dataset) -> np.ndarray:
    """(n, t-1) matrix of per-step speeds.

    Entry (i, j) is the Euclidean norm over the m dimensions of the step
    from time j to j+1, divided by the sample interval.
    """
    diffs = np.diff(dataset.values, axis=2)
    return np.sqrt((diffs**2).sum(axis=1)) / dataset.sample_interval
