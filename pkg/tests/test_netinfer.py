"""Follower networks, density signal, thresholds, and event segmentation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordlead.netinfer import (
    CoordinationEvent,
    backtrack_pre_start,
    default_merge_gap,
    density,
    density_series,
    detect_events,
    infer_networks,
    resolve_threshold,
)
from coordlead.timeseries import FollowScores, WindowSpec
from oracles import detect_events_runscan, percentile_nearest_rank

SPEC = WindowSpec(omega=10, delta=5, beta=3)


def make_scores(score_rows, n=3):
    """FollowScores with explicit per-window rows over the n=3 pair grid."""
    pairs = tuple((a, b) for a in range(n) for b in range(a + 1, n))
    scores = np.asarray(score_rows, dtype=np.float64)
    assert scores.shape[1] == len(pairs)
    ids = tuple(f"e{i}" for i in range(n))
    return FollowScores(ids, pairs, scores, SPEC)


# ----------------------------------------------------------------- events


class TestCoordinationEvent:
    def test_valid(self):
        ev = CoordinationEvent(1, 3, 7)
        assert (ev.pre_start, ev.coord_start, ev.coord_end) == (1, 3, 7)

    def test_degenerate_allowed(self):
        CoordinationEvent(2, 2, 2)

    @pytest.mark.parametrize("triple", [(-1, 0, 0), (3, 2, 5), (0, 4, 3)])
    def test_ordering_enforced(self, triple):
        with pytest.raises(ValueError, match="0 <= i <= j <= l"):
            CoordinationEvent(*triple)

    def test_sorts_by_position(self):
        evs = [CoordinationEvent(5, 6, 7), CoordinationEvent(0, 1, 2)]
        assert sorted(evs)[0].coord_start == 1


# ----------------------------------------------------------- infer graphs


class TestInferNetworks:
    def test_hand_case_edge_directions(self):
        # Pairs on 3 entities: (0,1), (0,2), (1,2).
        fs = make_scores([[0.5, -0.3, 0.0]])
        nets = infer_networks(fs)
        w = nets.weights[0]
        # Positive score: the lower-index entity follows -> edge 0 -> 1.
        assert w[0, 1] == 0.5 and w[1, 0] == 0.0
        # Negative score: the higher-index entity follows -> edge 2 -> 0.
        assert w[2, 0] == 0.3 and w[0, 2] == 0.0
        # Zero score: no edge either way.
        assert w[1, 2] == 0.0 and w[2, 1] == 0.0
        assert np.all(np.diag(w) == 0.0)

    def test_threshold_is_strict(self):
        fs = make_scores([[0.2, -0.2, 0.2000001]])
        nets = infer_networks(fs, epsilon=0.2)
        w = nets.weights[0]
        assert w[0, 1] == 0.0 and w[1, 0] == 0.0
        assert w[0, 2] == 0.0 and w[2, 0] == 0.0
        assert w[1, 2] == pytest.approx(0.2000001)

    def test_negative_epsilon_rejected(self):
        fs = make_scores([[0.0, 0.0, 0.0]])
        with pytest.raises(ValueError, match="epsilon"):
            infer_networks(fs, epsilon=-0.1)

    def test_one_direction_per_pair(self):
        rng = np.random.default_rng(0)
        fs = make_scores(rng.uniform(-1, 1, size=(6, 3)))
        nets = infer_networks(fs, epsilon=0.1)
        both = (nets.weights > 0) & (nets.weights.transpose(0, 2, 1) > 0)
        assert not both.any()

    def test_weights_are_absolute_scores(self):
        rng = np.random.default_rng(1)
        raw = rng.uniform(-1, 1, size=(4, 3))
        nets = infer_networks(make_scores(raw), epsilon=0.0)
        for k in range(4):
            for p, (a, b) in enumerate([(0, 1), (0, 2), (1, 2)]):
                s = raw[k, p]
                if s > 0:
                    assert nets.weights[k, a, b] == s
                elif s < 0:
                    assert nets.weights[k, b, a] == -s

    def test_metadata(self):
        fs = make_scores([[0.5, -0.3, 0.0]])
        nets = infer_networks(fs, epsilon=0.05)
        assert nets.entity_ids == ("e0", "e1", "e2")
        assert nets.epsilon == 0.05
        assert nets.n_windows == 1 and nets.n_nodes == 3


# ---------------------------------------------------------------- density


class TestDensity:
    def test_empty_graph(self):
        assert density(np.zeros((4, 4))) == 0.0

    def test_complete_tournament(self):
        # One directed edge per pair saturates the density at 1.
        w = np.triu(np.ones((5, 5)), k=1)
        assert density(w) == 1.0

    def test_hand_count(self):
        w = np.zeros((4, 4))
        w[1, 0] = 0.4
        w[2, 3] = 0.1
        w[3, 0] = 0.9
        assert density(w) == pytest.approx(2 * 3 / (4 * 3))

    def test_needs_two_nodes(self):
        with pytest.raises(ValueError, match="2 nodes"):
            density(np.zeros((1, 1)))

    def test_series_matches_per_window(self):
        rng = np.random.default_rng(2)
        fs = make_scores(rng.uniform(-1, 1, size=(8, 3)))
        nets = infer_networks(fs, epsilon=0.3)
        series = density_series(nets)
        assert series.shape == (8,)
        for k in range(8):
            assert series[k] == density(nets.weights[k])

    def test_density_bounds_fuzz(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(2, 7))
            pairs = tuple((a, b) for a in range(n) for b in range(a + 1, n))
            raw = rng.uniform(-1, 1, size=(3, len(pairs)))
            fs = FollowScores(
                tuple(f"e{i}" for i in range(n)), pairs, raw, SPEC
            )
            eps = float(rng.uniform(0, 0.8))
            series = density_series(infer_networks(fs, epsilon=eps))
            assert np.all(series >= 0.0) and np.all(series <= 1.0)

    def test_raising_epsilon_never_raises_density(self):
        rng = np.random.default_rng(4)
        fs = make_scores(rng.uniform(-1, 1, size=(10, 3)))
        prev = density_series(infer_networks(fs, epsilon=0.0))
        for eps in (0.2, 0.5, 0.9):
            cur = density_series(infer_networks(fs, epsilon=eps))
            assert np.all(cur <= prev)
            prev = cur


# ------------------------------------------------------------- thresholds


class TestResolveThreshold:
    def test_mean(self):
        assert resolve_threshold([0.0, 0.5, 1.0], "mean") == pytest.approx(0.5)

    def test_median(self):
        assert resolve_threshold([0.9, 0.1, 0.4], "median") == pytest.approx(0.4)

    def test_percentile_matches_nearest_rank_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            size = int(rng.integers(1, 40))
            vals = rng.uniform(0, 1, size=size)
            pct = float(rng.integers(1, 101))
            got = resolve_threshold(vals, f"p{pct:g}")
            assert got == percentile_nearest_rank(vals, pct)

    def test_percentile_extremes(self):
        vals = [0.3, 0.9, 0.1, 0.5]
        assert resolve_threshold(vals, "p100") == 0.9
        assert resolve_threshold(vals, "p1") == 0.1

    @pytest.mark.parametrize("policy", ["p0", "p101", "p-5", "px", "mid", "p"])
    def test_bad_policy(self, policy):
        with pytest.raises(ValueError):
            resolve_threshold([0.1, 0.2], policy)

    def test_empty_series(self):
        with pytest.raises(ValueError, match="empty"):
            resolve_threshold([], "mean")


# ------------------------------------------------------------ backtracking


class TestBacktrackPreStart:
    def test_walks_down_the_ramp(self):
        d = [0.1, 0.2, 0.3, 0.4, 0.9]
        assert backtrack_pre_start(d, 4) == 0

    def test_stops_at_non_increase(self):
        d = [0.5, 0.2, 0.3, 0.4, 0.9]
        assert backtrack_pre_start(d, 4) == 1

    def test_flat_step_stops(self):
        d = [0.2, 0.3, 0.3, 0.4, 0.9]
        assert backtrack_pre_start(d, 4) == 2

    def test_floor_clamps(self):
        d = [0.1, 0.2, 0.3, 0.4, 0.9]
        assert backtrack_pre_start(d, 4, floor=2) == 2

    def test_start_itself_returned_when_no_ramp(self):
        d = [0.9, 0.9, 0.9]
        assert backtrack_pre_start(d, 2) == 2

    def test_negative_start_rejected(self):
        with pytest.raises(ValueError):
            backtrack_pre_start([0.1], -1)


# --------------------------------------------------------- event detection


class TestDetectEvents:
    def test_simple_run(self):
        d = [0.2, 0.1, 0.6, 0.7, 0.6, 0.1, 0.0]
        evs = detect_events(d, lam=0.5)
        assert [(e.pre_start, e.coord_start, e.coord_end) for e in evs] == [
            (1, 2, 4)
        ]

    def test_threshold_is_strict(self):
        assert detect_events([0.5, 0.5, 0.5], lam=0.5) == []
        evs = detect_events([0.5, 0.5000001, 0.5], lam=0.5)
        assert len(evs) == 1 and evs[0].coord_start == 1

    def test_gap_merging_boundary(self):
        d = [0.9, 0.0, 0.0, 0.9]  # two runs separated by a 2-window gap
        two = detect_events(d, lam=0.5, merge_gap=1)
        assert len(two) == 2
        one = detect_events(d, lam=0.5, merge_gap=2)
        assert len(one) == 1
        assert (one[0].coord_start, one[0].coord_end) == (0, 3)

    def test_merge_cascades_left_to_right(self):
        d = [0.9, 0.0, 0.9, 0.0, 0.9]
        evs = detect_events(d, lam=0.5, merge_gap=1)
        assert len(evs) == 1
        assert (evs[0].coord_start, evs[0].coord_end) == (0, 4)

    def test_pre_ramp_extends_backward(self):
        d = [0.4, 0.1, 0.2, 0.3, 0.9, 0.9, 0.0]
        evs = detect_events(d, lam=0.5)
        assert evs[0].pre_start == 1

    def test_pre_cannot_cross_previous_event(self):
        # Second event's ramp reaches back over the first; it must clamp
        # one window past the first event's end.
        d = [0.9, 0.9, 0.1, 0.2, 0.3, 0.9, 0.0]
        evs = detect_events(d, lam=0.5)
        assert len(evs) == 2
        assert evs[0].coord_end == 1
        assert evs[1].pre_start == 2

    def test_negative_merge_gap_rejected(self):
        with pytest.raises(ValueError, match="merge_gap"):
            detect_events([0.1], lam=0.5, merge_gap=-1)

    def test_no_events_when_nothing_above(self):
        assert detect_events([0.1, 0.2, 0.3], lam=0.5) == []

    def test_exhaustive_small_patterns_match_reference(self):
        # Every above/below pattern up to length 10, three merge gaps.
        for length in range(1, 11):
            for bits in range(2**length):
                d = [0.9 if (bits >> k) & 1 else 0.1 for k in range(length)]
                for gap in (0, 1, 2):
                    got = detect_events(d, lam=0.5, merge_gap=gap)
                    want = detect_events_runscan(d, 0.5, gap)
                    assert [
                        (e.pre_start, e.coord_start, e.coord_end) for e in got
                    ] == want

    def test_fuzz_against_reference_with_ramps(self):
        rng = np.random.default_rng(6)
        grid = np.array([0.0, 0.1, 0.2, 0.3, 0.5, 0.6, 0.8, 1.0])
        for _ in range(500):
            length = int(rng.integers(1, 21))
            d = grid[rng.integers(0, grid.size, size=length)]
            lam = float(grid[rng.integers(0, grid.size)])
            gap = int(rng.integers(0, 4))
            got = detect_events(d, lam=lam, merge_gap=gap)
            want = detect_events_runscan(d, lam, gap)
            assert [
                (e.pre_start, e.coord_start, e.coord_end) for e in got
            ] == want

    @given(data=st.data())
    @settings(max_examples=300, deadline=None)
    def test_property_well_formed(self, data):
        length = data.draw(st.integers(1, 20))
        d = data.draw(
            st.lists(
                st.floats(0, 1, allow_nan=False),
                min_size=length,
                max_size=length,
            )
        )
        lam = data.draw(st.floats(0, 1, allow_nan=False))
        gap = data.draw(st.integers(0, 3))
        evs = detect_events(d, lam=lam, merge_gap=gap)
        prev_end = -1
        covered = set()
        for ev in evs:
            # Ordered, disjoint even through the pre interval.
            assert ev.pre_start > prev_end
            assert ev.pre_start <= ev.coord_start <= ev.coord_end
            # Run edges are strictly above the threshold.
            assert d[ev.coord_start] > lam
            assert d[ev.coord_end] > lam
            # The pre interval climbs monotonically into the start.
            for k in range(ev.pre_start + 1, ev.coord_start + 1):
                assert d[k] > d[k - 1]
            covered.update(range(ev.coord_start, ev.coord_end + 1))
            prev_end = ev.coord_end
        # Every above-threshold window is inside some coordination interval.
        for k, val in enumerate(d):
            if val > lam:
                assert k in covered


class TestDefaultMergeGap:
    @pytest.mark.parametrize(
        ("beta", "delta", "expected"),
        [(10, 10, 1), (10, 3, 4), (1, 10, 1), (25, 10, 3), (7, 2, 4)],
    )
    def test_ceiling_division(self, beta, delta, expected):
        assert default_merge_gap(beta, delta) == expected
