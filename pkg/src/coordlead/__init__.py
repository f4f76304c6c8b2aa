"""Coordination detection and leadership inference for multidimensional time series.

The package turns raw per-entity time series into:

* a sliding-window grid of signed follow scores (banded dynamic time warping),
* a sequence of directed follower networks and their density signal,
* coordination events segmented from that signal,
* per-event leadership rankings (PageRank, velocity/position convex hull),
* a five-number feature vector and a leadership-model classifier.
"""

from coordlead.timeseries import (
    Dataset,
    FollowScores,
    WarpingPath,
    WindowSpec,
    dtw_d,
    pairwise_follow_scores,
    signed_path_score,
    velocity_matrix,
    window_count,
    window_interval,
)
from coordlead.netinfer import (
    CoordinationEvent,
    FollowingNetworks,
    backtrack_pre_start,
    default_merge_gap,
    density,
    density_series,
    detect_events,
    infer_networks,
    resolve_threshold,
)
from coordlead.ranking import (
    MEASURES,
    AggregatedRanking,
    FeatureVector,
    PageRankResult,
    RankOrder,
    RankingAnalysis,
    aggregate_mean_rank,
    analyze_events,
    convex_hull_2d,
    corr_cross,
    corr_global_local,
    event_ranking,
    feature_vector,
    kendall_tau,
    pagerank,
    position_precision,
    rank_order,
    support,
    tau_b,
)
from coordlead.classify import (
    LABELS,
    ClassMetrics,
    EnsembleModel,
    LabeledSample,
    cross_validate,
    load_model,
    model_from_json,
    model_to_json,
    predict,
    save_model,
    train,
)
from coordlead.simulate import EventTruth, SimConfig, Trial, run_trial_suite, simulate

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "WindowSpec",
    "WarpingPath",
    "FollowScores",
    "dtw_d",
    "signed_path_score",
    "pairwise_follow_scores",
    "velocity_matrix",
    "window_count",
    "window_interval",
    "FollowingNetworks",
    "CoordinationEvent",
    "infer_networks",
    "density",
    "density_series",
    "resolve_threshold",
    "detect_events",
    "backtrack_pre_start",
    "default_merge_gap",
    "MEASURES",
    "PageRankResult",
    "RankOrder",
    "AggregatedRanking",
    "RankingAnalysis",
    "FeatureVector",
    "pagerank",
    "rank_order",
    "aggregate_mean_rank",
    "analyze_events",
    "event_ranking",
    "support",
    "position_precision",
    "kendall_tau",
    "tau_b",
    "corr_global_local",
    "corr_cross",
    "feature_vector",
    "convex_hull_2d",
    "LABELS",
    "LabeledSample",
    "ClassMetrics",
    "EnsembleModel",
    "train",
    "predict",
    "cross_validate",
    "model_to_json",
    "model_from_json",
    "save_model",
    "load_model",
    "EventTruth",
    "SimConfig",
    "Trial",
    "simulate",
    "run_trial_suite",
    "__version__",
]
