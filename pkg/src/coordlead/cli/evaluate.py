"""Benchmark suites over the synthetic generators, one CSV per table.

Four reproducible tables:

* ``precision_leaders.csv``    — top-1 precision per model x measure
* ``precision_hierarchy.csv``  — HM rank-1..4 precision per measure
* ``rotating_leader.csv``      — per-event vs time-aggregated PageRank
* ``classification_cv.csv``    — cross-validated per-class P/R/F

Every table is seeded from ``SuiteConfig.seed`` through fixed per-suite
offsets, so reruns with the same config are byte-identical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from coordlead.classify import LabeledSample, cross_validate
from coordlead.netinfer import (
    default_merge_gap,
    density_series,
    detect_events,
    infer_networks,
    resolve_threshold,
)
from coordlead.ranking import analyze_events, feature_vector, pagerank
from coordlead.simulate import SimConfig, simulate
from coordlead.timeseries import WindowSpec, pairwise_follow_scores

__all__ = [
    "SuiteConfig",
    "TABLES",
    "leader_precision_table",
    "hierarchy_precision_table",
    "rotating_leader_table",
    "classification_cv_table",
    "run_suites",
]

TABLES = ("leaders", "hierarchy", "rotating", "classification")

# (model, generator kwargs, table label); LT is pooled into one class for
# classification but stays split per setting in the precision table.
_SETTINGS = (
    ("DM", {}, "DM"),
    ("HM", {}, "HM"),
    ("LT", {"kappa": 3, "rho": 0.25}, "LT_3_25"),
    ("LT", {"kappa": 5, "rho": 0.25}, "LT_5_25"),
    ("LT", {"kappa": 10, "rho": 0.75}, "LT_10_75"),
    ("Random", {}, "Random"),
)

# Seed-block offsets keep each suite's RNG stream disjoint under one seed.
_LEADERS_BASE = 100
_HIERARCHY_BASE = 200
_ROTATING_BASE = 400
_CLASSIFY_BASES = {
    "DM": (1000,),
    "HM": (2000,),
    "LT": (3000, 3100, 3200),
    "Random": (4000,),
}


@dataclass(frozen=True)
class SuiteConfig:
    """Trial counts, generator scale, and window settings for all suites."""

    n: int = 20
    events: int = 10
    pre_len: int = 100
    coord_len: int = 100
    post_len: int = 100
    trials: int = 20
    classify_trials: int = 50
    rotating_events: int = 20
    omega: int = 40
    delta: int = 10
    beta: int = 10
    seed: int = 0
    n_trees: int = 100
    cv_folds: int = 10
    cv_seed: int = 42

    def __post_init__(self) -> None:
        if self.trials < 1 or self.classify_trials < 1:
            raise ValueError("trial counts must be >= 1")
        if self.classify_trials > 300:
            raise ValueError(
                "classify_trials is capped at 300 so per-setting seed blocks "
                f"stay disjoint, got {self.classify_trials}"
            )
        if self.rotating_events < 2:
            raise ValueError("rotating_events must be >= 2")

    def window_spec(self) -> WindowSpec:
        return WindowSpec(omega=self.omega, delta=self.delta, beta=self.beta)


def _analyzed_trial(cfg: SuiteConfig, model: str, seed: int, **kw):
    """Simulate one trial and run the inference pipeline on it."""
    sim = SimConfig(
        model=model,
        n=cfg.n,
        events=kw.pop("events", cfg.events),
        pre_len=cfg.pre_len,
        coord_len=cfg.coord_len,
        post_len=cfg.post_len,
        seed=seed,
        **kw,
    )
    trial = simulate(sim)
    spec = cfg.window_spec()
    scores = pairwise_follow_scores(trial.dataset, spec)
    networks = infer_networks(scores, epsilon=0.0)
    dens = density_series(networks)
    lam = resolve_threshold(dens, "mean")
    events = detect_events(
        dens, lam, merge_gap=default_merge_gap(spec.beta, spec.delta)
    )
    analysis = (
        analyze_events(trial.dataset, networks, events, spec) if events else None
    )
    return trial, networks, events, analysis


def leader_precision_table(cfg: SuiteConfig) -> list[dict]:
    """Top-1 precision per model setting and measure, pooled over events."""
    rows = []
    for model, kw, label in _SETTINGS:
        rankings: dict[str, list] = {}
        truths: dict[str, list[str]] = {}
        n_events = 0
        for k in range(cfg.trials):
            trial, _, events, analysis = _analyzed_trial(
                cfg, model, cfg.seed + _LEADERS_BASE + k, **dict(kw)
            )
            if analysis is None:
                continue
            n_events += len(events)
            for measure in analysis.measures:
                rankings.setdefault(measure, []).extend(
                    analysis.event_rankings[measure]
                )
                truths.setdefault(measure, []).extend(
                    [trial.truth[0].leader] * len(events)
                )
        for measure in rankings:
            hits = sum(
                1
                for rk, truth in zip(rankings[measure], truths[measure])
                if rk.order.ordering[0] == truth
            )
            rows.append(
                {
                    "model": label,
                    "measure": measure,
                    "precision": hits / len(rankings[measure]),
                    "n_events": n_events,
                    "n_trials": cfg.trials,
                }
            )
    return rows


def hierarchy_precision_table(cfg: SuiteConfig) -> list[dict]:
    """Rank-1..4 precision on HM trials for every measure."""
    pairs: dict[str, list] = {}  # measure -> [(ranking, hierarchy), ...]
    for k in range(cfg.trials):
        trial, _, _, analysis = _analyzed_trial(
            cfg, "HM", cfg.seed + _HIERARCHY_BASE + k
        )
        if analysis is None:
            continue
        assert trial.hierarchy is not None
        for measure in analysis.measures:
            pairs.setdefault(measure, []).extend(
                (rk, trial.hierarchy) for rk in analysis.event_rankings[measure]
            )
    rows = []
    for measure, ranked in pairs.items():
        for position in range(1, 5):
            hits = sum(
                1
                for rk, hier in ranked
                if rk.order.ordering[position - 1] == hier[position - 1]
            )
            rows.append(
                {
                    "measure": measure,
                    "rank": position,
                    "precision": hits / len(ranked),
                    "n_events": len(ranked),
                }
            )
    return rows


def rotating_leader_table(cfg: SuiteConfig) -> list[dict]:
    """Per-event PageRank vs the time-aggregated network on a rotating leader.

    A leader that changes every event is visible event-by-event (top-1 and a
    wide PageRank spread) but washes out of the static union network, whose
    spread collapses toward uniform.
    """
    trial, networks, events, analysis = _analyzed_trial(
        cfg,
        "RotatingDM",
        cfg.seed + _ROTATING_BASE,
        events=cfg.rotating_events,
    )
    if analysis is None:
        raise RuntimeError("rotating-leader trial produced no events")
    spec = cfg.window_spec()
    event_len = trial.config.event_len
    rows = []
    for index, (event, ranking) in enumerate(
        zip(events, analysis.event_rankings["pagerank"])
    ):
        crossing_step = event.coord_start * spec.delta
        block = min(crossing_step // event_len, len(trial.truth) - 1)
        scheduled = trial.truth[block].leader
        union = sum(
            networks.weights[w]
            for w in range(event.pre_start, event.coord_start + 1)
        )
        weights = pagerank(union).weights
        rows.append(
            {
                "scope": f"event_{index:02d}",
                "scheduled_leader": scheduled,
                "top_entity": ranking.order.ordering[0],
                "match": int(ranking.order.ordering[0] == scheduled),
                "pagerank_spread": float(weights.max() - weights.min()),
            }
        )
    static = pagerank(networks.weights.sum(axis=0)).weights
    rows.append(
        {
            "scope": "static",
            "scheduled_leader": "",
            "top_entity": trial.dataset.entity_ids[int(static.argmax())],
            "match": "",
            "pagerank_spread": float(static.max() - static.min()),
        }
    )
    return rows


def _classify_samples(cfg: SuiteConfig) -> list[LabeledSample]:
    samples = []
    for label, bases in _CLASSIFY_BASES.items():
        share = cfg.classify_trials
        model_kwargs: list[dict] = [{}]
        if label == "LT":
            model_kwargs = [
                {"kappa": 3, "rho": 0.25},
                {"kappa": 5, "rho": 0.25},
                {"kappa": 10, "rho": 0.75},
            ]
        quota = [share // len(bases)] * len(bases)
        for i in range(share % len(bases)):
            quota[i] += 1
        for base, kw, count in zip(bases, model_kwargs, quota):
            for k in range(count):
                seed = cfg.seed + base + k
                _, _, _, analysis = _analyzed_trial(
                    cfg, label, seed, **dict(kw)
                )
                if analysis is None:
                    continue
                samples.append(
                    LabeledSample(feature_vector(analysis), label, key=str(seed))
                )
    return samples


def classification_cv_table(cfg: SuiteConfig) -> list[dict]:
    """Cross-validated per-class metrics over freshly generated suites."""
    samples = _classify_samples(cfg)
    report = cross_validate(
        samples, folds=cfg.cv_folds, seed=cfg.cv_seed, n_trees=cfg.n_trees
    )
    counts: dict[str, int] = {}
    for sample in samples:
        counts[sample.label] = counts.get(sample.label, 0) + 1
    return [
        {
            "label": label,
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f_score": metrics.f_score,
            "n_samples": counts[label],
        }
        for label, metrics in report.items()
    ]


_TABLE_FILES = {
    "leaders": ("precision_leaders.csv", leader_precision_table),
    "hierarchy": ("precision_hierarchy.csv", hierarchy_precision_table),
    "rotating": ("rotating_leader.csv", rotating_leader_table),
    "classification": ("classification_cv.csv", classification_cv_table),
}


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(path: str, rows: list[dict]) -> None:
    header = list(rows[0].keys())
    lines = [",".join(header)]
    lines.extend(",".join(_cell(row[col]) for col in header) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_suites(
    cfg: SuiteConfig,
    output_dir: str = ".",
    tables: tuple[str, ...] = TABLES,
) -> dict[str, str]:
    """Compute the requested tables and write one CSV each.

    Returns {table name: written path}.
    """
    unknown = sorted(set(tables) - set(TABLES))
    if unknown:
        raise ValueError(f"unknown tables: {', '.join(unknown)} (choose from {TABLES})")
    os.makedirs(output_dir, exist_ok=True)
    written = {}
    for name in TABLES:
        if name not in tables:
            continue
        filename, builder = _TABLE_FILES[name]
        rows = builder(cfg)
        path = os.path.join(output_dir, filename)
        _write_table(path, rows)
        written[name] = path
    return written
