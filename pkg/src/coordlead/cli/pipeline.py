"""Pipeline configuration and orchestration: dataset in, artifact files out.

``run_pipeline`` executes score grid -> networks -> density -> events ->
rankings -> support -> features and writes one machine-readable file per
stage into the output directory:

* ``density.csv``   — per-window network density and its time interval
* ``events.json``   — detected coordination events (or an explicit notice)
* ``rankings.csv``  — per-event, per-measure entity rankings
* ``support.csv``   — per-measure leadership support
* ``features.json`` — the five-feature classification vector

All outputs are deterministic: same config + same input = byte-identical
files.  JSON floats use Python repr; CSV floats likewise.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace

from coordlead.netinfer import (
    default_merge_gap,
    density_series,
    detect_events,
    infer_networks,
    resolve_threshold,
)
from coordlead.ranking import (
    MEASURES,
    RankingAnalysis,
    analyze_events,
    feature_vector,
)
from coordlead.timeseries import Dataset, WindowSpec, pairwise_follow_scores
from coordlead.cli.ingest import IngestError, read_dataset_csv

__all__ = [
    "ARTIFACTS",
    "EXIT_OK",
    "EXIT_INGEST",
    "EXIT_CONFIG",
    "EXIT_NO_COORDINATION",
    "EXIT_INTERNAL",
    "PipelineConfig",
    "PipelineError",
    "load_config",
    "run_pipeline",
]

EXIT_OK = 0
EXIT_INGEST = 2
EXIT_CONFIG = 3
EXIT_NO_COORDINATION = 4
EXIT_INTERNAL = 5

_EVENTS_FORMAT = 1
_FEATURES_FORMAT = 1


class PipelineError(RuntimeError):
    """Pipeline failure carrying the CLI exit code."""

    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class PipelineConfig:
    """Flat, file-loadable pipeline settings (unknown keys are rejected)."""

    input: str = ""
    output_dir: str = "."
    omega: int = 40
    delta: int = 10
    beta: int = 10
    epsilon: float = 0.0
    lambda_policy: str = "mean"
    merge_gap: int | None = None
    damping: float = 0.85
    tol: float = 1e-9
    max_iter: int = 200
    measures: tuple[str, ...] = MEASURES
    seed: int = 0
    wide: bool = False
    interpolate_max_gap: int = 0

    def window_spec(self) -> WindowSpec:
        return WindowSpec(omega=self.omega, delta=self.delta, beta=self.beta)


def load_config(path: str | None = None, **overrides) -> PipelineConfig:
    """Read a flat JSON config; keys must exactly match PipelineConfig fields.

    ``path=None`` starts from defaults, so flag-only invocations share the
    same validation path.  ``overrides`` are applied after the file.
    """
    doc: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise PipelineError(EXIT_CONFIG, f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise PipelineError(EXIT_CONFIG, "config must be a JSON object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise PipelineError(EXIT_CONFIG, f"unknown config keys: {', '.join(unknown)}")
    if "measures" in doc:
        doc["measures"] = tuple(doc["measures"])
    try:
        cfg = PipelineConfig(**doc)
        if overrides:
            cfg = replace(cfg, **overrides)
    except TypeError as exc:
        raise PipelineError(EXIT_CONFIG, f"bad config: {exc}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: PipelineConfig) -> None:
    try:
        cfg.window_spec()
    except ValueError as exc:
        raise PipelineError(EXIT_CONFIG, str(exc)) from exc
    if not 0 < cfg.damping < 1:
        raise PipelineError(EXIT_CONFIG, f"damping must be in (0,1), got {cfg.damping}")
    if cfg.epsilon < 0:
        raise PipelineError(EXIT_CONFIG, f"epsilon must be >= 0, got {cfg.epsilon}")
    if cfg.merge_gap is not None and cfg.merge_gap < 0:
        raise PipelineError(EXIT_CONFIG, f"merge_gap must be >= 0, got {cfg.merge_gap}")
    unknown = sorted(set(cfg.measures) - set(MEASURES))
    if unknown:
        raise PipelineError(
            EXIT_CONFIG, f"unknown measures: {', '.join(unknown)} (choose from {MEASURES})"
        )
    missing = {"pagerank", "vch"} - set(cfg.measures)
    if missing:
        raise PipelineError(
            EXIT_CONFIG,
            f"measures {', '.join(sorted(missing))} cannot be disabled "
            "(support and features depend on them)",
        )


@dataclass(frozen=True)
class PipelineResult:
    dataset: Dataset
    densities: tuple[float, ...]
    threshold: float
    analysis: RankingAnalysis | None
    outputs: tuple[str, ...]


def _fmt(x: float) -> str:
    return repr(float(x))


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: str, doc: dict) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


ARTIFACTS = ("density", "events", "rankings", "support", "features")


def run_pipeline(
    cfg: PipelineConfig,
    dataset: Dataset | None = None,
    artifacts: tuple[str, ...] = ARTIFACTS,
) -> PipelineResult:
    """Execute the full pipeline and write the selected artifact files.

    Raises PipelineError with the appropriate exit code on failure; the
    no-coordination case always writes ``density.csv`` and ``events.json``
    (with a notice) before raising, whatever ``artifacts`` selects.
    """
    _validate(cfg)
    unknown = sorted(set(artifacts) - set(ARTIFACTS))
    if unknown:
        raise PipelineError(
            EXIT_CONFIG,
            f"unknown artifacts: {', '.join(unknown)} (choose from {ARTIFACTS})",
        )
    if dataset is None:
        if not cfg.input:
            raise PipelineError(EXIT_CONFIG, "config has no input path")
        try:
            dataset = read_dataset_csv(
                cfg.input, wide=cfg.wide, interpolate_max_gap=cfg.interpolate_max_gap
            )
        except IngestError as exc:
            raise PipelineError(EXIT_INGEST, f"ingest {cfg.input}: {exc}") from exc
        except OSError as exc:
            raise PipelineError(EXIT_INGEST, f"cannot read {cfg.input}: {exc}") from exc

    spec = cfg.window_spec()
    if dataset.n_times < spec.omega:
        raise PipelineError(
            EXIT_INGEST,
            f"series length {dataset.n_times} shorter than window omega={spec.omega}",
        )
    out = cfg.output_dir or "."
    os.makedirs(out, exist_ok=True)

    scores = pairwise_follow_scores(dataset, spec)
    networks = infer_networks(scores, epsilon=cfg.epsilon)
    dens = density_series(networks)
    lam = resolve_threshold(dens, cfg.lambda_policy)
    merge_gap = (
        cfg.merge_gap
        if cfg.merge_gap is not None
        else default_merge_gap(spec.beta, spec.delta)
    )
    events = detect_events(dens, lam, merge_gap=merge_gap)

    paths = []
    density_path = os.path.join(out, "density.csv")
    if "density" in artifacts or not events:
        lines = ["window,start_step,end_step,density"]
        for k, d in enumerate(dens):
            start = k * spec.delta
            lines.append(f"{k},{start},{start + spec.omega},{_fmt(d)}")
        _write(density_path, "\n".join(lines) + "\n")
        if "density" in artifacts:
            paths.append(density_path)

    events_path = os.path.join(out, "events.json")
    events_doc = {
        "format_version": _EVENTS_FORMAT,
        "lambda": lam,
        "lambda_policy": cfg.lambda_policy,
        "merge_gap": merge_gap,
        "events": [
            {
                "event_id": idx,
                "pre_start_window": ev.pre_start,
                "coord_start_window": ev.coord_start,
                "coord_end_window": ev.coord_end,
                "pre_start_step": ev.pre_start * spec.delta,
                "coord_start_step": ev.coord_start * spec.delta,
                "coord_end_step": ev.coord_end * spec.delta + spec.omega,
            }
            for idx, ev in enumerate(events)
        ],
    }
    if not events:
        events_doc["notice"] = (
            "no coordination events detected; rankings and features skipped"
        )
    if "events" in artifacts or not events:
        _write_json(events_path, events_doc)
        if "events" in artifacts:
            paths.append(events_path)

    if not events:
        raise PipelineError(
            EXIT_NO_COORDINATION,
            f"no coordination events above lambda={lam!r} "
            f"({cfg.lambda_policy}); see {events_path}",
        )

    analysis = analyze_events(
        dataset,
        networks,
        events,
        spec,
        damping=cfg.damping,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        measures=cfg.measures,
    )

    if "rankings" in artifacts:
        rankings_path = os.path.join(out, "rankings.csv")
        lines = ["event_id,measure,rank,entity_id,mean_rank"]
        for measure in analysis.measures:
            for idx, ranking in enumerate(analysis.event_rankings[measure]):
                for pos, eid in enumerate(ranking.order.ordering, start=1):
                    lines.append(
                        f"{idx},{measure},{pos},{eid},{_fmt(ranking.mean_ranks[eid])}"
                    )
        _write(rankings_path, "\n".join(lines) + "\n")
        paths.append(rankings_path)

    if "support" in artifacts:
        support_path = os.path.join(out, "support.csv")
        lines = ["measure,entity_id,support"]
        for measure in analysis.measures:
            sup = analysis.support[measure]
            for eid in analysis.entity_ids:
                lines.append(f"{measure},{eid},{_fmt(sup[eid])}")
        _write(support_path, "\n".join(lines) + "\n")
        paths.append(support_path)

    features_path = os.path.join(out, "features.json")
    fv = feature_vector(analysis)
    pch_available = "pch" in analysis.measures
    features_doc = {
        "format_version": _FEATURES_FORMAT,
        "corr_p": fv.corr_p,
        "corr_v": fv.corr_v,
        "corr_p_pr": fv.corr_p_pr,
        "corr_v_pr": fv.corr_v_pr,
        "max_support_pr": fv.max_support_pr,
        "pch_available": pch_available,
        "n_events": len(events),
    }
    if not pch_available:
        features_doc["notice"] = (
            "position convex hull unavailable"
            + (" (requires planar m=2 data)" if dataset.n_dims != 2 else " (disabled)")
            + "; corr_p and corr_p_pr reported as 0.0"
        )
    if "features" in artifacts:
        _write_json(features_path, features_doc)
        paths.append(features_path)

    return PipelineResult(dataset, tuple(dens.tolist()), lam, analysis, tuple(paths))
