"""Command-line entry point.

Subcommands:

* ``simulate``  — generate a synthetic trial: dataset CSV + truth sidecar
* ``infer``     — full pipeline on a dataset CSV (all artifact files)
* ``features``  — pipeline, emitting only ``features.json``
* ``evaluate``  — benchmark tables over generated suites
* ``classify``  — train / predict / cross-validate the model classifier

Exit codes: 0 ok, 2 ingestion error, 3 config error, 4 no coordination
found, 5 internal error.  ``COORDLEAD_OUTPUT_DIR`` overrides the output
directory when no ``--output-dir`` flag is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from coordlead.classify import (
    LABELS,
    LabeledSample,
    cross_validate,
    load_model,
    predict,
    save_model,
    train,
)
from coordlead.ranking import FeatureVector
from coordlead.simulate import SimConfig, simulate
from coordlead.cli.evaluate import TABLES, SuiteConfig, run_suites
from coordlead.cli.ingest import IngestError, write_dataset_csv, write_truth_json
from coordlead.cli.pipeline import (
    ARTIFACTS,
    EXIT_CONFIG,
    EXIT_INGEST,
    EXIT_INTERNAL,
    EXIT_OK,
    PipelineError,
    load_config,
    run_pipeline,
)

__all__ = ["main"]

_SAMPLES_FORMAT = 1
_FEATURE_FIELDS = ("corr_p", "corr_v", "corr_p_pr", "corr_v_pr", "max_support_pr")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 3)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise PipelineError(EXIT_CONFIG, message)


def _resolve_output_dir(flag_value: str | None, default: str = ".") -> str:
    if flag_value is not None:
        return flag_value
    return os.environ.get("COORDLEAD_OUTPUT_DIR") or default


def _add_window_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--omega", type=int, help="window length in steps")
    sub.add_argument("--delta", type=int, help="window shift in steps")
    sub.add_argument("--beta", type=int, help="warping band half-width")


def _add_scale_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, help="number of entities")
    sub.add_argument("--events", type=int, help="events per trial")
    sub.add_argument("--pre-len", type=int, help="pre-coordination interval length")
    sub.add_argument("--coord-len", type=int, help="coordination interval length")
    sub.add_argument("--post-len", type=int, help="post-coordination interval length")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coordlead", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser(
        "simulate", help="generate a synthetic trial", add_help=True
    )
    sim.add_argument(
        "--model",
        required=True,
        choices=("DM", "HM", "LT", "Random", "RotatingDM"),
        help="generative leadership mechanism",
    )
    _add_scale_flags(sim)
    sim.add_argument("--lag-max", type=int, help="maximum follower departure lag")
    sim.add_argument("--kappa", type=int, help="LT: neighbors polled")
    sim.add_argument("--rho", type=float, help="LT: moving fraction that activates")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--output-dir", help="where dataset.csv and truth.json go")

    for name, help_text in (
        ("infer", "run the full pipeline on a dataset CSV"),
        ("features", "compute only the classification feature vector"),
    ):
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument("--input", help="dataset CSV path")
        sub.add_argument("--config", help="JSON config file (PipelineConfig fields)")
        _add_window_flags(sub)
        sub.add_argument("--epsilon", type=float, help="edge score threshold")
        sub.add_argument(
            "--lambda-policy",
            dest="lambda_policy",
            help="density threshold policy: mean | median | pNN (nearest-rank percentile, e.g. p75)",
        )
        sub.add_argument("--merge-gap", type=int, help="windows bridged between runs")
        sub.add_argument("--damping", type=float, help="PageRank damping factor")
        sub.add_argument("--tol", type=float, help="PageRank convergence tolerance")
        sub.add_argument("--max-iter", type=int, help="PageRank iteration cap")
        sub.add_argument(
            "--measures", help="comma-separated subset of pagerank,vch,pch"
        )
        sub.add_argument(
            "--wide", action="store_true", default=None,
            help="input uses wide format (time,<entity>_dim_<k>)",
        )
        sub.add_argument(
            "--interpolate-max-gap", type=int,
            help="linearly fill interior gaps up to this many steps",
        )
        sub.add_argument("--output-dir", help="artifact directory")

    ev = subs.add_parser("evaluate", help="reproduce the benchmark tables")
    ev.add_argument(
        "--tables",
        default=",".join(TABLES),
        help=f"comma-separated subset of {','.join(TABLES)}",
    )
    _add_scale_flags(ev)
    _add_window_flags(ev)
    ev.add_argument("--trials", type=int, help="trials per model for precision tables")
    ev.add_argument("--classify-trials", type=int, help="trials per class label")
    ev.add_argument("--rotating-events", type=int, help="events in the rotating trial")
    ev.add_argument("--n-trees", type=int, help="ensemble size")
    ev.add_argument("--cv-folds", type=int, help="cross-validation folds")
    ev.add_argument("--cv-seed", type=int, help="fold-assignment seed")
    ev.add_argument("--seed", type=int, help="suite base seed")
    ev.add_argument("--output-dir", help="table directory")

    cl = subs.add_parser("classify", help="leadership-model classifier")
    cl.add_argument(
        "--mode", required=True, choices=("train", "predict", "cv"),
        help="train a model, predict one vector, or cross-validate",
    )
    cl.add_argument("--samples", help="labeled samples JSON (train, cv)")
    cl.add_argument("--model", help="model JSON path (predict)")
    cl.add_argument("--model-out", help="where to write the trained model (train)")
    cl.add_argument("--features", help="feature vector JSON path (predict)")
    cl.add_argument("--n-trees", type=int, default=100)
    cl.add_argument("--folds", type=int, default=10)
    cl.add_argument("--seed", type=int, default=0)
    cl.add_argument("--output-dir", help="where cv_report.csv goes (cv)")

    return parser


def _flag_overrides(args: argparse.Namespace, names: tuple[str, ...]) -> dict:
    overrides = {}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return overrides


_PIPELINE_FLAGS = (
    "input", "omega", "delta", "beta", "epsilon", "lambda_policy", "merge_gap",
    "damping", "tol", "max_iter", "wide", "interpolate_max_gap",
)


def _cmd_simulate(args: argparse.Namespace) -> int:
    kwargs = _flag_overrides(
        args, ("n", "events", "pre_len", "coord_len", "post_len", "lag_max",
               "kappa", "rho"),
    )
    try:
        config = SimConfig(model=args.model, seed=args.seed, **kwargs)
    except ValueError as exc:
        raise PipelineError(EXIT_CONFIG, str(exc)) from exc
    trial = simulate(config)
    out = _resolve_output_dir(args.output_dir)
    os.makedirs(out, exist_ok=True)
    dataset_path = os.path.join(out, "dataset.csv")
    truth_path = os.path.join(out, "truth.json")
    write_dataset_csv(trial.dataset, dataset_path)
    write_truth_json(trial, truth_path)
    print(f"wrote {dataset_path}")
    print(f"wrote {truth_path}")
    return EXIT_OK


def _cmd_pipeline(args: argparse.Namespace, features_only: bool) -> int:
    overrides = _flag_overrides(args, _PIPELINE_FLAGS)
    if args.measures is not None:
        overrides["measures"] = tuple(
            m.strip() for m in args.measures.split(",") if m.strip()
        )
    overrides["output_dir"] = _resolve_output_dir(args.output_dir)
    cfg = load_config(args.config, **overrides)
    artifacts = ("features",) if features_only else ARTIFACTS
    result = run_pipeline(cfg, artifacts=artifacts)
    if features_only:
        with open(result.outputs[-1], "r", encoding="utf-8") as fh:
            sys.stdout.write(fh.read())
    else:
        for path in result.outputs:
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    tables = tuple(t.strip() for t in args.tables.split(",") if t.strip())
    kwargs = _flag_overrides(
        args, ("n", "events", "pre_len", "coord_len", "post_len", "omega",
               "delta", "beta", "trials", "classify_trials", "rotating_events",
               "n_trees", "cv_folds", "cv_seed", "seed"),
    )
    try:
        cfg = SuiteConfig(**kwargs)
        written = run_suites(cfg, _resolve_output_dir(args.output_dir), tables)
    except ValueError as exc:
        raise PipelineError(EXIT_CONFIG, str(exc)) from exc
    for path in written.values():
        print(f"wrote {path}")
    return EXIT_OK


def _read_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PipelineError(EXIT_INGEST, f"cannot read {what} {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise PipelineError(EXIT_INGEST, f"{what} {path} must be a JSON object")
    return doc


def _parse_feature_doc(doc: dict, where: str) -> FeatureVector:
    missing = [f for f in _FEATURE_FIELDS if f not in doc]
    if missing:
        raise PipelineError(
            EXIT_INGEST, f"{where}: missing feature fields {', '.join(missing)}"
        )
    try:
        return FeatureVector(**{f: float(doc[f]) for f in _FEATURE_FIELDS})
    except (TypeError, ValueError) as exc:
        raise PipelineError(EXIT_INGEST, f"{where}: {exc}") from exc


def _load_samples(path: str) -> list[LabeledSample]:
    doc = _read_json(path, "samples file")
    if doc.get("format_version") != _SAMPLES_FORMAT:
        raise PipelineError(
            EXIT_INGEST,
            f"samples file {path}: format_version must be {_SAMPLES_FORMAT}",
        )
    raw = doc.get("samples")
    if not isinstance(raw, list) or not raw:
        raise PipelineError(
            EXIT_INGEST, f"samples file {path}: 'samples' must be a non-empty list"
        )
    samples = []
    for idx, entry in enumerate(raw):
        if not isinstance(entry, dict) or "features" not in entry or "label" not in entry:
            raise PipelineError(
                EXIT_INGEST,
                f"samples file {path}: entry {idx} needs 'features' and 'label'",
            )
        features = entry["features"]
        if not isinstance(features, dict):
            raise PipelineError(
                EXIT_INGEST,
                f"samples file {path}: entry {idx} features must be an object",
            )
        vector = _parse_feature_doc(features, f"samples entry {idx}")
        label = entry["label"]
        if label not in LABELS:
            raise PipelineError(
                EXIT_INGEST,
                f"samples file {path}: entry {idx} label {label!r} "
                f"not in {LABELS}",
            )
        key = entry.get("key")
        samples.append(
            LabeledSample(vector, label, key=None if key is None else str(key))
        )
    return samples


def _cmd_classify(args: argparse.Namespace) -> int:
    if args.mode == "train":
        if not args.samples or not args.model_out:
            raise PipelineError(
                EXIT_CONFIG, "classify --mode train needs --samples and --model-out"
            )
        samples = _load_samples(args.samples)
        try:
            model = train(samples, n_trees=args.n_trees, seed=args.seed)
        except ValueError as exc:
            raise PipelineError(EXIT_CONFIG, str(exc)) from exc
        save_model(model, args.model_out)
        print(f"wrote {args.model_out}")
        return EXIT_OK

    if args.mode == "predict":
        if not args.model or not args.features:
            raise PipelineError(
                EXIT_CONFIG, "classify --mode predict needs --model and --features"
            )
        try:
            model = load_model(args.model)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise PipelineError(
                EXIT_INGEST, f"cannot read model {args.model}: {exc}"
            ) from exc
        doc = _read_json(args.features, "features file")
        vector = _parse_feature_doc(doc, f"features file {args.features}")
        print(predict(model, vector))
        return EXIT_OK

    if not args.samples:
        raise PipelineError(EXIT_CONFIG, "classify --mode cv needs --samples")
    samples = _load_samples(args.samples)
    try:
        report = cross_validate(
            samples, folds=args.folds, seed=args.seed, n_trees=args.n_trees
        )
    except ValueError as exc:
        raise PipelineError(EXIT_CONFIG, str(exc)) from exc
    out = _resolve_output_dir(args.output_dir)
    os.makedirs(out, exist_ok=True)
    report_path = os.path.join(out, "cv_report.csv")
    lines = ["class,precision,recall,f_score"]
    for label, metrics in report.items():
        lines.append(
            f"{label},{metrics.precision!r},{metrics.recall!r},{metrics.f_score!r}"
        )
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {report_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command in ("infer", "features"):
            return _cmd_pipeline(args, features_only=args.command == "features")
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        return _cmd_classify(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
