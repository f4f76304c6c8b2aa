"""Leadership-model classification with a small bagged-tree ensemble.

Implemented from scratch on purpose: five features and four labels need no
ML dependency, and an in-repo ensemble keeps training, prediction, and
serialization fully deterministic and auditable.  Trees are axis-aligned
CART-style classifiers on bootstrap resamples, each split drawn from a
random 3-of-5 feature subset, combined by majority vote.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from coordlead.ranking import FeatureVector

__all__ = [
    "LABELS",
    "N_FEATURES",
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
]

LABELS = ("DM", "HM", "LT", "Random")
N_FEATURES = 5
_SUBSET_SIZE = 3  # ceil(sqrt(5)) features considered per split
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabeledSample:
    """One training example: a feature vector and its generating model.

    ``key`` optionally names the sample (e.g. its trial seed).  When every
    sample carries a key, training canonicalizes sample order by key, so
    shuffling the input list cannot change the fitted ensemble.
    """

    features: FeatureVector
    label: str
    key: str | None = None

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f_score: float


# A tree is nested dicts: interior {"feature", "threshold", "left", "right"},
# leaf {"label"}.  Plain dicts keep JSON round-trips trivial.


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def _majority(counts: np.ndarray) -> str:
    # Highest count wins; ties go to the earliest label in LABELS.
    return LABELS[int(counts.argmax())]


def _label_counts(y: np.ndarray) -> np.ndarray:
    return np.bincount(y, minlength=len(LABELS))


def _build_tree(x: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> dict:
    counts = _label_counts(y)
    if len(y) < 2 or counts.max() == len(y):
        return {"label": _majority(counts)}

    parent_gini = _gini(counts)
    feats = rng.choice(N_FEATURES, size=_SUBSET_SIZE, replace=False)
    best = None  # (decrease, feature, threshold, mask)
    for f in feats:
        col = x[:, f]
        levels = np.unique(col)
        if len(levels) < 2:
            continue
        for thr in (levels[:-1] + levels[1:]) / 2.0:
            mask = col <= thr
            left = _label_counts(y[mask])
            right = counts - left
            nl, nr = left.sum(), right.sum()
            decrease = parent_gini - (
                nl * _gini(left) + nr * _gini(right)
            ) / len(y)
            if best is None or decrease > best[0] + 1e-15:
                best = (decrease, int(f), float(thr), mask)
    if best is None or best[0] <= 0.0:
        return {"label": _majority(counts)}

    _, feature, threshold, mask = best
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _build_tree(x[mask], y[mask], rng),
        "right": _build_tree(x[~mask], y[~mask], rng),
    }


def _tree_predict(node: dict, row: np.ndarray) -> str:
    while "label" not in node:
        node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
    return node["label"]


@dataclass(frozen=True)
class EnsembleModel:
    """Bagged decision trees; prediction is majority vote over trees."""

    trees: tuple[dict, ...]
    seed: int

    def predict(self, features: FeatureVector | Sequence[float]) -> str:
        return predict(self, features)


def _canonical_order(samples: Sequence[LabeledSample]) -> list[LabeledSample]:
    keys = [s.key for s in samples]
    if all(k is not None for k in keys):
        if len(set(keys)) != len(keys):
            raise ValueError("sample keys must be unique")
        return sorted(samples, key=lambda s: str(s.key))
    return list(samples)


def _as_matrix(samples: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([s.features.as_tuple() for s in samples], dtype=np.float64)
    y = np.array([LABELS.index(s.label) for s in samples], dtype=np.int64)
    return x, y


def train(
    samples: Sequence[LabeledSample], n_trees: int = 100, seed: int = 0
) -> EnsembleModel:
    """Fit a bagged ensemble of ``n_trees`` CART trees.

    Each tree sees a bootstrap resample (drawn with replacement, same size
    as the input) and considers a fresh random 3-feature subset at every
    split; splits maximize Gini impurity decrease over midpoint thresholds.
    Nodes stop at purity or fewer than 2 samples.
    """
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    if len(samples) < 10:
        raise ValueError(f"need at least 10 samples, got {len(samples)}")
    ordered = _canonical_order(samples)
    x, y = _as_matrix(ordered)
    if len(np.unique(y)) < 2:
        raise ValueError("training set must contain at least 2 classes")

    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        pick = rng.integers(0, len(ordered), size=len(ordered))
        trees.append(_build_tree(x[pick], y[pick], rng))
    return EnsembleModel(tuple(trees), seed)


def predict(model: EnsembleModel, features: FeatureVector | Sequence[float]) -> str:
    """Majority-vote label; ties go to the earliest label in LABELS."""
    row = np.asarray(
        features.as_tuple() if isinstance(features, FeatureVector) else features,
        dtype=np.float64,
    )
    if row.shape != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} features, got shape {row.shape}")
    votes = np.zeros(len(LABELS), dtype=np.int64)
    for tree in model.trees:
        votes[LABELS.index(_tree_predict(tree, row))] += 1
    return LABELS[int(votes.argmax())]


def cross_validate(
    samples: Sequence[LabeledSample],
    folds: int = 10,
    seed: int = 0,
    n_trees: int = 100,
) -> dict[str, ClassMetrics]:
    """Stratified k-fold cross validation; metrics pooled over held-out folds.

    Per class: precision TP/(TP+FP), recall TP/(TP+FN), F = 2PR/(P+R)
    (0 whenever a denominator is 0).  Labels absent from the sample set are
    omitted from the report.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    ordered = _canonical_order(samples)
    by_label: dict[str, list[int]] = {}
    for idx, s in enumerate(ordered):
        by_label.setdefault(s.label, []).append(idx)
    present = [lab for lab in LABELS if lab in by_label]
    smallest = min(len(v) for v in by_label.values())
    if folds > smallest:
        raise ValueError(
            f"folds={folds} exceeds the smallest class count ({smallest})"
        )

    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(ordered), dtype=np.int64)
    for lab in present:
        idxs = np.array(by_label[lab])
        rng.shuffle(idxs)
        for pos, idx in enumerate(idxs):
            fold_of[idx] = pos % folds

    truth: list[str] = [s.label for s in ordered]
    predicted: list[str] = [""] * len(ordered)
    for fold in range(folds):
        held = np.flatnonzero(fold_of == fold)
        rest = np.flatnonzero(fold_of != fold)
        model = train(
            [ordered[i] for i in rest],
            n_trees=n_trees,
            seed=int(rng.integers(2**31)),
        )
        for i in held:
            predicted[i] = predict(model, ordered[i].features)

    report = {}
    for lab in present:
        tp = sum(1 for t, p in zip(truth, predicted) if t == lab and p == lab)
        fp = sum(1 for t, p in zip(truth, predicted) if t != lab and p == lab)
        fn = sum(1 for t, p in zip(truth, predicted) if t == lab and p != lab)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        report[lab] = ClassMetrics(prec, rec, f)
    return report


def model_to_json(model: EnsembleModel) -> dict:
    """Serializable document for an ensemble (see ``model_from_json``)."""
    return {
        "format_version": _FORMAT_VERSION,
        "labels": list(LABELS),
        "n_features": N_FEATURES,
        "seed": model.seed,
        "trees": copy.deepcopy(list(model.trees)),
    }


def model_from_json(doc: dict) -> EnsembleModel:
    if doc.get("format_version") != _FORMAT_VERSION:
        raise ValueError(
            f"unsupported model format {doc.get('format_version')!r}"
        )
    if tuple(doc.get("labels", ())) != LABELS:
        raise ValueError("model labels do not match this library's label set")
    return EnsembleModel(tuple(doc["trees"]), int(doc["seed"]))


def save_model(model: EnsembleModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> EnsembleModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(json.load(fh))
