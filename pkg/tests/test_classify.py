"""Bagged-tree label classifier: training, prediction, CV, serialization."""

from __future__ import annotations

import json

import numpy as np
import pytest

from coordlead.classify import (
    LABELS,
    N_FEATURES,
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
from coordlead.ranking import FeatureVector

CENTERS = {
    "DM": (0.4, 0.45, 0.15, 0.4, 0.95),
    "HM": (0.5, 0.75, 0.15, 0.35, 1.0),
    "LT": (0.45, 0.3, 0.15, 0.35, 0.85),
    "Random": (0.45, 0.4, 0.1, 0.15, 0.4),
}


def fv(values) -> FeatureVector:
    return FeatureVector(*values)


def cluster_samples(per_class: int = 20, spread: float = 0.02, seed: int = 0):
    """Well-separated label clusters with keyed samples."""
    rng = np.random.default_rng(seed)
    samples = []
    for label, center in CENTERS.items():
        for i in range(per_class):
            jitter = rng.uniform(-spread, spread, size=N_FEATURES)
            row = np.clip(np.array(center) + jitter, 0.0, 1.0)
            samples.append(LabeledSample(fv(row), label, key=f"{label}-{i:03d}"))
    return samples


class TestLabeledSample:
    def test_valid(self):
        s = LabeledSample(fv(CENTERS["DM"]), "DM", key="k1")
        assert s.label == "DM" and s.key == "k1"

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="label"):
            LabeledSample(fv(CENTERS["DM"]), "XX")


class TestTrain:
    def test_separable_clusters_fit_perfectly(self):
        samples = cluster_samples()
        model = train(samples, n_trees=15, seed=1)
        for s in samples:
            assert predict(model, s.features) == s.label

    def test_deterministic(self):
        samples = cluster_samples()
        a = train(samples, n_trees=10, seed=7)
        b = train(samples, n_trees=10, seed=7)
        assert model_to_json(a) == model_to_json(b)

    def test_seed_changes_model(self):
        samples = cluster_samples()
        a = train(samples, n_trees=10, seed=7)
        b = train(samples, n_trees=10, seed=8)
        assert model_to_json(a) != model_to_json(b)

    def test_keyed_samples_make_order_irrelevant(self):
        samples = cluster_samples()
        shuffled = list(samples)
        np.random.default_rng(3).shuffle(shuffled)
        assert model_to_json(train(samples, n_trees=10, seed=7)) == model_to_json(
            train(shuffled, n_trees=10, seed=7)
        )

    def test_duplicate_keys_rejected(self):
        samples = cluster_samples()
        dup = samples[:10] + [samples[0]]
        with pytest.raises(ValueError, match="unique"):
            train(dup, n_trees=2)

    def test_needs_two_classes(self):
        samples = [
            LabeledSample(fv(CENTERS["DM"]), "DM", key=str(i)) for i in range(12)
        ]
        with pytest.raises(ValueError, match="2 classes"):
            train(samples, n_trees=2)

    def test_needs_ten_samples(self):
        with pytest.raises(ValueError, match="at least 10"):
            train(cluster_samples(per_class=2)[:8], n_trees=2)

    def test_n_trees_validation(self):
        with pytest.raises(ValueError, match="n_trees"):
            train(cluster_samples(), n_trees=0)


class TestPredict:
    def test_feature_vector_and_raw_sequence_agree(self):
        samples = cluster_samples()
        model = train(samples, n_trees=10, seed=2)
        row = CENTERS["LT"]
        assert predict(model, fv(row)) == predict(model, row)

    def test_method_delegates(self):
        model = train(cluster_samples(), n_trees=5, seed=2)
        assert model.predict(fv(CENTERS["HM"])) == predict(model, fv(CENTERS["HM"]))

    def test_wrong_width_rejected(self):
        model = train(cluster_samples(), n_trees=2, seed=2)
        with pytest.raises(ValueError, match="5 features"):
            predict(model, [0.1, 0.2])

    def test_vote_ties_break_by_label_order(self):
        # Leaf-only trees force an exact 1-1 vote split.
        row = [0.0, 0.0, 0.0, 0.0, 0.0]
        model = EnsembleModel(({"label": "HM"}, {"label": "DM"}), seed=0)
        assert predict(model, row) == "DM"
        model = EnsembleModel(({"label": "LT"}, {"label": "HM"}), seed=0)
        assert predict(model, row) == "HM"
        model = EnsembleModel(({"label": "Random"}, {"label": "LT"}), seed=0)
        assert predict(model, row) == "LT"


class TestCrossValidate:
    def test_perfect_on_separable_clusters(self):
        report = cross_validate(cluster_samples(), folds=5, seed=4, n_trees=15)
        assert list(report) == ["DM", "HM", "LT", "Random"]
        for metrics in report.values():
            assert metrics == ClassMetrics(1.0, 1.0, 1.0)

    def test_deterministic_and_order_invariant(self):
        samples = cluster_samples()
        shuffled = list(samples)
        np.random.default_rng(5).shuffle(shuffled)
        a = cross_validate(samples, folds=5, seed=4, n_trees=8)
        b = cross_validate(shuffled, folds=5, seed=4, n_trees=8)
        assert a == b

    def test_indistinguishable_minority_gets_zero_metrics(self):
        # All samples share one feature row; the 2-sample class can never
        # win a leaf majority, so it is never predicted: its precision,
        # recall, and F are all exactly 0 (zero denominators included).
        row = fv((0.2, 0.2, 0.2, 0.2, 0.5))
        samples = [LabeledSample(row, "DM", key=f"d{i}") for i in range(20)]
        samples += [LabeledSample(row, "HM", key=f"h{i}") for i in range(2)]
        report = cross_validate(samples, folds=2, seed=0, n_trees=9)
        assert report["HM"] == ClassMetrics(0.0, 0.0, 0.0)
        dm = report["DM"]
        assert dm.precision == pytest.approx(20 / 22)
        assert dm.recall == 1.0
        assert dm.f_score == pytest.approx(20 / 21)

    def test_folds_validation(self):
        samples = cluster_samples(per_class=3)
        with pytest.raises(ValueError, match="folds"):
            cross_validate(samples, folds=1)
        with pytest.raises(ValueError, match="smallest class"):
            cross_validate(samples, folds=4)

    def test_absent_labels_omitted(self):
        samples = [
            s for s in cluster_samples(per_class=12) if s.label in ("DM", "LT")
        ]
        report = cross_validate(samples, folds=3, seed=1, n_trees=8)
        assert list(report) == ["DM", "LT"]


class TestSerialization:
    def test_json_round_trip_preserves_predictions(self):
        samples = cluster_samples()
        model = train(samples, n_trees=10, seed=6)
        doc = model_to_json(model)
        clone = model_from_json(json.loads(json.dumps(doc)))
        assert clone.trees == model.trees
        for s in samples:
            assert predict(clone, s.features) == predict(model, s.features)

    def test_document_shape(self):
        doc = model_to_json(train(cluster_samples(), n_trees=3, seed=1))
        assert doc["format_version"] == 1
        assert doc["labels"] == list(LABELS)
        assert doc["n_features"] == N_FEATURES
        assert len(doc["trees"]) == 3

    def test_file_round_trip(self, tmp_path):
        model = train(cluster_samples(), n_trees=5, seed=9)
        path = tmp_path / "model.json"
        save_model(model, str(path))
        clone = load_model(str(path))
        assert clone.trees == model.trees
        assert clone.seed == model.seed

    @pytest.mark.parametrize("version", [0, 2, None, "1"])
    def test_unsupported_format_rejected(self, version):
        doc = model_to_json(train(cluster_samples(), n_trees=2, seed=1))
        doc["format_version"] = version
        with pytest.raises(ValueError, match="format"):
            model_from_json(doc)

    def test_label_set_mismatch_rejected(self):
        doc = model_to_json(train(cluster_samples(), n_trees=2, seed=1))
        doc["labels"] = ["A", "B"]
        with pytest.raises(ValueError, match="labels"):
            model_from_json(doc)
