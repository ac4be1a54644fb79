from __future__ import annotations

import numpy as np
import pytest
import torch

from artifact.errors import ContractError, EvaluationError, ReportError
from artifact.dataset import Split, split_dataset
from artifact.evaluation import (
    MetricsReport,
    display_percent,
    evaluate,
    mean_discrepancy_notes,
    per_label_accuracy,
    render_results_table,
    results_table,
    subset_exact_match,
)
from artifact.models import BackboneSpec, build_classifier
from artifact.synthetic import InjectionSpec, generate_synthetic_dataset

TINY = BackboneSpec("tiny_cnn", pretrained=False, input_resolution=64)

# Per-label accuracies as printed in the reference comparison (percent).
REFERENCE_ROWS = {
    "ResNet-50": (90.62, 96.88, 93.75, 95.31),
    "EfficientNet-B3": (95.31, 96.31, 89.06, 92.81),
    "EfficientNet-B4": (90.62, 96.88, 88.75, 92.50),
    "ViT-Base": (93.75, 96.88, 89.06, 92.19),
}
REFERENCE_MEANS = {
    "ResNet-50": 94.14,
    "EfficientNet-B3": 93.36,  # printed value; exact mean computes to 93.37
    "EfficientNet-B4": 92.19,
    "ViT-Base": 92.97,
}


def reference_reports() -> list[MetricsReport]:
    return [
        MetricsReport.from_per_label(
            [v / 100.0 for v in row], n_eval=64, threshold=0.5, model_name=name)
        for name, row in REFERENCE_ROWS.items()
    ]


def brute_force_per_label(pred: np.ndarray, true: np.ndarray) -> list[float]:
    """Element-counting oracle, one label column at a time."""
    n, k = pred.shape
    out = []
    for c in range(k):
        correct = 0
        for r in range(n):
            if pred[r, c] == true[r, c]:
                correct += 1
        out.append(correct / n)
    return out


# ---------------------------------------------------------------------------
# per_label_accuracy
# ---------------------------------------------------------------------------

def test_identity_predictions_score_one():
    truths = np.random.default_rng(0).integers(0, 2, size=(10, 4))
    assert per_label_accuracy(truths, truths) == (1.0, 1.0, 1.0, 1.0)


def test_complement_predictions_score_zero():
    truths = np.random.default_rng(1).integers(0, 2, size=(10, 4))
    assert per_label_accuracy(1 - truths, truths) == (0.0, 0.0, 0.0, 0.0)


def test_random_case_matches_counting_oracle():
    rng = np.random.default_rng(6)
    pred = rng.integers(0, 2, size=(6, 4))
    true = rng.integers(0, 2, size=(6, 4))
    assert list(per_label_accuracy(pred, true)) == brute_force_per_label(pred, true)


def test_oracle_equivalence_over_many_instances():
    rng = np.random.default_rng(12)
    for _ in range(200):
        n = int(rng.integers(1, 51))
        pred = rng.integers(0, 2, size=(n, 4))
        true = rng.integers(0, 2, size=(n, 4))
        assert list(per_label_accuracy(pred, true)) == brute_force_per_label(pred, true)


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    pred = rng.integers(0, 2, size=(20, 4))
    true = rng.integers(0, 2, size=(20, 4))
    perm = rng.permutation(20)
    assert per_label_accuracy(pred, true) == per_label_accuracy(pred[perm], true[perm])


def test_contract_errors():
    with pytest.raises(ContractError):
        per_label_accuracy(np.zeros((2, 4)), np.zeros((3, 4)))
    with pytest.raises(ContractError):
        per_label_accuracy(np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ContractError):
        per_label_accuracy(np.full((2, 4), 0.5), np.zeros((2, 4)))
    with pytest.raises(ContractError):
        per_label_accuracy(np.zeros((0, 4)), np.zeros((0, 4)))


def test_subset_exact_match():
    pred = np.array([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0]])
    true = np.array([[1, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]])
    assert subset_exact_match(pred, true) == pytest.approx(1 / 3)


# ---------------------------------------------------------------------------
# MetricsReport
# ---------------------------------------------------------------------------

def test_mean_law_is_exact():
    report = MetricsReport.from_per_label((0.9, 0.8, 0.7, 0.6), 10, 0.5, "m")
    assert report.mean_accuracy == (0.9 + 0.8 + 0.7 + 0.6) / 4
    with pytest.raises(EvaluationError):
        MetricsReport((0.9, 0.8, 0.7, 0.6), 0.9, 10, 0.5, "m")


def test_report_refuses_nan_and_out_of_bounds():
    with pytest.raises(EvaluationError):
        MetricsReport.from_per_label((float("nan"), 1.0, 1.0, 1.0), 10, 0.5, "m")
    with pytest.raises(EvaluationError):
        MetricsReport.from_per_label((1.2, 1.0, 1.0, 1.0), 10, 0.5, "m")
    with pytest.raises(EvaluationError):
        MetricsReport.from_per_label((1.0, 1.0, 1.0, 1.0), 0, 0.5, "m")


def test_report_record_round_trip():
    report = reference_reports()[0]
    assert MetricsReport.from_record(report.to_record()) == report


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def clean_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("clean")
    spec = InjectionSpec(seed=2, artifact_probabilities=(0.0, 0.0, 0.0, 0.0))
    manifest = generate_synthetic_dataset(spec, 12, root)
    return split_dataset(manifest, 0.5, seed=1), root


def test_oracle_model_scores_one(clean_corpus):
    manifest, root = clean_corpus
    model = build_classifier(TINY, init_seed=0)
    with torch.no_grad():
        for head in model.heads:
            head.bias.fill_(-50.0)  # all-zero labels: always correct here
    report = evaluate(model, manifest, root)
    assert report.per_label_accuracy == (1.0, 1.0, 1.0, 1.0)
    assert report.mean_accuracy == 1.0
    assert report.n_eval == len(manifest.split_frames(Split.VAL))


def test_evaluate_requires_split_frames(clean_corpus):
    manifest, root = clean_corpus
    model = build_classifier(TINY, init_seed=0)
    bare = type(manifest)(frames=manifest.frames)
    with pytest.raises(EvaluationError, match="empty"):
        evaluate(model, bare, root)


def test_evaluate_checks_taxonomy(clean_corpus):
    manifest, root = clean_corpus
    model = build_classifier(TINY, init_seed=0)
    model.taxonomy_version = "other-taxonomy"
    with pytest.raises(EvaluationError, match="taxonomy"):
        evaluate(model, manifest, root)


# ---------------------------------------------------------------------------
# results table
# ---------------------------------------------------------------------------

def test_reference_table_rendering_with_column_maxima():
    table = render_results_table(reference_reports())
    lines = table.splitlines()
    assert len(lines) == 6  # header + rule + four rows
    assert lines[2] == ("| ResNet-50 | 90.62 | **96.88** | **93.75** | "
                        "**95.31** | **94.14** |")
    assert lines[3] == ("| EfficientNet-B3 | **95.31** | 96.31 | 89.06 | "
                        "92.81 | 93.37 |")
    assert lines[4] == ("| EfficientNet-B4 | 90.62 | **96.88** | 88.75 | "
                        "92.50 | 92.19 |")
    assert lines[5] == ("| ViT-Base | 93.75 | **96.88** | 89.06 | 92.19 | "
                        "92.97 |")


def test_computed_means_stay_within_a_cent_of_reference():
    for report in reference_reports():
        shown = float(display_percent(report.mean_accuracy))
        assert abs(shown - REFERENCE_MEANS[report.model_name]) <= 0.01 + 1e-9


def test_discrepancy_note_flags_only_the_known_mismatch():
    notes = mean_discrepancy_notes(reference_reports(), REFERENCE_MEANS)
    assert len(notes) == 1
    assert "EfficientNet-B3" in notes[0]


def test_single_report_table():
    table = render_results_table(reference_reports()[:1])
    assert table.count("\n") == 3


def test_results_table_files(tmp_path):
    md_path, json_path = results_table(reference_reports(), tmp_path / "t.md")
    assert md_path.read_text().startswith("| Model |")
    assert json_path.is_file()
    import json

    payload = json.loads(json_path.read_text())
    assert len(payload["reports"]) == 4


def test_empty_report_list_rejected(tmp_path):
    with pytest.raises(ReportError):
        results_table([], tmp_path / "t.md")
