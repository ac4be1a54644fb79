"""Per-label accuracy metrics and the model-comparison results table."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
import torch

from artifact.errors import ContractError, EvaluationError, OutputError, ReportError
from artifact.labels import NUM_LABELS
from artifact.dataset import DatasetManifest, Split
from artifact.models import ClassifierModel, preprocess_image
from artifact.training import load_frame_image

_EVAL_BATCH = 256


@dataclass(frozen=True)
class MetricsReport:
    """Per-label binary accuracies plus their exact arithmetic mean."""

    per_label_accuracy: tuple[float, float, float, float]
    mean_accuracy: float
    n_eval: int
    threshold: float
    model_name: str

    def __post_init__(self) -> None:
        if self.n_eval < 1:
            raise EvaluationError(f"n_eval must be positive, got {self.n_eval}")
        for value in (*self.per_label_accuracy, self.mean_accuracy):
            if math.isnan(value):
                raise EvaluationError("accuracy is NaN")
            if not 0.0 <= value <= 1.0:
                raise EvaluationError(f"accuracy out of [0, 1]: {value}")
        expected = sum(self.per_label_accuracy) / NUM_LABELS
        if self.mean_accuracy != expected:
            raise EvaluationError(
                "mean_accuracy must equal the exact arithmetic mean of the "
                "per-label accuracies")

    @classmethod
    def from_per_label(cls, per_label, n_eval: int, threshold: float,
                       model_name: str) -> "MetricsReport":
        per_label = tuple(float(v) for v in per_label)
        return cls(per_label, sum(per_label) / NUM_LABELS, n_eval,
                   threshold, model_name)

    def to_record(self) -> dict:
        return {
            "model_name": self.model_name,
            "per_label_accuracy": list(self.per_label_accuracy),
            "mean_accuracy": self.mean_accuracy,
            "n_eval": self.n_eval,
            "threshold": self.threshold,
        }

    @classmethod
    def from_record(cls, record: dict) -> "MetricsReport":
        return cls(
            per_label_accuracy=tuple(record["per_label_accuracy"]),
            mean_accuracy=record["mean_accuracy"],
            n_eval=record["n_eval"],
            threshold=record["threshold"],
            model_name=record["model_name"],
        )


def _as_binary_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[1] != NUM_LABELS:
        raise ContractError(
            f"{name} must be (N, {NUM_LABELS}), got {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ContractError(f"{name} must contain only 0/1 bits")
    return arr.astype(np.int8)


def per_label_accuracy(predictions, truths) -> tuple[float, float, float, float]:
    """Fraction of rows where prediction equals truth, per label column."""
    pred = _as_binary_matrix(predictions, "predictions")
    true = _as_binary_matrix(truths, "truths")
    if pred.shape != true.shape:
        raise ContractError(
            f"shape mismatch: predictions {pred.shape} vs truths {true.shape}")
    if pred.shape[0] < 1:
        raise ContractError("need at least one row")
    return tuple(float(v) for v in (pred == true).mean(axis=0))


def subset_exact_match(predictions, truths) -> float:
    """Secondary metric: fraction of rows where the whole vector matches."""
    pred = _as_binary_matrix(predictions, "predictions")
    true = _as_binary_matrix(truths, "truths")
    if pred.shape != true.shape:
        raise ContractError(
            f"shape mismatch: predictions {pred.shape} vs truths {true.shape}")
    return float((pred == true).all(axis=1).mean())


def evaluate(model: ClassifierModel, manifest: DatasetManifest,
             manifest_root: str | Path, *, split: Split = Split.VAL,
             threshold: float = 0.5, model_name: str | None = None,
             ) -> MetricsReport:
    """Run the model over one split and aggregate per-label accuracy."""
    if model.taxonomy_version != manifest.taxonomy_version:
        raise EvaluationError(
            f"taxonomy mismatch: model {model.taxonomy_version!r} vs "
            f"manifest {manifest.taxonomy_version!r}")
    frames = manifest.split_frames(split)
    if not frames:
        raise EvaluationError(f"split {split.value} is empty")

    root = Path(manifest_root)
    batch = torch.stack([
        preprocess_image(load_frame_image(root, f), model) for f in frames
    ])
    model.eval()
    with torch.no_grad():
        probs = torch.sigmoid(torch.cat([
            model(batch[i:i + _EVAL_BATCH])
            for i in range(0, len(batch), _EVAL_BATCH)
        ])).numpy()
    predictions = (probs >= threshold).astype(np.int8)
    truths = np.array([f.labels.as_tuple() for f in frames], dtype=np.int8)
    return MetricsReport.from_per_label(
        per_label_accuracy(predictions, truths),
        n_eval=len(frames),
        threshold=threshold,
        model_name=model_name or model.spec.architecture_name,
    )


def display_percent(value: float) -> str:
    """Accuracy fraction -> percent string, two decimals, round half up."""
    return str(Decimal(repr(value * 100.0)).quantize(Decimal("0.01"),
                                                     rounding=ROUND_HALF_UP))


def render_results_table(reports: list[MetricsReport]) -> str:
    """Markdown table, one row per model; per-column maxima in bold.

    Maxima are decided on exact values before display rounding; ties all
    get the marker.
    """
    if not reports:
        raise ReportError("no reports to tabulate")
    columns = []
    for i in range(NUM_LABELS):
        columns.append([r.per_label_accuracy[i] for r in reports])
    columns.append([r.mean_accuracy for r in reports])
    maxima = [max(col) for col in columns]

    header = "| Model | Label 1 (%) | Label 2 (%) | Label 3 (%) | Label 4 (%) | Mean (%) |"
    rule = "|---|---|---|---|---|---|"
    lines = [header, rule]
    for row, report in enumerate(reports):
        cells = [report.model_name]
        values = list(report.per_label_accuracy) + [report.mean_accuracy]
        for col, value in enumerate(values):
            text = display_percent(value)
            if value == maxima[col]:
                text = f"**{text}**"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def results_table(reports: list[MetricsReport], path: str | Path,
                  ) -> tuple[Path, Path]:
    """Write the rendered table plus a machine-readable JSON companion."""
    path = Path(path)
    table = render_results_table(reports)
    json_path = path.with_suffix(".json")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table, encoding="utf-8")
        json_path.write_text(
            json.dumps({"reports": [r.to_record() for r in reports]}, indent=2)
            + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise OutputError(f"cannot write results table {path}: {exc}") from exc
    return path, json_path


def mean_discrepancy_notes(reports: list[MetricsReport],
                           reference_means: dict[str, float]) -> list[str]:
    """Compare computed means against externally printed ones.

    Returns one note per model whose displayed mean differs from the
    reference; discrepancies are surfaced, never silently adopted.
    """
    notes = []
    for report in reports:
        if report.model_name not in reference_means:
            continue
        shown = display_percent(report.mean_accuracy)
        reference = reference_means[report.model_name]
        if float(shown) != reference:
            notes.append(
                f"{report.model_name}: computed mean {shown}% differs from "
                f"reference {reference}% (difference "
                f"{abs(float(shown) - reference):.2f} points)")
    return notes
