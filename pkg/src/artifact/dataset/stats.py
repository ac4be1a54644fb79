"""Artifact frequency statistics over a labeled manifest."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from artifact.errors import StatisticsError
from artifact.labels import LABEL_KEYS, LABEL_TITLES, NUM_LABELS
from artifact.dataset.records import DatasetManifest


@dataclass(frozen=True)
class FrequencyTable:
    """Per-label frame counts and display percentages.

    Display percentages are truncated (not rounded) to one decimal place:
    100 * count / total, floor at the first decimal. Truncation is the
    convention that makes the printed percentage always recomputable from
    the printed count. Exact values are available as Fractions.
    """

    per_label_count: tuple[int, int, int, int]
    total_frames: int
    per_label_percent: tuple[float, float, float, float]

    def exact_percent(self, index: int) -> Fraction:
        return Fraction(100 * self.per_label_count[index], self.total_frames)

    def to_record(self) -> dict:
        """Machine-readable form: counts plus exact rational percentages."""
        return {
            "total_frames": self.total_frames,
            "labels": [
                {
                    "key": LABEL_KEYS[i],
                    "count": self.per_label_count[i],
                    "percent_truncated": self.per_label_percent[i],
                    "percent_exact": {
                        "numerator": self.exact_percent(i).numerator,
                        "denominator": self.exact_percent(i).denominator,
                    },
                }
                for i in range(NUM_LABELS)
            ],
        }


def truncate_percent(count: int, total: int) -> float:
    """100 * count / total truncated to one decimal, via integer arithmetic."""
    tenths = (1000 * count) // total
    return tenths / 10.0


def label_frequency(manifest: DatasetManifest) -> FrequencyTable:
    """Count how many labeled frames assert each label.

    Frames may carry several labels at once, so the counts (and percentages)
    can sum past the total.
    """
    labeled = manifest.labeled_frames()
    if not labeled:
        raise StatisticsError("manifest has no labeled frames to count")
    counts = [0] * NUM_LABELS
    for frame in labeled:
        bits = frame.labels.as_tuple()
        for i in range(NUM_LABELS):
            counts[i] += bits[i]
    total = len(labeled)
    percents = tuple(truncate_percent(c, total) for c in counts)
    return FrequencyTable(tuple(counts), total, percents)


def format_frequency_table(table: FrequencyTable) -> str:
    width = max(len(t) for t in LABEL_TITLES)
    lines = [f"{'Category':<{width}}  Count      %"]
    for i in range(NUM_LABELS):
        lines.append(
            f"{LABEL_TITLES[i]:<{width}}  {table.per_label_count[i]:>5}  {table.per_label_percent[i]:>5.1f}"
        )
    lines.append(f"{'Total labeled frames':<{width}}  {table.total_frames:>5}")
    return "\n".join(lines)
