"""Core dataset records: frames, masks references, and the manifest."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from artifact.errors import ManifestError
from artifact.labels import NUM_LABELS, TAXONOMY_VERSION, LabelVector

MANIFEST_VERSION = 1


class Split(str, enum.Enum):
    TRAIN = "TRAIN"
    VAL = "VAL"


@dataclass(frozen=True)
class MaskRef:
    """Pointer to a stored binary region mask for one asserted label."""

    label_index: int  # 1..4
    mask_path: str

    def __post_init__(self) -> None:
        if not 1 <= self.label_index <= NUM_LABELS:
            raise ManifestError(f"mask label_index out of range: {self.label_index}")


@dataclass(frozen=True)
class FrameRecord:
    """One extracted still image plus provenance and its label state.

    ``labels is None`` means UNLABELED: the frame has not been reviewed and
    is excluded from splits and metrics. That is distinct from an all-zero
    LabelVector, which is a reviewed, artifact-free frame.
    """

    frame_id: str
    source_video_id: str
    timestamp_s: float
    image_path: str
    labels: LabelVector | None = None
    annotator_id: str | None = None
    human_regions: tuple[MaskRef, ...] | None = None

    def __post_init__(self) -> None:
        if self.timestamp_s < 0:
            raise ManifestError(f"timestamp_s must be >= 0, got {self.timestamp_s}")

    @property
    def labeled(self) -> bool:
        return self.labels is not None


@dataclass
class DatasetManifest:
    """Ordered frame collection plus split assignment and taxonomy version."""

    frames: list[FrameRecord] = field(default_factory=list)
    manifest_version: int = MANIFEST_VERSION
    taxonomy_version: str = TAXONOMY_VERSION
    resolution: tuple[int, int] | None = None  # (width, height), if uniform
    split_seed: int | None = None
    split_assignment: dict[str, Split] | None = None

    def labeled_frames(self) -> list[FrameRecord]:
        return [f for f in self.frames if f.labeled]

    def frame_by_id(self, frame_id: str) -> FrameRecord:
        for f in self.frames:
            if f.frame_id == frame_id:
                return f
        raise ManifestError(f"unknown frame_id: {frame_id!r}")

    def split_frames(self, split: Split) -> list[FrameRecord]:
        if self.split_assignment is None:
            return []
        return [
            f
            for f in self.frames
            if f.labeled and self.split_assignment.get(f.frame_id) is split
        ]

    def with_labels(self, frame_id: str, labels: LabelVector,
                    annotator_id: str | None = None,
                    human_regions: tuple[MaskRef, ...] | None = None) -> None:
        """Replace one frame's label state in place."""
        for i, f in enumerate(self.frames):
            if f.frame_id == frame_id:
                self.frames[i] = replace(
                    f, labels=labels, annotator_id=annotator_id,
                    human_regions=human_regions,
                )
                return
        raise ManifestError(f"unknown frame_id: {frame_id!r}")

    def validate(self) -> None:
        """Check the structural invariants that do not require file access."""
        seen: set[str] = set()
        last_ts: dict[str, float] = {}
        for f in self.frames:
            if f.frame_id in seen:
                raise ManifestError(f"duplicate frame_id: {f.frame_id!r}")
            seen.add(f.frame_id)
            prev = last_ts.get(f.source_video_id)
            if prev is not None and f.timestamp_s <= prev:
                raise ManifestError(
                    f"timestamps not strictly increasing for video "
                    f"{f.source_video_id!r} at frame {f.frame_id!r}"
                )
            last_ts[f.source_video_id] = f.timestamp_s
        if self.split_assignment is not None:
            labeled_ids = {f.frame_id for f in self.frames if f.labeled}
            assigned = set(self.split_assignment)
            if assigned != labeled_ids:
                missing = labeled_ids - assigned
                extra = assigned - labeled_ids
                raise ManifestError(
                    "split_assignment must cover exactly the labeled frames "
                    f"(missing={sorted(missing)[:3]}, extra={sorted(extra)[:3]})"
                )
            for frame_id, split in self.split_assignment.items():
                if not isinstance(split, Split):
                    raise ManifestError(
                        f"split for {frame_id!r} must be TRAIN or VAL, got {split!r}"
                    )
