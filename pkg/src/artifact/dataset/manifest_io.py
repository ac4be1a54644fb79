"""Manifest serialization: JSON Lines, one record per line, strict schema.

Line 1 is a header record; every following line is a frame record. Field
order is fixed so that saved manifests diff cleanly, and loading is strict:
unknown keys are errors, not warnings.
"""

from __future__ import annotations

import json
from pathlib import Path

from PIL import Image

from artifact.errors import ArtifactIOError, ManifestError, OutputError
from artifact.labels import LabelVector
from artifact.dataset.records import (
    MANIFEST_VERSION,
    DatasetManifest,
    FrameRecord,
    MaskRef,
    Split,
)

_HEADER_KEYS = ("record", "manifest_version", "taxonomy_version",
                "resolution", "split_seed")
_FRAME_KEYS = ("record", "frame_id", "source_video_id", "timestamp_s",
               "image_path", "labels", "annotator_id", "human_regions", "split")


def _header_dict(manifest: DatasetManifest) -> dict:
    return {
        "record": "header",
        "manifest_version": manifest.manifest_version,
        "taxonomy_version": manifest.taxonomy_version,
        "resolution": list(manifest.resolution) if manifest.resolution else None,
        "split_seed": manifest.split_seed,
    }


def _frame_dict(frame: FrameRecord, split: Split | None) -> dict:
    return {
        "record": "frame",
        "frame_id": frame.frame_id,
        "source_video_id": frame.source_video_id,
        "timestamp_s": frame.timestamp_s,
        "image_path": frame.image_path,
        "labels": frame.labels.as_dict() if frame.labels is not None else None,
        "annotator_id": frame.annotator_id,
        "human_regions": (
            [{"label_index": r.label_index, "mask_path": r.mask_path}
             for r in frame.human_regions]
            if frame.human_regions is not None else None
        ),
        "split": split.value if split is not None else None,
    }


def manifest_to_lines(manifest: DatasetManifest) -> list[str]:
    manifest.validate()
    assignment = manifest.split_assignment or {}
    lines = [json.dumps(_header_dict(manifest), ensure_ascii=False)]
    for frame in manifest.frames:
        lines.append(json.dumps(
            _frame_dict(frame, assignment.get(frame.frame_id)),
            ensure_ascii=False,
        ))
    return lines


def save_manifest(manifest: DatasetManifest, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(manifest_to_lines(manifest)) + "\n",
                        encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write manifest to {path}: {exc}") from exc
    return path


def _require_keys(obj: dict, allowed: tuple[str, ...], line_no: int) -> None:
    for key in obj:
        if key not in allowed:
            raise ManifestError(f"unknown key {key!r} in record at line {line_no}")


def _parse_frame(obj: dict, line_no: int) -> tuple[FrameRecord, Split | None]:
    _require_keys(obj, _FRAME_KEYS, line_no)
    try:
        labels = obj.get("labels")
        regions = obj.get("human_regions")
        frame = FrameRecord(
            frame_id=obj["frame_id"],
            source_video_id=obj["source_video_id"],
            timestamp_s=float(obj["timestamp_s"]),
            image_path=obj["image_path"],
            labels=LabelVector.from_dict(labels) if labels is not None else None,
            annotator_id=obj.get("annotator_id"),
            human_regions=(
                tuple(MaskRef(r["label_index"], r["mask_path"]) for r in regions)
                if regions is not None else None
            ),
        )
    except KeyError as exc:
        raise ManifestError(f"missing key {exc} in frame record at line {line_no}") from exc
    split_raw = obj.get("split")
    if split_raw is None:
        return frame, None
    try:
        return frame, Split(split_raw)
    except ValueError as exc:
        raise ManifestError(f"bad split value {split_raw!r} at line {line_no}") from exc


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load a manifest, raising ManifestError with the offending line index."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"cannot read manifest {path}: {exc}") from exc

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ManifestError(f"manifest {path} is empty")

    def parse_json(line: str, line_no: int) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"malformed JSON at line {line_no}: {exc}") from exc
        if not isinstance(obj, dict) or "record" not in obj:
            raise ManifestError(f"record at line {line_no} is not a tagged object")
        return obj

    header = parse_json(lines[0], 1)
    if header["record"] != "header":
        raise ManifestError("line 1 must be the header record")
    _require_keys(header, _HEADER_KEYS, 1)
    version = header.get("manifest_version")
    if version != MANIFEST_VERSION:
        raise ManifestError(
            f"unsupported manifest_version {version!r} (expected {MANIFEST_VERSION})"
        )

    manifest = DatasetManifest(
        manifest_version=version,
        taxonomy_version=header["taxonomy_version"],
        resolution=tuple(header["resolution"]) if header.get("resolution") else None,
        split_seed=header.get("split_seed"),
    )
    assignment: dict[str, Split] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        obj = parse_json(line, line_no)
        if obj["record"] != "frame":
            raise ManifestError(f"unexpected record type {obj['record']!r} at line {line_no}")
        frame, split = _parse_frame(obj, line_no)
        manifest.frames.append(frame)
        if split is not None:
            assignment[frame.frame_id] = split
    if assignment:
        manifest.split_assignment = assignment
    manifest.validate()
    return manifest


def verify_images(manifest: DatasetManifest, root: str | Path) -> None:
    """Check every frame's image exists and matches the declared resolution."""
    root = Path(root)
    for frame in manifest.frames:
        img_path = root / frame.image_path
        if not img_path.is_file():
            raise ManifestError(f"image missing for frame {frame.frame_id!r}: {img_path}")
        if manifest.resolution is not None:
            with Image.open(img_path) as img:
                if img.size != tuple(manifest.resolution):
                    raise ManifestError(
                        f"frame {frame.frame_id!r} has size {img.size}, "
                        f"manifest declares {tuple(manifest.resolution)}"
                    )
