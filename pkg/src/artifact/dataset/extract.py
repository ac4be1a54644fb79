"""Uniform-rate frame extraction from video files.

Sampling anchor: t_k = k / rate_fps starting at t=0. Sample k is realized by
the earliest native frame whose timestamp is >= t_k (native index
ceil(t_k * fps)), so the number of extracted frames for a clip whose last
native frame sits at timestamp D is exactly floor(D * rate_fps) + 1.
Images are written as PNG (lossless) so re-encoding cannot add artifacts of
its own.
"""

from __future__ import annotations

import math
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from artifact.errors import IngestError, OutputError, ParameterError
from artifact.dataset.records import FrameRecord

FRAMES_SUBDIR = "frames"

# Guards ceil() against float noise when k * fps / rate is an exact integer.
_CEIL_EPS = 1e-9


def _native_index(sample_index: int, native_fps: float, rate_fps: float) -> int:
    return math.ceil(sample_index * native_fps / rate_fps - _CEIL_EPS)


def extract_frames(video_file: str | Path, rate_fps: float,
                   out_dir: str | Path, *, video_id: str | None = None,
                   ) -> list[FrameRecord]:
    """Extract stills at a uniform rate and return UNLABELED frame records.

    Records come back in timestamp order with ``labels=None``; images land in
    ``out_dir/frames/`` and ``image_path`` is relative to ``out_dir`` so the
    records can be dropped straight into a manifest saved there.
    """
    video_file = Path(video_file)
    if rate_fps <= 0:
        raise ParameterError(f"rate_fps must be positive, got {rate_fps}")
    if not video_file.is_file():
        raise IngestError(f"video file not found: {video_file}")

    cap = cv2.VideoCapture(str(video_file))
    try:
        if not cap.isOpened():
            raise IngestError(f"cannot decode video: {video_file}")
        native_fps = cap.get(cv2.CAP_PROP_FPS)
        if not native_fps or native_fps <= 0 or not math.isfinite(native_fps):
            raise IngestError(f"cannot determine frame rate of video: {video_file}")
        if rate_fps > native_fps + 1e-9:
            raise ParameterError(
                f"rate_fps {rate_fps} exceeds native frame rate "
                f"{native_fps:g} of {video_file.name}"
            )

        video_id = video_id or video_file.stem
        frames_dir = Path(out_dir) / FRAMES_SUBDIR
        try:
            frames_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {frames_dir}: {exc}") from exc

        records: list[FrameRecord] = []
        sample_index = 0
        target = _native_index(0, native_fps, rate_fps)
        native_index = 0
        while True:
            ok, frame_bgr = cap.read()
            if not ok:
                break
            while native_index == target:
                timestamp = sample_index / rate_fps
                name = f"{video_id}_f{sample_index:05d}.png"
                _write_png(frame_bgr, frames_dir / name)
                records.append(FrameRecord(
                    frame_id=f"{video_id}_f{sample_index:05d}",
                    source_video_id=video_id,
                    timestamp_s=timestamp,
                    image_path=f"{FRAMES_SUBDIR}/{name}",
                ))
                sample_index += 1
                target = _native_index(sample_index, native_fps, rate_fps)
            native_index += 1
    finally:
        cap.release()

    if not records:
        raise IngestError(f"no decodable frames in video: {video_file}")
    return records


def _write_png(frame_bgr: np.ndarray, path: Path) -> None:
    rgb = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2RGB)
    try:
        Image.fromarray(rgb).save(path, format="PNG")
    except OSError as exc:
        raise OutputError(f"cannot write frame image {path}: {exc}") from exc
