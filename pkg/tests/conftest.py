from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
import pytest

from artifact.labels import LabelVector
from artifact.dataset import DatasetManifest, FrameRecord


def frame_gray_value(native_index: int) -> int:
    return (native_index * 7) % 251


def write_test_video(path: Path, n_frames: int, fps: float,
                     size: tuple[int, int] = (64, 64)) -> Path:
    """Write a lossless clip whose frame i is the uniform gray frame_gray_value(i).

    FFV1 keeps the pixel values exact, so a decoded frame identifies the
    native index it came from.
    """
    fourcc = cv2.VideoWriter_fourcc(*"FFV1")
    writer = cv2.VideoWriter(str(path), fourcc, fps, size)
    assert writer.isOpened(), f"cannot open video writer for {path}"
    for i in range(n_frames):
        frame = np.full((size[1], size[0], 3), frame_gray_value(i), np.uint8)
        writer.write(frame)
    writer.release()
    return path


def make_manifest(label_rows: list[tuple[int, int, int, int] | None],
                  resolution: tuple[int, int] | None = None) -> DatasetManifest:
    """Manifest with one synthetic record per row; None rows stay UNLABELED."""
    frames = []
    for i, row in enumerate(label_rows):
        frames.append(FrameRecord(
            frame_id=f"vid_f{i:05d}",
            source_video_id="vid",
            timestamp_s=i * 0.5,
            image_path=f"frames/vid_f{i:05d}.png",
            labels=LabelVector.from_bits(row) if row is not None else None,
        ))
    return DatasetManifest(frames=frames, resolution=resolution)


@pytest.fixture
def video_10s_30fps(tmp_path: Path) -> Path:
    return write_test_video(tmp_path / "clip10s.avi", n_frames=300, fps=30.0)
