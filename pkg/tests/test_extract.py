from __future__ import annotations

import math
from pathlib import Path

import cv2
import numpy as np
import pytest
from PIL import Image

from artifact.errors import IngestError, ParameterError
from artifact.dataset import extract_frames

from conftest import frame_gray_value, write_test_video


def reference_decode(video: Path) -> tuple[int, float]:
    """Independent decoder pass: total readable frames and native fps."""
    cap = cv2.VideoCapture(str(video))
    fps = cap.get(cv2.CAP_PROP_FPS)
    n = 0
    while cap.read()[0]:
        n += 1
    cap.release()
    return n, fps


def expected_count(n_frames: int, fps: float, rate: float) -> int:
    """Brute-force the sampling law: count k with k/rate <= last frame time."""
    last_ts = (n_frames - 1) / fps
    k = 0
    while (k + 1) / rate <= last_ts + 1e-12:
        k += 1
    return k + 1


def test_rate_two_on_10s_video(video_10s_30fps, tmp_path):
    records = extract_frames(video_10s_30fps, 2.0, tmp_path / "out")
    assert len(records) == 20
    assert [r.timestamp_s for r in records] == [k * 0.5 for k in range(20)]
    assert all(r.labels is None for r in records)


def test_rate_point_one_keeps_only_t0(video_10s_30fps, tmp_path):
    records = extract_frames(video_10s_30fps, 0.1, tmp_path / "out")
    assert len(records) == 1
    assert records[0].timestamp_s == 0.0


def test_3p2s_clip_rate_two(tmp_path):
    # 3.2 s at 30 fps = 96 native frames
    video = write_test_video(tmp_path / "clip.avi", n_frames=96, fps=30.0)
    n_native, fps = reference_decode(video)
    assert n_native == 96

    records = extract_frames(video, 2.0, tmp_path / "out")
    assert len(records) == expected_count(n_native, fps, 2.0) == 7
    assert records[-1].timestamp_s == 3.0


def test_sampled_frames_come_from_correct_native_indices(video_10s_30fps, tmp_path):
    records = extract_frames(video_10s_30fps, 2.0, tmp_path / "out")
    for k, record in enumerate(records):
        img = np.asarray(Image.open(tmp_path / "out" / record.image_path))
        native_index = k * 15  # 30 fps / 2 fps
        assert img[0, 0, 0] == frame_gray_value(native_index)


@pytest.mark.parametrize("n_frames,fps,rate", [
    (300, 30.0, 2.0),
    (96, 30.0, 2.0),
    (4, 10.0, 3.0),     # last sample would overshoot the final native frame
    (45, 25.0, 2.0),    # rate does not divide fps
    (30, 12.0, 12.0),   # rate equals native rate
    (7, 24.0, 1.0),
])
def test_extraction_count_law(tmp_path, n_frames, fps, rate):
    video = write_test_video(tmp_path / f"clip_{n_frames}_{rate}.avi", n_frames, fps)
    n_native, native_fps = reference_decode(video)
    assert n_native == n_frames

    records = extract_frames(video, rate, tmp_path / f"out_{n_frames}_{rate}")
    assert len(records) == expected_count(n_native, native_fps, rate)
    for k, record in enumerate(records):
        assert record.timestamp_s == k / rate
    # timestamps strictly increasing within the video
    ts = [r.timestamp_s for r in records]
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_images_are_lossless_png(video_10s_30fps, tmp_path):
    records = extract_frames(video_10s_30fps, 1.0, tmp_path / "out")
    first = tmp_path / "out" / records[0].image_path
    assert first.suffix == ".png"
    img = np.asarray(Image.open(first))
    assert (img == frame_gray_value(0)).all()


def test_undecodable_video_names_file(tmp_path):
    bogus = tmp_path / "not_a_video.mp4"
    bogus.write_text("this is not video data")
    with pytest.raises(IngestError, match="not_a_video.mp4"):
        extract_frames(bogus, 2.0, tmp_path / "out")


def test_missing_video_is_ingest_error(tmp_path):
    with pytest.raises(IngestError):
        extract_frames(tmp_path / "absent.mp4", 2.0, tmp_path / "out")


def test_rate_above_native_rejected(video_10s_30fps, tmp_path):
    with pytest.raises(ParameterError):
        extract_frames(video_10s_30fps, 31.0, tmp_path / "out")


def test_nonpositive_rate_rejected(video_10s_30fps, tmp_path):
    with pytest.raises(ParameterError):
        extract_frames(video_10s_30fps, 0.0, tmp_path / "out")


def test_exact_multiple_targets_have_no_float_drift(tmp_path):
    # 120 frames at 24 fps sampled at 8 fps: targets k*3 exactly
    video = write_test_video(tmp_path / "c.avi", 120, 24.0)
    records = extract_frames(video, 8.0, tmp_path / "out")
    assert len(records) == math.floor((119 / 24.0) * 8.0) + 1
    img = np.asarray(Image.open(tmp_path / "out" / records[10].image_path))
    assert img[0, 0, 0] == frame_gray_value(30)
