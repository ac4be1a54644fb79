"""Whole-corpus synthesis: labeled frames with ground-truth region masks."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from artifact.errors import OutputError, ParameterError
from artifact.labels import NUM_LABELS, LabelVector
from artifact.dataset import DatasetManifest, FrameRecord, MaskRef, save_manifest
from artifact.synthetic.injectors import INJECTORS, RegionMask
from artifact.synthetic.scenes import SCENE_KINDS, generate_base_scene

_U64 = 0xFFFF_FFFF_FFFF_FFFF

FRAMES_SUBDIR = "frames"
MASKS_SUBDIR = "masks"


@dataclass(frozen=True)
class InjectionSpec:
    """Recipe for one synthetic corpus; equal specs give identical corpora."""

    seed: int
    artifact_probabilities: tuple[float, float, float, float]
    intensity: tuple[float, float, float, float] = (0.8, 0.8, 0.8, 0.8)
    scene_kind: str = "mixed"

    def __post_init__(self) -> None:
        if len(self.artifact_probabilities) != NUM_LABELS:
            raise ParameterError("artifact_probabilities must have 4 entries")
        for p in self.artifact_probabilities:
            if not 0.0 <= p <= 1.0:
                raise ParameterError(f"artifact probability out of [0, 1]: {p}")
        if len(self.intensity) != NUM_LABELS:
            raise ParameterError("intensity must have 4 entries")
        for v in self.intensity:
            if not 0.0 < v <= 1.0:
                raise ParameterError(f"intensity out of (0, 1]: {v}")
        if self.scene_kind not in SCENE_KINDS:
            raise ParameterError(f"unknown scene kind {self.scene_kind!r}")


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return x ^ (x >> 31)


def frame_seed(spec_seed: int, frame_index: int) -> int:
    """Per-frame seed: (mixed) corpus seed XOR frame index.

    A pure function of (spec_seed, frame_index), so parallel and serial
    generation agree bit-for-bit. The corpus seed is diffused through
    splitmix64 first; raw XOR would hand corpora with nearby seeds the same
    set of per-frame seeds, merely permuted.
    """
    return _splitmix64(spec_seed & _U64) ^ frame_index


def synthesize_frame(spec: InjectionSpec, frame_index: int, size: int,
                     ) -> tuple[np.ndarray, LabelVector, list[RegionMask]]:
    """One frame of the corpus: a pure function of (spec, frame_index, size)."""
    fseed = frame_seed(spec.seed, frame_index)
    rng = np.random.default_rng(fseed)
    scene_seed = int(rng.integers(0, _U64, dtype=np.uint64))
    draws = rng.random(NUM_LABELS)
    injector_seeds = [int(v) for v in rng.integers(0, _U64, size=NUM_LABELS,
                                                   dtype=np.uint64)]

    image = generate_base_scene(scene_seed, size, size, kind=spec.scene_kind)
    bits = [0] * NUM_LABELS
    regions: list[RegionMask] = []
    occupied = np.zeros((size, size), bool)
    for i in range(NUM_LABELS):
        if draws[i] < spec.artifact_probabilities[i]:
            # Later injectors keep clear of earlier regions: writing over an
            # earlier artifact would keep its label while destroying its
            # evidence.
            image, region = INJECTORS[i](
                image, spec.intensity[i], injector_seeds[i],
                avoid=occupied if occupied.any() else None)
            occupied |= region.mask
            bits[i] = 1
            regions.append(region)
    return image, LabelVector.from_bits(bits), regions


def write_mask_png(mask: np.ndarray, path: Path) -> None:
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(path, format="PNG")


def load_mask_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L")) > 127


def generate_synthetic_dataset(spec: InjectionSpec, n_frames: int,
                               out_dir: str | Path, *, size: int = 64,
                               ) -> DatasetManifest:
    """Write a fully labeled synthetic corpus and its manifest.

    Output layout under ``out_dir``: ``manifest.jsonl``, ``frames/*.png`` and
    ``masks/*.png``; the injected labels are recorded exactly, and every
    injected artifact's region mask is attached as a human_regions entry.
    """
    if n_frames < 1:
        raise ParameterError(f"n_frames must be >= 1, got {n_frames}")
    out_dir = Path(out_dir)
    try:
        (out_dir / FRAMES_SUBDIR).mkdir(parents=True, exist_ok=True)
        (out_dir / MASKS_SUBDIR).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out_dir}: {exc}") from exc

    frames: list[FrameRecord] = []
    for idx in range(n_frames):
        image, labels, regions = synthesize_frame(spec, idx, size)
        stem = f"synth_f{idx:05d}"
        image_rel = f"{FRAMES_SUBDIR}/{stem}.png"
        try:
            Image.fromarray(image).save(out_dir / image_rel, format="PNG")
            refs = []
            for region in regions:
                mask_rel = f"{MASKS_SUBDIR}/{stem}_l{region.label_index}.png"
                write_mask_png(region.mask, out_dir / mask_rel)
                refs.append(MaskRef(region.label_index, mask_rel))
        except OSError as exc:
            raise OutputError(f"cannot write frame {stem}: {exc}") from exc
        frames.append(FrameRecord(
            frame_id=stem,
            source_video_id="synthetic",
            timestamp_s=float(idx),
            image_path=image_rel,
            labels=labels,
            human_regions=tuple(refs) if refs else None,
        ))

    manifest = DatasetManifest(frames=frames, resolution=(size, size))
    save_manifest(manifest, out_dir / "manifest.jsonl")
    return manifest
