"""Deterministic train/validation splitting of labeled frames."""

from __future__ import annotations

import random
from dataclasses import replace

from artifact.errors import ParameterError, SplitError
from artifact.dataset.records import DatasetManifest, Split


def split_dataset(manifest: DatasetManifest, train_fraction: float,
                  seed: int) -> DatasetManifest:
    """Assign every labeled frame to TRAIN or VAL.

    The labeled frames are shuffled by a pseudorandom permutation keyed only
    by ``seed`` (Mersenne Twister, stable across runs and platforms); the
    first round(train_fraction * N) go to TRAIN, the rest to VAL. Calling
    again with the same inputs reproduces the assignment exactly.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must be in (0, 1), got {train_fraction}")
    labeled_ids = [f.frame_id for f in manifest.labeled_frames()]
    n = len(labeled_ids)
    if n < 2:
        raise SplitError(f"need at least 2 labeled frames to split, have {n}")

    shuffled = list(labeled_ids)
    random.Random(seed).shuffle(shuffled)
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n - n_train < 1:
        raise SplitError(
            f"split of {n} frames at fraction {train_fraction} leaves an empty side"
        )

    assignment = {fid: Split.TRAIN for fid in shuffled[:n_train]}
    assignment.update({fid: Split.VAL for fid in shuffled[n_train:]})
    out = replace(manifest, frames=list(manifest.frames),
                  split_seed=seed, split_assignment=assignment)
    out.validate()
    return out
