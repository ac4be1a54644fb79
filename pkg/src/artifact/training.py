"""Mini-batch training of the four-head classifier on a manifest split.

The reference path is single-threaded and fully deterministic in
TrainConfig.seed: the seed fixes model initialization and every epoch's
shuffle, and no global RNG state is consumed or touched.
"""

from __future__ import annotations

import copy
import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from artifact.errors import ArtifactIOError, ConfigurationError, OutputError, TrainingError
from artifact.dataset import DatasetManifest, FrameRecord, Split
from artifact.models import (
    BackboneSpec,
    ClassifierModel,
    build_classifier,
    multilabel_loss,
    preprocess_image,
    save_checkpoint,
)

_VAL_BATCH = 256


@dataclass(frozen=True)
class TrainConfig:
    backbone: BackboneSpec
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    threshold: float = 0.5
    loss_weights: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigurationError(
                f"threshold must be in (0, 1), got {self.threshold}")
        if self.loss_weights is not None:
            if len(self.loss_weights) != 4 or any(w <= 0 for w in self.loss_weights):
                raise ConfigurationError("loss_weights must be 4 positive values")

    def to_record(self) -> dict:
        return {
            "backbone": {
                "architecture_name": self.backbone.architecture_name,
                "pretrained": self.backbone.pretrained,
                "input_resolution": self.backbone.input_resolution,
            },
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "threshold": self.threshold,
            "loss_weights": list(self.loss_weights) if self.loss_weights else None,
        }


@dataclass
class TrainRun:
    config: TrainConfig
    loss_history: list[tuple[float, float]]  # (train_loss, val_loss) per epoch
    checkpoint_path: str
    wall_time_s: float
    optimizer: dict = field(default_factory=dict)
    best_epoch: int = 0
    # Audit trail: every frame id that ever contributed a gradient step.
    trained_frame_ids: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "config": self.config.to_record(),
            "loss_history": [
                {"epoch": i + 1, "train_loss": tr, "val_loss": va}
                for i, (tr, va) in enumerate(self.loss_history)
            ],
            "checkpoint_path": self.checkpoint_path,
            "wall_time_s": self.wall_time_s,
            "optimizer": self.optimizer,
            "best_epoch": self.best_epoch,
            "trained_frame_ids": self.trained_frame_ids,
        }


def load_frame_image(root: Path, frame: FrameRecord) -> np.ndarray:
    path = root / frame.image_path
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as exc:
        raise ArtifactIOError(
            f"cannot read image for frame {frame.frame_id!r}: {path}") from exc


def _split_tensors(model: ClassifierModel, frames: list[FrameRecord],
                   root: Path) -> tuple[torch.Tensor, torch.Tensor]:
    images = torch.stack([
        preprocess_image(load_frame_image(root, f), model) for f in frames
    ])
    targets = torch.tensor([f.labels.as_tuple() for f in frames],
                           dtype=torch.float32)
    return images, targets


def _evaluation_loss(model: ClassifierModel, images: torch.Tensor,
                     targets: torch.Tensor, weights) -> float:
    model.eval()
    with torch.no_grad():
        logits = torch.cat([
            model(images[i:i + _VAL_BATCH])
            for i in range(0, len(images), _VAL_BATCH)
        ])
        return float(multilabel_loss(logits, targets, weights=weights))


def train(config: TrainConfig, manifest: DatasetManifest,
          manifest_root: str | Path, out_dir: str | Path) -> TrainRun:
    """Fit a classifier on the manifest's TRAIN split; checkpoint the best
    validation epoch; return the run record with per-epoch loss curves."""
    if manifest.split_assignment is None:
        raise TrainingError("manifest has no TRAIN/VAL split; run split first")
    train_frames = manifest.split_frames(Split.TRAIN)
    val_frames = manifest.split_frames(Split.VAL)
    if not train_frames:
        raise TrainingError("TRAIN split is empty")
    if not val_frames:
        raise TrainingError("VAL split is empty")

    manifest_root = Path(manifest_root)
    out_dir = Path(out_dir)
    started = time.perf_counter()

    previous_threads = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        # Global torch seed: dropout draws from the default generator.
        torch.manual_seed(config.seed)
        model = build_classifier(config.backbone, init_seed=config.seed)
        x_train, y_train = _split_tensors(model, train_frames, manifest_root)
        x_val, y_val = _split_tensors(model, val_frames, manifest_root)

        optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate,
                                     weight_decay=1e-4)
        optimizer_record = {
            "name": "adam",
            "learning_rate": config.learning_rate,
            "betas": [0.9, 0.999],
            "eps": 1e-8,
            "weight_decay": 1e-4,
        }
        shuffler = torch.Generator().manual_seed(config.seed)

        n = len(train_frames)
        history: list[tuple[float, float]] = []
        fed_ids: set[str] = set()
        best_val = math.inf
        best_state = None
        best_epoch = 0

        for epoch in range(1, config.epochs + 1):
            model.train()
            perm = torch.randperm(n, generator=shuffler)
            epoch_loss = 0.0
            for b, start in enumerate(range(0, n, config.batch_size)):
                idx = perm[start:start + config.batch_size]
                fed_ids.update(train_frames[i].frame_id for i in idx.tolist())
                logits = model(x_train[idx])
                loss = multilabel_loss(logits, y_train[idx],
                                       weights=config.loss_weights)
                if not torch.isfinite(loss):
                    raise TrainingError(
                        f"non-finite training loss at epoch {epoch} batch {b}")
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                epoch_loss += float(loss.detach()) * len(idx)
            train_loss = epoch_loss / n

            val_loss = _evaluation_loss(model, x_val, y_val, config.loss_weights)
            if not math.isfinite(val_loss):
                raise TrainingError(f"non-finite validation loss at epoch {epoch}")
            history.append((train_loss, val_loss))

            if val_loss < best_val:
                best_val = val_loss
                best_state = copy.deepcopy(model.state_dict())
                best_epoch = epoch

        model.load_state_dict(best_state)
        checkpoint_path = save_checkpoint(
            model, out_dir / "model.ckpt",
            extra={
                "best_epoch": best_epoch,
                "best_val_loss": best_val,
                "threshold": config.threshold,
                "seed": config.seed,
                "optimizer": optimizer_record,
            },
        )
    finally:
        torch.set_num_threads(previous_threads)

    return TrainRun(
        config=config,
        loss_history=history,
        checkpoint_path=str(checkpoint_path),
        wall_time_s=time.perf_counter() - started,
        optimizer=optimizer_record,
        best_epoch=best_epoch,
        trained_frame_ids=sorted(fed_ids),
    )


def export_loss_curves(run: TrainRun, path: str | Path) -> tuple[Path, Path]:
    """Write the per-epoch loss table (CSV, source of truth) plus a plot."""
    path = Path(path)
    plot_path = path.with_suffix(".png")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for i, (train_loss, val_loss) in enumerate(run.loss_history, start=1):
                writer.writerow([i, f"{train_loss:.10g}", f"{val_loss:.10g}"])

        epochs = range(1, len(run.loss_history) + 1)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(epochs, [t for t, _ in run.loss_history], label="train")
        ax.plot(epochs, [v for _, v in run.loss_history], label="validation")
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        ax.legend()
        fig.tight_layout()
        fig.savefig(plot_path)
        plt.close(fig)
    except OSError as exc:
        raise OutputError(f"cannot write loss curves to {path}: {exc}") from exc
    return path, plot_path


def load_loss_table(path: str | Path) -> list[tuple[int, float, float]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            return [(int(r["epoch"]), float(r["train_loss"]), float(r["val_loss"]))
                    for r in reader]
    except OSError as exc:
        raise ArtifactIOError(f"cannot read loss table {path}: {exc}") from exc
