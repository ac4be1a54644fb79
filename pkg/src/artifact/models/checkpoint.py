"""Versioned model checkpoints carrying spec + taxonomy + preprocessing."""

from __future__ import annotations

from pathlib import Path

import torch

from artifact.errors import CheckpointError, OutputError
from artifact.labels import TAXONOMY_VERSION
from artifact.models.classifier import BackboneSpec, ClassifierModel, build_classifier

CHECKPOINT_FORMAT_VERSION = 1


def save_checkpoint(model: ClassifierModel, path: str | Path,
                    extra: dict | None = None) -> Path:
    path = Path(path)
    mean, std = model.normalization
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "architecture_name": model.spec.architecture_name,
        "pretrained": bool(model.spec.pretrained),
        "input_resolution": int(model.spec.input_resolution),
        "taxonomy_version": model.taxonomy_version,
        "normalization_mean": list(mean),
        "normalization_std": list(std),
        "state_dict": model.state_dict(),
        "extra": dict(extra or {}),
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, path)
    except OSError as exc:
        raise OutputError(f"cannot write checkpoint {path}: {exc}") from exc
    return path


def load_checkpoint(path: str | Path,
                    expected_taxonomy: str = TAXONOMY_VERSION,
                    ) -> tuple[ClassifierModel, dict]:
    """Rebuild the model from a checkpoint; returns (model, extra).

    Refuses checkpoints whose taxonomy_version does not match: label indices
    would silently mean different things.
    """
    path = Path(path)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError as exc:
        raise CheckpointError(f"checkpoint not found: {path}") from exc
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {version!r} "
            f"(expected {CHECKPOINT_FORMAT_VERSION})"
        )
    taxonomy = payload.get("taxonomy_version")
    if taxonomy != expected_taxonomy:
        raise CheckpointError(
            f"taxonomy_version mismatch: checkpoint has {taxonomy!r}, "
            f"runtime expects {expected_taxonomy!r}"
        )
    spec = BackboneSpec(
        architecture_name=payload["architecture_name"],
        pretrained=payload["pretrained"],
        input_resolution=payload["input_resolution"],
    )
    # The checkpoint carries the parameters; never re-fetch pretrained weights.
    model = build_classifier(spec, fetch_pretrained=False)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["extra"]
