"""Multi-label classifier: shared backbone, four independent binary heads."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
from PIL import Image

from artifact.errors import ConfigurationError, ParameterError, PreprocessingError
from artifact.labels import NUM_LABELS, TAXONOMY_VERSION, LabelVector
from artifact.models.backbones import (
    ARCHITECTURES,
    Backbone,
    ViTBackbone,
    build_backbone,
)

# Probabilities are clamped into [PROB_EPS, 1 - PROB_EPS] everywhere.
PROB_EPS = 1e-7


@dataclass(frozen=True)
class BackboneSpec:
    architecture_name: str
    pretrained: bool = False
    input_resolution: int = 64

    def __post_init__(self) -> None:
        if self.architecture_name not in ARCHITECTURES:
            raise ConfigurationError(
                f"unknown architecture {self.architecture_name!r} "
                f"(choose from {', '.join(ARCHITECTURES)})"
            )
        if self.input_resolution < 32:
            raise ParameterError(
                f"input_resolution must be >= 32, got {self.input_resolution}"
            )
        if (self.architecture_name == "vit_base"
                and self.input_resolution != ViTBackbone.required_resolution):
            raise ConfigurationError(
                f"vit_base requires input_resolution "
                f"{ViTBackbone.required_resolution}, got {self.input_resolution}"
            )


@dataclass(frozen=True)
class Prediction:
    probabilities: tuple[float, float, float, float]
    labels: LabelVector
    threshold: float

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold < 1.0:
            raise ParameterError(f"threshold must be in (0, 1), got {self.threshold}")
        expected = labels_from_probabilities(self.probabilities, self.threshold)
        if expected != self.labels:
            raise ParameterError(
                "labels inconsistent with probabilities at this threshold"
            )


def labels_from_probabilities(probabilities, threshold: float) -> LabelVector:
    """labels[i] = 1 exactly when probabilities[i] >= threshold."""
    return LabelVector.from_bits(
        [1 if p >= threshold else 0 for p in probabilities]
    )


class ClassifierModel(nn.Module):
    """Backbone features feeding four independent scalar binary heads.

    Each head owns its parameters, so perturbing head i moves logit i and
    nothing else while the backbone is frozen.
    """

    def __init__(self, backbone: Backbone, spec: BackboneSpec,
                 taxonomy_version: str = TAXONOMY_VERSION):
        super().__init__()
        self.backbone = backbone
        self.heads = nn.ModuleList(
            nn.Linear(backbone.feature_dim, 1) for _ in range(NUM_LABELS)
        )
        self.spec = spec
        self.taxonomy_version = taxonomy_version

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = self.backbone.features(x)
        return torch.cat([head(feats) for head in self.heads], dim=1)

    @property
    def normalization(self):
        return self.backbone.normalization


def build_classifier(spec: BackboneSpec, *, init_seed: int | None = None,
                     fetch_pretrained: bool | None = None) -> ClassifierModel:
    """Construct a classifier; with init_seed fixed, builds are identical.

    ``fetch_pretrained=False`` builds the architecture without touching the
    weight store (used when a checkpoint will overwrite the parameters).
    """
    fetch = spec.pretrained if fetch_pretrained is None else fetch_pretrained
    with torch.random.fork_rng():
        if init_seed is not None:
            torch.manual_seed(init_seed)
        backbone = build_backbone(spec.architecture_name, fetch)
        model = ClassifierModel(backbone, spec)
    model.eval()
    return model


def preprocess_image(image: np.ndarray, model: ClassifierModel) -> torch.Tensor:
    """uint8 RGB (H, W, 3) -> normalized float tensor (3, R, R).

    Resize to the model's input resolution (bilinear), scale to [0, 1], then
    standardize with the backbone's per-channel constants.
    """
    if not isinstance(image, np.ndarray) or image.ndim != 3 \
            or image.shape[2] != 3 or image.dtype != np.uint8:
        raise PreprocessingError("expected an (H, W, 3) uint8 RGB array")
    res = model.spec.input_resolution
    if image.shape[:2] != (res, res):
        image = np.asarray(
            Image.fromarray(image).resize((res, res), Image.BILINEAR)
        )
    x = torch.tensor(image, dtype=torch.float32).div_(255.0)
    x = x.permute(2, 0, 1)
    mean, std = model.normalization
    mean_t = torch.tensor(mean).view(3, 1, 1)
    std_t = torch.tensor(std).view(3, 1, 1)
    return (x - mean_t) / std_t


def preprocess_batch(images, model: ClassifierModel) -> torch.Tensor:
    return torch.stack([preprocess_image(img, model) for img in images])


def predict_batch(model: ClassifierModel, batch: torch.Tensor) -> torch.Tensor:
    """Forward a preprocessed batch; returns clamped probabilities (B, 4)."""
    if batch.ndim != 4 or batch.shape[1] != 3 \
            or batch.shape[2:] != (model.spec.input_resolution,) * 2:
        raise PreprocessingError(
            f"batch must be (B, 3, {model.spec.input_resolution}, "
            f"{model.spec.input_resolution}), got {tuple(batch.shape)}"
        )
    model.eval()
    with torch.no_grad():
        probs = torch.sigmoid(model(batch))
    return probs.clamp(PROB_EPS, 1.0 - PROB_EPS)


def predict(model: ClassifierModel, image: np.ndarray,
            threshold: float = 0.5) -> Prediction:
    if not 0.0 < threshold < 1.0:
        raise ParameterError(f"threshold must be in (0, 1), got {threshold}")
    batch = preprocess_image(image, model).unsqueeze(0)
    probs = tuple(float(p) for p in predict_batch(model, batch)[0])
    return Prediction(probs, labels_from_probabilities(probs, threshold), threshold)
