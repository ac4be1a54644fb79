"""Model layer: backbones, the four-head classifier, loss, checkpoints."""

from artifact.models.backbones import (
    ARCHITECTURES,
    IMAGENET_MEAN,
    IMAGENET_STD,
    MODEL_DISPLAY_NAMES,
    Backbone,
    TinyCnn,
    build_backbone,
)
from artifact.models.checkpoint import (
    CHECKPOINT_FORMAT_VERSION,
    load_checkpoint,
    save_checkpoint,
)
from artifact.models.classifier import (
    PROB_EPS,
    BackboneSpec,
    ClassifierModel,
    Prediction,
    build_classifier,
    labels_from_probabilities,
    predict,
    predict_batch,
    preprocess_batch,
    preprocess_image,
)
from artifact.models.loss import multilabel_loss

__all__ = [
    "ARCHITECTURES",
    "CHECKPOINT_FORMAT_VERSION",
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "MODEL_DISPLAY_NAMES",
    "Backbone",
    "BackboneSpec",
    "ClassifierModel",
    "PROB_EPS",
    "Prediction",
    "TinyCnn",
    "build_backbone",
    "build_classifier",
    "labels_from_probabilities",
    "load_checkpoint",
    "multilabel_loss",
    "predict",
    "predict_batch",
    "preprocess_batch",
    "preprocess_image",
    "save_checkpoint",
]
