"""Backbone registry: feature extractors with Grad-CAM layer maps.

tiny_cnn is hand-built and always available offline; the named
architectures come from torchvision and can optionally load pretrained
weights. Every backbone exposes pooled features plus a map of
spatial layers usable as Grad-CAM targets.
"""

from __future__ import annotations

import math
from typing import Callable

import torch
import torch.nn as nn
import torchvision.models as tvm

from artifact.errors import ConfigurationError, WeightsUnavailableError

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# (module, output transform) pairs; the transform maps the hooked module
# output to a (B, C, H, W) spatial feature map when it is not one already.
CamLayer = tuple[nn.Module, Callable[[torch.Tensor], torch.Tensor] | None]


class Backbone(nn.Module):
    """Feature extractor contract shared by all registry entries."""

    feature_dim: int
    default_cam_layer: str
    normalization: tuple[tuple[float, float, float], tuple[float, float, float]]

    def features(self, x: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def cam_layers(self) -> dict[str, CamLayer]:
        raise NotImplementedError


class ConvBlock(nn.Module):
    def __init__(self, c_in: int, c_out: int):
        super().__init__()
        self.conv = nn.Conv2d(c_in, c_out, kernel_size=3, padding=1)
        self.bn = nn.BatchNorm2d(c_out)
        # Not in-place: the activation output is hooked for Grad-CAM.
        self.act = nn.ReLU(inplace=False)
        self.pool = nn.MaxPool2d(2)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pool(self.act(self.bn(self.conv(x))))


class TinyCnn(Backbone):
    """Three conv blocks plus a pooled head; runs anywhere, trains in seconds.

    The head concatenates average- and max-pooled features: artifacts are
    small and local, so "strongest evidence anywhere" matters as much as the
    global average.
    """

    feature_dim = 384
    default_cam_layer = "block3"
    normalization = ((0.5, 0.5, 0.5), (0.5, 0.5, 0.5))

    def __init__(self):
        super().__init__()
        self.block1 = ConvBlock(3, 48)
        self.block2 = ConvBlock(48, 96)
        self.block3 = ConvBlock(96, 192)
        self.avg_pool = nn.AdaptiveAvgPool2d(1)
        self.max_pool = nn.AdaptiveMaxPool2d(1)
        self.dropout = nn.Dropout(0.2)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        x = self.block3(self.block2(self.block1(x)))
        pooled = torch.cat(
            [self.avg_pool(x).flatten(1), self.max_pool(x).flatten(1)], dim=1
        )
        return self.dropout(pooled)

    def cam_layers(self) -> dict[str, CamLayer]:
        # Activation outputs before each block's pooling step.
        return {
            "block1": (self.block1.act, None),
            "block2": (self.block2.act, None),
            "block3": (self.block3.act, None),
        }


class ResNet50Backbone(Backbone):
    default_cam_layer = "layer4"
    normalization = (IMAGENET_MEAN, IMAGENET_STD)

    def __init__(self, weights):
        super().__init__()
        self.net = tvm.resnet50(weights=weights)
        self.feature_dim = self.net.fc.in_features
        self.net.fc = nn.Identity()

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

    def cam_layers(self) -> dict[str, CamLayer]:
        return {f"layer{i}": (getattr(self.net, f"layer{i}"), None)
                for i in (1, 2, 3, 4)}


class EfficientNetBackbone(Backbone):
    default_cam_layer = "features"
    normalization = (IMAGENET_MEAN, IMAGENET_STD)

    def __init__(self, variant: str, weights):
        super().__init__()
        self.net = getattr(tvm, variant)(weights=weights)
        self.feature_dim = self.net.classifier[1].in_features
        self.net.classifier = nn.Identity()

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

    def cam_layers(self) -> dict[str, CamLayer]:
        return {"features": (self.net.features, None)}


def _tokens_to_grid(tokens: torch.Tensor) -> torch.Tensor:
    """(B, 1 + N, D) patch tokens to a (B, D, side, side) grid, class token dropped."""
    patches = tokens[:, 1:, :]
    side = int(math.isqrt(patches.shape[1]))
    return patches.reshape(patches.shape[0], side, side, -1).permute(0, 3, 1, 2)


class ViTBackbone(Backbone):
    # The classification head reads only the class token, so the final
    # block's patch tokens get no gradient; the penultimate block is the
    # last spatial layer with a usable gradient signal.
    default_cam_layer = "encoder_penultimate"
    normalization = (IMAGENET_MEAN, IMAGENET_STD)
    required_resolution = 224

    def __init__(self, weights):
        super().__init__()
        self.net = tvm.vit_b_16(weights=weights)
        self.feature_dim = self.net.hidden_dim
        self.net.heads = nn.Identity()

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

    def cam_layers(self) -> dict[str, CamLayer]:
        return {"encoder_penultimate": (self.net.encoder.layers[-2], _tokens_to_grid)}


_WEIGHT_ENUMS = {
    "resnet50": lambda: tvm.ResNet50_Weights.IMAGENET1K_V2,
    "efficientnet_b3": lambda: tvm.EfficientNet_B3_Weights.IMAGENET1K_V1,
    "efficientnet_b4": lambda: tvm.EfficientNet_B4_Weights.IMAGENET1K_V1,
    "vit_base": lambda: tvm.ViT_B_16_Weights.IMAGENET1K_V1,
}

_BUILDERS = {
    "tiny_cnn": lambda weights: TinyCnn(),
    "resnet50": ResNet50Backbone,
    "efficientnet_b3": lambda weights: EfficientNetBackbone("efficientnet_b3", weights),
    "efficientnet_b4": lambda weights: EfficientNetBackbone("efficientnet_b4", weights),
    "vit_base": ViTBackbone,
}

ARCHITECTURES = tuple(_BUILDERS)

MODEL_DISPLAY_NAMES = {
    "tiny_cnn": "TinyCNN",
    "resnet50": "ResNet-50",
    "efficientnet_b3": "EfficientNet-B3",
    "efficientnet_b4": "EfficientNet-B4",
    "vit_base": "ViT-Base",
}


def build_backbone(architecture_name: str, pretrained: bool) -> Backbone:
    if architecture_name not in _BUILDERS:
        raise ConfigurationError(
            f"unknown architecture {architecture_name!r} "
            f"(choose from {', '.join(ARCHITECTURES)})"
        )
    weights = None
    if pretrained:
        if architecture_name == "tiny_cnn":
            raise ConfigurationError("tiny_cnn has no pretrained weights")
        weights = _WEIGHT_ENUMS[architecture_name]()
    try:
        return _BUILDERS[architecture_name](weights)
    except Exception as exc:
        if pretrained:
            # Never fall back silently to random initialization.
            raise WeightsUnavailableError(
                f"could not fetch pretrained weights for {architecture_name}: {exc}"
            ) from exc
        raise
