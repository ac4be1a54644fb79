"""Grad-CAM heatmaps, overlays, and model-vs-human attention agreement.

The gradient target is the selected label's pre-sigmoid logit (post-sigmoid
gradients vanish once the head saturates). Channel weights are the spatial
average of the logit's gradient at the chosen layer; the map is the
rectified weighted sum of activation channels, max-normalized unless the
rectified map is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from matplotlib import colormaps
from PIL import Image

from artifact.errors import (
    AgreementError,
    ConfigurationError,
    ContractError,
    OutputError,
    ParameterError,
)
from artifact.labels import NUM_LABELS
from artifact.models import ClassifierModel, preprocess_image

DEFAULT_PERCENTILE = 80.0
_COLORMAP = "jet"  # warm red = important, cool blue = not
_OVERLAY_ALPHA = 0.4


@dataclass(frozen=True, eq=False)
class Heatmap:
    """Normalized spatial relevance grid for one label at one layer."""

    values: np.ndarray  # (H', W') float32 in [0, 1]
    label_index: int  # 1..4
    layer_id: str
    pre_norm_max: float

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ContractError("heatmap values must be 2-D")
        if self.pre_norm_max < 0:
            raise ContractError("pre_norm_max must be nonnegative")

    def to_record(self) -> dict:
        return {
            "label_index": self.label_index,
            "layer_id": self.layer_id,
            "pre_norm_max": self.pre_norm_max,
            "shape": list(self.values.shape),
            "values": [[round(float(v), 6) for v in row] for row in self.values],
        }


def compute_gradcam(model: ClassifierModel, image: np.ndarray,
                    label_index: int, layer_id: str | None = None) -> Heatmap:
    """Heatmap of the spatial evidence for one label's logit."""
    if not 1 <= label_index <= NUM_LABELS:
        raise ContractError(f"label_index must be 1..{NUM_LABELS}, got {label_index}")
    layers = model.backbone.cam_layers()
    if layer_id is None:
        layer_id = model.backbone.default_cam_layer
    if layer_id not in layers:
        raise ConfigurationError(
            f"unknown layer_id {layer_id!r} for "
            f"{model.spec.architecture_name} (choose from {sorted(layers)})")
    module, transform = layers[layer_id]

    captured: dict[str, torch.Tensor] = {}

    def hook(_module, _inputs, output):
        captured["raw"] = output

    model.eval()
    handle = module.register_forward_hook(hook)
    try:
        with torch.enable_grad():
            batch = preprocess_image(image, model).unsqueeze(0)
            logits = model(batch)
            raw_output = captured["raw"]
            score = logits[0, label_index - 1]
            # Gradients flow to the module output; the spatial transform (a
            # pure reshape) is applied to activations and gradients alike.
            grads = torch.autograd.grad(score, raw_output)[0]
    finally:
        handle.remove()

    activations = (transform(raw_output) if transform else raw_output).detach()
    grads = transform(grads) if transform else grads
    if activations.ndim != 4:
        raise ConfigurationError(f"layer {layer_id!r} did not produce a spatial map")

    weights = grads.mean(dim=(2, 3), keepdim=True)
    raw = torch.relu((weights * activations).sum(dim=1))[0]
    pre_norm_max = float(raw.max())
    if pre_norm_max > 0.0:
        values = (raw / pre_norm_max).detach().numpy().astype(np.float32)
    else:
        values = np.zeros(raw.shape, np.float32)
    return Heatmap(values=values, label_index=label_index,
                   layer_id=layer_id, pre_norm_max=pre_norm_max)


def upsample(heatmap: Heatmap, height: int, width: int) -> np.ndarray:
    """Bilinear upsampling of the normalized grid to image resolution."""
    img = Image.fromarray(heatmap.values.astype(np.float32), mode="F")
    return np.asarray(img.resize((width, height), Image.BILINEAR),
                      dtype=np.float32)


def overlay(heatmap: Heatmap, image: np.ndarray, path: str | Path,
            alpha: float = _OVERLAY_ALPHA) -> Path:
    """Blend the colormapped heatmap over the image and write a PNG."""
    if not isinstance(image, np.ndarray) or image.ndim != 3 or image.shape[2] != 3:
        raise ContractError("image must be (H, W, 3)")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    up = upsample(heatmap, image.shape[0], image.shape[1])
    colored = colormaps[_COLORMAP](up)[..., :3] * 255.0
    blended = ((1.0 - alpha) * image.astype(np.float64)
               + alpha * colored).round().astype(np.uint8)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(blended).save(path, format="PNG")
    except OSError as exc:
        raise OutputError(f"cannot write overlay {path}: {exc}") from exc
    return path


def binarize(heatmap: Heatmap, height: int, width: int,
             percentile: float) -> np.ndarray:
    """Pixels at or above the percentile value of the upsampled map.

    When the inclusive threshold would flood the whole (non-constant) map,
    which happens when the percentile lands on a massive tie at the minimum,
    the comparison turns strict so the hot set stays the top of the map.
    """
    up = upsample(heatmap, height, width)
    threshold = np.percentile(up, percentile)
    binary = up >= threshold
    if binary.all() and up.max() > up.min():
        binary = up > threshold
    return binary


def attention_agreement(heatmap: Heatmap, human_region: np.ndarray,
                        percentile: float = DEFAULT_PERCENTILE) -> float:
    """IoU between the percentile-binarized heatmap and a human region mask."""
    if not 0.0 < percentile < 100.0:
        raise ParameterError(f"percentile must be in (0, 100), got {percentile}")
    mask = np.asarray(human_region)
    if mask.dtype != bool or mask.ndim != 2:
        raise ContractError("human_region must be a 2-D boolean mask")
    if not mask.any():
        raise AgreementError("cannot score agreement against an empty mask")
    binary = binarize(heatmap, mask.shape[0], mask.shape[1], percentile)
    intersection = int((binary & mask).sum())
    union = int((binary | mask).sum())
    return intersection / union


def localization_hit(heatmap: Heatmap, region_mask: np.ndarray) -> bool:
    """True when the upsampled heatmap's argmax pixel falls inside the mask."""
    mask = np.asarray(region_mask)
    if not mask.any():
        raise AgreementError("cannot localize against an empty mask")
    up = upsample(heatmap, mask.shape[0], mask.shape[1])
    y, x = np.unravel_index(int(np.argmax(up)), up.shape)
    return bool(mask[y, x])
