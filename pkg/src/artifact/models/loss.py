"""Mean binary cross-entropy over the four independent heads."""

from __future__ import annotations

import torch

from artifact.errors import ContractError, ParameterError
from artifact.labels import NUM_LABELS
from artifact.models.classifier import PROB_EPS


def multilabel_loss(logits: torch.Tensor, targets: torch.Tensor, *,
                    weights=None, eps: float = PROB_EPS) -> torch.Tensor:
    """BCE between logistic(logits) and binary targets, averaged over batch
    and labels, with probabilities clamped into [eps, 1-eps].

    Optional per-label weights produce the weighted mean over labels of the
    per-label batch means, normalized by the weight sum (unit weights reduce
    to the plain mean).
    """
    if not isinstance(logits, torch.Tensor) or not isinstance(targets, torch.Tensor):
        raise ContractError("logits and targets must be tensors")
    if logits.shape != targets.shape:
        raise ContractError(
            f"shape mismatch: logits {tuple(logits.shape)} vs "
            f"targets {tuple(targets.shape)}"
        )
    if logits.ndim != 2 or logits.shape[1] != NUM_LABELS or logits.shape[0] < 1:
        raise ContractError(
            f"expected (B, {NUM_LABELS}) with B >= 1, got {tuple(logits.shape)}"
        )
    probs = torch.sigmoid(logits).clamp(eps, 1.0 - eps)
    t = targets.to(probs.dtype)
    bce = -(t * torch.log(probs) + (1.0 - t) * torch.log(1.0 - probs))
    per_label = bce.mean(dim=0)
    if weights is None:
        return per_label.mean()
    w = torch.as_tensor(weights, dtype=probs.dtype)
    if w.shape != (NUM_LABELS,) or (w <= 0).any():
        raise ParameterError(f"weights must be {NUM_LABELS} positive values")
    return (per_label * w).sum() / w.sum()
