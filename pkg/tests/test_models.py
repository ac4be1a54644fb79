from __future__ import annotations

import math

import numpy as np
import pytest
import torch

from artifact.errors import (
    CheckpointError,
    ConfigurationError,
    ContractError,
    ParameterError,
    PreprocessingError,
    WeightsUnavailableError,
)
from artifact.labels import LabelVector
from artifact.models import (
    PROB_EPS,
    BackboneSpec,
    Prediction,
    build_classifier,
    labels_from_probabilities,
    load_checkpoint,
    multilabel_loss,
    predict,
    predict_batch,
    preprocess_image,
    save_checkpoint,
)
from artifact.synthetic import generate_base_scene

TINY = BackboneSpec("tiny_cnn", pretrained=False, input_resolution=64)


def random_images(n: int, size: int = 64, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
            for _ in range(n)]


# ---------------------------------------------------------------------------
# build_classifier
# ---------------------------------------------------------------------------

def test_tiny_cnn_forward_shape():
    model = build_classifier(TINY, init_seed=1)
    x = torch.randn(5, 3, 64, 64)
    assert model(x).shape == (5, 4)


@pytest.mark.parametrize("arch,res", [
    ("resnet50", 224),
    ("efficientnet_b3", 224),
    ("efficientnet_b4", 224),
    ("vit_base", 224),
])
def test_named_backbones_emit_four_logits(arch, res):
    model = build_classifier(BackboneSpec(arch, False, res), init_seed=0)
    x = torch.randn(2, 3, res, res)
    with torch.no_grad():
        assert model(x).shape == (2, 4)


def test_identical_spec_and_seed_build_identical_models():
    x = torch.randn(3, 3, 64, 64)
    with torch.no_grad():
        a = build_classifier(TINY, init_seed=42)(x)
        b = build_classifier(TINY, init_seed=42)(x)
    assert torch.equal(a, b)


def test_unknown_architecture_rejected():
    with pytest.raises(ConfigurationError):
        BackboneSpec("resnet18", False, 64)


def test_vit_requires_224():
    with pytest.raises(ConfigurationError):
        BackboneSpec("vit_base", False, 64)


def test_pretrained_fetch_failure_is_explicit(monkeypatch):
    import torchvision.models as tvm

    def boom(*args, **kwargs):
        raise OSError("network unreachable")

    monkeypatch.setattr(tvm, "resnet50", boom)
    with pytest.raises(WeightsUnavailableError):
        build_classifier(BackboneSpec("resnet50", True, 224))


def test_tiny_cnn_has_no_pretrained_weights():
    with pytest.raises(ConfigurationError):
        build_classifier(BackboneSpec("tiny_cnn", True, 64))


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------

def test_threshold_definition_example():
    labels = labels_from_probabilities((0.9, 0.2, 0.6, 0.4), 0.5)
    assert labels == LabelVector(1, 0, 1, 0)


def test_threshold_boundary_is_inclusive():
    labels = labels_from_probabilities((0.5, 0.5, 0.5, 0.5), 0.5)
    assert labels == LabelVector(1, 1, 1, 1)


def test_prediction_invariant_enforced():
    with pytest.raises(ParameterError):
        Prediction((0.9, 0.2, 0.6, 0.4), LabelVector(0, 0, 0, 0), 0.5)
    Prediction((0.9, 0.2, 0.6, 0.4), LabelVector(1, 0, 1, 0), 0.5)


def test_untrained_mean_probability_band():
    # Sanity band measured on random init: heads start near-uninformative.
    model = build_classifier(TINY, init_seed=7)
    probs = np.array([predict(model, img).probabilities
                      for img in random_images(100, seed=3)])
    means = probs.mean(axis=0)
    assert ((means > 0.2) & (means < 0.8)).all(), means


def test_predict_resizes_other_resolutions():
    model = build_classifier(TINY, init_seed=0)
    pred = predict(model, random_images(1, size=100)[0])
    assert len(pred.probabilities) == 4


def test_predict_rejects_bad_inputs():
    model = build_classifier(TINY, init_seed=0)
    with pytest.raises(PreprocessingError):
        predict(model, np.zeros((64, 64), np.uint8))
    with pytest.raises(PreprocessingError):
        predict(model, np.zeros((64, 64, 3), np.float32))
    with pytest.raises(ParameterError):
        predict(model, random_images(1)[0], threshold=1.0)
    with pytest.raises(PreprocessingError):
        predict_batch(model, torch.randn(1, 3, 32, 32))


def test_probabilities_are_clamped():
    model = build_classifier(TINY, init_seed=0)
    with torch.no_grad():
        for head in model.heads:
            head.bias.fill_(50.0)  # saturate upward
    pred = predict(model, random_images(1)[0])
    assert all(PROB_EPS <= p <= 1.0 - PROB_EPS for p in pred.probabilities)


def test_threshold_monotonicity():
    rng = np.random.default_rng(11)
    for _ in range(200):
        probs = tuple(rng.uniform(0.0, 1.0, size=4))
        lo, hi = sorted(rng.uniform(0.05, 0.95, size=2))
        low_bits = labels_from_probabilities(probs, lo).as_tuple()
        high_bits = labels_from_probabilities(probs, hi).as_tuple()
        assert all(h <= l for l, h in zip(low_bits, high_bits))


def test_head_independence():
    model = build_classifier(TINY, init_seed=5)
    image = generate_base_scene(1, 64, 64)
    base = predict(model, image).probabilities
    for i in range(4):
        perturbed = build_classifier(TINY, init_seed=5)
        with torch.no_grad():
            perturbed.heads[i].bias.add_(1.0)
        probs = predict(perturbed, image).probabilities
        for j in range(4):
            if j == i:
                assert probs[j] != base[j]
            else:
                assert probs[j] == base[j]


# ---------------------------------------------------------------------------
# multilabel_loss
# ---------------------------------------------------------------------------

def brute_force_bce(logits: np.ndarray, targets: np.ndarray,
                    eps: float = PROB_EPS) -> float:
    """Per-element oracle: plain python mean of elementwise BCE."""
    total = 0.0
    b, k = logits.shape
    for r in range(b):
        for c in range(k):
            p = 1.0 / (1.0 + math.exp(-logits[r, c]))
            p = min(max(p, eps), 1.0 - eps)
            t = targets[r, c]
            total += -(t * math.log(p) + (1 - t) * math.log(1.0 - p))
    return total / (b * k)


def test_loss_at_half_probability_is_ln2():
    logits = torch.zeros(3, 4, dtype=torch.float64)
    targets = torch.randint(0, 2, (3, 4)).double()
    assert multilabel_loss(logits, targets).item() == pytest.approx(math.log(2.0), abs=1e-12)


def test_loss_confident_and_correct_is_at_most_two_eps():
    logits = torch.full((2, 4), 100.0)
    targets = torch.ones(2, 4)
    assert multilabel_loss(logits, targets).item() <= 2 * PROB_EPS


def test_loss_matches_brute_force_oracle():
    rng = np.random.default_rng(21)
    logits = rng.normal(0.0, 2.0, size=(2, 4))
    targets = rng.integers(0, 2, size=(2, 4)).astype(np.float64)
    ours = multilabel_loss(torch.tensor(logits), torch.tensor(targets)).item()
    assert ours == pytest.approx(brute_force_bce(logits, targets), rel=1e-10)


def test_loss_weighting_reduces_to_mean_for_unit_weights():
    rng = np.random.default_rng(2)
    logits = torch.tensor(rng.normal(size=(5, 4)))
    targets = torch.tensor(rng.integers(0, 2, size=(5, 4)).astype(np.float64))
    plain = multilabel_loss(logits, targets)
    weighted = multilabel_loss(logits, targets, weights=(1.0, 1.0, 1.0, 1.0))
    assert torch.allclose(plain, weighted)


def test_loss_shape_mismatch_is_contract_error():
    with pytest.raises(ContractError):
        multilabel_loss(torch.zeros(2, 4), torch.zeros(3, 4))
    with pytest.raises(ContractError):
        multilabel_loss(torch.zeros(2, 3), torch.zeros(2, 3))
    with pytest.raises(ParameterError):
        multilabel_loss(torch.zeros(2, 4), torch.zeros(2, 4), weights=(1.0, -1.0, 1.0, 1.0))


def test_loss_gradient_matches_central_differences():
    # Criterion: relative error < 1e-4 against central finite differences,
    # evaluated at logits produced by a tiny_cnn forward pass.
    model = build_classifier(TINY, init_seed=3)
    batch = torch.stack([preprocess_image(img, model)
                         for img in random_images(4, seed=9)])
    with torch.no_grad():
        logits0 = model(batch).double()
    targets = torch.randint(0, 2, (4, 4), generator=torch.Generator().manual_seed(0)).double()

    logits = logits0.clone().requires_grad_(True)
    loss = multilabel_loss(logits, targets)
    loss.backward()
    analytic = logits.grad.numpy()

    h = 1e-6
    for r in range(4):
        for c in range(4):
            up = logits0.clone()
            down = logits0.clone()
            up[r, c] += h
            down[r, c] -= h
            fd = (multilabel_loss(up, targets) - multilabel_loss(down, targets)).item() / (2 * h)
            rel = abs(analytic[r, c] - fd) / max(abs(fd), 1e-12)
            assert rel < 1e-4, (r, c, analytic[r, c], fd)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path):
    model = build_classifier(TINY, init_seed=13)
    path = save_checkpoint(model, tmp_path / "m.ckpt", extra={"val_loss": 0.25})
    loaded, extra = load_checkpoint(path)
    assert extra == {"val_loss": 0.25}
    assert loaded.spec == model.spec
    x = torch.randn(2, 3, 64, 64)
    with torch.no_grad():
        assert torch.equal(model(x), loaded(x))


def test_checkpoint_taxonomy_mismatch_refused(tmp_path):
    model = build_classifier(TINY, init_seed=0)
    model.taxonomy_version = "rogue-taxonomy-v9"
    path = save_checkpoint(model, tmp_path / "m.ckpt")
    with pytest.raises(CheckpointError, match="taxonomy"):
        load_checkpoint(path)


def test_checkpoint_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.ckpt")
