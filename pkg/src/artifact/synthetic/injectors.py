"""The four artifact injectors.

Every injector takes (image, intensity, seed), returns the corrupted image
plus a RegionMask of the touched area, and guarantees two things exactly:
pixels outside the mask are bit-identical to the input, and at least one
pixel inside the mask changed. Intensity in (0, 1] scales the footprint and
strength of the corruption.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from artifact.errors import ParameterError
from artifact.synthetic.scenes import MIN_SCENE_SIZE, _rng


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Binary region for one asserted label; dimensions match the frame."""

    label_index: int  # 1..4
    mask: np.ndarray  # (H, W) bool

    def __post_init__(self) -> None:
        if not 1 <= self.label_index <= 4:
            raise ParameterError(f"label_index out of range: {self.label_index}")
        if self.mask.dtype != bool or self.mask.ndim != 2:
            raise ParameterError("mask must be a 2-D boolean array")


def _validate(image: np.ndarray, intensity: float) -> None:
    if not isinstance(image, np.ndarray) or image.ndim != 3 or image.shape[2] != 3 \
            or image.dtype != np.uint8:
        raise ParameterError("image must be an (H, W, 3) uint8 array")
    if image.shape[0] < MIN_SCENE_SIZE or image.shape[1] < MIN_SCENE_SIZE:
        raise ParameterError(
            f"image must be at least {MIN_SCENE_SIZE}x{MIN_SCENE_SIZE}"
        )
    if not 0.0 < intensity <= 1.0:
        raise ParameterError(f"intensity must be in (0, 1], got {intensity}")


def _compose(image: np.ndarray, corrupted: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Locality by construction: outside the mask, pixels come from `image`."""
    return np.where(mask[..., None], corrupted, image)


def _changed_inside(image: np.ndarray, out: np.ndarray, mask: np.ndarray) -> bool:
    return bool((image[mask] != out[mask]).any())


def _scale(image: np.ndarray) -> float:
    return min(image.shape[0], image.shape[1]) / 64.0


def _edge_energy(image: np.ndarray) -> np.ndarray:
    gray = cv2.cvtColor(image, cv2.COLOR_RGB2GRAY).astype(np.float32)
    # Pre-smooth so fine background texture does not rival the actual
    # foreground/background boundary.
    gray = cv2.GaussianBlur(gray, (0, 0), sigmaX=1.5, sigmaY=1.5)
    gx = cv2.Sobel(gray, cv2.CV_32F, 1, 0, ksize=3)
    gy = cv2.Sobel(gray, cv2.CV_32F, 0, 1, ksize=3)
    return cv2.blur(np.hypot(gx, gy), (9, 9))


def _variance_map(image: np.ndarray) -> np.ndarray:
    gray = cv2.cvtColor(image, cv2.COLOR_RGB2GRAY).astype(np.float32)
    mean = cv2.blur(gray, (9, 9))
    mean_sq = cv2.blur(gray * gray, (9, 9))
    return np.maximum(mean_sq - mean * mean, 0.0)


def _pick_hotspot(rng: np.random.Generator, energy: np.ndarray,
                  margin: int, keep_out: np.ndarray | None = None,
                  ) -> tuple[int, int]:
    """Seeded choice among the strongest-energy interior pixels.

    ``keep_out`` marks centers whose footprint would touch a region that
    must stay untouched; they are skipped unless nothing else remains.
    """
    h, w = energy.shape
    margin = min(margin, (min(h, w) - 1) // 2)
    if keep_out is not None and not keep_out.all():
        energy = np.where(keep_out, -1.0, energy)
    interior = energy[margin:h - margin, margin:w - margin]
    flat = interior.ravel()
    k = max(1, flat.size // 33)  # top ~3%
    top = np.argpartition(flat, -k)[-k:]
    top.sort()
    pick = int(top[rng.integers(0, len(top))])
    iy, ix = divmod(pick, interior.shape[1])
    return iy + margin, ix + margin


def _grown(avoid: np.ndarray | None, extent: int) -> np.ndarray | None:
    """Dilate the avoid region so any center outside it keeps a footprint of
    the given half-extent clear of it."""
    if avoid is None or not avoid.any():
        return None
    size = 2 * extent + 1
    kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (size, size))
    return cv2.dilate(avoid.astype(np.uint8), kernel).astype(bool)


def _disk(shape: tuple[int, int], cy: int, cx: int, radius: int) -> np.ndarray:
    yy, xx = np.ogrid[0:shape[0], 0:shape[1]]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2


def _local_mean(image: np.ndarray, mask: np.ndarray) -> float:
    return float(cv2.cvtColor(image, cv2.COLOR_RGB2GRAY)[mask].mean())


def _stroke_color(image: np.ndarray, mask: np.ndarray) -> tuple[int, int, int]:
    return (30, 30, 30) if _local_mean(image, mask) > 127 else (225, 225, 225)


def inject_boundary_defect(image: np.ndarray, intensity: float, seed: int,
                           *, avoid: np.ndarray | None = None,
                           ) -> tuple[np.ndarray, RegionMask]:
    """Blur or stair-step the strongest edge neighborhood in the image."""
    _validate(image, intensity)
    rng = _rng(seed)
    s = _scale(image)
    radius = max(4, round((6.0 + 6.0 * intensity) * s))
    cy, cx = _pick_hotspot(rng, _edge_energy(image), margin=radius + 2,
                           keep_out=_grown(avoid, radius))
    mask = _disk(image.shape[:2], cy, cx, radius)

    if rng.integers(0, 2):
        # Chromatic smear: each channel blurred with its own width, so the
        # boundary grows colored fringes no clean scene (or other artifact)
        # can produce.
        sigmas = (1.0, 2.0 + 2.0 * intensity, 3.5 + 4.0 * intensity)
        corrupted = np.stack([
            cv2.GaussianBlur(image[..., c], (0, 0), sigmaX=sigmas[c],
                             sigmaY=sigmas[c])
            for c in range(3)
        ], axis=2)
    else:
        # Stair-step: alternating strips shifted in opposite directions tear
        # every edge in the region into a sawtooth.
        strip = 3 + round(2.0 * intensity)
        shift = 2 + round(3.0 * intensity)
        corrupted = image.copy()
        for band, y in enumerate(range(0, image.shape[0], strip)):
            s = shift if band % 2 == 0 else -shift
            corrupted[y:y + strip] = np.roll(image[y:y + strip], s, axis=1)

    out = _compose(image, corrupted, mask)
    if not _changed_inside(image, out, mask):
        # Degenerate input (e.g. constant region): draw a jagged edge instead.
        canvas = image.copy()
        color = _stroke_color(image, mask)
        step = max(2, radius // 3)
        pts = []
        for i, x in enumerate(range(cx - radius, cx + radius + 1, step)):
            pts.append((x, cy + (step if i % 2 else -step)))
        cv2.polylines(canvas, [np.array(pts, np.int32)], False, color,
                      thickness=max(1, radius // 4))
        out = _compose(image, canvas, mask)
    return out, RegionMask(1, mask)


def inject_texture_noise(image: np.ndarray, intensity: float, seed: int,
                         *, avoid: np.ndarray | None = None,
                         ) -> tuple[np.ndarray, RegionMask]:
    """Replace a rectangular patch by a flat fill or high-frequency noise."""
    _validate(image, intensity)
    rng = _rng(seed)
    h, w = image.shape[:2]
    s = _scale(image)
    pw = max(6, round((10.0 + 8.0 * intensity) * s * float(rng.uniform(0.8, 1.2))))
    ph = max(6, round((10.0 + 8.0 * intensity) * s * float(rng.uniform(0.8, 1.2))))
    pw, ph = min(pw, w - 4), min(ph, h - 4)
    for _ in range(20):
        x0 = int(rng.integers(2, w - pw - 1))
        y0 = int(rng.integers(2, h - ph - 1))
        if avoid is None or not avoid[y0:y0 + ph, x0:x0 + pw].any():
            break
    mask = np.zeros((h, w), bool)
    mask[y0:y0 + ph, x0:x0 + pw] = True

    patch = image[y0:y0 + ph, x0:x0 + pw]
    flat = np.empty_like(image)
    flat[y0:y0 + ph, x0:x0 + pw] = patch.reshape(-1, 3).mean(axis=0).astype(np.uint8)
    # Noise stays inside the scenes' value envelope: the signature is the
    # pixel-scale frequency, not extreme values (those belong to L3/L4).
    noise_patch = rng.integers(70, 191, size=patch.shape).astype(np.float32)
    blend = 0.6 + 0.4 * intensity
    noisy = np.empty_like(image)
    noisy[y0:y0 + ph, x0:x0 + pw] = np.clip(
        patch.astype(np.float32) * (1.0 - blend) + noise_patch * blend, 0, 255
    ).astype(np.uint8)

    candidates = [flat, noisy] if rng.integers(0, 2) else [noisy, flat]
    for corrupted in candidates:
        out = _compose(image, corrupted, mask)
        if _changed_inside(image, out, mask):
            return out, RegionMask(2, mask)
    # Both modes collapsed onto the input (vanishingly unlikely): flip one pixel.
    out = image.copy()
    out[y0, x0] ^= 0x80
    return out, RegionMask(2, mask)


def inject_joint_anomaly(image: np.ndarray, intensity: float,
                         seed: int, *, avoid: np.ndarray | None = None,
                         ) -> tuple[np.ndarray, RegionMask]:
    """Draw a two-segment limb whose joint bends back on itself."""
    _validate(image, intensity)
    rng = _rng(seed)
    h, w = image.shape[:2]
    s = _scale(image)
    seg = (7.0 + 5.0 * intensity) * s
    thickness = max(2, round((2.0 + 2.0 * intensity) * s))
    # Only the first segment is kept strictly inside; the fold-back is clipped.
    margin = int(seg) + thickness + 2

    for _ in range(20):
        cx = int(rng.integers(margin, max(margin + 1, w - margin)))
        cy = int(rng.integers(margin, max(margin + 1, h - margin)))
        theta = float(rng.uniform(0.0, 2.0 * np.pi))
        # Second segment folds back: far outside any plausible joint range.
        bend = np.pi + float(rng.uniform(-0.5, 0.5))
        p0 = np.array([cx, cy], np.float32)
        p1 = p0 + seg * np.array([np.cos(theta), np.sin(theta)], np.float32)
        p2 = p1 + seg * 0.9 * np.array(
            [np.cos(theta + bend), np.sin(theta + bend)], np.float32)
        pts = np.round(np.stack([p0, p1, p2])).astype(np.int32)
        pts[:, 0] = np.clip(pts[:, 0], 0, w - 1)
        pts[:, 1] = np.clip(pts[:, 1], 0, h - 1)

        probe = np.zeros((h, w), np.uint8)
        cv2.polylines(probe, [pts], False, 255, thickness=thickness + 2)
        cv2.circle(probe, tuple(pts[1]), thickness + 2, 255, -1)
        if avoid is None or not (probe.astype(bool) & avoid).any():
            break
    color = _stroke_color(image, probe.astype(bool))

    canvas = image.copy()
    cv2.polylines(canvas, [pts], False, color, thickness=thickness)
    cv2.circle(canvas, tuple(pts[1]), thickness, color, -1)

    mask_canvas = np.zeros((h, w), np.uint8)
    cv2.polylines(mask_canvas, [pts], False, 255, thickness=thickness + 2)
    cv2.circle(mask_canvas, tuple(pts[1]), thickness + 2, 255, -1)
    mask = mask_canvas.astype(bool)

    out = _compose(image, canvas, mask)
    if not _changed_inside(image, out, mask):
        canvas[mask] = 255 - canvas[mask]
        out = _compose(image, canvas, mask)
    return out, RegionMask(3, mask)


def _clashing(values: np.ndarray) -> np.ndarray:
    """Half-range hue shift: never the identity, so a filled hole or pasted
    patch always clashes with its local context by a fixed margin."""
    return ((values.astype(np.int16) + 128) % 256).astype(np.uint8)


def inject_object_mismatch(image: np.ndarray, intensity: float, seed: int,
                           *, avoid: np.ndarray | None = None,
                           ) -> tuple[np.ndarray, RegionMask]:
    """Overwrite an object part with its color-clashing mirror (the part
    effectively disappears under mismatched content), or paste that clashing
    duplicate at an inconsistent location elsewhere.

    The half-range color shift makes the mismatch a local property (patch
    clashes with its surroundings), detectable by center-surround filters
    rather than by whole-scene reasoning; the mirrored source keeps the
    patch textured, so it cannot be mistaken for a uniform-texture defect.
    """
    _validate(image, intensity)
    rng = _rng(seed)
    h, w = image.shape[:2]
    s = _scale(image)
    size = max(6, round((9.0 + 6.0 * intensity) * s))
    size = min(size, min(h, w) // 3)
    half = size // 2
    cy, cx = _pick_hotspot(rng, _variance_map(image), margin=half + 5,
                           keep_out=_grown(avoid, half + 1))
    y0, x0 = cy - half, cx - half
    src = (slice(y0, y0 + size), slice(x0, x0 + size))

    modes = ["erase", "duplicate"] if rng.integers(0, 2) else ["duplicate", "erase"]
    # Consume the offset draws regardless of mode so both orders agree.
    for _ in range(20):
        angle = float(rng.uniform(0.0, 2.0 * np.pi))
        dist = size * float(rng.uniform(1.2, 2.0))
        dy = int(np.clip(cy + dist * np.sin(angle), half, h - half - 1)) - half
        dx = int(np.clip(cx + dist * np.cos(angle), half, w - half - 1)) - half
        dst = (slice(dy, dy + size), slice(dx, dx + size))
        if avoid is None or not avoid[dst].any():
            break

    for mode in modes:
        mask = np.zeros((h, w), bool)
        canvas = image.copy()
        target = src if mode == "erase" else dst
        mask[target] = True
        canvas[target] = _clashing(image[src][::-1, ::-1])
        out = _compose(image, canvas, mask)
        if _changed_inside(image, out, mask):
            return out, RegionMask(4, mask)

    # Constant image: paste a tinted copy so the duplication is visible.
    mask = np.zeros((h, w), bool)
    mask[dst] = True
    canvas = image.copy()
    shift = -40 if _local_mean(image, mask) > 127 else 40
    canvas[dst] = np.clip(image[src].astype(np.int16) + shift, 0, 255).astype(np.uint8)
    return _compose(image, canvas, mask), RegionMask(4, mask)


INJECTORS = (
    inject_boundary_defect,
    inject_texture_noise,
    inject_joint_anomaly,
    inject_object_mismatch,
)
