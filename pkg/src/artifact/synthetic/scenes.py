"""Procedural base scenes: textured background, crisp foreground, figure.

Scenes are built to give every injector something to corrupt: a textured
background (texture patches stand out), a foreground object with a crisp
boundary (blur stands out), a stick figure (limb anomalies have company),
and small props (duplications/erasures have candidates).

Every clean scene stays inside a bounded appearance envelope: pixel values
in the mid-range (roughly 70..190), moderate texture amplitude, no large
perfectly flat regions, no pixel-scale full-contrast noise. The injectors
each leave that envelope in their own characteristic direction, which is
what makes the four labels separable at desk scale.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from artifact.errors import ParameterError

MIN_SCENE_SIZE = 32
SCENE_KINDS = ("mixed", "geometric", "figure")

# Clean-scene envelope bounds for pixel values.
ENVELOPE_LOW = 70
ENVELOPE_HIGH = 190

_U64 = 0xFFFF_FFFF_FFFF_FFFF


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & _U64)


def _contrast_color(rng: np.random.Generator, reference: np.ndarray) -> tuple:
    """A clearly different color that still stays inside the envelope."""
    out = []
    for ch in range(3):
        offset = int(rng.integers(40, 71))
        value = reference[ch] - offset if reference[ch] > 130 else reference[ch] + offset
        out.append(int(np.clip(value, ENVELOPE_LOW, ENVELOPE_HIGH)))
    return tuple(out)


def _textured_background(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    c0 = rng.integers(90, 171, size=3).astype(np.float32)
    c1 = rng.integers(90, 171, size=3).astype(np.float32)
    axis = rng.integers(0, 2)
    ramp = np.linspace(0.0, 1.0, height if axis == 0 else width, dtype=np.float32)
    t = ramp[:, None] if axis == 0 else ramp[None, :]
    bg = c0[None, None, :] * (1.0 - t[..., None]) + c1[None, None, :] * t[..., None]

    amplitude = float(rng.uniform(8.0, 16.0))
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float32)
    kind = rng.integers(0, 3)
    if kind == 0:  # oriented sinusoidal stripes
        theta = float(rng.uniform(0.0, np.pi))
        freq = float(rng.uniform(3.0, 8.0))
        phase = (xx * np.cos(theta) + yy * np.sin(theta)) / max(width, height)
        mod = amplitude * np.sin(2.0 * np.pi * freq * phase)
    elif kind == 1:  # fine checkerboard (cells stay below pixelation blocks)
        cell = int(rng.integers(3, 6))
        mod = amplitude * (((xx // cell + yy // cell) % 2) * 2.0 - 1.0)
    else:  # smoothed speckle
        noise = rng.normal(0.0, amplitude, size=(height, width)).astype(np.float32)
        k = np.ones((3, 3), np.float32) / 9.0
        pad = np.pad(noise, 1, mode="edge")
        mod = sum(
            pad[dy:dy + height, dx:dx + width] * k[dy, dx]
            for dy in range(3) for dx in range(3)
        )
    return np.clip(bg + mod[..., None], ENVELOPE_LOW, ENVELOPE_HIGH).astype(np.uint8)


def _draw_stick_figure(draw: ImageDraw.ImageDraw, rng: np.random.Generator,
                       width: int, height: int, color: tuple) -> None:
    scale = min(width, height)
    cx = float(rng.uniform(0.25, 0.75)) * width
    top = float(rng.uniform(0.15, 0.35)) * height
    head_r = scale * float(rng.uniform(0.05, 0.08))
    torso = scale * float(rng.uniform(0.18, 0.26))
    thickness = max(1, round(scale / 32))

    draw.ellipse([cx - head_r, top - head_r, cx + head_r, top + head_r],
                 outline=color, width=thickness)
    neck = (cx, top + head_r)
    hip = (cx, top + head_r + torso)
    draw.line([neck, hip], fill=color, width=thickness)
    for side in (-1, 1):
        arm_angle = float(rng.uniform(0.35, 1.1)) * side
        arm_len = torso * float(rng.uniform(0.55, 0.8))
        ax = neck[0] + arm_len * np.sin(arm_angle)
        ay = neck[1] + arm_len * np.cos(arm_angle) * 0.9
        draw.line([neck, (ax, ay)], fill=color, width=thickness)
        leg_angle = float(rng.uniform(0.15, 0.5)) * side
        leg_len = torso * float(rng.uniform(0.7, 1.0))
        lx = hip[0] + leg_len * np.sin(leg_angle)
        ly = hip[1] + leg_len * np.cos(leg_angle)
        draw.line([hip, (lx, ly)], fill=color, width=thickness)


def generate_base_scene(seed: int, width: int, height: int,
                        kind: str = "mixed") -> np.ndarray:
    """Deterministic clean scene as an (H, W, 3) uint8 RGB array."""
    if width < MIN_SCENE_SIZE or height < MIN_SCENE_SIZE:
        raise ParameterError(
            f"scene must be at least {MIN_SCENE_SIZE}x{MIN_SCENE_SIZE}, "
            f"got {width}x{height}"
        )
    if kind not in SCENE_KINDS:
        raise ParameterError(f"unknown scene kind {kind!r} (choose from {SCENE_KINDS})")

    rng = _rng(seed)
    if kind == "mixed":
        kind = "figure" if rng.integers(0, 2) else "geometric"

    bg = _textured_background(rng, width, height)
    mean_bg = bg.reshape(-1, 3).mean(axis=0)
    img = Image.fromarray(bg)
    draw = ImageDraw.Draw(img)
    scale = min(width, height)

    # Main foreground object: crisp-edged ellipse or polygon. The interior
    # carries a two-tone stripe pattern so large perfectly-flat regions do
    # not occur in clean scenes.
    obj_color = _contrast_color(rng, mean_bg)
    half = scale * float(rng.uniform(0.14, 0.22))
    cx = float(rng.uniform(0.3, 0.7)) * width
    cy = float(rng.uniform(0.3, 0.7)) * height
    shape_canvas = Image.new("L", (width, height), 0)
    shape_draw = ImageDraw.Draw(shape_canvas)
    if rng.integers(0, 2):
        box = [cx - half, cy - half * 0.8, cx + half, cy + half * 0.8]
        draw.ellipse(box, fill=obj_color)
        shape_draw.ellipse(box, fill=255)
    else:
        n_sides = int(rng.integers(3, 6))
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_sides))
        pts = [(cx + half * np.cos(a), cy + half * np.sin(a)) for a in angles]
        draw.polygon(pts, fill=obj_color)
        shape_draw.polygon(pts, fill=255)

    arr = np.asarray(img, dtype=np.int16)
    obj_mask = np.asarray(shape_canvas) > 0
    yy, xx = np.mgrid[0:height, 0:width]
    period = int(rng.integers(3, 5))
    coords = yy if rng.integers(0, 2) else xx
    stripes = ((coords // period) % 2).astype(bool)
    tone = int(rng.integers(18, 33)) * (1 if mean_bg.mean() < 127 else -1)
    arr[obj_mask & stripes] = np.clip(
        arr[obj_mask & stripes] + tone, ENVELOPE_LOW, ENVELOPE_HIGH)
    img = Image.fromarray(arr.astype(np.uint8))
    draw = ImageDraw.Draw(img)

    if kind == "figure":
        fig_color = _contrast_color(rng, mean_bg)
        _draw_stick_figure(draw, rng, width, height, fig_color)

    # Small outlined props, colored from the scene palette so clean scenes
    # stay locally color-coherent; interiors are too small to mimic a
    # flat-patch artifact.
    palette = np.stack([mean_bg, np.array(obj_color, np.float32)])
    for _ in range(int(rng.integers(2, 4))):
        s = scale * float(rng.uniform(0.04, 0.07))
        px = float(rng.uniform(0.1, 0.9)) * width
        py = float(rng.uniform(0.1, 0.9)) * height
        mix = float(rng.uniform(0.2, 0.8))
        base = palette[0] * mix + palette[1] * (1.0 - mix)
        jitter = rng.uniform(-15.0, 15.0, size=3)
        prop_color = tuple(
            int(v) for v in np.clip(base + jitter, ENVELOPE_LOW, ENVELOPE_HIGH))
        outline = tuple(
            int(np.clip(v * 0.75, ENVELOPE_LOW, ENVELOPE_HIGH)) for v in prop_color)
        if rng.integers(0, 2):
            draw.rectangle([px - s, py - s, px + s, py + s],
                           fill=prop_color, outline=outline, width=1)
        else:
            draw.ellipse([px - s, py - s, px + s, py + s],
                         fill=prop_color, outline=outline, width=1)

    return np.asarray(img, dtype=np.uint8).copy()
