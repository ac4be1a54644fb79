"""The four-label artifact taxonomy and its binary label vector."""

from __future__ import annotations

from dataclasses import dataclass, fields

from artifact.errors import ManifestError, ParameterError

TAXONOMY_VERSION = "four-label-v1"
NUM_LABELS = 4

# Canonical field/key order. Index i in any 4-vector refers to LABEL_KEYS[i].
LABEL_KEYS = (
    "l1_boundary_edge",
    "l2_texture_noise",
    "l3_movement_joint",
    "l4_object_mismatch",
)

LABEL_TITLES = (
    "L1: boundary / edge defect",
    "L2: texture / noise patch",
    "L3: movement / joint anomaly",
    "L4: object mismatch / disappearance",
)

# Plain-language definitions, shared with the annotation UI via GET /taxonomy.
LABEL_DESCRIPTIONS = (
    "Fuzzy or stair-stepped outline where a foreground object meets the background.",
    "A patch of surface that is unnaturally flat or unnaturally noisy compared to its surroundings.",
    "A limb or elongated part bent at a physically impossible angle.",
    "An object or body part that vanishes, duplicates, or does not match its surroundings.",
)


@dataclass(frozen=True)
class LabelVector:
    """Binary presence vector over the four artifact categories.

    The all-zero vector is legal and means "reviewed, artifact-free". An
    unreviewed frame carries no LabelVector at all (``labels=None`` on the
    frame record).
    """

    l1_boundary_edge: int = 0
    l2_texture_noise: int = 0
    l3_movement_joint: int = 0
    l4_object_mismatch: int = 0

    def __post_init__(self) -> None:
        for key in LABEL_KEYS:
            bit = getattr(self, key)
            if bit not in (0, 1):
                raise ParameterError(f"label component {key} must be 0 or 1, got {bit!r}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return tuple(getattr(self, key) for key in LABEL_KEYS)

    def as_dict(self) -> dict[str, int]:
        return {key: getattr(self, key) for key in LABEL_KEYS}

    @classmethod
    def from_bits(cls, bits) -> "LabelVector":
        bits = tuple(bits)
        if len(bits) != NUM_LABELS:
            raise ParameterError(f"expected {NUM_LABELS} label bits, got {len(bits)}")
        return cls(*bits)

    @classmethod
    def from_dict(cls, mapping: dict) -> "LabelVector":
        """Strict parse: every key must be a known label key, all four present."""
        for key in mapping:
            if key not in LABEL_KEYS:
                raise ManifestError(f"unknown label key: {key!r}")
        for key in LABEL_KEYS:
            if key not in mapping:
                raise ManifestError(f"missing label key: {key!r}")
        return cls(**{key: mapping[key] for key in LABEL_KEYS})


def taxonomy_record() -> dict:
    """Machine-readable taxonomy, served to the annotation UI."""
    return {
        "taxonomy_version": TAXONOMY_VERSION,
        "labels": [
            {
                "index": i + 1,
                "key": LABEL_KEYS[i],
                "title": LABEL_TITLES[i],
                "description": LABEL_DESCRIPTIONS[i],
            }
            for i in range(NUM_LABELS)
        ],
    }


# Keep the dataclass field order locked to the canonical key order.
assert tuple(f.name for f in fields(LabelVector)) == LABEL_KEYS
