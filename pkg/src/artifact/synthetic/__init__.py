"""Synthetic scene generation and artifact injection with ground truth."""

from artifact.synthetic.corpus import (
    InjectionSpec,
    frame_seed,
    generate_synthetic_dataset,
    load_mask_png,
    synthesize_frame,
    write_mask_png,
)
from artifact.synthetic.injectors import (
    INJECTORS,
    RegionMask,
    inject_boundary_defect,
    inject_joint_anomaly,
    inject_object_mismatch,
    inject_texture_noise,
)
from artifact.synthetic.scenes import MIN_SCENE_SIZE, SCENE_KINDS, generate_base_scene

__all__ = [
    "INJECTORS",
    "InjectionSpec",
    "MIN_SCENE_SIZE",
    "RegionMask",
    "SCENE_KINDS",
    "frame_seed",
    "generate_base_scene",
    "generate_synthetic_dataset",
    "inject_boundary_defect",
    "inject_joint_anomaly",
    "inject_object_mismatch",
    "inject_texture_noise",
    "load_mask_png",
    "synthesize_frame",
    "write_mask_png",
]
