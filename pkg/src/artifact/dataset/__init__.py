"""Dataset layer: frame records, manifests, extraction, splits and stats."""

from artifact.dataset.extract import extract_frames
from artifact.dataset.manifest_io import (
    load_manifest,
    manifest_to_lines,
    save_manifest,
    verify_images,
)
from artifact.dataset.records import (
    MANIFEST_VERSION,
    DatasetManifest,
    FrameRecord,
    MaskRef,
    Split,
)
from artifact.dataset.splits import split_dataset
from artifact.dataset.stats import (
    FrequencyTable,
    format_frequency_table,
    label_frequency,
    truncate_percent,
)

__all__ = [
    "MANIFEST_VERSION",
    "DatasetManifest",
    "FrameRecord",
    "FrequencyTable",
    "MaskRef",
    "Split",
    "extract_frames",
    "format_frequency_table",
    "label_frequency",
    "load_manifest",
    "manifest_to_lines",
    "save_manifest",
    "split_dataset",
    "truncate_percent",
    "verify_images",
]
