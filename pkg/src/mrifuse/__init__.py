"""Multi-modal MRI fusion and preprocessing toolkit.

NIfTI-1 I/O, pixel-level channel embedding with selectable integer
semantics, a slice/crop/clip/normalize preprocessing chain with two stage
orders, Dice-based mask evaluation, and a stage-ordering benchmark.
"""

__version__ = "0.1.0"

from .bench import COMBINATIONS, BenchReport, BenchRow, emit_table, run_bench
from .config import RunConfig
from .embedding import EmbedConfig, EmbedMode, ModalitySet, embed
from .errors import MrifuseError
from .metrics import ConfusionCounts, DiceReport, confusion, dice, dice_loss, evaluate_batch
from .nifti_io import (
    DatasetIndex,
    Grade,
    NiftiHeader,
    PatientRecord,
    load_volume,
    parse_nifti,
    save_volume,
    scan_dataset,
    write_nifti,
)
from .pipeline import (
    PipelineConfig,
    PipelineOrder,
    PreprocessedSample,
    Provenance,
    clip_percentiles,
    run_pipeline,
    slice_window,
    spatial_crop,
    zscore_normalize,
)
from .png_stack import PngManifest, export_png_stack, import_png_stack
from .synthetic import SyntheticSpec, synthetic_patient, write_synthetic_dataset
from .volume import ElementKind, Modality, Volume

__all__ = [
    "BenchReport",
    "BenchRow",
    "COMBINATIONS",
    "ConfusionCounts",
    "DatasetIndex",
    "DiceReport",
    "ElementKind",
    "EmbedConfig",
    "EmbedMode",
    "Grade",
    "Modality",
    "ModalitySet",
    "MrifuseError",
    "NiftiHeader",
    "PatientRecord",
    "PipelineConfig",
    "PipelineOrder",
    "PngManifest",
    "PreprocessedSample",
    "Provenance",
    "RunConfig",
    "SyntheticSpec",
    "Volume",
    "clip_percentiles",
    "confusion",
    "dice",
    "dice_loss",
    "embed",
    "emit_table",
    "evaluate_batch",
    "export_png_stack",
    "import_png_stack",
    "load_volume",
    "parse_nifti",
    "run_bench",
    "run_pipeline",
    "save_volume",
    "scan_dataset",
    "slice_window",
    "spatial_crop",
    "synthetic_patient",
    "write_nifti",
    "write_synthetic_dataset",
    "zscore_normalize",
]
