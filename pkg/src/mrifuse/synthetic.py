"""Seeded synthetic patients shaped like real multi-channel brain MRI.

Volumes have a zero background, an ellipsoidal "brain" of positive random
intensities, and a smaller ellipsoidal "tumor" in the ground-truth mask
labeled with the usual sub-region values {1, 2, 4}. Everything is a pure
function of the seed, so benchmark and pipeline runs are reproducible
without the licensed dataset.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import ModalitySet
from .nifti_io import MODALITY_TOKENS, SEG_TOKEN, Grade, save_volume
from .volume import ACQUISITION_MODALITIES, ElementKind, Modality, Volume

BRATS_SHAPE = (240, 240, 155)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for generated patients; stands in for a DatasetIndex."""

    seed: int = 0
    shape: tuple[int, int, int] = BRATS_SHAPE
    n_patients: int = 1
    element_kind: ElementKind = ElementKind.F32


def _ellipsoid_mask(shape, center_frac, radii_frac) -> np.ndarray:
    nx, ny, nz = shape
    cx, cy, cz = (f * n for f, n in zip(center_frac, shape))
    rx, ry, rz = (max(f * n, 1.0) for f, n in zip(radii_frac, shape))
    x = (np.arange(nx) - cx)[:, None, None] / rx
    y = (np.arange(ny) - cy)[None, :, None] / ry
    z = (np.arange(nz) - cz)[None, None, :] / rz
    return x * x + y * y + z * z <= 1.0


def synthetic_patient(
    seed: int,
    shape: tuple[int, int, int] = BRATS_SHAPE,
    element_kind: ElementKind = ElementKind.F32,
) -> tuple[ModalitySet, Volume]:
    """One patient: four co-registered channels plus a labeled tumor mask."""
    rng = np.random.default_rng(seed)
    brain = _ellipsoid_mask(shape, (0.5, 0.5, 0.5), (0.42, 0.42, 0.45))
    jitter = rng.uniform(-0.08, 0.08, size=3)
    tumor_center = tuple(0.5 + j for j in jitter)
    tumor = _ellipsoid_mask(shape, tumor_center, (0.10, 0.10, 0.12))
    core = _ellipsoid_mask(shape, tumor_center, (0.06, 0.06, 0.07))
    enhancing = _ellipsoid_mask(shape, tumor_center, (0.03, 0.03, 0.035))

    members: dict[Modality, Volume] = {}
    for mod in ACQUISITION_MODALITIES:
        if element_kind is ElementKind.U8:
            vals = rng.integers(1, 256, size=shape).astype(np.uint8)
        elif element_kind is ElementKind.I16:
            vals = rng.integers(1, 2001, size=shape).astype(np.int16)
        else:
            vals = rng.uniform(10.0, 1000.0, size=shape).astype(np.float32)
        vals = np.where(brain, vals, 0).astype(element_kind.dtype)
        members[mod] = Volume(vals, modality=mod)

    labels = np.zeros(shape, dtype=np.uint8)
    labels[tumor & brain] = 2   # edema
    labels[core & brain] = 1    # necrotic / non-enhancing core
    labels[enhancing & brain] = 4  # enhancing tumor
    gt = Volume(labels, modality=Modality.MASK)
    return ModalitySet(members), gt


def write_synthetic_dataset(
    root: Path | str,
    n_patients: int = 2,
    seed: int = 0,
    shape: tuple[int, int, int] = BRATS_SHAPE,
    element_kind: ElementKind = ElementKind.F32,
) -> Path:
    """Materialize a BraTS-shaped directory tree of synthetic patients.

    Patients alternate HGG/LGG grades; files follow the default
    `<root>/<grade>/<id>/<id>_<modality>.nii.gz` layout.
    """
    root = Path(root)
    for i in range(n_patients):
        grade = Grade.HGG if i % 2 == 0 else Grade.LGG
        pid = f"case_{i:04d}"
        modalities, gt = synthetic_patient(seed + i, shape, element_kind)
        pdir = root / grade.value / pid
        for mod, token in MODALITY_TOKENS.items():
            save_volume(pdir / f"{pid}_{token}.nii.gz", modalities.members[mod])
        save_volume(pdir / f"{pid}_{SEG_TOKEN}.nii.gz", gt)
    return root
