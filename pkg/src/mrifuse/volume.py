"""Core volume type: a dense 3-D scalar grid with spacing and kind metadata.

The canonical in-memory axis order is (x, y, z) with x fastest on disk, i.e.
``data[x, y, z]`` indexes the voxel at column x, row y, slice z. Volumes are
immutable after construction (the backing numpy array is marked read-only),
which makes them safe to share across threads.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import KindMismatch, ShapeMismatch


class ElementKind(Enum):
    """Supported voxel element kinds and their numpy dtypes."""

    U8 = "u8"
    I16 = "i16"
    F32 = "f32"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype({"u8": np.uint8, "i16": np.int16, "f32": np.float32}[self.value])

    @classmethod
    def from_dtype(cls, dtype) -> "ElementKind":
        dt = np.dtype(dtype)
        for kind in cls:
            if kind.dtype == dt.newbyteorder("="):
                return kind
        raise KindMismatch(f"unsupported element dtype {dt}; expected uint8, int16 or float32")


class Modality(Enum):
    """Channel tags: the four MRI acquisitions plus derived volumes."""

    FLAIR = "FLAIR"
    T1 = "T1"
    T2 = "T2"
    T1CE = "T1CE"
    EMBEDDED = "EMBEDDED"
    MASK = "MASK"


# Fixed iteration order for the acquisition channels; embedding and configs
# traverse modality maps in this order so results never depend on dict
# insertion order.
ACQUISITION_MODALITIES = (Modality.FLAIR, Modality.T1, Modality.T2, Modality.T1CE)


@dataclass(frozen=True)
class Volume:
    """A 3-D scalar grid plus voxel spacing in mm and optional tags.

    ``data`` holds raw stored values. When ``scale`` is set (slope, inter),
    the physically meaningful values are ``data * slope + inter``; use
    :meth:`values` or :meth:`resolved` to obtain them. Raw data is what
    round-trips bit-exactly through the NIfTI writer.
    """

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    modality: Modality | None = None
    scale: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ShapeMismatch(f"volume data must be 3-D, got ndim={arr.ndim}")
        if any(n < 1 for n in arr.shape):
            raise ShapeMismatch(f"volume extents must be positive, got {arr.shape}")
        ElementKind.from_dtype(arr.dtype)  # raises KindMismatch on anything exotic
        if len(self.spacing) != 3 or any(s <= 0 for s in self.spacing):
            raise ShapeMismatch(f"spacing components must be > 0, got {self.spacing}")
        arr = arr if arr.dtype.isnative else arr.astype(arr.dtype.newbyteorder("="))
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def element_kind(self) -> ElementKind:
        return ElementKind.from_dtype(self.data.dtype)

    @property
    def n_voxels(self) -> int:
        return int(self.data.size)

    def values(self) -> np.ndarray:
        """Stored values with any slope/intercept scaling applied.

        Returns float32 when scaling is active, otherwise the raw array.
        """
        if self.scale is None:
            return self.data
        slope, inter = self.scale
        return (self.data.astype(np.float64) * slope + inter).astype(np.float32)

    def resolved(self) -> "Volume":
        """A scale-free copy of this volume (float32 if scaling was active)."""
        if self.scale is None:
            return self
        return Volume(self.values(), self.spacing, self.modality, None)

    def with_data(self, data: np.ndarray, modality: Modality | None = None) -> "Volume":
        """New volume with replaced voxel grid, keeping spacing."""
        return Volume(data, self.spacing, self.modality if modality is None else modality)

    def with_modality(self, modality: Modality) -> "Volume":
        return Volume(self.data, self.spacing, modality, self.scale)
