"""Slice-wise 16-bit grayscale PNG export with a reconstruction manifest.

Each axial slice becomes one non-interlaced 16-bit PNG; a JSON sidecar
records shape, spacing and the affine (scale, offset) that maps stored
16-bit codes back to voxel values: ``value = code * scale + offset``.

Integer-valued volumes whose value range fits in 16 bits are stored with
scale 1 (identity quantization) and reconstruct exactly; everything else is
quantized across [min, max] with per-voxel error at most (max - min)/65535.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import IoFailure, NonFiniteValues, ShapeMismatch
from .volume import Volume

U16_MAX = 65535
MANIFEST_NAME = "manifest.json"


@dataclass
class PngManifest:
    shape: tuple[int, int, int]
    spacing: tuple[float, float, float]
    scale: float
    offset: float
    slice_range: tuple[int, int]
    files: list[str]
    source_dtype: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PngManifest":
        raw = json.loads(text)
        return cls(
            shape=tuple(raw["shape"]),
            spacing=tuple(raw["spacing"]),
            scale=float(raw["scale"]),
            offset=float(raw["offset"]),
            slice_range=tuple(raw["slice_range"]),
            files=list(raw["files"]),
            source_dtype=str(raw["source_dtype"]),
        )


def _quantization_affine(data: np.ndarray) -> tuple[float, float]:
    """(scale, offset) mapping values into [0, 65535] codes.

    Identity (scale 1, offset min) when all values are integral and span at
    most 65535; otherwise a min/max stretch.
    """
    lo = float(data.min())
    hi = float(data.max())
    integral = bool(np.all(data == np.rint(data)))
    if integral and hi - lo <= U16_MAX:
        return 1.0, lo
    if hi == lo:
        return 1.0, lo
    return (hi - lo) / U16_MAX, lo


def export_png_stack(v: Volume, out_dir, stem: str = "slice", slice_range=None) -> PngManifest:
    """Write one PNG per axial slice plus the manifest; returns the manifest.

    Files are named ``<stem>_z<index>.png``. PNG rows run along y and
    columns along x; the importer reverses this, so the round trip preserves
    the canonical (x, y, z) layout.
    """
    data = np.asarray(v.data)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValues("volume contains NaN or infinite values")
    nx, ny, nz = v.shape
    scale, offset = _quantization_affine(data)
    codes = np.rint((data.astype(np.float64) - offset) / scale)
    codes = np.clip(codes, 0, U16_MAX).astype(np.uint16)
    if slice_range is None:
        slice_range = (0, nz)

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for z in range(nz):
            name = f"{stem}_z{z:04d}.png"
            plane = np.ascontiguousarray(codes[:, :, z].T)
            Image.fromarray(plane).save(out_dir / name, format="PNG")
            files.append(name)
        manifest = PngManifest(
            shape=(nx, ny, nz),
            spacing=v.spacing,
            scale=scale,
            offset=offset,
            slice_range=tuple(slice_range),
            files=files,
            source_dtype=str(v.data.dtype),
        )
        (out_dir / MANIFEST_NAME).write_text(manifest.to_json())
    except OSError as exc:
        raise IoFailure(f"PNG export to {out_dir} failed: {exc}") from exc
    return manifest


def import_png_stack(src_dir) -> Volume:
    """Rebuild a volume from a PNG stack directory written by export.

    Values come back as float32 via the manifest affine; reconstruction is
    exact for identity-quantized (integer) sources and within one
    quantization step otherwise.
    """
    src_dir = Path(src_dir)
    try:
        manifest = PngManifest.from_json((src_dir / MANIFEST_NAME).read_text())
        slices = []
        for name in manifest.files:
            with Image.open(src_dir / name) as img:
                arr = np.asarray(img, dtype=np.int64)
            slices.append(arr.T)
    except OSError as exc:
        raise IoFailure(f"PNG import from {src_dir} failed: {exc}") from exc
    codes = np.stack(slices, axis=-1)
    if codes.shape != tuple(manifest.shape):
        raise ShapeMismatch(f"stack shape {codes.shape} != manifest shape {manifest.shape}")
    values = codes.astype(np.float64) * manifest.scale + manifest.offset
    return Volume(values.astype(np.float32), spacing=manifest.spacing)
