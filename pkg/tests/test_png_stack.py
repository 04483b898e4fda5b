"""16-bit PNG stack export/import: losslessness and quantization bounds."""

import json

import numpy as np
import pytest

from mrifuse.errors import NonFiniteValues
from mrifuse.png_stack import export_png_stack, import_png_stack
from mrifuse.volume import Volume


def test_u16_range_integers_round_trip_exactly(tmp_path, rng):
    data = rng.integers(0, 65536, size=(6, 5, 4)).astype(np.float32)
    vol = Volume(data)
    export_png_stack(vol, tmp_path)
    back = import_png_stack(tmp_path)
    assert np.array_equal(back.data, data)


@pytest.mark.parametrize("dtype,low,high", [(np.uint8, 0, 256), (np.int16, -32768, 32768)])
def test_integer_kinds_round_trip_exactly(tmp_path, rng, dtype, low, high):
    data = rng.integers(low, high, size=(5, 7, 3)).astype(dtype)
    export_png_stack(Volume(data), tmp_path)
    back = import_png_stack(tmp_path)
    assert np.array_equal(back.data, data.astype(np.float32))


def test_float_round_trip_within_one_quantization_step(tmp_path, rng):
    data = rng.normal(0, 50, size=(8, 8, 6)).astype(np.float32)
    vol = Volume(data)
    export_png_stack(vol, tmp_path)
    back = import_png_stack(tmp_path)
    step = (float(data.max()) - float(data.min())) / 65535
    assert np.max(np.abs(back.data.astype(np.float64) - data.astype(np.float64))) <= step


def test_constant_volume_exact(tmp_path):
    data = np.full((3, 3, 3), 2.75, np.float32)
    export_png_stack(Volume(data), tmp_path)
    assert np.array_equal(import_png_stack(tmp_path).data, data)


def test_file_count_and_naming(tmp_path):
    data = np.zeros((240, 240, 90), np.uint8)
    data[120, 120, :] = 7  # keep one nonzero so the mapping is nontrivial
    manifest = export_png_stack(Volume(data), tmp_path, stem="embedded")
    pngs = sorted(tmp_path.glob("*.png"))
    assert len(pngs) == 90
    assert len(manifest.files) == 90
    assert pngs[0].name == "embedded_z0000.png"
    assert (tmp_path / "manifest.json").is_file()


def test_manifest_contents(tmp_path, rng):
    data = rng.normal(10, 3, size=(4, 5, 6)).astype(np.float32)
    vol = Volume(data, spacing=(0.5, 1.0, 2.0))
    manifest = export_png_stack(vol, tmp_path, slice_range=(30, 36))
    raw = json.loads((tmp_path / "manifest.json").read_text())
    assert tuple(raw["shape"]) == (4, 5, 6)
    assert tuple(raw["spacing"]) == (0.5, 1.0, 2.0)
    assert tuple(raw["slice_range"]) == (30, 36)
    assert raw["scale"] == manifest.scale
    assert raw["offset"] == manifest.offset
    back = import_png_stack(tmp_path)
    assert back.spacing == (0.5, 1.0, 2.0)


def test_non_finite_rejected(tmp_path):
    data = np.zeros((2, 2, 2), np.float32)
    data[0, 0, 0] = np.nan
    with pytest.raises(NonFiniteValues):
        export_png_stack(Volume(data), tmp_path)


def test_axis_orientation_preserved(tmp_path):
    # asymmetric pattern distinguishes x/y transposition
    data = np.zeros((3, 5, 2), np.uint8)
    data[0, 4, 0] = 9
    data[2, 1, 1] = 4
    export_png_stack(Volume(data), tmp_path)
    back = import_png_stack(tmp_path)
    assert back.data[0, 4, 0] == 9
    assert back.data[2, 1, 1] == 4
    assert back.shape == (3, 5, 2)
