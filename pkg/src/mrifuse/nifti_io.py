"""NIfTI-1 single-file reader/writer and BraTS-style dataset scanner.

Supports the 348-byte NIfTI-1 header (both byte orders, detected via
sizeof_hdr), raw and gzip-compressed streams (detected via the 0x1F 0x8B
magic, not the file extension), and the uint8 / int16 / float32 datatypes.
Parsed headers keep their original bytes so uncompressed write-backs are
bit-exact; orientation fields (qform/sform) ride along untouched.
"""

import gzip
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import (
    BadHeader,
    BadHeaderSize,
    BadMagic,
    EmptyDataset,
    KindMismatch,
    PairFormatUnsupported,
    ShapeMismatch,
    TruncatedData,
    UnsupportedDatatype,
)
from .volume import Modality, Volume

log = logging.getLogger(__name__)

HEADER_SIZE = 348
MAGIC_SINGLE = b"n+1\x00"
MAGIC_PAIR = b"ni1\x00"
GZIP_MAGIC = b"\x1f\x8b"

# NIfTI-1 datatype codes for the supported element kinds.
DATATYPE_CODES = {2: np.dtype(np.uint8), 4: np.dtype(np.int16), 16: np.dtype(np.float32)}
CODE_FOR_DTYPE = {dt: code for code, dt in DATATYPE_CODES.items()}

# Standard 348-byte header layout (offsets in comments).
HEADER_DTYPE = np.dtype(
    [
        ("sizeof_hdr", "i4"),      # 0
        ("data_type", "S10"),      # 4   (unused)
        ("db_name", "S18"),        # 14  (unused)
        ("extents", "i4"),         # 32  (unused)
        ("session_error", "i2"),   # 36  (unused)
        ("regular", "S1"),         # 38  (unused)
        ("dim_info", "u1"),        # 39
        ("dim", "i2", (8,)),       # 40
        ("intent_p1", "f4"),       # 56
        ("intent_p2", "f4"),       # 60
        ("intent_p3", "f4"),       # 64
        ("intent_code", "i2"),     # 68
        ("datatype", "i2"),        # 70
        ("bitpix", "i2"),          # 72
        ("slice_start", "i2"),     # 74
        ("pixdim", "f4", (8,)),    # 76
        ("vox_offset", "f4"),      # 108
        ("scl_slope", "f4"),       # 112
        ("scl_inter", "f4"),       # 116
        ("slice_end", "i2"),       # 120
        ("slice_code", "u1"),      # 122
        ("xyzt_units", "u1"),      # 123
        ("cal_max", "f4"),         # 124
        ("cal_min", "f4"),         # 128
        ("slice_duration", "f4"),  # 132
        ("toffset", "f4"),         # 136
        ("glmax", "i4"),           # 140  (unused)
        ("glmin", "i4"),           # 144  (unused)
        ("descrip", "S80"),        # 148
        ("aux_file", "S24"),       # 228
        ("qform_code", "i2"),      # 252
        ("sform_code", "i2"),      # 254
        ("quatern_b", "f4"),       # 256
        ("quatern_c", "f4"),       # 260
        ("quatern_d", "f4"),       # 264
        ("qoffset_x", "f4"),       # 268
        ("qoffset_y", "f4"),       # 272
        ("qoffset_z", "f4"),       # 276
        ("srow_x", "f4", (4,)),    # 280
        ("srow_y", "f4", (4,)),    # 296
        ("srow_z", "f4", (4,)),    # 312
        ("intent_name", "S16"),    # 328
        ("magic", "S4"),           # 344
    ]
)
assert HEADER_DTYPE.itemsize == HEADER_SIZE


class ByteOrder(Enum):
    LITTLE = "<"
    BIG = ">"

    @property
    def char(self) -> str:
        return self.value


@dataclass
class NiftiHeader:
    """Decoded NIfTI-1 header fields plus the verbatim on-disk bytes.

    ``raw`` holds everything up to vox_offset (header + extension padding)
    in the original byte order; when present it is written back verbatim so
    unmodeled fields survive round-trips.
    """

    dim: tuple[int, ...]
    datatype_code: int
    bitpix: int
    pixdim: tuple[float, ...]
    scl_slope: float = 0.0
    scl_inter: float = 0.0
    vox_offset: int = 352
    magic: bytes = MAGIC_SINGLE
    byte_order: ByteOrder = ByteOrder.LITTLE
    sizeof_hdr: int = HEADER_SIZE
    raw: bytes | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, int, int]:
        """Spatial shape, padded with 1s below rank 3 (trailing 1s dropped)."""
        rank = self.dim[0]
        extents = list(self.dim[1 : 1 + rank])
        while len(extents) > 3 and extents[-1] == 1:
            extents.pop()
        if len(extents) > 3:
            raise BadHeader(f"only 3-D volumes are supported, got extents {tuple(extents)}")
        extents += [1] * (3 - len(extents))
        return tuple(int(n) for n in extents)

    @property
    def data_dtype(self) -> np.dtype:
        return DATATYPE_CODES[self.datatype_code]

    @property
    def spacing(self) -> tuple[float, float, float]:
        """Voxel spacing in mm; nonpositive pixdim entries fall back to 1."""
        return tuple(float(p) if p > 0 else 1.0 for p in self.pixdim[1:4])

    @property
    def needs_scaling(self) -> bool:
        return self.scl_slope != 0.0 and (self.scl_slope, self.scl_inter) != (1.0, 0.0)

    def validate(self) -> None:
        if self.sizeof_hdr != HEADER_SIZE:
            raise BadHeaderSize(f"sizeof_hdr is {self.sizeof_hdr}, expected {HEADER_SIZE}")
        if self.magic not in (MAGIC_SINGLE, MAGIC_PAIR):
            raise BadMagic(f"magic {self.magic!r} is not a NIfTI-1 signature")
        if not 1 <= self.dim[0] <= 7:
            raise BadHeader(f"dim[0] (rank) must be in [1, 7], got {self.dim[0]}")
        for i in range(1, self.dim[0] + 1):
            if self.dim[i] < 1:
                raise BadHeader(f"dim[{i}] must be >= 1, got {self.dim[i]}")
        if self.datatype_code not in DATATYPE_CODES:
            raise UnsupportedDatatype(
                f"datatype code {self.datatype_code} not supported "
                f"(supported: {sorted(DATATYPE_CODES)})"
            )
        expected_bits = self.data_dtype.itemsize * 8
        if self.bitpix != expected_bits:
            raise BadHeader(
                f"bitpix {self.bitpix} inconsistent with datatype code "
                f"{self.datatype_code} (expected {expected_bits})"
            )
        if self.magic == MAGIC_SINGLE and self.vox_offset < HEADER_SIZE:
            raise BadHeader(f"vox_offset {self.vox_offset} overlaps the header")

    @classmethod
    def from_bytes(cls, buf: bytes) -> "NiftiHeader":
        """Decode the first 348 bytes, resolving byte order via sizeof_hdr."""
        if len(buf) < HEADER_SIZE:
            raise BadMagic(f"stream of {len(buf)} bytes is too short to be NIfTI-1")
        magic = bytes(buf[344:348])
        if magic not in (MAGIC_SINGLE, MAGIC_PAIR):
            raise BadMagic(f"magic {magic!r} is not a NIfTI-1 signature")
        for order in (ByteOrder.LITTLE, ByteOrder.BIG):
            size = int(np.frombuffer(buf[:4], dtype=np.dtype("i4").newbyteorder(order.char))[0])
            if size == HEADER_SIZE:
                byte_order = order
                break
        else:
            raise BadHeaderSize("sizeof_hdr is not 348 under either byte order")
        fields = np.frombuffer(buf[:HEADER_SIZE], dtype=HEADER_DTYPE.newbyteorder(byte_order.char))[0]
        header = cls(
            dim=tuple(int(d) for d in fields["dim"]),
            datatype_code=int(fields["datatype"]),
            bitpix=int(fields["bitpix"]),
            pixdim=tuple(float(p) for p in fields["pixdim"]),
            scl_slope=float(fields["scl_slope"]),
            scl_inter=float(fields["scl_inter"]),
            vox_offset=int(round(float(fields["vox_offset"]))),
            magic=magic,
            byte_order=byte_order,
            sizeof_hdr=size,
        )
        header.validate()
        return header

    @classmethod
    def for_volume(
        cls,
        volume: Volume,
        byte_order: ByteOrder = ByteOrder.LITTLE,
        scl_slope: float = 0.0,
        scl_inter: float = 0.0,
    ) -> "NiftiHeader":
        """Fresh single-file header consistent with a volume's shape and kind."""
        nx, ny, nz = volume.shape
        sx, sy, sz = volume.spacing
        dtype = volume.data.dtype.newbyteorder("=")
        return cls(
            dim=(3, nx, ny, nz, 1, 1, 1, 1),
            datatype_code=CODE_FOR_DTYPE[dtype],
            bitpix=dtype.itemsize * 8,
            pixdim=(1.0, sx, sy, sz, 1.0, 1.0, 1.0, 1.0),
            scl_slope=scl_slope,
            scl_inter=scl_inter,
            vox_offset=352,
            magic=MAGIC_SINGLE,
            byte_order=byte_order,
        )

    def to_bytes(self) -> bytes:
        """Header + extension padding, exactly vox_offset bytes long.

        Returns the retained on-disk bytes when available, otherwise
        serializes the modeled fields into a fresh header.
        """
        if self.raw is not None:
            return self.raw
        rec = np.zeros((), dtype=HEADER_DTYPE.newbyteorder(self.byte_order.char))
        rec["sizeof_hdr"] = HEADER_SIZE
        rec["regular"] = b"r"
        rec["dim"] = self.dim
        rec["datatype"] = self.datatype_code
        rec["bitpix"] = self.bitpix
        rec["pixdim"] = self.pixdim
        rec["vox_offset"] = float(self.vox_offset)
        rec["scl_slope"] = self.scl_slope
        rec["scl_inter"] = self.scl_inter
        rec["xyzt_units"] = 2  # mm
        rec["magic"] = self.magic
        pad = b"\x00" * (self.vox_offset - HEADER_SIZE)
        return rec.tobytes() + pad


def _as_bytes(source: bytes | str | os.PathLike | BinaryIO) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_bytes()
    return source.read()


def parse_nifti(source: bytes | str | os.PathLike | BinaryIO) -> tuple[NiftiHeader, Volume]:
    """Parse a raw or gzipped NIfTI-1 single file into (header, volume).

    The returned volume carries raw stored values in canonical (x, y, z)
    order with x fastest; when the header declares slope/intercept scaling
    the volume's ``scale`` is set so ``values()`` exposes scaled reals while
    raw data is retained for bit-exact write-backs.
    """
    buf = _as_bytes(source)
    if buf[:2] == GZIP_MAGIC:
        buf = gzip.decompress(buf)
    header = NiftiHeader.from_bytes(buf)
    if header.magic == MAGIC_PAIR:
        raise PairFormatUnsupported(
            "two-file NIfTI ('ni1\\0') has its data in a separate .img file; "
            "only single-file ('n+1\\0') sources are supported"
        )
    shape = header.shape
    n_bytes = int(np.prod(shape)) * header.bitpix // 8
    body = buf[header.vox_offset : header.vox_offset + n_bytes]
    if len(body) < n_bytes:
        raise TruncatedData(
            f"data segment holds {len(body)} bytes, header implies {n_bytes} "
            f"(shape {shape}, {header.bitpix} bits/voxel)"
        )
    disk_dtype = header.data_dtype.newbyteorder(header.byte_order.char)
    data = np.frombuffer(body, dtype=disk_dtype).reshape(shape, order="F")
    header.raw = bytes(buf[: header.vox_offset])
    scale = (header.scl_slope, header.scl_inter) if header.needs_scaling else None
    return header, Volume(data, spacing=header.spacing, scale=scale)


def write_nifti(header: NiftiHeader, volume: Volume, compress: bool = False) -> bytes:
    """Serialize (header, volume) to a NIfTI-1 single-file byte stream.

    Uncompressed output reproduces a parsed source bit-exactly; gzip output
    (mtime pinned to 0 for determinism) decompresses to that same stream.
    """
    if header.shape != volume.shape:
        raise ShapeMismatch(f"header shape {header.shape} != volume shape {volume.shape}")
    if header.data_dtype != volume.data.dtype.newbyteorder("="):
        raise KindMismatch(
            f"header datatype {header.data_dtype} != volume dtype {volume.data.dtype}"
        )
    head = header.to_bytes()
    disk_dtype = header.data_dtype.newbyteorder(header.byte_order.char)
    body = volume.data.astype(disk_dtype, copy=False).tobytes(order="F")
    stream = head + body
    if compress:
        stream = gzip.compress(stream, mtime=0)
    return stream


def load_volume(path: str | os.PathLike) -> tuple[NiftiHeader, Volume]:
    """parse_nifti from a filesystem path."""
    return parse_nifti(path)


def save_volume(
    path: str | os.PathLike,
    volume: Volume,
    header: NiftiHeader | None = None,
    compress: bool | None = None,
) -> None:
    """Write a volume to disk; compression defaults to the .gz suffix."""
    path = Path(path)
    if header is None:
        header = NiftiHeader.for_volume(volume)
    if compress is None:
        compress = path.suffix == ".gz"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_nifti(header, volume, compress=compress))


# --- dataset scanning ---

class Grade(Enum):
    HGG = "HGG"
    LGG = "LGG"


# Filename tokens used on disk for each channel.
MODALITY_TOKENS = {
    Modality.FLAIR: "flair",
    Modality.T1: "t1",
    Modality.T2: "t2",
    Modality.T1CE: "t1ce",
}
SEG_TOKEN = "seg"

DEFAULT_LAYOUT = "{grade}/{patient_id}/{patient_id}_{modality}.nii.gz"


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    grade: Grade
    channel_paths: dict[Modality, Path]
    ground_truth_path: Path | None = None


@dataclass
class DatasetIndex:
    """Patients with a complete four-channel modality set.

    ``incomplete`` lists (patient_id, missing modalities) for directories
    that were warned about and skipped.
    """

    root: Path
    patients: list[PatientRecord]
    incomplete: list[tuple[str, list[str]]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.patients)

    def __iter__(self):
        return iter(self.patients)


def scan_dataset(root: str | os.PathLike, layout: str = DEFAULT_LAYOUT) -> DatasetIndex:
    """Index a `<root>/<grade>/<patient_id>/` tree of gzipped NIfTI channels.

    Only patients with all four of FLAIR/T1/T2/T1ce are indexed; incomplete
    ones are logged as warnings and skipped. The per-file layout is a format
    string over {grade}, {patient_id} and {modality}.
    """
    root = Path(root)
    patients: list[PatientRecord] = []
    incomplete: list[tuple[str, list[str]]] = []
    grade_dirs = sorted(p for p in root.iterdir() if p.is_dir()) if root.is_dir() else []
    for grade_dir in grade_dirs:
        try:
            grade = Grade(grade_dir.name.upper())
        except ValueError:
            log.warning("skipping directory %s: not an HGG/LGG grade", grade_dir)
            continue
        for patient_dir in sorted(p for p in grade_dir.iterdir() if p.is_dir()):
            pid = patient_dir.name
            paths = {
                mod: root / layout.format(grade=grade.value, patient_id=pid, modality=token)
                for mod, token in MODALITY_TOKENS.items()
            }
            missing = [mod.value for mod, p in paths.items() if not p.is_file()]
            if missing:
                log.warning("patient %s incomplete, missing %s; skipped", pid, ", ".join(missing))
                incomplete.append((pid, missing))
                continue
            seg = root / layout.format(grade=grade.value, patient_id=pid, modality=SEG_TOKEN)
            patients.append(
                PatientRecord(pid, grade, paths, seg if seg.is_file() else None)
            )
    if not patients:
        raise EmptyDataset(f"no complete four-channel patients under {root}")
    return DatasetIndex(root=root, patients=patients, incomplete=incomplete)
