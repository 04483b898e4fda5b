"""Exception types shared across the toolkit.

Every error raised by mrifuse derives from MrifuseError so callers can catch
the whole family with one clause; parser errors additionally derive from
NiftiParseError.
"""


class MrifuseError(Exception):
    """Base class for all mrifuse errors."""


# --- NIfTI parsing / writing ---

class NiftiParseError(MrifuseError):
    """Base class for errors raised while decoding a NIfTI-1 stream."""


class BadMagic(NiftiParseError):
    """Stream is not NIfTI-1 (magic is neither 'n+1\\0' nor 'ni1\\0')."""


class BadHeaderSize(NiftiParseError):
    """sizeof_hdr is not 348 under either byte order."""


class BadHeader(NiftiParseError):
    """Header decoded but a field violates the NIfTI-1 contract."""


class TruncatedData(NiftiParseError):
    """Fewer data bytes than the header's shape and bitpix imply."""


class UnsupportedDatatype(NiftiParseError):
    """Datatype code outside the supported set (uint8, int16, float32)."""


class PairFormatUnsupported(NiftiParseError):
    """Two-file ('ni1\\0') NIfTI pairs are not supported; use single-file."""


class EmptyDataset(MrifuseError):
    """Dataset scan found no patient with a complete modality set."""


# --- volumes / embedding ---

class ShapeMismatch(MrifuseError):
    """Volumes (or header and volume) disagree on grid shape."""


class KindMismatch(MrifuseError):
    """Volumes mix element kinds where a single kind is required."""


class ModeKindConflict(MrifuseError):
    """Integer embedding mode requested on non-uint8 inputs."""


class MissingWeight(MrifuseError):
    """Embedding config lacks a weight for a participating modality."""


# --- pipeline stages ---

class RangeOutOfBounds(MrifuseError):
    """Slice window [lo, hi) falls outside the volume depth."""


class TargetTooLarge(MrifuseError):
    """Crop target exceeds the input's spatial extent."""


class AllZeroVolume(MrifuseError):
    """No nonzero (brain) voxels to compute statistics over."""


class DegenerateStd(MrifuseError):
    """Nonzero-voxel standard deviation is zero; z-scoring undefined."""


class NonFiniteValues(MrifuseError):
    """Volume contains NaN or infinity where finite values are required."""


class IoFailure(MrifuseError):
    """Filesystem read or write failed."""


# --- metrics / bench ---

class EmptyBatch(MrifuseError):
    """Batch evaluation invoked with no pairs."""


class InvalidConfig(MrifuseError):
    """Configuration value out of range or inconsistent."""
