"""Pixel-level fusion of co-registered MRI channels into one volume.

Each voxel of the output is the weighted sum of the participating channels,
divided by N and offset by a constant c. Three arithmetic modes are
supported: exact real arithmetic, and two uint8 integer semantics in which
each accumulation step either wraps modulo 256 or saturates at [0, 255]
(the two behaviors of plain array addition in the numpy and OpenCV
ecosystems, respectively).

Channels are always traversed in the fixed order FLAIR, T1, T2, T1ce, so
results are independent of how the input mapping was built.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    InvalidConfig,
    KindMismatch,
    MissingWeight,
    ModeKindConflict,
    ShapeMismatch,
)
from .volume import ACQUISITION_MODALITIES, ElementKind, Modality, Volume


class EmbedMode(Enum):
    REAL = "real"
    WRAP_U8 = "wrap_u8"
    SATURATE_U8 = "saturate_u8"


def default_weights() -> dict[Modality, float]:
    return {m: 1.0 for m in ACQUISITION_MODALITIES}


@dataclass(frozen=True)
class EmbedConfig:
    """Fusion parameters: per-channel weights, offset, divisor and mode.

    ``divisor_n`` defaults to the number of participating channels when
    left as None.
    """

    weights: dict[Modality, float] = field(default_factory=default_weights)
    offset_c: float = 0.0
    divisor_n: int | None = None
    mode: EmbedMode = EmbedMode.REAL

    def __post_init__(self):
        if self.divisor_n is not None and self.divisor_n < 1:
            raise InvalidConfig(f"divisor_n must be >= 1, got {self.divisor_n}")

    def resolve_divisor(self, n_members: int) -> int:
        return self.divisor_n if self.divisor_n is not None else n_members


@dataclass(frozen=True)
class ModalitySet:
    """2 to 4 co-registered channels sharing shape, spacing and kind."""

    members: dict[Modality, Volume]

    def __post_init__(self):
        if not 2 <= len(self.members) <= 4:
            raise InvalidConfig(f"modality set needs 2 to 4 members, got {len(self.members)}")
        for mod in self.members:
            if mod not in ACQUISITION_MODALITIES:
                raise InvalidConfig(f"{mod} is not an acquisition channel")
        vols = list(self.members.values())
        first = vols[0]
        for v in vols[1:]:
            if v.shape != first.shape:
                raise ShapeMismatch(f"member shapes differ: {v.shape} vs {first.shape}")
            if v.spacing != first.spacing:
                raise ShapeMismatch(f"member spacings differ: {v.spacing} vs {first.spacing}")
            if v.data.dtype != first.data.dtype:
                raise KindMismatch(f"member kinds differ: {v.data.dtype} vs {first.data.dtype}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return next(iter(self.members.values())).shape

    @property
    def spacing(self) -> tuple[float, float, float]:
        return next(iter(self.members.values())).spacing

    @property
    def element_kind(self) -> ElementKind:
        return next(iter(self.members.values())).element_kind

    def ordered(self) -> list[tuple[Modality, Volume]]:
        """Members in canonical FLAIR, T1, T2, T1ce order."""
        return [(m, self.members[m]) for m in ACQUISITION_MODALITIES if m in self.members]

    def subset(self, modalities) -> "ModalitySet":
        return ModalitySet({m: self.members[m] for m in modalities})


def _round_half_even(x: np.ndarray) -> np.ndarray:
    return np.rint(x).astype(np.int64)


def embed(modalities: ModalitySet, cfg: EmbedConfig) -> Volume:
    """Fuse the channels into one volume tagged EMBEDDED.

    REAL mode accumulates weighted terms in float64 and returns float32.
    WRAP_U8 wraps each weighted addition modulo 256, then floor-divides by N
    and wraps the rounded offset in. SATURATE_U8 clamps each accumulation
    step to [0, 255], then floor-divides by N and saturates the offset in.
    Non-integer weighted terms are rounded half-to-even before integer
    accumulation.
    """
    members = modalities.ordered()
    for mod, _ in members:
        if mod not in cfg.weights:
            raise MissingWeight(f"no weight configured for {mod.value}")
    n = cfg.resolve_divisor(len(members))
    if cfg.mode is not EmbedMode.REAL and modalities.element_kind is not ElementKind.U8:
        raise ModeKindConflict(
            f"{cfg.mode.value} requires uint8 inputs, got {modalities.element_kind.value}"
        )

    if cfg.mode is EmbedMode.REAL:
        acc = np.zeros(modalities.shape, dtype=np.float64)
        for mod, vol in members:
            acc += cfg.weights[mod] * vol.data.astype(np.float64)
        out = (acc / n + cfg.offset_c).astype(np.float32)
    elif cfg.mode is EmbedMode.WRAP_U8:
        acc = np.zeros(modalities.shape, dtype=np.int64)
        for mod, vol in members:
            term = _round_half_even(cfg.weights[mod] * vol.data.astype(np.float64))
            acc = (acc + term) & 0xFF
        out = ((acc // n + round(cfg.offset_c)) & 0xFF).astype(np.uint8)
    elif cfg.mode is EmbedMode.SATURATE_U8:
        acc = np.zeros(modalities.shape, dtype=np.int64)
        for mod, vol in members:
            term = _round_half_even(cfg.weights[mod] * vol.data.astype(np.float64))
            acc = np.clip(acc + term, 0, 255)
        out = np.clip(acc // n + round(cfg.offset_c), 0, 255).astype(np.uint8)
    else:  # pragma: no cover
        raise InvalidConfig(f"unknown embed mode {cfg.mode}")

    return Volume(out, spacing=modalities.spacing, modality=Modality.EMBEDDED)
