"""Run configuration: one JSON file covering pipeline, fusion and I/O knobs.

Keys mirror the PipelineConfig / EmbedConfig field names; command-line flags
override file values, and the effective merged config is echoed into every
output directory for provenance.
"""

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .embedding import EmbedConfig, EmbedMode, default_weights
from .errors import InvalidConfig
from .pipeline import PipelineConfig, PipelineOrder
from .volume import Modality


@dataclass(frozen=True)
class RunConfig:
    """Merged view of pipeline + embedding config plus dataset/output/seed."""

    dataset_root: str | None = None
    out_dir: str = "out"
    seed: int = 0
    synthetic_patients: int = 0
    synthetic_shape: tuple[int, int, int] = (240, 240, 155)
    png_export: bool = False
    combo: str = "M9"
    reps: int = 5

    slice_lo: int = 30
    slice_hi: int = 120
    slice_hi_inclusive: bool = False
    target_shape: tuple[int, int] = (192, 192)
    clip_percentiles: tuple[float, float] | None = (1.0, 99.0)
    normalize: bool = True
    order: str = PipelineOrder.EMBED_THEN_SLICE.value

    weights: dict[str, float] | None = None
    offset_c: float = 0.0
    divisor_n: int | None = None
    mode: str = EmbedMode.REAL.value

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        for key in ("target_shape", "synthetic_shape"):
            if key in raw:
                raw[key] = tuple(raw[key])
        if raw.get("clip_percentiles") is not None and "clip_percentiles" in raw:
            raw["clip_percentiles"] = tuple(raw["clip_percentiles"])
        return cls(**raw)

    def override(self, **updates) -> "RunConfig":
        """New config with the non-None entries of `updates` applied."""
        filtered = {k: v for k, v in updates.items() if v is not None}
        return replace(self, **filtered)

    def pipeline_config(self, order: str | None = None) -> PipelineConfig:
        name = order or self.order
        try:
            resolved = PipelineOrder(name)
        except ValueError as exc:
            raise InvalidConfig(
                f"unknown order {name!r}; valid: {[o.value for o in PipelineOrder]}"
            ) from exc
        return PipelineConfig(
            slice_lo=self.slice_lo,
            slice_hi=self.slice_hi,
            slice_hi_inclusive=self.slice_hi_inclusive,
            target_shape=tuple(self.target_shape),
            clip_percentiles=None if self.clip_percentiles is None else tuple(self.clip_percentiles),
            normalize=self.normalize,
            order=resolved,
        )

    def embed_config(self) -> EmbedConfig:
        if self.weights is None:
            weights = default_weights()
        else:
            try:
                weights = {Modality(k.upper()): float(v) for k, v in self.weights.items()}
            except ValueError as exc:
                raise InvalidConfig(f"bad weight key in {self.weights}: {exc}") from exc
        try:
            mode = EmbedMode(self.mode)
        except ValueError as exc:
            raise InvalidConfig(
                f"unknown mode {self.mode!r}; valid: {[m.value for m in EmbedMode]}"
            ) from exc
        return EmbedConfig(weights=weights, offset_c=self.offset_c,
                           divisor_n=self.divisor_n, mode=mode)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def echo_to(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "effective_config.json").write_text(self.to_json())
