"""Stage-ordering benchmark across the nine channel combinations M1..M9.

For every combination and both stage orders the harness runs the full
preprocessing pipeline repeatedly (one discarded warm-up plus `reps` timed
repetitions per sample), recording wall-clock mean/std in milliseconds and
the deterministic element-operation count. Wall-clock numbers are
environment noise and are report-only; the op counts carry the correctness
burden. An optional with-I/O mode re-parses the channel files inside the
timed region.
"""

import csv
import io
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import EmbedConfig, ModalitySet
from .errors import InvalidConfig, MrifuseError
from .nifti_io import DatasetIndex, parse_nifti
from .pipeline import PipelineConfig, PipelineOrder, run_pipeline
from .synthetic import SyntheticSpec, synthetic_patient
from .volume import Modality, Volume

# Channel combinations in the conventional M1..M9 naming.
COMBINATIONS: dict[str, tuple[Modality, ...]] = {
    "M1": (Modality.FLAIR, Modality.T1),
    "M2": (Modality.FLAIR, Modality.T2),
    "M3": (Modality.FLAIR, Modality.T1CE),
    "M4": (Modality.T1, Modality.T1CE),
    "M5": (Modality.T2, Modality.T1CE),
    "M6": (Modality.FLAIR, Modality.T1, Modality.T2),
    "M7": (Modality.FLAIR, Modality.T1, Modality.T1CE),
    "M8": (Modality.FLAIR, Modality.T2, Modality.T1CE),
    "M9": (Modality.FLAIR, Modality.T1, Modality.T2, Modality.T1CE),
}

CSV_COLUMNS = ["combination", "modalities", "order", "mean_ms", "std_ms", "element_ops", "reps"]


@dataclass(frozen=True)
class BenchRow:
    combination: str
    modalities: tuple[Modality, ...]
    order: PipelineOrder
    mean_ms: float
    std_ms: float
    element_ops: int
    reps: int


@dataclass
class BenchReport:
    rows: list[BenchRow]
    failures: list[tuple[str, PipelineOrder, str]] = field(default_factory=list)
    seed: int | None = None
    reps: int = 0

    def totals(self) -> dict[PipelineOrder, tuple[float, int]]:
        """Per-order (summed mean_ms, summed element_ops) — the Overall row."""
        out: dict[PipelineOrder, tuple[float, int]] = {}
        for order in PipelineOrder:
            picked = [r for r in self.rows if r.order is order]
            out[order] = (sum(r.mean_ms for r in picked), sum(r.element_ops for r in picked))
        return out


@dataclass
class _Sample:
    """One benchmarkable patient: in-memory channels or their file paths."""

    modalities: ModalitySet
    gt: Volume | None
    paths: dict[Modality, Path] | None = None


def _materialize(source: DatasetIndex | SyntheticSpec) -> list[_Sample]:
    samples = []
    if isinstance(source, SyntheticSpec):
        for i in range(source.n_patients):
            mods, gt = synthetic_patient(source.seed + i, source.shape, source.element_kind)
            samples.append(_Sample(mods, gt))
    else:
        for patient in source:
            members = {}
            for mod, path in patient.channel_paths.items():
                _, members[mod] = parse_nifti(path)
                members[mod] = members[mod].resolved().with_modality(mod)
            gt = None
            if patient.ground_truth_path is not None:
                _, gt = parse_nifti(patient.ground_truth_path)
            samples.append(_Sample(ModalitySet(members), gt, dict(patient.channel_paths)))
    return samples


def _one_run(sample: _Sample, combo_mods, pcfg, ecfg, with_io: bool):
    """One pipeline execution; returns (elapsed_ms, element_ops)."""
    t0 = time.perf_counter()
    if with_io and sample.paths is not None:
        members = {}
        for mod in combo_mods:
            _, vol = parse_nifti(sample.paths[mod])
            members[mod] = vol.resolved().with_modality(mod)
        subset = ModalitySet(members)
    else:
        subset = sample.modalities.subset(combo_mods)
    result = run_pipeline(subset, sample.gt, pcfg, ecfg)
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    return elapsed_ms, result.provenance.total_element_ops


def run_bench(
    source: DatasetIndex | SyntheticSpec,
    combos: list[str] | None = None,
    reps: int = 5,
    pcfg: PipelineConfig | None = None,
    ecfg: EmbedConfig | None = None,
    with_io: bool = False,
) -> BenchReport:
    """Time both stage orders for each requested combination.

    Rows execute sequentially on one thread so timings stay comparable.
    Element-op counts must be identical across repetitions of a row; a
    pipeline failure aborts that row and is recorded under failures.
    """
    combos = list(COMBINATIONS) if combos is None else combos
    unknown = [c for c in combos if c not in COMBINATIONS]
    if unknown:
        raise InvalidConfig(f"unknown combinations {unknown}; valid: {list(COMBINATIONS)}")
    if reps < 3:
        raise InvalidConfig(f"reps must be >= 3, got {reps}")
    if with_io and isinstance(source, SyntheticSpec):
        raise InvalidConfig("with_io timing requires an on-disk dataset")
    pcfg = pcfg or PipelineConfig()
    ecfg = ecfg or EmbedConfig()
    samples = _materialize(source)
    seed = source.seed if isinstance(source, SyntheticSpec) else None

    report = BenchReport(rows=[], seed=seed, reps=reps)
    for combo in combos:
        combo_mods = COMBINATIONS[combo]
        for order in PipelineOrder:
            opcfg = PipelineConfig(
                slice_lo=pcfg.slice_lo,
                slice_hi=pcfg.slice_hi,
                slice_hi_inclusive=pcfg.slice_hi_inclusive,
                target_shape=pcfg.target_shape,
                clip_percentiles=pcfg.clip_percentiles,
                normalize=pcfg.normalize,
                order=order,
            )
            times: list[float] = []
            ops_seen: set[int] = set()
            try:
                for sample in samples:
                    _one_run(sample, combo_mods, opcfg, ecfg, with_io)  # warm-up, discarded
                    for _ in range(reps):
                        ms, ops = _one_run(sample, combo_mods, opcfg, ecfg, with_io)
                        times.append(ms)
                        ops_seen.add(ops)
            except MrifuseError as exc:
                report.failures.append((combo, order, str(exc)))
                continue
            if len(ops_seen) != 1:
                raise AssertionError(f"element_ops not deterministic for {combo}/{order}: {ops_seen}")
            report.rows.append(
                BenchRow(
                    combination=combo,
                    modalities=combo_mods,
                    order=order,
                    mean_ms=statistics.fmean(times),
                    std_ms=statistics.stdev(times) if len(times) > 1 else 0.0,
                    element_ops=ops_seen.pop(),
                    reps=reps,
                )
            )
    return report


def _mod_names(mods) -> str:
    return "+".join(m.value for m in mods)


def emit_table(report: BenchReport, fmt: str = "csv", config_note: str = "") -> str:
    """Render the report as CSV (long form) or markdown (orders side by side).

    CSV: one row per combination x order plus one Overall row per order,
    prefixed by comment lines echoing seed/config. Markdown mirrors the
    two-column preprocessing-order table: one row per combination and a
    closing Overall row.
    """
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# seed={report.seed} reps={report.reps}\n")
        if config_note:
            buf.write(f"# config: {config_note}\n")
        writer = csv.writer(buf)
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow(
                [row.combination, _mod_names(row.modalities), row.order.value,
                 f"{row.mean_ms:.3f}", f"{row.std_ms:.3f}", row.element_ops, row.reps]
            )
        if report.rows:
            for order, (total_ms, total_ops) in report.totals().items():
                writer.writerow(["Overall", "", order.value, f"{total_ms:.3f}", "", total_ops, ""])
        return buf.getvalue()

    if fmt in ("md", "markdown"):
        e, s = PipelineOrder.EMBED_THEN_SLICE, PipelineOrder.SLICE_THEN_EMBED
        by_key = {(r.combination, r.order): r for r in report.rows}
        combos = []
        for r in report.rows:
            if r.combination not in combos:
                combos.append(r.combination)
        lines = [
            "| Model | Modalities | embed-first (ms) | slice-first (ms) | embed-first ops | slice-first ops |",
            "| --- | --- | --- | --- | --- | --- |",
        ]
        for combo in combos:
            re_, rs = by_key.get((combo, e)), by_key.get((combo, s))
            mods = _mod_names((re_ or rs).modalities)
            lines.append(
                f"| {combo} | {mods} "
                f"| {re_.mean_ms:.2f} | {rs.mean_ms:.2f} "
                f"| {re_.element_ops} | {rs.element_ops} |"
                if re_ and rs
                else f"| {combo} | {mods} | - | - | - | - |"
            )
        if report.rows:
            totals = report.totals()
            lines.append(
                f"| Overall | | {totals[e][0]:.2f} | {totals[s][0]:.2f} "
                f"| {totals[e][1]} | {totals[s][1]} |"
            )
        return "\n".join(lines) + "\n"

    raise InvalidConfig(f"unknown table format {fmt!r}; use 'csv' or 'md'")


def write_report(report: BenchReport, out_dir: Path | str, config_note: str = "") -> dict[str, Path]:
    """Write bench.csv and bench.md into out_dir; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for fmt, name in (("csv", "bench.csv"), ("md", "bench.md")):
        p = out_dir / name
        p.write_text(emit_table(report, fmt, config_note))
        paths[fmt] = p
    return paths
