"""Command-line entry point: inspect, convert, embed, preprocess, evaluate, bench.

Exit codes: 0 success, 1 partial failure (some patients/pairs failed),
2 invalid input or configuration.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict
from functools import partial
from pathlib import Path

from . import __version__
from .bench import COMBINATIONS, emit_table, run_bench, write_report
from .config import RunConfig
from .embedding import EmbedConfig, EmbedMode, ModalitySet, embed
from .errors import InvalidConfig, MrifuseError
from .metrics import evaluate_batch
from .nifti_io import parse_nifti, save_volume, scan_dataset
from .pipeline import run_pipeline
from .png_stack import export_png_stack, import_png_stack
from .synthetic import SyntheticSpec, synthetic_patient
from .volume import Modality

log = logging.getLogger("mrifuse")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INVALID = 2


def _load_run_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    for key in ("order", "combo", "seed", "reps"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    if getattr(args, "out", None):
        overrides["out_dir"] = str(args.out)
    if getattr(args, "data", None):
        overrides["dataset_root"] = str(args.data)
    if getattr(args, "synthetic", None) is not None:
        overrides["synthetic_patients"] = args.synthetic
    if getattr(args, "png", False):
        overrides["png_export"] = True
    return cfg.override(**overrides)


def cmd_inspect(args) -> int:
    header, volume = parse_nifti(args.path)
    nx, ny, nz = volume.shape
    sx, sy, sz = volume.spacing
    scaling = "active" if header.needs_scaling else "inactive"
    print(f"shape: {nx} x {ny} x {nz}")
    print(f"datatype: {header.data_dtype.name} (code {header.datatype_code}, {header.bitpix} bits)")
    print(f"spacing_mm: {sx:g} x {sy:g} x {sz:g}")
    print(f"scaling: slope={header.scl_slope:g} inter={header.scl_inter:g} ({scaling})")
    print(f"magic: {header.magic[:3].decode()} ({header.byte_order.name.lower()}-endian)")
    return EXIT_OK


def cmd_convert(args) -> int:
    src = Path(args.path)
    out = Path(args.out)
    if args.to == "png":
        _, volume = parse_nifti(src)
        stem = args.stem or src.name.split(".")[0]
        manifest = export_png_stack(volume.resolved(), out, stem=stem)
        print(f"wrote {len(manifest.files)} slices + manifest to {out}")
    else:
        volume = import_png_stack(src)
        save_volume(out, volume)
        print(f"wrote {out}")
    return EXIT_OK


def _parse_weights(items) -> dict[Modality, float] | None:
    if not items:
        return None
    weights = {}
    for item in items:
        try:
            key, value = item.split("=", 1)
            weights[Modality(key.upper())] = float(value)
        except ValueError as exc:
            raise InvalidConfig(f"bad --weight {item!r}, expected NAME=VALUE: {exc}") from exc
    return weights


def cmd_embed(args) -> int:
    members = {}
    for mod in (Modality.FLAIR, Modality.T1, Modality.T2, Modality.T1CE):
        path = getattr(args, mod.value.lower())
        if path:
            _, vol = parse_nifti(path)
            members[mod] = vol.resolved().with_modality(mod)
    if len(members) < 2:
        raise InvalidConfig("embed needs at least two of --flair/--t1/--t2/--t1ce")
    weights = _parse_weights(args.weight)
    cfg = EmbedConfig(
        weights=weights if weights is not None else {m: 1.0 for m in members},
        offset_c=args.offset_c,
        divisor_n=args.divisor_n,
        mode=EmbedMode(args.mode),
    )
    save_volume(args.out, embed(ModalitySet(members), cfg))
    print(f"wrote {args.out}")
    return EXIT_OK


def _load_patient(patient):
    members = {}
    for mod, path in patient.channel_paths.items():
        _, vol = parse_nifti(path)
        members[mod] = vol.resolved().with_modality(mod)
    gt = None
    if patient.ground_truth_path is not None:
        _, gt = parse_nifti(patient.ground_truth_path)
    return ModalitySet(members), gt


def cmd_preprocess(args) -> int:
    cfg = _load_run_config(args)
    if cfg.combo not in COMBINATIONS:
        raise InvalidConfig(f"unknown combo {cfg.combo!r}; valid: {list(COMBINATIONS)}")
    if cfg.synthetic_patients <= 0 and not cfg.dataset_root:
        raise InvalidConfig("need --data <root> or --synthetic N (or the config equivalents)")
    out_root = Path(cfg.out_dir)
    cfg.echo_to(out_root)
    pcfg = cfg.pipeline_config()
    ecfg = cfg.embed_config()
    combo_mods = COMBINATIONS[cfg.combo]

    failed = 0
    done = 0
    if cfg.synthetic_patients > 0:
        jobs = [
            (f"case_{i:04d}", partial(synthetic_patient, cfg.seed + i, tuple(cfg.synthetic_shape)))
            for i in range(cfg.synthetic_patients)
        ]
    else:
        index = scan_dataset(cfg.dataset_root)
        failed += len(index.incomplete)  # warned and skipped by the scanner
        jobs = [(p.patient_id, partial(_load_patient, p)) for p in index]
    for pid, load in jobs:
        try:
            modalities, gt = load()
            sample = run_pipeline(modalities.subset(combo_mods), gt, pcfg, ecfg)
            pdir = out_root / pid
            save_volume(pdir / "embedded.nii.gz", sample.embedded)
            if sample.ground_truth is not None:
                save_volume(pdir / "gt.nii.gz", sample.ground_truth)
            if cfg.png_export:
                export_png_stack(sample.embedded, pdir / "png", stem="embedded",
                                 slice_range=(pcfg.slice_lo, pcfg.effective_hi))
            prov = sample.provenance
            (pdir / "provenance.json").write_text(json.dumps(
                {
                    "order": prov.order.value,
                    "pipeline_config": {**asdict(prov.pipeline_config),
                                        "order": prov.order.value},
                    "embed_config": {
                        "weights": {m.value: w for m, w in prov.embed_config.weights.items()},
                        "offset_c": prov.embed_config.offset_c,
                        "divisor_n": prov.embed_config.divisor_n,
                        "mode": prov.embed_config.mode.value,
                    },
                    "stages": [asdict(s) for s in prov.stages],
                    "total_element_ops": prov.total_element_ops,
                },
                indent=2,
            ))
            done += 1
        except MrifuseError as exc:
            log.warning("patient %s failed: %s", pid, exc)
            failed += 1
    print(f"preprocessed {done} patient(s), {failed} failed, output in {out_root}")
    return EXIT_PARTIAL if failed else EXIT_OK


def _mask_pairs(pred_dir: Path, gt_dir: Path):
    pairs = []
    for pred in sorted(pred_dir.glob("*.nii*")):
        vid = pred.name.removesuffix(".gz").removesuffix(".nii")
        for candidate in (gt_dir / pred.name, gt_dir / f"{vid}.nii.gz", gt_dir / f"{vid}.nii"):
            if candidate.is_file():
                pairs.append((vid, pred, candidate))
                break
        else:
            log.warning("no ground truth for %s", pred.name)
    return pairs


def cmd_evaluate(args) -> int:
    pairs = _mask_pairs(Path(args.pred), Path(args.gt))
    report = evaluate_batch(pairs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(report.to_json())
    print(f"mean dice over {len(report.per_volume)} volume(s): {report.mean_dice:.6f}")
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load_run_config(args)
    combos = args.combos or None
    if cfg.dataset_root:
        source = scan_dataset(cfg.dataset_root)
    else:
        n = cfg.synthetic_patients if cfg.synthetic_patients > 0 else 1
        source = SyntheticSpec(seed=cfg.seed, n_patients=n, shape=tuple(cfg.synthetic_shape))
    report = run_bench(
        source,
        combos=combos,
        reps=cfg.reps,
        pcfg=cfg.pipeline_config(),
        ecfg=cfg.embed_config(),
        with_io=args.with_io,
    )
    note = json.dumps(json.loads(cfg.to_json()), separators=(",", ":"))
    out = Path(cfg.out_dir)
    paths = write_report(report, out, config_note=note)
    cfg.echo_to(out)
    print(emit_table(report, args.format, config_note=note))
    print(f"wrote {paths['csv']} and {paths['md']}")
    return EXIT_PARTIAL if report.failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrifuse",
        description="Multi-modal MRI fusion and preprocessing toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="print header summary of a NIfTI-1 file")
    p.add_argument("path")
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("convert", help="convert NIfTI <-> 16-bit PNG stack")
    p.add_argument("path", help="input .nii[.gz] file (to png) or stack dir (to nifti)")
    p.add_argument("--to", choices=["png", "nifti"], default="png")
    p.add_argument("--out", required=True, help="output directory (png) or file (nifti)")
    p.add_argument("--stem", default=None, help="slice filename stem (png)")
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("embed", help="fuse 2-4 channel files into one volume")
    for name in ("flair", "t1", "t2", "t1ce"):
        p.add_argument(f"--{name}", default=None, help=f"{name} channel path")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=[m.value for m in EmbedMode], default=EmbedMode.REAL.value)
    p.add_argument("--weight", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--offset-c", type=float, default=0.0, dest="offset_c")
    p.add_argument("--divisor-n", type=int, default=None, dest="divisor_n")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("preprocess", help="run the preprocessing chain over a dataset")
    p.add_argument("--config", default=None, help="JSON run config")
    p.add_argument("--data", default=None, help="dataset root (grade/patient tree)")
    p.add_argument("--synthetic", type=int, default=None, metavar="N",
                   help="use N seeded synthetic patients instead of a dataset")
    p.add_argument("--order", choices=["embed-first", "slice-first"], default=None)
    p.add_argument("--combo", choices=list(COMBINATIONS), default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--png", action="store_true", help="also export PNG stacks")
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("evaluate", help="dice-score predicted vs ground-truth masks")
    p.add_argument("--pred", required=True, help="directory of predicted masks (*.nii[.gz])")
    p.add_argument("--gt", required=True, help="directory of ground-truth masks")
    p.add_argument("--out", required=True, help="report output directory")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("bench", help="time both stage orders across M1..M9")
    p.add_argument("--config", default=None)
    p.add_argument("--data", default=None, help="dataset root; default: synthetic patient")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--format", choices=["csv", "md"], default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--combos", nargs="+", choices=list(COMBINATIONS), default=None)
    p.add_argument("--with-io", action="store_true", dest="with_io",
                   help="re-parse channel files inside the timed region")
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MrifuseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
