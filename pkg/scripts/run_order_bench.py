#!/usr/bin/env python3
"""Reproduce the stage-ordering timing experiment on synthetic data.

Runs all nine channel combinations through both preprocessing orders on a
seeded full-size synthetic patient and writes bench.csv / bench.md, printing
the side-by-side table. Use --shape to shrink for a quick look, or --data to
point at a real grade/patient tree.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mrifuse.bench import emit_table, run_bench, write_report
from mrifuse.embedding import EmbedConfig
from mrifuse.nifti_io import scan_dataset
from mrifuse.pipeline import PipelineConfig
from mrifuse.synthetic import SyntheticSpec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--shape", type=int, nargs=3, default=[240, 240, 155],
                    metavar=("NX", "NY", "NZ"))
    ap.add_argument("--data", default=None, help="real dataset root instead of synthetic")
    ap.add_argument("--with-io", action="store_true",
                    help="re-parse files inside the timed region (needs --data)")
    ap.add_argument("--out", default="bench_out")
    args = ap.parse_args()

    if args.data:
        source = scan_dataset(args.data)
        print(f"benchmarking {len(source)} patient(s) from {args.data}")
    else:
        source = SyntheticSpec(seed=args.seed, shape=tuple(args.shape))
        print(f"benchmarking synthetic patient, shape {tuple(args.shape)}, seed {args.seed}")

    nz = tuple(args.shape)[2] if not args.data else 155
    pcfg = PipelineConfig() if nz >= 120 else PipelineConfig(
        slice_lo=nz // 5, slice_hi=4 * nz // 5,
        target_shape=(4 * args.shape[0] // 5, 4 * args.shape[1] // 5),
    )
    report = run_bench(source, reps=args.reps, pcfg=pcfg, ecfg=EmbedConfig(),
                       with_io=args.with_io)
    print()
    print(emit_table(report, "md"))
    paths = write_report(report, args.out, config_note=f"seed={args.seed} reps={args.reps}")
    print(f"wrote {paths['csv']} and {paths['md']}")
    totals = report.totals()
    for order, (ms, ops) in totals.items():
        print(f"{order.value:>12}: overall {ms:10.2f} ms, {ops} element-ops")
    return 0


if __name__ == "__main__":
    sys.exit(main())
