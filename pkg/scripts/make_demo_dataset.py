#!/usr/bin/env python3
"""Write a synthetic grade/patient dataset tree for demos and smoke tests.

The tree follows `<root>/<grade>/<id>/<id>_<modality>.nii.gz` with
modalities flair/t1/t2/t1ce plus a seg mask, alternating HGG/LGG grades.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mrifuse.synthetic import write_synthetic_dataset


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("root", help="output directory")
    ap.add_argument("--patients", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shape", type=int, nargs=3, default=[240, 240, 155],
                    metavar=("NX", "NY", "NZ"))
    args = ap.parse_args()
    root = write_synthetic_dataset(
        args.root, n_patients=args.patients, seed=args.seed, shape=tuple(args.shape)
    )
    print(f"wrote {args.patients} patient(s) under {root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
