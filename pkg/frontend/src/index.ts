/**
 * Array-in / array-out bindings over the mrifuse toolkit.
 *
 * Every call shells out to the mrifuse CLI and interchanges data through
 * its documented file formats (NIfTI-1, JSON reports, JSON configs); no
 * numeric logic is reimplemented here, so results are bit-identical to the
 * toolkit's own outputs.
 */

import { mkdtempSync, mkdirSync, copyFileSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { runCli } from "./cli.js";
import { encodeNiftiFor, parseNifti, writeNifti, type VolumeArray, type VoxelArray } from "./nifti.js";

export { MrifuseCliError, resolveCommand, runCli } from "./cli.js";
export { NiftiFormatError, parseNifti, writeNifti } from "./nifti.js";
export type { VolumeArray, VoxelArray } from "./nifti.js";

export const MODALITIES = ["flair", "t1", "t2", "t1ce"] as const;
export type ModalityName = (typeof MODALITIES)[number];

export interface PreprocessPaths {
  flair: string;
  t1: string;
  t2: string;
  t1ce: string;
  /** optional ground-truth mask, windowed/cropped alongside the channels */
  seg?: string;
}

export interface PreprocessOptions {
  combo?: string; // M1..M9, default M9
  order?: "embed-first" | "slice-first";
  sliceLo?: number;
  sliceHi?: number;
  targetShape?: [number, number];
  clipPercentiles?: [number, number] | null;
  normalize?: boolean;
  mode?: "real" | "wrap_u8" | "saturate_u8";
  weights?: Partial<Record<ModalityName, number>>;
  offsetC?: number;
  divisorN?: number;
  /** keep the scratch directory (returned as workDir) for inspection */
  keepWorkdir?: boolean;
}

export interface PreprocessResult {
  embedded: VolumeArray;
  groundTruth?: VolumeArray;
  workDir?: string;
}

function withScratchDir<T>(keep: boolean | undefined, fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "mrifuse-node-"));
  try {
    return fn(dir);
  } finally {
    if (!keep) rmSync(dir, { recursive: true, force: true });
  }
}

function configJson(opts: PreprocessOptions, outDir: string, dataRoot: string): string {
  const cfg: Record<string, unknown> = {
    dataset_root: dataRoot,
    out_dir: outDir,
    combo: opts.combo ?? "M9",
  };
  if (opts.order !== undefined) cfg.order = opts.order;
  if (opts.sliceLo !== undefined) cfg.slice_lo = opts.sliceLo;
  if (opts.sliceHi !== undefined) cfg.slice_hi = opts.sliceHi;
  if (opts.targetShape !== undefined) cfg.target_shape = opts.targetShape;
  if (opts.clipPercentiles !== undefined) cfg.clip_percentiles = opts.clipPercentiles;
  if (opts.normalize !== undefined) cfg.normalize = opts.normalize;
  if (opts.mode !== undefined) cfg.mode = opts.mode;
  if (opts.weights !== undefined) cfg.weights = opts.weights;
  if (opts.offsetC !== undefined) cfg.offset_c = opts.offsetC;
  if (opts.divisorN !== undefined) cfg.divisor_n = opts.divisorN;
  return JSON.stringify(cfg);
}

/**
 * Run the full preprocessing chain on one patient's channel files and
 * return the embedded volume (and windowed/cropped ground truth, if a seg
 * path was given) as typed arrays.
 */
export function preprocess(paths: PreprocessPaths, opts: PreprocessOptions = {}): PreprocessResult {
  return withScratchDir(opts.keepWorkdir, (dir) => {
    const pid = "case_0000";
    const patientDir = join(dir, "data", "HGG", pid);
    mkdirSync(patientDir, { recursive: true });
    for (const mod of MODALITIES) {
      copyFileSync(paths[mod], join(patientDir, `${pid}_${mod}.nii.gz`));
    }
    if (paths.seg) copyFileSync(paths.seg, join(patientDir, `${pid}_seg.nii.gz`));

    const outDir = join(dir, "out");
    const configPath = join(dir, "config.json");
    writeFileSync(configPath, configJson(opts, outDir, join(dir, "data")));
    runCli(["preprocess", "--config", configPath]);

    const embedded = parseNifti(readFileSync(join(outDir, pid, "embedded.nii.gz")));
    const result: PreprocessResult = { embedded };
    if (paths.seg) {
      result.groundTruth = parseNifti(readFileSync(join(outDir, pid, "gt.nii.gz")));
    }
    if (opts.keepWorkdir) result.workDir = dir;
    return result;
  });
}

export interface EmbedOptions {
  mode?: "real" | "wrap_u8" | "saturate_u8";
  weights?: Partial<Record<ModalityName, number>>;
  offsetC?: number;
  divisorN?: number;
}

/**
 * Fuse 2-4 channels (typed arrays sharing one shape) into one volume.
 */
export function embed(
  channels: Partial<Record<ModalityName, VolumeArray>>,
  opts: EmbedOptions = {},
): VolumeArray {
  const present = MODALITIES.filter((m) => channels[m] !== undefined);
  if (present.length < 2) {
    throw new Error(`embed needs at least two channels, got ${present.length}`);
  }
  return withScratchDir(false, (dir) => {
    const args = ["embed", "--mode", opts.mode ?? "real"];
    for (const mod of present) {
      const path = join(dir, `${mod}.nii.gz`);
      writeFileSync(path, encodeNiftiFor(path, channels[mod]!));
      args.push(`--${mod}`, path);
    }
    for (const [name, value] of Object.entries(opts.weights ?? {})) {
      args.push("--weight", `${name}=${value}`);
    }
    if (opts.offsetC !== undefined) args.push("--offset-c", String(opts.offsetC));
    if (opts.divisorN !== undefined) args.push("--divisor-n", String(opts.divisorN));
    const outPath = join(dir, "fused.nii.gz");
    args.push("--out", outPath);
    runCli(args);
    return parseNifti(readFileSync(outPath));
  });
}

/**
 * Whole-tumor Dice between two masks (any nonzero voxel counts as
 * positive). Accepts typed arrays with a shape, returns the scalar score.
 */
export function dice(pred: VolumeArray, gt: VolumeArray): number {
  return withScratchDir(false, (dir) => {
    const predDir = join(dir, "pred");
    const gtDir = join(dir, "gt");
    mkdirSync(predDir);
    mkdirSync(gtDir);
    const write = (d: string, vol: VolumeArray) => {
      const p = join(d, "mask.nii.gz");
      writeFileSync(p, encodeNiftiFor(p, vol));
    };
    write(predDir, pred);
    write(gtDir, gt);
    const outDir = join(dir, "report");
    runCli(["evaluate", "--pred", predDir, "--gt", gtDir, "--out", outDir]);
    const report = JSON.parse(readFileSync(join(outDir, "report.json"), "utf8")) as {
      per_volume: { id: string; dice: number }[];
    };
    if (report.per_volume.length !== 1) {
      throw new Error(`expected one scored pair, got ${report.per_volume.length}`);
    }
    return report.per_volume[0].dice;
  });
}
