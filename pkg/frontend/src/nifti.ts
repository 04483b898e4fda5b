/**
 * Minimal NIfTI-1 single-file codec for moving typed arrays across the
 * toolkit boundary.
 *
 * Handles the standard 348-byte header (both byte orders, detected via
 * sizeof_hdr), gzip streams (0x1F 0x8B magic), and the uint8 / int16 /
 * float32 datatypes the toolkit supports. Voxels are kept as a flat typed
 * array in x-fastest order: index = x + nx * (y + ny * z).
 */

import { gzipSync, gunzipSync } from "node:zlib";

export type VoxelArray = Uint8Array | Int16Array | Float32Array;

export interface VolumeArray {
  data: VoxelArray;
  shape: [number, number, number];
  spacing: [number, number, number];
}

const HEADER_SIZE = 348;
const MAGIC_OFFSET = 344;
const VOX_OFFSET_DEFAULT = 352;

const DATATYPE_FOR = new Map<Function, { code: number; bitpix: number }>([
  [Uint8Array, { code: 2, bitpix: 8 }],
  [Int16Array, { code: 4, bitpix: 16 }],
  [Float32Array, { code: 16, bitpix: 32 }],
]);

export class NiftiFormatError extends Error {}

function isGzip(buf: Uint8Array): boolean {
  return buf.length >= 2 && buf[0] === 0x1f && buf[1] === 0x8b;
}

/** Decode a raw or gzipped NIfTI-1 buffer into a typed array + metadata. */
export function parseNifti(source: Uint8Array): VolumeArray {
  let buf = isGzip(source) ? gunzipSync(source) : Buffer.from(source.buffer, source.byteOffset, source.byteLength);
  if (buf.length < HEADER_SIZE) {
    throw new NiftiFormatError(`stream of ${buf.length} bytes is too short to be NIfTI-1`);
  }
  const magic = buf.toString("latin1", MAGIC_OFFSET, MAGIC_OFFSET + 3);
  if (magic !== "n+1" && magic !== "ni1") {
    throw new NiftiFormatError(`magic ${JSON.stringify(magic)} is not a NIfTI-1 signature`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  let little = true;
  if (view.getInt32(0, true) !== HEADER_SIZE) {
    if (view.getInt32(0, false) !== HEADER_SIZE) {
      throw new NiftiFormatError("sizeof_hdr is not 348 under either byte order");
    }
    little = false;
  }
  const rank = view.getInt16(40, little);
  if (rank < 1 || rank > 7) {
    throw new NiftiFormatError(`dim[0] (rank) must be in [1, 7], got ${rank}`);
  }
  const extents: number[] = [];
  for (let i = 1; i <= rank; i++) {
    extents.push(view.getInt16(40 + 2 * i, little));
  }
  while (extents.length > 3 && extents[extents.length - 1] === 1) extents.pop();
  if (extents.length > 3) {
    throw new NiftiFormatError(`only 3-D volumes are supported, got extents ${extents}`);
  }
  while (extents.length < 3) extents.push(1);
  const shape = extents as [number, number, number];

  const datatype = view.getInt16(70, little);
  const spacing: [number, number, number] = [1, 1, 1];
  for (let i = 0; i < 3; i++) {
    const p = view.getFloat32(76 + 4 * (i + 1), little);
    spacing[i] = p > 0 ? p : 1;
  }
  const voxOffset = Math.round(view.getFloat32(108, little));
  const n = shape[0] * shape[1] * shape[2];

  let data: VoxelArray;
  if (datatype === 2) {
    if (buf.length < voxOffset + n) throw new NiftiFormatError("data segment truncated");
    data = new Uint8Array(buf.buffer.slice(buf.byteOffset + voxOffset, buf.byteOffset + voxOffset + n));
  } else if (datatype === 4 || datatype === 16) {
    const itemSize = datatype === 4 ? 2 : 4;
    if (buf.length < voxOffset + n * itemSize) throw new NiftiFormatError("data segment truncated");
    const body = new DataView(buf.buffer, buf.byteOffset + voxOffset, n * itemSize);
    data = datatype === 4 ? new Int16Array(n) : new Float32Array(n);
    for (let i = 0; i < n; i++) {
      data[i] = datatype === 4 ? body.getInt16(2 * i, little) : body.getFloat32(4 * i, little);
    }
  } else {
    throw new NiftiFormatError(`datatype code ${datatype} not supported (expected 2, 4 or 16)`);
  }
  return { data, shape, spacing };
}

/** Serialize a typed array as an uncompressed little-endian NIfTI-1 stream. */
export function writeNifti(volume: {
  data: VoxelArray;
  shape: [number, number, number];
  spacing?: [number, number, number];
}): Buffer {
  const { data, shape } = volume;
  const spacing = volume.spacing ?? [1, 1, 1];
  const n = shape[0] * shape[1] * shape[2];
  if (data.length !== n) {
    throw new NiftiFormatError(`data length ${data.length} != shape product ${n}`);
  }
  const dt = DATATYPE_FOR.get(data.constructor);
  if (!dt) throw new NiftiFormatError(`unsupported typed array ${data.constructor.name}`);

  const header = Buffer.alloc(VOX_OFFSET_DEFAULT);
  const view = new DataView(header.buffer, header.byteOffset, header.byteLength);
  view.setInt32(0, HEADER_SIZE, true);
  view.setInt16(40, 3, true);
  for (let i = 0; i < 3; i++) view.setInt16(42 + 2 * i, shape[i], true);
  for (let i = 3; i < 7; i++) view.setInt16(42 + 2 * i, 1, true);
  view.setInt16(70, dt.code, true);
  view.setInt16(72, dt.bitpix, true);
  view.setFloat32(76, 1, true); // pixdim[0] (qfac)
  for (let i = 0; i < 3; i++) view.setFloat32(80 + 4 * i, spacing[i], true);
  for (let i = 3; i < 7; i++) view.setFloat32(80 + 4 * i, 1, true);
  view.setFloat32(108, VOX_OFFSET_DEFAULT, true);
  view.setUint8(123, 2); // xyzt_units: mm
  header.write("n+1\0", MAGIC_OFFSET, "latin1");

  // typed arrays are little-endian on every platform Node supports
  const body = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  return Buffer.concat([header, body]);
}

/** writeNifti, gzip-compressed when the path ends in .gz. */
export function encodeNiftiFor(path: string, volume: Parameters<typeof writeNifti>[0]): Buffer {
  const raw = writeNifti(volume);
  return path.endsWith(".gz") ? gzipSync(raw, { level: 1 }) : raw;
}
