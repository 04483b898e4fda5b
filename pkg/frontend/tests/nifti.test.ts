import { gzipSync } from "node:zlib";
import { describe, expect, it } from "vitest";

import { NiftiFormatError, parseNifti, writeNifti } from "../src/nifti.js";
import { mulberry32 } from "./prng.js";

function randomF32(n: number, seed: number): Float32Array {
  const rand = mulberry32(seed);
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) out[i] = Math.fround(rand() * 200 - 50);
  return out;
}

describe("nifti codec", () => {
  it("round-trips float32 volumes", () => {
    const shape: [number, number, number] = [5, 4, 3];
    const data = randomF32(60, 1);
    const buf = writeNifti({ data, shape, spacing: [0.5, 1, 2] });
    const back = parseNifti(buf);
    expect(back.shape).toEqual(shape);
    expect(back.spacing).toEqual([0.5, 1, 2]);
    expect(Array.from(back.data)).toEqual(Array.from(data));
  });

  it("round-trips uint8 and int16 volumes", () => {
    const rand = mulberry32(7);
    const u8 = new Uint8Array(24).map(() => Math.floor(rand() * 256));
    const i16 = new Int16Array(24).map(() => Math.floor(rand() * 65536) - 32768);
    for (const data of [u8, i16]) {
      const back = parseNifti(writeNifti({ data: data as any, shape: [2, 3, 4] }));
      expect(back.data.constructor).toBe(data.constructor);
      expect(Array.from(back.data)).toEqual(Array.from(data));
    }
  });

  it("handles gzip streams transparently", () => {
    const data = randomF32(12, 3);
    const raw = writeNifti({ data, shape: [3, 2, 2] });
    const back = parseNifti(gzipSync(raw));
    expect(Array.from(back.data)).toEqual(Array.from(data));
  });

  it("parses big-endian encodings of the same volume", () => {
    // hand-build a big-endian twin of a little-endian stream
    const shape: [number, number, number] = [2, 2, 2];
    const data = new Int16Array([1, -2, 300, -400, 5, 6, 7, -32768]);
    const le = writeNifti({ data, shape });
    const be = Buffer.alloc(le.length);
    const leView = new DataView(le.buffer, le.byteOffset, le.byteLength);
    const beView = new DataView(be.buffer, be.byteOffset, be.byteLength);
    beView.setInt32(0, 348, false);
    for (let i = 0; i < 8; i++) beView.setInt16(40 + 2 * i, leView.getInt16(40 + 2 * i, true), false);
    beView.setInt16(70, 4, false);
    beView.setInt16(72, 16, false);
    for (let i = 0; i < 8; i++) beView.setFloat32(76 + 4 * i, leView.getFloat32(76 + 4 * i, true), false);
    beView.setFloat32(108, 352, false);
    be.write("n+1\0", 344, "latin1");
    for (let i = 0; i < data.length; i++) beView.setInt16(352 + 2 * i, data[i], false);

    const fromLe = parseNifti(le);
    const fromBe = parseNifti(be);
    expect(Array.from(fromBe.data)).toEqual(Array.from(fromLe.data));
  });

  it("rejects junk, truncation and unsupported datatypes", () => {
    expect(() => parseNifti(Buffer.from("nope"))).toThrow(NiftiFormatError);
    expect(() => parseNifti(Buffer.alloc(400))).toThrow(/signature/);
    const good = writeNifti({ data: new Float32Array(8), shape: [2, 2, 2] });
    expect(() => parseNifti(good.subarray(0, good.length - 1))).toThrow(/truncated/);
    const badType = Buffer.from(good);
    new DataView(badType.buffer, badType.byteOffset).setInt16(70, 64, true);
    expect(() => parseNifti(badType)).toThrow(/datatype/);
  });

  it("rejects length/shape disagreement on write", () => {
    expect(() => writeNifti({ data: new Float32Array(7), shape: [2, 2, 2] })).toThrow(
      /shape product/,
    );
  });
});
