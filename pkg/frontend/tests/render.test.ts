import { describe, expect, it } from "vitest";

import { EquirectTexture, renderPerspective, sampleEquirect } from "../src/render.js";

function solidTexture(width: number, height: number, rgb: [number, number, number]): EquirectTexture {
  const data = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    data[i * 4] = rgb[0];
    data[i * 4 + 1] = rgb[1];
    data[i * 4 + 2] = rgb[2];
    data[i * 4 + 3] = 255;
  }
  return { width, height, data };
}

function columnRamp(width: number, height: number): EquirectTexture {
  const tex = solidTexture(width, height, [0, 0, 0]);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      tex.data[(y * width + x) * 4] = Math.round((x / width) * 255);
    }
  }
  return tex;
}

const pose = (yaw = 0, pitch = 0, fov = 90) => ({ yawDeg: yaw, pitchDeg: pitch, fovDeg: fov });

describe("renderPerspective", () => {
  it("renders a constant panorama as a constant frame", () => {
    const tex = solidTexture(64, 32, [12, 200, 99]);
    const frame = renderPerspective(tex, pose(), 32, 18);
    for (let i = 0; i < 32 * 18; i++) {
      expect(frame[i * 4]).toBe(12);
      expect(frame[i * 4 + 1]).toBe(200);
      expect(frame[i * 4 + 2]).toBe(99);
      expect(frame[i * 4 + 3]).toBe(255);
    }
  });

  it("the frame center at yaw 0 shows the equirect center column", () => {
    const tex = columnRamp(256, 128);
    const frame = renderPerspective(tex, pose(), 33, 19);
    const center = frame[((9 * 33) + 16) * 4];
    expect(Math.abs(center - 127.5)).toBeLessThanOrEqual(2);
  });

  it("a full 360-degree yaw returns the identical frame", () => {
    const tex = columnRamp(128, 64);
    const a = renderPerspective(tex, pose(33), 24, 16);
    const b = renderPerspective(tex, pose(33 + 360), 24, 16);
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("looking straight down samples the bottom rows", () => {
    const tex = solidTexture(64, 32, [10, 10, 10]);
    // paint the bottom quarter white
    for (let y = 24; y < 32; y++) {
      for (let x = 0; x < 64; x++) {
        tex.data[(y * 64 + x) * 4] = 255;
        tex.data[(y * 64 + x) * 4 + 1] = 255;
        tex.data[(y * 64 + x) * 4 + 2] = 255;
      }
    }
    const frame = renderPerspective(tex, pose(0, -90, 75), 16, 16);
    const center = frame[((8 * 16) + 8) * 4];
    expect(center).toBe(255);
  });

  it("yaw rotation shifts sampled longitudes", () => {
    const tex = columnRamp(256, 128);
    const left = renderPerspective(tex, pose(-45), 33, 19);
    const right = renderPerspective(tex, pose(45), 33, 19);
    const c = ((9 * 33) + 16) * 4;
    expect(left[c]).toBeLessThan(right[c]);
  });
});

describe("sampleEquirect", () => {
  it("wraps horizontally", () => {
    const tex = columnRamp(100, 50);
    const out: number[] = [0, 0, 0, 0];
    sampleEquirect(tex, 0.25, 25, out); // quarter pixel before the seam
    const nearSeam = out[0];
    sampleEquirect(tex, 100.25, 25, out);
    expect(out[0]).toBeCloseTo(nearSeam, 10);
  });

  it("clamps vertically", () => {
    const tex = columnRamp(100, 50);
    const out: number[] = [0, 0, 0, 0];
    sampleEquirect(tex, 50, -5, out);
    const top = out[0];
    sampleEquirect(tex, 50, 0.5, out);
    expect(out[0]).toBe(top);
  });
});
