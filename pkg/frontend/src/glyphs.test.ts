import { describe, expect, it } from "vitest";

import {
  DISTRACTOR_OFFSET,
  FACE_SIDE,
  FRAME_HEIGHT,
  FRAME_WIDTH,
  glyphCellBounds,
  glyphTurnFrames,
  renderGlyphFrame,
} from "./glyphs.js";

function pixel(frame: { width: number; data: Uint8Array }, x: number, y: number): number {
  return frame.data[(y * frame.width + x) * 3];
}

function faceOrigin(): [number, number] {
  return [
    Math.floor(FRAME_WIDTH / 2 - FACE_SIDE / 2),
    Math.floor(FRAME_HEIGHT / 2 - FACE_SIDE / 2),
  ];
}

describe("glyphCellBounds", () => {
  it("assigns each non-neutral emotion a distinct 2x3 grid cell", () => {
    const cells = new Set<string>();
    for (let id = 1; id <= 6; id++) {
      const [y0, y1, x0, x1] = glyphCellBounds(FACE_SIDE, id);
      expect(y1).toBeGreaterThan(y0);
      expect(x1).toBeGreaterThan(x0);
      expect(y1).toBeLessThanOrEqual(FACE_SIDE);
      expect(x1).toBeLessThanOrEqual(FACE_SIDE);
      cells.add(`${y0},${x0}`);
    }
    expect(cells.size).toBe(6);
  });

  it("rejects neutral and unknown ids", () => {
    expect(() => glyphCellBounds(FACE_SIDE, 0)).toThrow();
    expect(() => glyphCellBounds(FACE_SIDE, 7)).toThrow();
  });
});

describe("renderGlyphFrame", () => {
  it("paints a centered face over a dark background", () => {
    const frame = renderGlyphFrame({ activeEmotionId: 4, progress: 0 });
    expect(frame.data.length).toBe(FRAME_WIDTH * FRAME_HEIGHT * 3);
    expect(pixel(frame, 0, 0)).toBe(20);
    const [fx, fy] = faceOrigin();
    expect(pixel(frame, fx + 1, fy + 1)).toBe(150);
  });

  it("keeps the face flat at progress 0 and lights one cell at progress 1", () => {
    const flat = renderGlyphFrame({ activeEmotionId: 6, progress: 0 });
    const hot = renderGlyphFrame({ activeEmotionId: 6, progress: 1 });
    const [fx, fy] = faceOrigin();
    const [y0, , x0] = glyphCellBounds(FACE_SIDE, 6);
    expect(pixel(flat, fx + x0, fy + y0)).toBe(150);
    expect(pixel(hot, fx + x0, fy + y0)).toBe(230);
    // outside the glyph cell the face stays flat either way
    expect(pixel(hot, fx, fy)).toBe(150);
  });

  it("draws the distractor at least 100 px off-center when enabled", () => {
    expect(DISTRACTOR_OFFSET).toBeGreaterThanOrEqual(100);
    const frame = renderGlyphFrame({
      activeEmotionId: 0,
      progress: 1,
      distractorEmotionId: 2,
    });
    const dx = Math.floor(FRAME_WIDTH / 2 + DISTRACTOR_OFFSET - FACE_SIDE / 2);
    const [, fy] = faceOrigin();
    expect(pixel(frame, dx + 1, fy + 1)).toBe(150);
    const off = renderGlyphFrame({ activeEmotionId: 0, progress: 1 });
    expect(pixel(off, dx + 1, fy + 1)).toBe(20);
  });
});

describe("glyphTurnFrames", () => {
  it("ramps amplitude so the first frame is neutral and the last is full", () => {
    const frames = glyphTurnFrames(4, 5);
    expect(frames.length).toBe(5);
    const [fx, fy] = faceOrigin();
    const [y0, , x0] = glyphCellBounds(FACE_SIDE, 4);
    const cell = frames.map((f) => pixel(f, fx + x0, fy + y0));
    expect(cell[0]).toBe(150); // neutral first frame
    expect(cell[4]).toBe(230); // full amplitude last frame
    for (let i = 1; i < cell.length; i++) {
      expect(cell[i]).toBeGreaterThanOrEqual(cell[i - 1]);
    }
  });
});
