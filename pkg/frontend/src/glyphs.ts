/** Synthetic glyph faces matching the server's generator: each non-neutral
 * emotion lights one cell of a 2x3 grid inside the face box; amplitude ramps
 * over a turn so the first frame stays neutral. */

import type { RawFrame } from "./types.js";

export const FRAME_WIDTH = 320;
export const FRAME_HEIGHT = 180;
export const FACE_SIDE = 48;
export const DISTRACTOR_OFFSET = 110; // >= 100 px from frame center

const GRID_ROWS = 2;
const GRID_COLS = 3;
// grid slots for emotion ids 1..6 (surprise..anger); neutral has no glyph
const GLYPH_SLOT: Record<number, number> = { 1: 0, 2: 1, 3: 2, 4: 3, 5: 4, 6: 5 };

export function glyphCellBounds(
  side: number,
  emotionId: number,
): [number, number, number, number] {
  const slot = GLYPH_SLOT[emotionId];
  if (slot === undefined) {
    throw new Error(`emotion ${emotionId} has no glyph cell`);
  }
  const r = Math.floor(slot / GRID_COLS);
  const c = slot % GRID_COLS;
  const ch = Math.floor(side / GRID_ROWS);
  const cw = Math.floor(side / GRID_COLS);
  return [r * ch, (r + 1) * ch, c * cw, (c + 1) * cw];
}

function paintFace(
  frame: RawFrame,
  x0: number,
  y0: number,
  emotionId: number,
  amplitude: number,
): void {
  const { width, data } = frame;
  const bounds =
    emotionId !== 0 && amplitude > 0 ? glyphCellBounds(FACE_SIDE, emotionId) : null;
  for (let y = 0; y < FACE_SIDE; y++) {
    for (let x = 0; x < FACE_SIDE; x++) {
      let v = 150;
      if (
        bounds &&
        y >= bounds[0] &&
        y < bounds[1] &&
        x >= bounds[2] &&
        x < bounds[3]
      ) {
        v = Math.min(255, 150 + amplitude);
      }
      const off = ((y0 + y) * width + (x0 + x)) * 3;
      data[off] = v;
      data[off + 1] = v;
      data[off + 2] = v;
    }
  }
}

export interface GlyphFrameOptions {
  activeEmotionId: number;
  /** 0..1 position within the turn; controls glyph amplitude */
  progress: number;
  distractorEmotionId?: number | null;
}

export function renderGlyphFrame(opts: GlyphFrameOptions): RawFrame {
  const frame: RawFrame = {
    width: FRAME_WIDTH,
    height: FRAME_HEIGHT,
    data: new Uint8Array(FRAME_WIDTH * FRAME_HEIGHT * 3).fill(20),
  };
  const ax = Math.floor(FRAME_WIDTH / 2 - FACE_SIDE / 2);
  const ay = Math.floor(FRAME_HEIGHT / 2 - FACE_SIDE / 2);
  const amplitude = 80 * Math.min(1, Math.max(0, opts.progress));
  paintFace(frame, ax, ay, opts.activeEmotionId, amplitude);
  if (opts.distractorEmotionId != null && opts.distractorEmotionId !== 0) {
    const dx = Math.floor(FRAME_WIDTH / 2 + DISTRACTOR_OFFSET - FACE_SIDE / 2);
    paintFace(frame, dx, ay, opts.distractorEmotionId, 80);
  }
  return frame;
}

/** Frames for one utterance: amplitude ramp 0 -> full, first frame neutral. */
export function glyphTurnFrames(
  activeEmotionId: number,
  count: number,
  distractorEmotionId: number | null = null,
): RawFrame[] {
  const frames: RawFrame[] = [];
  for (let i = 0; i < count; i++) {
    frames.push(
      renderGlyphFrame({
        activeEmotionId,
        progress: count > 1 ? i / (count - 1) : 0,
        distractorEmotionId,
      }),
    );
  }
  return frames;
}
