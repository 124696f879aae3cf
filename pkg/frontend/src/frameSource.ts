/** Frame sources: webcam capture via canvas, or synthetic glyph presets.
 * Both push batches of RGB frames through the gateway at >= 10 FPS. */

import type { GatewayClient } from "./api.js";
import { renderGlyphFrame } from "./glyphs.js";
import type { RawFrame } from "./types.js";

export const STREAM_FPS = 10;
const CAPTURE_WIDTH = 160;
const CAPTURE_HEIGHT = 90;

export interface GlyphStreamState {
  activeEmotionId: number;
  distractorEmotionId: number | null;
  /** ramp position within the current utterance, advanced per frame */
  progress: number;
}

export function rgbaToRgb(rgba: Uint8ClampedArray): Uint8Array {
  const pixels = rgba.length / 4;
  const out = new Uint8Array(pixels * 3);
  for (let i = 0; i < pixels; i++) {
    out[i * 3] = rgba[i * 4];
    out[i * 3 + 1] = rgba[i * 4 + 1];
    out[i * 3 + 2] = rgba[i * 4 + 2];
  }
  return out;
}

export class FrameStreamer {
  private timer: ReturnType<typeof setInterval> | null = null;
  private video: HTMLVideoElement | null = null;
  private canvas: HTMLCanvasElement | null = null;
  paused = false;
  framesSent = 0;
  glyph: GlyphStreamState = {
    activeEmotionId: 4,
    distractorEmotionId: null,
    progress: 0,
  };

  constructor(
    private readonly client: GatewayClient,
    private readonly onError: (message: string) => void,
  ) {}

  async startWebcam(): Promise<boolean> {
    try {
      const stream = await navigator.mediaDevices.getUserMedia({ video: true });
      this.video = document.createElement("video");
      this.video.srcObject = stream;
      await this.video.play();
      this.canvas = document.createElement("canvas");
      this.canvas.width = CAPTURE_WIDTH;
      this.canvas.height = CAPTURE_HEIGHT;
      this.run(() => this.captureWebcamFrame());
      return true;
    } catch {
      this.onError("webcam unavailable; falling back to glyph mode");
      return false;
    }
  }

  startGlyphs(): void {
    this.run(() => {
      const frame = renderGlyphFrame(this.glyph);
      // ramp toward full glyph intensity over ~2 s, then hold
      this.glyph.progress = Math.min(1, this.glyph.progress + 1 / (2 * STREAM_FPS));
      return frame;
    });
  }

  /** Reset the amplitude ramp; call when a new utterance begins. */
  newUtterance(): void {
    this.glyph.progress = 0;
  }

  private captureWebcamFrame(): RawFrame | null {
    if (!this.video || !this.canvas) {
      return null;
    }
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      return null;
    }
    ctx.drawImage(this.video, 0, 0, CAPTURE_WIDTH, CAPTURE_HEIGHT);
    const rgba = ctx.getImageData(0, 0, CAPTURE_WIDTH, CAPTURE_HEIGHT).data;
    return { width: CAPTURE_WIDTH, height: CAPTURE_HEIGHT, data: rgbaToRgb(rgba) };
  }

  private run(produce: () => RawFrame | null): void {
    this.stop();
    this.timer = setInterval(() => {
      if (this.paused) {
        return;
      }
      const frame = produce();
      if (!frame) {
        return;
      }
      this.client
        .sendFrames([frame])
        .then(() => {
          this.framesSent += 1;
        })
        .catch(() => {
          /* dropped frame; connection state is handled by the status poll */
        });
    }, 1000 / STREAM_FPS);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
