/** Fetch-based client for the edge server's HTTP gateway. */

import { bytesToBase64 } from "./b64.js";
import type { ExprResponse, RawFrame, StatusResponse } from "./types.js";

export const TURN_TIMEOUT_MS = 5000;

export class GatewayClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async status(): Promise<StatusResponse> {
    const resp = await this.fetchFn(this.url("/api/status"));
    if (!resp.ok) {
      throw new Error(`status ${resp.status}`);
    }
    return (await resp.json()) as StatusResponse;
  }

  async sendFrames(frames: RawFrame[]): Promise<void> {
    const payload = {
      frames: frames.map((f) => ({
        width: f.width,
        height: f.height,
        data: bytesToBase64(f.data),
      })),
    };
    const resp = await this.fetchFn(this.url("/api/frames"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) {
      throw new Error(`frame upload failed: ${resp.status}`);
    }
  }

  async sendTurn(
    text: string,
    speaker: string | null,
    timeoutMs: number = TURN_TIMEOUT_MS,
  ): Promise<ExprResponse> {
    const controller = new AbortController();
    const timer = setTimeout(() => controller.abort(), timeoutMs);
    try {
      const resp = await this.fetchFn(this.url("/api/turn"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text, speaker }),
        signal: controller.signal,
      });
      if (!resp.ok) {
        throw new Error(`turn failed: ${resp.status}`);
      }
      const doc = (await resp.json()) as ExprResponse | { type: "error"; error: string };
      if (doc.type !== "expr") {
        throw new Error(doc.error ?? "gateway error");
      }
      return doc;
    } finally {
      clearTimeout(timer);
    }
  }
}
