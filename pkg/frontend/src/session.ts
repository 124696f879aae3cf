/** Console session state: append-only turn log, avatar expression that only
 * moves on successful turns, and connection tracking with retry. */

import type { GatewayClient } from "./api.js";
import type {
  ConnectionState,
  EmotionName,
  TurnLogEntry,
} from "./types.js";
import { EMOTION_NAMES } from "./types.js";

export class ConsoleSession {
  readonly turnLog: TurnLogEntry[] = [];
  avatarEmotionId = 0; // neutral until the first successful turn
  connection: ConnectionState = "connecting";
  lastError: string | null = null;

  constructor(
    readonly client: GatewayClient,
    public speaker: string | null = null,
  ) {}

  get avatarEmotion(): EmotionName {
    return EMOTION_NAMES[this.avatarEmotionId];
  }

  async refreshStatus(): Promise<ConnectionState> {
    try {
      const status = await this.client.status();
      this.connection = status.ok ? "connected" : "disconnected";
    } catch {
      this.connection = "disconnected";
    }
    return this.connection;
  }

  /** Send one utterance; resolves to the appended log entry either way.
   * Failed turns never change the avatar. */
  async submitTurn(text: string): Promise<TurnLogEntry> {
    const trimmed = text.trim();
    if (!trimmed) {
      throw new Error("turn text must be non-empty");
    }
    let entry: TurnLogEntry;
    try {
      const expr = await this.client.sendTurn(trimmed, this.speaker);
      if (
        !Number.isInteger(expr.emotion_id) ||
        expr.emotion_id < 0 ||
        expr.emotion_id > 6
      ) {
        throw new Error(`bad emotion id ${expr.emotion_id}`);
      }
      entry = {
        text: trimmed,
        speaker: this.speaker,
        status: "ok",
        emotion: expr.emotion,
        emotionId: expr.emotion_id,
        probs: expr.probs,
        latencyMs: expr.latency_ms,
      };
      this.avatarEmotionId = expr.emotion_id;
      this.lastError = null;
    } catch (err) {
      entry = {
        text: trimmed,
        speaker: this.speaker,
        status: "failed",
        emotion: null,
        emotionId: null,
        probs: null,
        latencyMs: null,
      };
      this.lastError = err instanceof Error ? err.message : String(err);
    }
    this.turnLog.push(entry);
    return entry;
  }
}

/** Exponential backoff delays for reconnect attempts, capped. */
export function backoffDelaysMs(
  attempts: number,
  baseMs = 500,
  capMs = 5000,
): number[] {
  const out: number[] = [];
  for (let i = 0; i < attempts; i++) {
    out.push(Math.min(capMs, baseMs * 2 ** i));
  }
  return out;
}
