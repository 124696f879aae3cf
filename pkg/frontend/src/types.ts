/** Shared types mirroring the gateway JSON protocol. */

export const EMOTION_NAMES = [
  "neutral",
  "surprise",
  "fear",
  "sadness",
  "joy",
  "disgust",
  "anger",
] as const;

export type EmotionName = (typeof EMOTION_NAMES)[number];

export interface ExprResponse {
  type: "expr";
  turn_index: number;
  emotion: EmotionName;
  emotion_id: number;
  probs: number[];
  latency_ms: number;
}

export interface StatusResponse {
  ok: boolean;
  frames_received: number;
  turns: number;
}

export interface RawFrame {
  width: number;
  height: number;
  /** packed RGB, row-major */
  data: Uint8Array;
}

export interface TurnLogEntry {
  text: string;
  speaker: string | null;
  status: "ok" | "failed";
  emotion: EmotionName | null;
  emotionId: number | null;
  probs: number[] | null;
  latencyMs: number | null;
}

export type FrameSourceMode = "webcam" | "glyph";

export type ConnectionState = "connecting" | "connected" | "disconnected";
