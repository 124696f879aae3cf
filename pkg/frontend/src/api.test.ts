import { describe, expect, it } from "vitest";

import { GatewayClient } from "./api.js";
import { base64ToBytes } from "./b64.js";

type FetchCall = { url: string; init?: RequestInit };

function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function recordingFetch(
  respond: (call: FetchCall) => Response | Promise<Response>,
): { calls: FetchCall[]; fetchFn: typeof fetch } {
  const calls: FetchCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const call = { url: String(input), init };
    calls.push(call);
    return respond(call);
  }) as typeof fetch;
  return { calls, fetchFn };
}

describe("GatewayClient", () => {
  it("fetches status from /api/status", async () => {
    const { calls, fetchFn } = recordingFetch(() =>
      jsonResponse({ ok: true, frames_buffered: 3 }),
    );
    const client = new GatewayClient("http://host:7789/", fetchFn);
    const status = await client.status();
    expect(status.ok).toBe(true);
    expect(calls[0].url).toBe("http://host:7789/api/status");
  });

  it("posts frames as base64 JSON", async () => {
    const { calls, fetchFn } = recordingFetch(() => jsonResponse({ ok: true }));
    const client = new GatewayClient("http://host:7789", fetchFn);
    const data = new Uint8Array([1, 2, 3, 4, 5, 6]);
    await client.sendFrames([{ width: 2, height: 1, data }]);
    expect(calls[0].url).toBe("http://host:7789/api/frames");
    expect(calls[0].init?.method).toBe("POST");
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.frames[0].width).toBe(2);
    expect(base64ToBytes(body.frames[0].data)).toEqual(data);
  });

  it("returns the expr document for a successful turn", async () => {
    const expr = {
      type: "expr",
      turn_index: 1,
      emotion: "joy",
      emotion_id: 4,
      probs: [0, 0, 0, 0, 1, 0, 0],
      latency_ms: 8,
    };
    const { calls, fetchFn } = recordingFetch(() => jsonResponse(expr));
    const client = new GatewayClient("http://host:7789", fetchFn);
    const doc = await client.sendTurn("great news", "Ava");
    expect(doc.emotion_id).toBe(4);
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      text: "great news",
      speaker: "Ava",
    });
  });

  it("surfaces gateway error documents as thrown errors", async () => {
    const { fetchFn } = recordingFetch(() =>
      jsonResponse({ type: "error", error: "empty turn text" }),
    );
    const client = new GatewayClient("http://host:7789", fetchFn);
    await expect(client.sendTurn("x", null)).rejects.toThrow("empty turn text");
  });

  it("throws on non-2xx responses", async () => {
    const { fetchFn } = recordingFetch(() => jsonResponse({}, 500));
    const client = new GatewayClient("http://host:7789", fetchFn);
    await expect(client.status()).rejects.toThrow("500");
    await expect(
      client.sendFrames([{ width: 1, height: 1, data: new Uint8Array(3) }]),
    ).rejects.toThrow("500");
  });

  it("aborts a turn that exceeds the timeout", async () => {
    const fetchFn = ((_: RequestInfo | URL, init?: RequestInit) =>
      new Promise<Response>((_resolve, reject) => {
        init?.signal?.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")),
        );
      })) as typeof fetch;
    const client = new GatewayClient("http://host:7789", fetchFn);
    await expect(client.sendTurn("slow", null, 20)).rejects.toThrow();
  });
});
