/** DOM wiring for the conversation console. */

import { GatewayClient } from "./api.js";
import { avatarSvg } from "./avatar.js";
import { FrameStreamer } from "./frameSource.js";
import { ConsoleSession, backoffDelaysMs } from "./session.js";
import { EMOTION_NAMES } from "./types.js";
import type { FrameSourceMode, TurnLogEntry } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

const client = new GatewayClient(window.location.origin);
const session = new ConsoleSession(client, "You");
const streamer = new FrameStreamer(client, showNotice);

let mode: FrameSourceMode = "glyph";
let reconnectAttempt = 0;

function showNotice(message: string): void {
  const banner = $("notice");
  banner.textContent = message;
  banner.classList.toggle("hidden", !message);
}

function renderAvatar(): void {
  $("avatar").innerHTML = avatarSvg(session.avatarEmotionId);
  $("avatar-label").textContent = session.avatarEmotion;
}

function renderConnection(): void {
  const el = $("conn");
  el.textContent = session.connection;
  el.className = `conn ${session.connection}`;
}

function renderLogEntry(entry: TurnLogEntry): void {
  const row = document.createElement("div");
  row.className = `turn ${entry.status}`;
  const probs = entry.probs
    ? entry.probs
        .map(
          (p, i) =>
            `<span class="bar" title="${EMOTION_NAMES[i]}: ${(p * 100).toFixed(1)}%">` +
            `<span style="height:${Math.round(p * 100)}%"></span></span>`,
        )
        .join("")
    : "";
  const verdict =
    entry.status === "ok"
      ? `${entry.emotion} (${entry.latencyMs?.toFixed(0)} ms)`
      : "failed";
  row.innerHTML =
    `<div class="utterance">${escapeHtml(entry.text)}</div>` +
    `<div class="verdict">${verdict}</div>` +
    `<div class="probs">${probs}</div>`;
  $("log").appendChild(row);
  row.scrollIntoView({ block: "nearest" });
}

function escapeHtml(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

async function sendCurrentTurn(): Promise<void> {
  const input = $<HTMLInputElement>("text");
  const text = input.value.trim();
  if (!text) {
    return;
  }
  const button = $<HTMLButtonElement>("send");
  button.disabled = true;
  try {
    const entry = await session.submitTurn(text);
    renderLogEntry(entry);
    renderAvatar();
    if (entry.status === "ok") {
      input.value = "";
      streamer.newUtterance();
    } else {
      showNotice(session.lastError ?? "turn failed");
    }
  } finally {
    button.disabled = false;
    input.focus();
  }
}

function applyMode(next: FrameSourceMode): void {
  mode = next;
  $("glyph-controls").classList.toggle("hidden", mode !== "glyph");
  streamer.stop();
  if (mode === "glyph") {
    streamer.startGlyphs();
  } else {
    void streamer.startWebcam().then((ok) => {
      if (!ok) {
        $<HTMLSelectElement>("mode").value = "glyph";
        applyMode("glyph");
      }
    });
  }
}

function readGlyphControls(): void {
  streamer.glyph.activeEmotionId = Number($<HTMLSelectElement>("active-emotion").value);
  const on = $<HTMLInputElement>("distractor-toggle").checked;
  streamer.glyph.distractorEmotionId = on
    ? Number($<HTMLSelectElement>("distractor-emotion").value)
    : null;
  streamer.newUtterance();
}

async function pollConnection(): Promise<void> {
  const before = session.connection;
  const state = await session.refreshStatus();
  renderConnection();
  if (state === "connected") {
    reconnectAttempt = 0;
    if (before !== "connected") {
      showNotice("");
    }
    setTimeout(pollConnection, 1000);
  } else {
    showNotice("connection lost; retrying...");
    const delays = backoffDelaysMs(reconnectAttempt + 1);
    reconnectAttempt += 1;
    setTimeout(pollConnection, delays[delays.length - 1]);
  }
}

function populateEmotionSelect(el: HTMLSelectElement, defaultId: number): void {
  EMOTION_NAMES.forEach((name, i) => {
    if (i === 0 && el.id === "distractor-emotion") {
      return; // a neutral distractor renders nothing
    }
    const opt = document.createElement("option");
    opt.value = String(i);
    opt.textContent = name;
    opt.selected = i === defaultId;
    el.appendChild(opt);
  });
}

function init(): void {
  populateEmotionSelect($("active-emotion"), 4);
  populateEmotionSelect($("distractor-emotion"), 3);
  renderAvatar();
  renderConnection();

  $("send").addEventListener("click", () => void sendCurrentTurn());
  $<HTMLInputElement>("text").addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") {
      void sendCurrentTurn();
    }
  });
  $<HTMLSelectElement>("mode").addEventListener("change", (ev) =>
    applyMode((ev.target as HTMLSelectElement).value as FrameSourceMode),
  );
  for (const id of ["active-emotion", "distractor-emotion", "distractor-toggle"]) {
    $(id).addEventListener("change", readGlyphControls);
  }
  $<HTMLInputElement>("pause").addEventListener("change", (ev) => {
    streamer.paused = (ev.target as HTMLInputElement).checked;
  });

  applyMode(mode);
  readGlyphControls();
  void pollConnection();
}

init();
