"""Edge-side TCP service.

Two listeners:
  * robot port: the binary wire protocol. Frames feed the ring buffer on
    the ingestion path; each TURN triggers the pipeline handler and the
    resulting EXPR_CMD is written back on the same connection. A handler
    failure falls back to a neutral expression so the conversation never
    stalls.
  * gateway port: newline-delimited JSON for programmatic clients, with
    protocol sniffing so plain HTTP on the same port serves the browser
    console (static files under /console, JSON API under /api).
"""

from __future__ import annotations

import base64
import json
import socket
import threading
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

from ..emotions import EMOTION_NAMES, Emotion
from ..errors import StaleFrame, WireError
from ..ring import FrameRingBuffer
from ..wire import (
    ExprCmdMsg, FrameMsg, HeartbeatMsg, SessionMetaMsg, StreamDecoder, TurnMsg,
    encode_message,
)

HEARTBEAT_INTERVAL_S = 1.0
HEARTBEAT_MISSED_LIMIT = 5


def _now_us() -> int:
    return time.time_ns() // 1000


@dataclass
class ServerStats:
    frames_received: int = 0
    turns_received: int = 0
    stale_frames: int = 0
    decode_errors: int = 0
    handler_errors: int = 0
    errors: list[str] = field(default_factory=list)


class EdgeServer:
    """``handler(turn_msg, frames) -> TurnOutcome`` runs per received turn."""

    def __init__(
        self,
        handler,
        host: str = "127.0.0.1",
        port: int = 0,
        gateway_port: int = 0,
        buffer_capacity: int = 640,
        console_dir: str | None = None,
        gateway_pipeline_factory=None,
        heartbeat: bool = True,
        clock=None,
    ):
        self.handler = handler
        self.host = host
        self._req_port = port
        self._req_gateway_port = gateway_port
        self.buffer_capacity = buffer_capacity
        self.console_dir = Path(console_dir) if console_dir else None
        self.gateway_pipeline_factory = gateway_pipeline_factory
        self.heartbeat = heartbeat
        # injectable for byte-reproducible EXPR_CMD timestamps in tests
        self.clock = clock or _now_us

        self.ring = FrameRingBuffer(buffer_capacity)
        self.stats = ServerStats()
        self.stage_logs: list[dict] = []
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._robot_sock: socket.socket | None = None
        self._gateway_sock: socket.socket | None = None
        self._gateway_http_session = None
        self._lock = threading.Lock()

    # --- lifecycle ---

    def start(self) -> None:
        self._robot_sock = self._listen(self._req_port)
        self._gateway_sock = self._listen(self._req_gateway_port)
        t1 = threading.Thread(target=self._robot_accept_loop, daemon=True)
        t2 = threading.Thread(target=self._gateway_accept_loop, daemon=True)
        t1.start()
        t2.start()
        self._threads += [t1, t2]

    def _listen(self, port: int) -> socket.socket:
        s = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        s.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        s.bind((self.host, port))
        s.listen(4)
        s.settimeout(0.25)
        return s

    @property
    def robot_port(self) -> int:
        return self._robot_sock.getsockname()[1]

    @property
    def gateway_port(self) -> int:
        return self._gateway_sock.getsockname()[1]

    def stop(self) -> None:
        self._stop.set()
        for s in (self._robot_sock, self._gateway_sock):
            if s is not None:
                try:
                    s.close()
                except OSError:
                    pass
        for t in self._threads:
            t.join(timeout=2.0)

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()

    # --- robot connection ---

    def _robot_accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _addr = self._robot_sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            try:
                self._serve_robot(conn)
            except Exception as exc:  # connection-level failure, keep serving
                self.stats.errors.append(f"robot connection: {exc}")
            finally:
                try:
                    conn.close()
                except OSError:
                    pass

    def _serve_robot(self, conn: socket.socket) -> None:
        conn.settimeout(0.25)
        decoder = StreamDecoder()
        last_recv = time.monotonic()
        last_send = time.monotonic()
        send_lock = threading.Lock()

        def send(msg):
            nonlocal last_send
            with send_lock:
                conn.sendall(encode_message(msg))
                last_send = time.monotonic()

        while not self._stop.is_set():
            if self.heartbeat:
                now = time.monotonic()
                if now - last_send >= HEARTBEAT_INTERVAL_S:
                    try:
                        send(HeartbeatMsg())
                    except OSError:
                        return
                if now - last_recv >= HEARTBEAT_INTERVAL_S * HEARTBEAT_MISSED_LIMIT:
                    self.stats.errors.append("peer declared dead: missed heartbeats")
                    return
            try:
                chunk = conn.recv(1 << 16)
            except socket.timeout:
                continue
            except OSError:
                return
            if not chunk:
                return
            last_recv = time.monotonic()
            try:
                messages = decoder.feed(chunk)
            except WireError as exc:
                self.stats.decode_errors += 1
                self.stats.errors.append(f"decode: {exc}")
                return
            for msg in messages:
                self._dispatch_robot(msg, send)

    def _dispatch_robot(self, msg, send) -> None:
        if isinstance(msg, FrameMsg):
            try:
                self.ring.push(msg)
                self.stats.frames_received += 1
            except StaleFrame:
                self.stats.stale_frames += 1
        elif isinstance(msg, TurnMsg):
            self.stats.turns_received += 1
            snapshot = self.ring.snapshot(msg.start_ts_us, msg.end_ts_us)
            expr = self._run_handler(msg, snapshot)
            try:
                send(expr)
            except OSError:
                self.stats.errors.append("failed to send EXPR_CMD")
        elif isinstance(msg, (HeartbeatMsg, SessionMetaMsg)):
            pass

    def _run_handler(self, turn: TurnMsg, snapshot) -> ExprCmdMsg:
        try:
            outcome = self.handler(turn, snapshot)
            with self._lock:
                self.stage_logs.append(outcome.stage_log)
            return ExprCmdMsg(int(outcome.emotion), turn.turn_index, self.clock())
        except Exception as exc:
            self.stats.handler_errors += 1
            self.stats.errors.append(
                f"handler failed on turn {turn.turn_index}: {exc}\n"
                + traceback.format_exc()
            )
            return ExprCmdMsg(int(Emotion.NEUTRAL), turn.turn_index, self.clock())

    # --- gateway ---

    def _gateway_accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _addr = self._gateway_sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            t = threading.Thread(
                target=self._serve_gateway_conn, args=(conn,), daemon=True
            )
            t.start()

    def _serve_gateway_conn(self, conn: socket.socket) -> None:
        from .gateway import serve_gateway_connection

        try:
            serve_gateway_connection(self, conn)
        except Exception as exc:
            self.stats.errors.append(f"gateway connection: {exc}")
        finally:
            try:
                conn.close()
            except OSError:
                pass

    # shared session state for the stateless HTTP console
    def http_session(self):
        from .gateway import GatewaySession

        with self._lock:
            if self._gateway_http_session is None:
                self._gateway_http_session = GatewaySession(self)
            return self._gateway_http_session

    def make_gateway_session(self):
        from .gateway import GatewaySession

        return GatewaySession(self)

    def handle_gateway_turn(self, session, payload: dict) -> dict:
        """Shared by the JSON stream and HTTP paths."""
        text = payload.get("text", "")
        if not text:
            return {"type": "error", "error": "empty turn text"}
        started = time.monotonic()
        turn = TurnMsg(
            turn_index=session.next_turn_index,
            start_ts_us=payload.get("start_ts_us", session.window_start_us),
            end_ts_us=payload.get("end_ts_us", _now_us()),
            speaker=payload.get("speaker"),
            text=text,
        )
        snapshot = session.ring.snapshot(turn.start_ts_us, turn.end_ts_us)
        expr = None
        try:
            outcome = session.pipeline.handle_turn(turn, snapshot)
            probs = [float(x) for x in outcome.probs]
            emotion = outcome.emotion
        except Exception as exc:
            self.stats.handler_errors += 1
            self.stats.errors.append(f"gateway handler: {exc}")
            probs = [1.0 if i == 0 else 0.0 for i in range(7)]
            emotion = Emotion.NEUTRAL
        session.next_turn_index += 1
        session.window_start_us = turn.end_ts_us + 1
        return {
            "type": "expr",
            "turn_index": turn.turn_index,
            "emotion": EMOTION_NAMES[int(emotion)],
            "emotion_id": int(emotion),
            "probs": probs,
            "latency_ms": (time.monotonic() - started) * 1000.0,
        }

    def handle_gateway_frame(self, session, payload: dict) -> None:
        data = base64.b64decode(payload["data"])
        w = int(payload["width"])
        h = int(payload["height"])
        ts = int(payload.get("ts_us") or _now_us())
        frame = FrameMsg(session.next_seq, max(ts, session.last_ts + 1), w, h, data)
        session.last_ts = frame.timestamp_us
        session.next_seq += 1
        session.ring.push(frame)
        session.frames_received += 1
