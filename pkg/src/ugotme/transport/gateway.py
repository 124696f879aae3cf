"""Console gateway: newline-delimited JSON with HTTP sniffed on the same port.

JSON stream protocol (one JSON object per line):
  -> {"type": "frame_b64", "width": W, "height": H, "data": base64, "ts_us": optional}
  -> {"type": "turn", "text": ..., "speaker": optional}
  <- {"type": "expr", "turn_index": i, "emotion": name, "emotion_id": id,
      "probs": [...7...], "latency_ms": ...}

HTTP (for the browser console, which cannot open raw TCP):
  GET  /console/...   static assets
  GET  /api/status    {"ok": true, "frames_received": n}
  POST /api/frames    {"frames": [frame_b64 objects]}
  POST /api/turn      turn object -> expr object
"""

from __future__ import annotations

import json
import socket
from pathlib import Path

from ..ring import FrameRingBuffer

HTTP_METHODS = (b"GET ", b"POST", b"HEAD", b"OPTI", b"PUT ", b"DELE")


class GatewaySession:
    """Per-client state: own ring buffer and own dialogue pipeline."""

    def __init__(self, server):
        self.server = server
        self.ring = FrameRingBuffer(server.buffer_capacity)
        factory = server.gateway_pipeline_factory
        self.pipeline = factory() if factory else None
        self.next_seq = 0
        self.next_turn_index = 0
        self.last_ts = -1
        self.window_start_us = 0
        self.frames_received = 0

        if self.pipeline is None:
            raise RuntimeError("gateway requires a pipeline factory")


def serve_gateway_connection(server, conn: socket.socket) -> None:
    conn.settimeout(30.0)
    first = conn.recv(4, socket.MSG_PEEK)
    if not first:
        return
    if any(first == m[: len(first)] or first.startswith(m) for m in HTTP_METHODS):
        _serve_http(server, conn)
    else:
        _serve_json_stream(server, conn)


# --- newline-delimited JSON ---

def _serve_json_stream(server, conn: socket.socket) -> None:
    session = server.make_gateway_session()
    buf = bytearray()
    while True:
        try:
            chunk = conn.recv(1 << 16)
        except socket.timeout:
            continue
        except OSError:
            return
        if not chunk:
            return
        buf.extend(chunk)
        while b"\n" in buf:
            line, _, rest = bytes(buf).partition(b"\n")
            buf = bytearray(rest)
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                _send_line(conn, {"type": "error", "error": f"bad json: {exc}"})
                continue
            kind = payload.get("type")
            if kind == "frame_b64":
                try:
                    server.handle_gateway_frame(session, payload)
                except Exception as exc:
                    _send_line(conn, {"type": "error", "error": str(exc)})
            elif kind == "turn":
                _send_line(conn, server.handle_gateway_turn(session, payload))
            else:
                _send_line(conn, {"type": "error", "error": f"unknown type {kind!r}"})


def _send_line(conn, obj: dict) -> None:
    conn.sendall(json.dumps(obj).encode() + b"\n")


# --- minimal HTTP ---

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".json": "application/json",
}


def _serve_http(server, conn: socket.socket) -> None:
    # keep-alive loop; one request at a time
    buf = bytearray()
    while True:
        head_end = buf.find(b"\r\n\r\n")
        while head_end < 0:
            try:
                chunk = conn.recv(1 << 16)
            except (socket.timeout, OSError):
                return
            if not chunk:
                return
            buf.extend(chunk)
            head_end = buf.find(b"\r\n\r\n")
        head = bytes(buf[:head_end]).decode("latin-1")
        lines = head.split("\r\n")
        try:
            method, path, _version = lines[0].split(" ", 2)
        except ValueError:
            return
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip()
        body_len = int(headers.get("content-length", "0"))
        total = head_end + 4 + body_len
        while len(buf) < total:
            try:
                chunk = conn.recv(1 << 16)
            except (socket.timeout, OSError):
                return
            if not chunk:
                return
            buf.extend(chunk)
        body = bytes(buf[head_end + 4:total])
        del buf[:total]
        keep_alive = headers.get("connection", "keep-alive").lower() != "close"
        try:
            _handle_http_request(server, conn, method, path, body)
        except OSError:
            return
        if not keep_alive:
            return


def _http_response(conn, status: str, content_type: str, body: bytes) -> None:
    head = (
        f"HTTP/1.1 {status}\r\n"
        f"Content-Type: {content_type}\r\n"
        f"Content-Length: {len(body)}\r\n"
        "Access-Control-Allow-Origin: *\r\n"
        "Access-Control-Allow-Headers: Content-Type\r\n"
        "Access-Control-Allow-Methods: GET, POST, OPTIONS\r\n"
        "Connection: keep-alive\r\n\r\n"
    )
    conn.sendall(head.encode() + body)


def _json_response(conn, obj: dict, status: str = "200 OK") -> None:
    _http_response(conn, status, "application/json", json.dumps(obj).encode())


def _handle_http_request(server, conn, method: str, path: str, body: bytes) -> None:
    path = path.split("?", 1)[0]
    if method == "OPTIONS":
        _http_response(conn, "204 No Content", "text/plain", b"")
        return
    if path == "/" :
        _http_response(
            conn, "302 Found", "text/html",
            b'<a href="/console/">console</a>',
        )
        return
    if path.startswith("/console"):
        _serve_static(server, conn, path)
        return
    session = server.http_session()
    if method == "GET" and path == "/api/status":
        _json_response(conn, {
            "ok": True,
            "frames_received": session.frames_received,
            "turns": session.next_turn_index,
        })
        return
    if method == "POST" and path == "/api/frames":
        try:
            payload = json.loads(body)
            for frame in payload.get("frames", []):
                server.handle_gateway_frame(session, frame)
            _json_response(conn, {"ok": True,
                                  "frames_received": session.frames_received})
        except Exception as exc:
            _json_response(conn, {"ok": False, "error": str(exc)},
                           "400 Bad Request")
        return
    if method == "POST" and path == "/api/turn":
        try:
            payload = json.loads(body)
        except json.JSONDecodeError as exc:
            _json_response(conn, {"ok": False, "error": str(exc)},
                           "400 Bad Request")
            return
        _json_response(conn, server.handle_gateway_turn(session, payload))
        return
    _json_response(conn, {"ok": False, "error": "not found"}, "404 Not Found")


def _serve_static(server, conn, path: str) -> None:
    root = server.console_dir
    if root is None or not root.is_dir():
        _http_response(conn, "404 Not Found", "text/plain",
                       b"console assets not configured")
        return
    rel = path[len("/console"):].lstrip("/") or "index.html"
    target = (root / rel).resolve()
    if not str(target).startswith(str(root.resolve())) or not target.is_file():
        _http_response(conn, "404 Not Found", "text/plain", b"not found")
        return
    ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
    _http_response(conn, "200 OK", ctype, target.read_bytes())
