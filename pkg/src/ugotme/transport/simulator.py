"""Robot-side simulator: streams a scripted session to the edge server.

Frames are paced at the configured rate on a sender thread fed by a
bounded queue; when the queue backs up, frames are dropped at the sender
and counted (turns are never dropped). Expression commands coming back on
the same connection are collected with arrival latencies.
"""

from __future__ import annotations

import queue
import socket
import threading
import time
from dataclasses import dataclass, field

from ..errors import TransportError, WireError
from ..wire import (
    ExprCmdMsg, HeartbeatMsg, SessionMetaMsg, StreamDecoder, TurnMsg,
    encode_message,
)

QUEUE_CAPACITY = 4096


@dataclass
class ReceivedExpr:
    cmd: ExprCmdMsg
    arrival_monotonic: float
    latency_s: float | None  # vs the matching turn's send time


@dataclass
class SessionLog:
    frames_sent: int = 0
    frames_dropped: int = 0
    turns_sent: int = 0
    expr_cmds: list[ReceivedExpr] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    clean_close: bool = False

    @property
    def expressions(self) -> list[int]:
        ordered = sorted(self.expr_cmds, key=lambda r: r.cmd.turn_index)
        return [r.cmd.expression for r in ordered]


def run_robot_simulator(
    script,
    endpoint: tuple[str, int],
    fps: float | None = None,
    expr_timeout_s: float = 15.0,
) -> SessionLog:
    """Stream ``script`` to the server at ``fps`` (default: the script's own
    rate; higher values fast-forward). Returns the session log; raises
    TransportError (carrying the partial log) if the connection fails."""
    log = SessionLog()
    pace_fps = fps or script.fps
    try:
        sock = socket.create_connection(endpoint, timeout=5.0)
    except OSError as exc:
        raise TransportError(f"connect to {endpoint} failed: {exc}", log) from exc
    sock.settimeout(0.25)

    turn_send_times: dict[int, float] = {}
    expected_turns = len(script.turns)
    done_receiving = threading.Event()
    send_q: queue.Queue = queue.Queue(maxsize=QUEUE_CAPACITY)
    sender_dead = threading.Event()

    def receiver():
        decoder = StreamDecoder()
        while not done_receiving.is_set():
            try:
                chunk = sock.recv(1 << 16)
            except socket.timeout:
                continue
            except OSError:
                return
            if not chunk:
                return
            try:
                msgs = decoder.feed(chunk)
            except WireError as exc:
                log.errors.append(f"decode: {exc}")
                return
            for msg in msgs:
                if isinstance(msg, ExprCmdMsg):
                    now = time.monotonic()
                    sent = turn_send_times.get(msg.turn_index)
                    log.expr_cmds.append(ReceivedExpr(
                        msg, now, (now - sent) if sent is not None else None
                    ))
                    if len(log.expr_cmds) >= expected_turns:
                        done_receiving.set()

    def sender():
        while True:
            item = send_q.get()
            if item is None:
                return
            try:
                sock.sendall(item)
            except OSError as exc:
                log.errors.append(f"send: {exc}")
                sender_dead.set()
                return

    recv_t = threading.Thread(target=receiver, daemon=True)
    send_t = threading.Thread(target=sender, daemon=True)
    recv_t.start()
    send_t.start()

    # interleave frames and turns by timestamp; a turn goes out right after
    # the last frame of its window
    turns = sorted(script.turns, key=lambda t: t.end_ts_us)
    turn_iter = iter(turns)
    pending_turn = next(turn_iter, None)

    try:
        send_q.put(encode_message(SessionMetaMsg(script.session_id, pace_fps)))
        start = time.monotonic()
        scale = script.fps / pace_fps  # wall seconds per script second
        for frame in script.frames:
            target = start + frame.timestamp_us / 1e6 * scale
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            if sender_dead.is_set():
                raise TransportError("connection lost mid-stream", log)
            try:
                send_q.put_nowait(encode_message(frame))
                log.frames_sent += 1
            except queue.Full:
                log.frames_dropped += 1
            while pending_turn is not None and frame.timestamp_us >= pending_turn.end_ts_us:
                _send_turn(pending_turn, send_q, turn_send_times, log)
                pending_turn = next(turn_iter, None)
        while pending_turn is not None:
            _send_turn(pending_turn, send_q, turn_send_times, log)
            pending_turn = next(turn_iter, None)

        if expected_turns:
            done_receiving.wait(timeout=expr_timeout_s)
            if len(log.expr_cmds) < expected_turns:
                log.errors.append(
                    f"timed out waiting for expressions: "
                    f"{len(log.expr_cmds)}/{expected_turns}"
                )
        log.clean_close = not log.errors
    finally:
        done_receiving.set()
        send_q.put(None)
        send_t.join(timeout=2.0)
        try:
            sock.close()
        except OSError:
            pass
        recv_t.join(timeout=2.0)
    return log


def _send_turn(turn, send_q, turn_send_times, log) -> None:
    msg = TurnMsg(
        turn_index=turn.index,
        start_ts_us=turn.start_ts_us,
        end_ts_us=turn.end_ts_us,
        speaker=turn.speaker,
        text=turn.text,
    )
    turn_send_times[turn.index] = time.monotonic()
    send_q.put(encode_message(msg))  # turns are never dropped
    log.turns_sent += 1
