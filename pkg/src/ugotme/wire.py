"""Binary wire protocol between the robot simulator and the edge server.

Layout of every message:

    b"UGM1" | tag (u8) | payload_len (u32 BE) | payload

All integers are big-endian. Payloads per variant:

    FRAME (0x01):        seq u64 | timestamp_us u64 | width u16 | height u16 | rgb8 bytes
    TURN (0x02):         turn_index u32 | start_ts_us u64 | end_ts_us u64 |
                         speaker_len u16 | speaker utf8 | text_len u32 | text utf8
    EXPR_CMD (0x03):     expression u8 | turn_index u32 | issue_ts_us u64
    HEARTBEAT (0x04):    (empty)
    SESSION_META (0x05): id_len u16 | session_id utf8 | fps f64

An absent speaker is encoded as speaker_len = 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import BadMagic, MalformedPayload, OversizeMessage, UnknownVariant

MAGIC = b"UGM1"
HEADER_LEN = 9
MAX_PAYLOAD = 2**32 - 1

TAG_FRAME = 0x01
TAG_TURN = 0x02
TAG_EXPR_CMD = 0x03
TAG_HEARTBEAT = 0x04
TAG_SESSION_META = 0x05


@dataclass(frozen=True)
class FrameMsg:
    seq: int
    timestamp_us: int
    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != "
                f"{self.width}x{self.height}x3"
            )


@dataclass(frozen=True)
class TurnMsg:
    turn_index: int
    start_ts_us: int
    end_ts_us: int
    speaker: str | None
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("turn text must be non-empty")
        if self.start_ts_us > self.end_ts_us:
            raise ValueError("turn start_ts_us > end_ts_us")


@dataclass(frozen=True)
class ExprCmdMsg:
    expression: int
    turn_index: int
    issue_ts_us: int

    def __post_init__(self):
        if not 0 <= self.expression <= 6:
            raise ValueError(f"expression id {self.expression} outside 0..6")


@dataclass(frozen=True)
class HeartbeatMsg:
    pass


@dataclass(frozen=True)
class SessionMetaMsg:
    session_id: str
    fps: float


WireMessage = FrameMsg | TurnMsg | ExprCmdMsg | HeartbeatMsg | SessionMetaMsg


def _encode_payload(msg: WireMessage) -> tuple[int, bytes]:
    if isinstance(msg, FrameMsg):
        head = struct.pack(">QQHH", msg.seq, msg.timestamp_us, msg.width, msg.height)
        return TAG_FRAME, head + msg.pixels
    if isinstance(msg, TurnMsg):
        speaker = (msg.speaker or "").encode("utf-8")
        text = msg.text.encode("utf-8")
        return TAG_TURN, (
            struct.pack(">IQQ", msg.turn_index, msg.start_ts_us, msg.end_ts_us)
            + struct.pack(">H", len(speaker)) + speaker
            + struct.pack(">I", len(text)) + text
        )
    if isinstance(msg, ExprCmdMsg):
        return TAG_EXPR_CMD, struct.pack(
            ">BIQ", msg.expression, msg.turn_index, msg.issue_ts_us
        )
    if isinstance(msg, HeartbeatMsg):
        return TAG_HEARTBEAT, b""
    if isinstance(msg, SessionMetaMsg):
        sid = msg.session_id.encode("utf-8")
        return TAG_SESSION_META, struct.pack(">H", len(sid)) + sid + struct.pack(">d", msg.fps)
    raise TypeError(f"not a wire message: {type(msg)!r}")


def encode_message(msg: WireMessage) -> bytes:
    tag, payload = _encode_payload(msg)
    if len(payload) > MAX_PAYLOAD:
        raise OversizeMessage(f"payload of {len(payload)} bytes exceeds u32 range")
    return MAGIC + struct.pack(">BI", tag, len(payload)) + payload


def _decode_payload(tag: int, payload: bytes) -> WireMessage:
    try:
        if tag == TAG_FRAME:
            if len(payload) < 20:
                raise MalformedPayload("frame payload shorter than fixed fields")
            seq, ts, w, h = struct.unpack(">QQHH", payload[:20])
            pixels = payload[20:]
            if len(pixels) != w * h * 3:
                raise MalformedPayload(
                    f"frame pixel length {len(pixels)} != {w}x{h}x3"
                )
            return FrameMsg(seq, ts, w, h, pixels)
        if tag == TAG_TURN:
            if len(payload) < 22:
                raise MalformedPayload("turn payload shorter than fixed fields")
            idx, start, end = struct.unpack(">IQQ", payload[:20])
            off = 20
            (slen,) = struct.unpack(">H", payload[off:off + 2])
            off += 2
            if len(payload) < off + slen + 4:
                raise MalformedPayload("turn payload truncated in speaker/text")
            speaker = payload[off:off + slen].decode("utf-8") or None
            off += slen
            (tlen,) = struct.unpack(">I", payload[off:off + 4])
            off += 4
            if len(payload) != off + tlen:
                raise MalformedPayload("turn text length mismatch")
            text = payload[off:].decode("utf-8")
            return TurnMsg(idx, start, end, speaker, text)
        if tag == TAG_EXPR_CMD:
            if len(payload) != 13:
                raise MalformedPayload("expr command payload must be 13 bytes")
            expr, idx, ts = struct.unpack(">BIQ", payload)
            return ExprCmdMsg(expr, idx, ts)
        if tag == TAG_HEARTBEAT:
            if payload:
                raise MalformedPayload("heartbeat payload must be empty")
            return HeartbeatMsg()
        if tag == TAG_SESSION_META:
            if len(payload) < 10:
                raise MalformedPayload("session meta payload too short")
            (slen,) = struct.unpack(">H", payload[:2])
            if len(payload) != 2 + slen + 8:
                raise MalformedPayload("session meta length mismatch")
            sid = payload[2:2 + slen].decode("utf-8")
            (fps,) = struct.unpack(">d", payload[2 + slen:])
            return SessionMetaMsg(sid, fps)
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        if isinstance(exc, MalformedPayload):
            raise
        raise MalformedPayload(str(exc)) from exc
    raise UnknownVariant(f"unknown message tag 0x{tag:02x}")


def decode_message(data: bytes) -> tuple[WireMessage, int] | None:
    """Decode one message from the front of ``data``.

    Returns (message, bytes consumed), or None when the buffer holds an
    incomplete message and more bytes are needed.
    """
    if len(data) < len(MAGIC):
        if MAGIC.startswith(bytes(data)):
            return None
        raise BadMagic(f"bad magic {bytes(data[:4])!r}")
    if bytes(data[:4]) != MAGIC:
        raise BadMagic(f"bad magic {bytes(data[:4])!r}")
    if len(data) < HEADER_LEN:
        return None
    tag, plen = struct.unpack(">BI", data[4:9])
    if tag not in (TAG_FRAME, TAG_TURN, TAG_EXPR_CMD, TAG_HEARTBEAT, TAG_SESSION_META):
        raise UnknownVariant(f"unknown message tag 0x{tag:02x}")
    total = HEADER_LEN + plen
    if len(data) < total:
        return None
    msg = _decode_payload(tag, bytes(data[HEADER_LEN:total]))
    return msg, total


class StreamDecoder:
    """Accumulates socket bytes and yields complete messages."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> list[WireMessage]:
        self._buf.extend(chunk)
        out = []
        while True:
            res = decode_message(self._buf)
            if res is None:
                break
            msg, consumed = res
            del self._buf[:consumed]
            out.append(msg)
        return out
