import base64
import http.client
import json
import socket
import time

import numpy as np
import pytest

from ugotme.emotions import Emotion
from ugotme.errors import TransportError
from ugotme.harness.replay import replay_live, replay_offline
from ugotme.harness.synth import SyntheticGenConfig, generate_synthetic_session
from ugotme.percept import PerceptConfig
from ugotme.pipeline import StubTurnClassifier, TurnPipeline
from ugotme.transport import EdgeServer, run_robot_simulator
from ugotme.wire import FrameMsg, TurnMsg

FAST_FPS = 2000.0  # fast-forward pacing for tests


def _script(seed=0, **kw):
    kw.setdefault("num_turns", 3)
    kw.setdefault("frames_per_turn", 4)
    return generate_synthetic_session(SyntheticGenConfig(seed=seed, **kw))


def _pipeline(script, **kw):
    return TurnPipeline(
        classifier=StubTurnClassifier(),
        detector=script.detector(),
        percept_cfg=PerceptConfig(crop_side=48),
        **kw,
    )


def test_loopback_session_end_to_end():
    script = _script(seed=1)
    pipeline = _pipeline(script)
    with EdgeServer(handler=pipeline.handle_turn) as server:
        log = run_robot_simulator(
            script, ("127.0.0.1", server.robot_port), fps=FAST_FPS
        )
    assert log.clean_close
    assert log.frames_sent == len(script.frames)
    assert log.frames_dropped == 0
    assert log.turns_sent == 3
    assert log.expressions == [t.gold_emotion for t in script.turns]
    assert server.stats.frames_received == len(script.frames)
    assert server.stats.turns_received == 3
    assert server.stats.decode_errors == 0
    for rec in log.expr_cmds:
        assert rec.latency_s is not None and rec.latency_s < 1.0


def test_live_matches_offline():
    script = _script(seed=2, num_turns=4, distractor_count=1)
    offline = replay_offline(script, _pipeline(script))
    live = replay_live(script, _pipeline(script), fps=FAST_FPS)
    assert not live.partial
    assert live.predictions == offline.predictions


def test_handler_failure_falls_back_to_neutral():
    script = _script(seed=3, num_turns=2)

    def broken_handler(turn, snapshot):
        raise RuntimeError("boom")

    with EdgeServer(handler=broken_handler) as server:
        log = run_robot_simulator(
            script, ("127.0.0.1", server.robot_port), fps=FAST_FPS
        )
    assert log.expressions == [int(Emotion.NEUTRAL)] * 2
    assert server.stats.handler_errors == 2


def test_frames_only_session():
    script = _script(seed=4, num_turns=1)
    script.turns.clear()
    pipeline_calls = []
    with EdgeServer(handler=lambda t, s: pipeline_calls.append(t)) as server:
        log = run_robot_simulator(
            script, ("127.0.0.1", server.robot_port), fps=FAST_FPS
        )
        deadline = time.monotonic() + 2.0
        while (server.stats.frames_received < len(script.frames)
               and time.monotonic() < deadline):
            time.sleep(0.01)
    assert log.clean_close
    assert log.turns_sent == 0
    assert not pipeline_calls
    assert server.stats.frames_received == len(script.frames)


def test_connect_failure_raises_transport_error():
    script = _script(seed=5)
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        dead_port = probe.getsockname()[1]
    with pytest.raises(TransportError) as exc:
        run_robot_simulator(script, ("127.0.0.1", dead_port), fps=FAST_FPS)
    assert exc.value.partial_log.frames_sent == 0


def test_stale_frames_counted_not_fatal():
    script = _script(seed=6, num_turns=1)
    pipeline = _pipeline(script)
    with EdgeServer(handler=pipeline.handle_turn) as server:
        with socket.create_connection(("127.0.0.1", server.robot_port)) as sock:
            from ugotme.wire import encode_message

            f0 = script.frames[0]
            f1 = script.frames[1]
            sock.sendall(encode_message(f1))  # out of order: f1 then f0
            sock.sendall(encode_message(f0))
            f2 = FrameMsg(f1.seq + 1, f1.timestamp_us + 1, f1.width,
                          f1.height, f1.pixels)
            sock.sendall(encode_message(f2))
            deadline = time.monotonic() + 2.0
            while server.stats.frames_received < 2 and time.monotonic() < deadline:
                time.sleep(0.01)
    assert server.stats.frames_received == 2
    assert server.stats.stale_frames == 1
    assert server.stats.decode_errors == 0


# --- gateway: newline-delimited JSON ---

def _frame_payload(script, frame):
    return {
        "type": "frame_b64",
        "width": frame.width,
        "height": frame.height,
        "data": base64.b64encode(frame.pixels).decode(),
        "ts_us": frame.timestamp_us + 1,  # gateway clock starts at 0
    }


def test_gateway_json_stream_turn():
    script = _script(seed=7, num_turns=3, frames_per_turn=4)
    with EdgeServer(
        handler=lambda t, s: None,
        gateway_pipeline_factory=lambda: _pipeline(script),
    ) as server:
        with socket.create_connection(("127.0.0.1", server.gateway_port)) as sock:
            f = sock.makefile("rwb")
            turn = script.turns[0]
            for frame in script.frames_in_window(turn.start_ts_us, turn.end_ts_us):
                f.write(json.dumps(_frame_payload(script, frame)).encode() + b"\n")
            f.write(json.dumps({
                "type": "turn", "text": turn.text, "speaker": turn.speaker,
            }).encode() + b"\n")
            f.flush()
            reply = json.loads(f.readline())
    assert reply["type"] == "expr"
    assert reply["turn_index"] == 0
    assert reply["emotion_id"] == turn.gold_emotion
    assert len(reply["probs"]) == 7


def test_gateway_json_stream_errors():
    script = _script(seed=8)
    with EdgeServer(
        handler=lambda t, s: None,
        gateway_pipeline_factory=lambda: _pipeline(script),
    ) as server:
        with socket.create_connection(("127.0.0.1", server.gateway_port)) as sock:
            f = sock.makefile("rwb")
            f.write(b"this is not json\n")
            f.write(json.dumps({"type": "mystery"}).encode() + b"\n")
            f.write(json.dumps({"type": "turn", "text": ""}).encode() + b"\n")
            f.flush()
            replies = [json.loads(f.readline()) for _ in range(3)]
    assert all(r["type"] == "error" for r in replies)


# --- gateway: HTTP ---

def test_gateway_http_status_frames_turn(tmp_path):
    script = _script(seed=9, num_turns=3, frames_per_turn=4)
    (tmp_path / "index.html").write_text("<html>console</html>")
    with EdgeServer(
        handler=lambda t, s: None,
        console_dir=tmp_path,
        gateway_pipeline_factory=lambda: _pipeline(script),
    ) as server:
        conn = http.client.HTTPConnection("127.0.0.1", server.gateway_port)

        conn.request("GET", "/api/status")
        status = json.loads(conn.getresponse().read())
        assert status["ok"] is True and status["frames_received"] == 0

        turn = script.turns[0]
        frames = [
            {k: v for k, v in _frame_payload(script, fr).items() if k != "type"}
            for fr in script.frames_in_window(turn.start_ts_us, turn.end_ts_us)
        ]
        body = json.dumps({"frames": frames})
        conn.request("POST", "/api/frames", body,
                     {"Content-Type": "application/json"})
        reply = json.loads(conn.getresponse().read())
        assert reply["ok"] is True and reply["frames_received"] == len(frames)

        conn.request("POST", "/api/turn",
                     json.dumps({"text": turn.text, "speaker": turn.speaker}),
                     {"Content-Type": "application/json"})
        expr = json.loads(conn.getresponse().read())
        assert expr["type"] == "expr"
        assert expr["emotion_id"] == turn.gold_emotion

        conn.request("GET", "/console/")
        page = conn.getresponse()
        assert page.status == 200
        assert b"console" in page.read()

        conn.request("GET", "/console/../secret")
        resp = conn.getresponse()
        resp.read()
        assert resp.status == 404

        conn.request("GET", "/api/nothing")
        assert json.loads(conn.getresponse().read())["ok"] is False
        conn.close()


def test_gateway_http_without_console_dir():
    script = _script(seed=10)
    with EdgeServer(
        handler=lambda t, s: None,
        gateway_pipeline_factory=lambda: _pipeline(script),
    ) as server:
        conn = http.client.HTTPConnection("127.0.0.1", server.gateway_port)
        conn.request("GET", "/console/")
        assert conn.getresponse().status == 404
        conn.close()
