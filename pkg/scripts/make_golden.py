"""Regenerate the golden 3-turn end-to-end fixture.

Writes tests/data/golden_session/ (frames + script + annotations) and
tests/data/golden_expr.bin (the concatenated EXPR_CMD wire bytes produced
by a live loopback run of the stub classifier with a zeroed clock). The
expected expression sequence is neutral, anger, joy; audit the printed
output when regenerating.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ugotme.context import Turn
from ugotme.emotions import EMOTION_NAMES, Emotion
from ugotme.harness.script import SessionScript, save_session
from ugotme.harness.synth import _identity_pattern, render_face
from ugotme.percept import FaceBox
from ugotme.wire import FrameMsg

GOLDEN_TURNS = [
    ("Ava", "today was a perfectly ordinary day at the office", Emotion.NEUTRAL),
    ("Ben", "i am furious that they cancelled the project", Emotion.ANGER),
    ("Ava", "what a wonderful piece of news to end the week", Emotion.JOY),
]

W, H, SIDE = 320, 180, 48
FPS = 25.0
FRAMES_PER_TURN = 4


def build_golden_script() -> SessionScript:
    rng = np.random.default_rng(1234)
    active_identity = _identity_pattern(rng, SIDE)
    distractor_identity = _identity_pattern(rng, SIDE)

    frames, annotations, turns = [], {}, []
    us_per_frame = 1_000_000 / FPS
    ax, ay = W // 2 - SIDE // 2, H // 2 - SIDE // 2
    dx, dy = W // 2 + 110 - SIDE // 2, H // 2 - SIDE // 2

    seq = 0
    for idx, (speaker, text, emotion) in enumerate(GOLDEN_TURNS):
        turn_seq0 = seq
        distractor_emotion = Emotion.FEAR if emotion != Emotion.FEAR else Emotion.SADNESS
        for i in range(FRAMES_PER_TURN):
            amp = 80.0 * i / (FRAMES_PER_TURN - 1)  # frame 0 stays neutral
            img = np.full((H, W, 3), 20, dtype=np.uint8)
            img[ay:ay + SIDE, ax:ax + SIDE] = render_face(
                SIDE, emotion, amp, active_identity
            )
            img[dy:dy + SIDE, dx:dx + SIDE] = render_face(
                SIDE, distractor_emotion, 80.0, distractor_identity
            )
            ts = int(round(seq * us_per_frame))
            frames.append(FrameMsg(seq, ts, W, H, img.tobytes()))
            annotations[seq] = [
                (FaceBox(ax, ay, SIDE, SIDE, 1.0), "active"),
                (FaceBox(dx, dy, SIDE, SIDE, 1.0), "distractor"),
            ]
            seq += 1
        turns.append(Turn(
            index=idx, text=text, speaker=speaker,
            start_ts_us=int(round(turn_seq0 * us_per_frame)),
            end_ts_us=int(round((seq - 1) * us_per_frame)),
            gold_emotion=int(emotion),
        ))

    return SessionScript(
        session_id="golden-3turn", fps=FPS,
        frames=frames, annotations=annotations, turns=turns,
    )


def record_golden_bytes(script: SessionScript) -> bytes:
    from ugotme.percept import PerceptConfig
    from ugotme.pipeline import StubTurnClassifier, TurnPipeline
    from ugotme.transport import EdgeServer, run_robot_simulator
    from ugotme.wire import encode_message

    pipeline = TurnPipeline(
        classifier=StubTurnClassifier(),
        detector=script.detector(),
        percept_cfg=PerceptConfig(crop_side=48),
    )
    with EdgeServer(handler=pipeline.handle_turn, clock=lambda: 0) as server:
        log = run_robot_simulator(
            script, ("127.0.0.1", server.robot_port), fps=500.0
        )
    assert log.clean_close, log.errors
    ordered = sorted(log.expr_cmds, key=lambda r: r.cmd.turn_index)
    for rec in ordered:
        print(f"turn {rec.cmd.turn_index}: {EMOTION_NAMES[rec.cmd.expression]}")
    return b"".join(encode_message(rec.cmd) for rec in ordered)


def main() -> None:
    data_dir = ROOT / "tests" / "data"
    script = build_golden_script()
    save_session(script, data_dir / "golden_session")
    blob = record_golden_bytes(script)
    (data_dir / "golden_expr.bin").write_bytes(blob)
    print(f"wrote {data_dir / 'golden_session'} and golden_expr.bin "
          f"({len(blob)} bytes)")


if __name__ == "__main__":
    main()
