import pytest

from ugotme.emotions import EMOTION_NAMES, Emotion, emotion_from_name
from ugotme.empathy import (
    ExpressionCommand, SimulatedActuator, map_emotion, to_wire,
)
from ugotme.wire import ExprCmdMsg, decode_message, encode_message


def test_emotion_labels_and_order():
    assert EMOTION_NAMES == [
        "neutral", "surprise", "fear", "sadness", "joy", "disgust", "anger",
    ]
    assert [int(Emotion(i)) for i in range(7)] == list(range(7))
    for i, name in enumerate(EMOTION_NAMES):
        assert emotion_from_name(name) == i


def test_emotion_from_unknown_name():
    with pytest.raises(ValueError):
        emotion_from_name("melancholy")


def test_mapping_is_identity_bijection():
    seen = set()
    for e in Emotion:
        cmd = map_emotion(e, turn_index=3, issue_ts_us=100)
        assert cmd.expression == e
        seen.add(cmd.expression)
    assert len(seen) == 7


def test_map_emotion_fills_timestamp():
    cmd = map_emotion(Emotion.JOY, 0)
    assert cmd.issue_ts_us > 0


def test_actuator_records_in_order():
    act = SimulatedActuator()
    for i, e in enumerate([Emotion.JOY, Emotion.ANGER, Emotion.NEUTRAL]):
        act.execute(map_emotion(e, i, issue_ts_us=1000 + i))
    assert [r.command.expression for r in act.log] == [
        Emotion.JOY, Emotion.ANGER, Emotion.NEUTRAL,
    ]
    assert [r.command.turn_index for r in act.log] == [0, 1, 2]


def test_actuator_latency():
    act = SimulatedActuator()
    rec = act.execute(
        ExpressionCommand(Emotion.FEAR, 0, issue_ts_us=5000),
        turn_arrival_ts_us=3000,
    )
    assert rec.latency_us == 2000


def test_to_wire_roundtrip():
    cmd = map_emotion(Emotion.DISGUST, turn_index=9, issue_ts_us=777)
    msg = to_wire(cmd)
    assert msg == ExprCmdMsg(int(Emotion.DISGUST), 9, 777)
    decoded, _ = decode_message(encode_message(msg))
    assert decoded == msg
