"""The seven-emotion label set shared by the model head, wire format and metrics.

The integer order is fixed project-wide; changing it would silently corrupt
saved models and golden wire captures.
"""

from enum import IntEnum


class Emotion(IntEnum):
    NEUTRAL = 0
    SURPRISE = 1
    FEAR = 2
    SADNESS = 3
    JOY = 4
    DISGUST = 5
    ANGER = 6


EMOTION_NAMES = [e.name.lower() for e in Emotion]
NUM_EMOTIONS = 7


def emotion_from_name(name: str) -> Emotion:
    return Emotion(EMOTION_NAMES.index(name.lower()))
