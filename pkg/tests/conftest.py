import numpy as np
import pytest

from ugotme.wire import ExprCmdMsg, FrameMsg, HeartbeatMsg, SessionMetaMsg, TurnMsg


def random_message(rng: np.random.Generator):
    kind = rng.integers(5)
    if kind == 0:
        w = int(rng.integers(1, 9))
        h = int(rng.integers(1, 9))
        pixels = bytes(rng.integers(0, 256, size=w * h * 3, dtype=np.uint8))
        return FrameMsg(int(rng.integers(0, 2**63)), int(rng.integers(0, 2**62)),
                        w, h, pixels)
    if kind == 1:
        start = int(rng.integers(0, 2**40))
        speaker = None if rng.random() < 0.3 else f"spk{rng.integers(100)}"
        text = "".join(chr(int(c)) for c in rng.integers(0x20, 0x2000, size=rng.integers(1, 40)))
        return TurnMsg(int(rng.integers(0, 2**31)), start,
                       start + int(rng.integers(0, 2**20)), speaker, text)
    if kind == 2:
        return ExprCmdMsg(int(rng.integers(7)), int(rng.integers(2**31)),
                          int(rng.integers(2**50)))
    if kind == 3:
        return HeartbeatMsg()
    return SessionMetaMsg(f"session-{rng.integers(1000)}", float(rng.uniform(1, 60)))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
