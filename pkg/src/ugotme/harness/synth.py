"""Synthetic multiparty sessions with glyph faces and scripted distractors.

Each emotion renders as a deterministic bright patch in one cell of a 2x3
grid inside the face box (neutral renders no glyph); the active speaker's
glyph ramps up in intensity over the utterance while its first frame stays
neutral, so first-frame normalization isolates a clean emotion signature.
Distractor faces sit far from the frame center and hold a different
emotion at constant full intensity, recreating the inactive-speaker
confusion scenario with known ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..context import Turn
from ..emotions import Emotion, NUM_EMOTIONS
from ..percept import FaceBox
from ..stub import EMOTION_KEYWORDS, GLYPH_GRID, GLYPH_EMOTIONS, glyph_cell_bounds
from ..wire import FrameMsg
from .script import SessionScript

NOISE_TEXTS = [
    "let us move to the next topic",
    "and then we went home for the evening",
    "the meeting starts at nine tomorrow",
    "i will send you the notes later",
    "that reminds me of something else entirely",
    "we should probably order more coffee",
]

TEXT_TEMPLATES = [
    "i am feeling {kw} about all of this",
    "honestly this whole thing is {kw}",
    "that news left me completely {kw}",
    "everyone said the result was {kw}",
]


@dataclass(frozen=True)
class SyntheticGenConfig:
    seed: int = 0
    num_turns: int = 8
    frames_per_turn: int = 10
    fps: float = 25.0
    frame_width: int = 320
    frame_height: int = 180
    face_side: int = 48
    distractor_count: int = 0
    distractor_offset_range: tuple[int, int] = (100, 130)
    text_noise: float = 0.0
    session_id: str = "synthetic"
    center_jitter: int = 10
    speakers: tuple[str, ...] = ("Ava", "Ben")

    def __post_init__(self):
        if self.distractor_offset_range[0] < 100:
            raise ValueError("distractor centers must stay >= 100 px from center")


def _identity_pattern(rng: np.random.Generator, side: int) -> np.ndarray:
    """Per-person constant appearance offset, cancelled by normalization."""
    gx = np.linspace(-1, 1, side)[None, :, None]
    gy = np.linspace(-1, 1, side)[:, None, None]
    coef = rng.uniform(-25, 25, size=(2, 3))
    return gx * coef[0][None, None, :] + gy * coef[1][None, None, :]


def render_face(side: int, emotion: Emotion, amplitude: float,
                identity: np.ndarray) -> np.ndarray:
    """Face patch in uint8: base tone + identity offset + emotion glyph."""
    face = np.full((side, side, 3), 150.0)
    face += identity
    if emotion != Emotion.NEUTRAL and amplitude > 0:
        y0, y1, x0, x1 = glyph_cell_bounds(side, emotion)
        face[y0:y1, x0:x1] += amplitude
    return np.clip(face, 0, 255).astype(np.uint8)


def _turn_text(rng: np.random.Generator, emotion: Emotion, noisy: bool) -> str:
    if noisy:
        return NOISE_TEXTS[rng.integers(len(NOISE_TEXTS))]
    kw = EMOTION_KEYWORDS[emotion][rng.integers(len(EMOTION_KEYWORDS[emotion]))]
    template = TEXT_TEMPLATES[rng.integers(len(TEXT_TEMPLATES))]
    return template.format(kw=kw)


def generate_synthetic_session(cfg: SyntheticGenConfig) -> SessionScript:
    rng = np.random.default_rng(cfg.seed)
    side = cfg.face_side
    w, h = cfg.frame_width, cfg.frame_height
    cx_frame = w / 2.0

    active_identity = _identity_pattern(rng, side)
    distractor_identities = [
        _identity_pattern(rng, side) for _ in range(cfg.distractor_count)
    ]

    frames: list[FrameMsg] = []
    annotations: dict[int, list[tuple[FaceBox, str]]] = {}
    turns: list[Turn] = []
    us_per_frame = 1_000_000 / cfg.fps
    seq = 0

    for t in range(cfg.num_turns):
        emotion = Emotion(int(rng.integers(NUM_EMOTIONS)))
        noisy = bool(rng.random() < cfg.text_noise)
        text = _turn_text(rng, emotion, noisy)
        speaker = cfg.speakers[t % len(cfg.speakers)]

        # active face position, near center, fixed within the turn
        ax_c = cx_frame + rng.integers(-cfg.center_jitter, cfg.center_jitter + 1)
        ay_c = h / 2.0 + rng.integers(-cfg.center_jitter, cfg.center_jitter + 1)
        ax = int(round(ax_c - side / 2))
        ay = int(round(ay_c - side / 2))

        # distractor positions: alternate sides, centers >= 100 px off-center
        d_positions = []
        d_emotions = []
        for d in range(cfg.distractor_count):
            off = rng.integers(*cfg.distractor_offset_range)
            sign = -1 if d % 2 == 0 else 1
            dx_c = cx_frame + sign * off
            dy_c = h / 2.0 + rng.integers(-cfg.center_jitter, cfg.center_jitter + 1)
            d_positions.append((int(round(dx_c - side / 2)), int(round(dy_c - side / 2))))
            others = [e for e in range(NUM_EMOTIONS)
                      if e != int(emotion) and e != int(Emotion.NEUTRAL)]
            d_emotions.append(Emotion(others[rng.integers(len(others))]))

        turn_seq0 = seq
        n = cfg.frames_per_turn
        for i in range(n):
            img = np.full((h, w, 3), 20, dtype=np.uint8)
            amp = 0.0 if n == 1 else 80.0 * i / (n - 1)  # frame 0 is neutral
            img[ay:ay + side, ax:ax + side] = render_face(
                side, emotion, amp, active_identity
            )
            boxes = [(FaceBox(ax, ay, side, side, 1.0), "active")]
            for (dx, dy), de, ident in zip(
                d_positions, d_emotions, distractor_identities
            ):
                img[dy:dy + side, dx:dx + side] = render_face(side, de, 80.0, ident)
                boxes.append((FaceBox(dx, dy, side, side, 1.0), "distractor"))
            ts = int(round(seq * us_per_frame))
            frames.append(FrameMsg(seq, ts, w, h, img.tobytes()))
            annotations[seq] = boxes
            seq += 1

        start_ts = int(round(turn_seq0 * us_per_frame))
        end_ts = int(round((seq - 1) * us_per_frame))
        turns.append(Turn(
            index=t, text=text, speaker=speaker,
            start_ts_us=start_ts, end_ts_us=end_ts,
            gold_emotion=int(emotion),
        ))

    return SessionScript(
        session_id=cfg.session_id, fps=cfg.fps,
        frames=frames, annotations=annotations, turns=turns,
    )
