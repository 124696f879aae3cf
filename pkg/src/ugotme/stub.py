"""Deterministic keyword/glyph classifier used for protocol and golden tests.

Keeps transport correctness testable independently of model quality:
emotion keywords in the utterance win; otherwise the synthetic glyph in
the extracted face deltas is decoded; otherwise neutral.
"""

from __future__ import annotations

import numpy as np

from .emotions import Emotion, NUM_EMOTIONS
from .percept import DeltaSequence

EMOTION_KEYWORDS = {
    Emotion.SURPRISE: ("surprised", "unexpected", "wow", "astonishing"),
    Emotion.FEAR: ("scared", "terrified", "afraid", "frightening"),
    Emotion.SADNESS: ("sad", "miserable", "heartbroken", "crying"),
    Emotion.JOY: ("happy", "wonderful", "delighted", "joyful"),
    Emotion.DISGUST: ("disgusting", "gross", "revolting", "nasty"),
    Emotion.ANGER: ("angry", "furious", "outraged", "annoyed"),
    Emotion.NEUTRAL: ("okay", "fine", "regular", "ordinary"),
}

# glyph cell layout inside a face crop: a 2x3 grid, one cell per non-neutral
# emotion; neutral renders no glyph (see harness.synth)
GLYPH_GRID = (2, 3)
GLYPH_EMOTIONS = [Emotion.SURPRISE, Emotion.FEAR, Emotion.SADNESS,
                  Emotion.JOY, Emotion.DISGUST, Emotion.ANGER]
GLYPH_ENERGY_THRESHOLD = 0.02


def keyword_emotion(text: str) -> Emotion | None:
    lowered = text.lower()
    for emotion, words in EMOTION_KEYWORDS.items():
        if any(w in lowered for w in words):
            return emotion
    return None


def glyph_cell_bounds(side: int, emotion: Emotion) -> tuple[int, int, int, int]:
    """(y0, y1, x0, x1) of the grid cell carrying this emotion's glyph."""
    rows, cols = GLYPH_GRID
    slot = GLYPH_EMOTIONS.index(emotion)
    r, c = divmod(slot, cols)
    ch = side // rows
    cw = side // cols
    return r * ch, (r + 1) * ch, c * cw, (c + 1) * cw


def decode_glyph(delta: DeltaSequence) -> Emotion:
    """Classify by which glyph cell carries the most delta energy."""
    energy = np.abs(delta.frames).mean(axis=(0, 3))  # S x S
    side = energy.shape[0]
    cell_energy = []
    for emotion in GLYPH_EMOTIONS:
        y0, y1, x0, x1 = glyph_cell_bounds(side, emotion)
        cell_energy.append(energy[y0:y1, x0:x1].mean())
    if max(cell_energy) < GLYPH_ENERGY_THRESHOLD:
        return Emotion.NEUTRAL
    return GLYPH_EMOTIONS[int(np.argmax(cell_energy))]


class StubClassifier:
    """classify(text, delta) -> 7-class probability vector, deterministic."""

    def classify(self, text: str, delta: DeltaSequence | None) -> np.ndarray:
        emotion = keyword_emotion(text)
        if emotion is None and delta is not None and len(delta) > 0:
            emotion = decode_glyph(delta)
        if emotion is None:
            emotion = Emotion.NEUTRAL
        probs = np.full(NUM_EMOTIONS, 0.01)
        probs[int(emotion)] = 1.0 - 0.01 * (NUM_EMOTIONS - 1)
        return probs
