"""Per-turn inference pipeline: perception -> context -> classifier.

One instance owns the dialogue history for a session and is confined to
the turn-handling thread. Stage toggles exist for ablations; every stage
records a digest of its output so ablation isolation can be verified.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .context import (
    MASK_ID, ContextConfig, ContextString, DialogueHistory, Tokenizer, Turn,
    build_context,
)
from .emotions import Emotion
from .percept import (
    DeltaSequence, FaceDetector, PerceptConfig, extract_face_sequence,
)
from .stub import StubClassifier
from .vl2e import ModelConfig, forward_sample, softmax_probs
from .wire import FrameMsg, TurnMsg


@dataclass(frozen=True)
class PipelineToggles:
    active_selection: bool = True
    neutral_norm: bool = True
    vision: bool = True
    text: bool = True


@dataclass
class TurnOutcome:
    turn_index: int
    probs: np.ndarray
    emotion: Emotion
    stage_log: dict


class ModelTurnClassifier:
    """VL2E-backed classifier over (context tokens, delta sequence)."""

    def __init__(self, params: dict, model_cfg: ModelConfig):
        self.params = params
        self.model_cfg = model_cfg

    def classify(self, turn_text: str, token_ids, delta: DeltaSequence | None) -> np.ndarray:
        logits = forward_sample(token_ids, delta, self.params, self.model_cfg)
        return softmax_probs(logits.data[0])


class StubTurnClassifier:
    """Keyword/glyph stub; ignores the tokenized context."""

    def __init__(self):
        self._stub = StubClassifier()

    def classify(self, turn_text: str, token_ids, delta: DeltaSequence | None) -> np.ndarray:
        return self._stub.classify(turn_text, delta)


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


class TurnPipeline:
    def __init__(
        self,
        classifier,
        detector: FaceDetector,
        percept_cfg: PerceptConfig | None = None,
        context_cfg: ContextConfig | None = None,
        tokenizer: Tokenizer | None = None,
        toggles: PipelineToggles | None = None,
        selection_seed: int = 0,
        retention: int = 64,
    ):
        self.classifier = classifier
        self.detector = detector
        self.percept_cfg = percept_cfg or PerceptConfig()
        self.context_cfg = context_cfg or ContextConfig()
        self.tokenizer = tokenizer or Tokenizer()
        self.toggles = toggles or PipelineToggles()
        self._selection_seed = selection_seed
        self._retention = retention
        self.history = DialogueHistory(retention=retention)
        self._rng = np.random.default_rng(selection_seed)

    def reset(self) -> None:
        self.history = DialogueHistory(retention=self._retention)
        self._rng = np.random.default_rng(self._selection_seed)

    def _random_select(self, boxes, frame):
        usable = [
            b for b in boxes
            if b.confidence >= self.percept_cfg.confidence_threshold
        ]
        if not usable:
            return None
        return usable[int(self._rng.integers(len(usable)))]

    def handle_turn(self, turn: TurnMsg, snapshot: list[FrameMsg]) -> TurnOutcome:
        log: dict = {
            "turn_index": turn.turn_index,
            "snapshot_len": len(snapshot),
            "snapshot_seqs": [f.seq for f in snapshot],
        }

        delta = None
        if self.toggles.vision:
            select = None if self.toggles.active_selection else self._random_select
            extraction = extract_face_sequence(
                snapshot, self.detector, self.percept_cfg,
                select=select, normalize=self.toggles.neutral_norm,
            )
            if extraction is not None:
                delta = extraction.delta
                log["selected_boxes"] = [
                    (seq, box.x, box.y, box.w, box.h)
                    for seq, box in extraction.sources
                ]
                log["delta_digest"] = _digest(
                    np.ascontiguousarray(delta.frames).tobytes()
                )
            else:
                log["selected_boxes"] = []
                log["delta_digest"] = None
        else:
            log["selected_boxes"] = None
            log["delta_digest"] = None

        self.history.push(Turn(
            index=turn.turn_index, text=turn.text, speaker=turn.speaker,
            start_ts_us=turn.start_ts_us, end_ts_us=turn.end_ts_us,
        ))
        if self.toggles.text:
            cs = build_context(self.history, self.context_cfg)
            tokens = self.tokenizer.encode(cs, self.context_cfg.max_tokens)
        else:
            cs = ContextString(text="<mask>", mask_pos=0)
            tokens = [MASK_ID]
        log["context_text"] = cs.text
        log["context_digest"] = _digest(cs.text.encode())
        log["token_digest"] = _digest(np.asarray(tokens, dtype=np.int64).tobytes())

        probs = self.classifier.classify(turn.text, np.asarray(tokens), delta)
        emotion = Emotion(int(np.argmax(probs)))
        log["probs"] = [float(x) for x in probs]
        return TurnOutcome(
            turn_index=turn.turn_index, probs=probs, emotion=emotion, stage_log=log,
        )
