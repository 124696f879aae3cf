"""Turn generated sessions into (token_ids, patches, label) training samples."""

from __future__ import annotations

import numpy as np

from ..context import ContextConfig, DialogueHistory, Tokenizer, build_context
from ..percept import PerceptConfig, extract_face_sequence
from ..vl2e import ModelConfig, patchify


def samples_from_script(
    script,
    percept_cfg: PerceptConfig,
    context_cfg: ContextConfig,
    tokenizer: Tokenizer,
    model_cfg: ModelConfig,
):
    """One sample per gold-labeled turn, using the deployment pipeline
    (centered selection, first-frame neutral)."""
    detector = script.detector()
    history = DialogueHistory()
    samples = []
    for turn in script.turns:
        history.push(turn)
        if turn.gold_emotion is None:
            continue
        cs = build_context(history, context_cfg)
        tokens = np.asarray(
            tokenizer.encode(cs, context_cfg.max_tokens), dtype=np.int64
        )
        snapshot = script.frames_in_window(turn.start_ts_us, turn.end_ts_us)
        extraction = extract_face_sequence(snapshot, detector, percept_cfg)
        patches = (
            patchify(extraction.delta, model_cfg) if extraction is not None else None
        )
        samples.append((tokens, patches, int(turn.gold_emotion)))
    return samples


def build_training_set(scripts, percept_cfg, context_cfg, tokenizer, model_cfg):
    samples = []
    for script in scripts:
        samples.extend(
            samples_from_script(script, percept_cfg, context_cfg, tokenizer, model_cfg)
        )
    return samples
