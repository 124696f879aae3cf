"""Dialogue state and construction of the textual model input.

The text input for turn t is the last k turns plus the current one,
followed by a prompt ending in a single <mask> token whose position the
classifier fills with an emotion. With named=False speaker identities are
dropped entirely (deployment mode, where identities are unavailable) and
the prompt uses the literal word "speaker".
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .errors import NoCurrentTurn, NonContiguousTurn

MASK = "<mask>"
SEP = "<sep>"


@dataclass(frozen=True)
class Turn:
    index: int
    text: str
    speaker: str | None = None
    start_ts_us: int = 0
    end_ts_us: int = 0
    gold_emotion: int | None = None  # harness only

    def __post_init__(self):
        if not self.text:
            raise ValueError("turn text must be non-empty")
        if self.start_ts_us > self.end_ts_us:
            raise ValueError("turn start > end")


class DialogueHistory:
    def __init__(self, retention: int = 64):
        if retention < 1:
            raise ValueError("retention must be >= 1")
        self.retention = retention
        self._turns: list[Turn] = []

    def __len__(self) -> int:
        return len(self._turns)

    @property
    def turns(self) -> list[Turn]:
        return list(self._turns)

    def push(self, turn: Turn) -> None:
        expected = self._turns[-1].index + 1 if self._turns else turn.index
        if self._turns and turn.index != expected:
            raise NonContiguousTurn(
                f"turn index {turn.index}, expected {expected}"
            )
        self._turns.append(turn)
        if len(self._turns) > self.retention:
            del self._turns[: len(self._turns) - self.retention]

    def clear(self) -> None:
        self._turns.clear()


@dataclass(frozen=True)
class ContextConfig:
    k: int = 4
    named: bool = True
    max_tokens: int = 256

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")


@dataclass(frozen=True)
class ContextString:
    text: str
    mask_pos: int  # character offset of the <mask> token


def _escape(text: str) -> str:
    # protect the single-mask invariant against user text containing <mask>
    return text.replace(MASK, "< mask >")


def build_context(history: DialogueHistory, cfg: ContextConfig) -> ContextString:
    turns = history.turns
    if not turns:
        raise NoCurrentTurn("dialogue history is empty")
    window = turns[-(cfg.k + 1):]
    current = window[-1]
    parts = []
    for t in window:
        text = _escape(t.text)
        if cfg.named and t.speaker:
            parts.append(f"{t.speaker}: {text}")
        else:
            parts.append(text)
    who = current.speaker if (cfg.named and current.speaker) else "speaker"
    prompt = f"for {_escape(current.text)}, {who} feels {MASK}"
    rendered = f" {SEP} ".join(parts + [prompt])
    return ContextString(text=rendered, mask_pos=rendered.rindex(MASK))


UNK_ID = 0
MASK_ID = 1
SEP_ID = 2
NUM_SPECIALS = 3

_TOKEN_RE = re.compile(r"<mask>|<sep>|[a-z0-9']+")


@dataclass(frozen=True)
class Tokenizer:
    vocab_size: int = 4096

    def word_id(self, word: str) -> int:
        digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
        return NUM_SPECIALS + int.from_bytes(digest, "big") % (
            self.vocab_size - NUM_SPECIALS
        )

    def encode(self, cs: ContextString, max_tokens: int) -> list[int]:
        """Hash-tokenize; truncation drops from the FRONT so the prompt and
        current utterance always survive."""
        ids = []
        for tok in _TOKEN_RE.findall(cs.text.lower()):
            if tok == MASK:
                ids.append(MASK_ID)
            elif tok == SEP:
                ids.append(SEP_ID)
            else:
                ids.append(self.word_id(tok))
        if len(ids) > max_tokens:
            ids = ids[-max_tokens:]
        return ids
