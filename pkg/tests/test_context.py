import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ugotme.context import (
    MASK_ID, SEP_ID, ContextConfig, ContextString, DialogueHistory,
    Tokenizer, Turn, build_context,
)
from ugotme.errors import NoCurrentTurn, NonContiguousTurn


def _hist(*texts, speakers=None, start=0):
    h = DialogueHistory()
    for i, text in enumerate(texts):
        spk = speakers[i] if speakers else None
        h.push(Turn(start + i, text, speaker=spk))
    return h


# --- build_context rendering ---

def test_single_named_turn_rendering():
    h = _hist("hi", speakers=["Tom"])
    cs = build_context(h, ContextConfig(k=4, named=True))
    assert cs.text == "Tom: hi <sep> for hi, Tom feels <mask>"


def test_single_unnamed_turn_rendering():
    h = _hist("hi")
    cs = build_context(h, ContextConfig(k=4, named=True))
    assert cs.text == "hi <sep> for hi, speaker feels <mask>"


def test_named_false_drops_identities():
    h = _hist("hi", "hello", speakers=["Tom", "Ann"])
    cs = build_context(h, ContextConfig(k=4, named=False))
    assert cs.text == "hi <sep> hello <sep> for hello, speaker feels <mask>"


def test_window_keeps_last_k_plus_current():
    h = _hist("a", "b", "c", "d", "e")
    cs = build_context(h, ContextConfig(k=2, named=False))
    assert cs.text == "c <sep> d <sep> e <sep> for e, speaker feels <mask>"


def test_k_zero_is_current_turn_only():
    h = _hist("a", "b")
    cs = build_context(h, ContextConfig(k=0, named=False))
    assert cs.text == "b <sep> for b, speaker feels <mask>"


def test_mask_pos_points_at_mask():
    h = _hist("what a day", speakers=["Ann"])
    cs = build_context(h, ContextConfig())
    assert cs.text[cs.mask_pos:cs.mask_pos + 6] == "<mask>"


def test_exactly_one_mask_even_if_user_types_it():
    h = _hist("i typed <mask> on purpose")
    cs = build_context(h, ContextConfig(named=False))
    assert cs.text.count("<mask>") == 1
    assert cs.text.endswith("feels <mask>")


def test_empty_history_raises():
    with pytest.raises(NoCurrentTurn):
        build_context(DialogueHistory(), ContextConfig())


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text(alphabet="abc xyz", min_size=1).filter(str.strip),
                min_size=1, max_size=8))
def test_rendering_always_ends_with_prompt(texts):
    h = _hist(*texts)
    cs = build_context(h, ContextConfig(k=3, named=False))
    assert cs.text.endswith("feels <mask>")
    assert cs.text.count("<mask>") == 1


# --- DialogueHistory ---

def test_push_contiguous_ok():
    h = _hist("a", "b", "c")
    assert [t.index for t in h.turns] == [0, 1, 2]


def test_push_gap_rejected():
    h = _hist("a")
    with pytest.raises(NonContiguousTurn):
        h.push(Turn(2, "b"))


def test_push_replay_rejected():
    h = _hist("a", "b")
    with pytest.raises(NonContiguousTurn):
        h.push(Turn(1, "again"))


def test_retention_bound():
    h = DialogueHistory(retention=3)
    for i in range(10):
        h.push(Turn(i, f"t{i}"))
    assert [t.index for t in h.turns] == [7, 8, 9]


def test_history_can_start_at_any_index():
    h = DialogueHistory()
    h.push(Turn(17, "late join"))
    h.push(Turn(18, "next"))
    assert len(h) == 2


def test_turn_validation():
    with pytest.raises(ValueError):
        Turn(0, "")
    with pytest.raises(ValueError):
        Turn(0, "x", start_ts_us=10, end_ts_us=5)


# --- Tokenizer ---

def test_tokenizer_specials():
    tok = Tokenizer(vocab_size=4096)
    cs = ContextString("hi <sep> for hi, speaker feels <mask>", 0)
    ids = tok.encode(cs, 256)
    assert ids[-1] == MASK_ID
    assert SEP_ID in ids
    assert all(0 <= i < 4096 for i in ids)
    assert all(i >= 3 or i in (MASK_ID, SEP_ID) for i in ids)


def test_tokenizer_deterministic():
    tok = Tokenizer()
    cs = ContextString("the quick brown fox <sep> jumps <mask>", 0)
    assert tok.encode(cs, 64) == tok.encode(cs, 64)


def test_tokenizer_case_insensitive():
    tok = Tokenizer()
    a = tok.encode(ContextString("Hello World", 0), 16)
    b = tok.encode(ContextString("hello world", 0), 16)
    assert a == b


def test_tokenizer_distinct_words_usually_distinct():
    tok = Tokenizer(vocab_size=4096)
    words = ["joy", "anger", "fear", "sadness", "disgust", "surprise", "neutral"]
    ids = [tok.word_id(w) for w in words]
    assert len(set(ids)) == len(words)


def test_truncation_keeps_suffix():
    tok = Tokenizer()
    long_text = " ".join(f"w{i}" for i in range(300)) + " feels <mask>"
    cs = ContextString(long_text, 0)
    full = tok.encode(cs, 10**6)
    cut = tok.encode(cs, 40)
    assert len(cut) == 40
    assert cut == full[-40:]
    assert cut[-1] == MASK_ID


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="abcdefgh <>/,'", max_size=200), st.integers(1, 64))
def test_truncated_encoding_is_suffix_property(text, limit):
    tok = Tokenizer()
    cs = ContextString(text, 0)
    full = tok.encode(cs, 10**6)
    cut = tok.encode(cs, limit)
    assert len(cut) <= limit
    assert cut == full[len(full) - len(cut):]
