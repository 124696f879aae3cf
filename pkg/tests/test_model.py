import numpy as np
import pytest

from ugotme.errors import BadLabel, ConfigError, ModelFormatError, NoTextInput
from ugotme.gradcheck import make_check_batch, small_check_config
from ugotme.modelio import MODEL_MAGIC, load_params, save_params
from ugotme.nn.autograd import Tensor
from ugotme.percept import DeltaSequence
from ugotme.vl2e import (
    ModelConfig, _layer_norm, _mha, backward_batch, cross_entropy,
    embed_frames, encode_text, encode_vision, forward_batch, forward_sample,
    init_params, param_shapes, patchify, predict, softmax_probs,
)

CFG = small_check_config()


@pytest.fixture(scope="module")
def params():
    return init_params(CFG, seed=0)


def _delta(rng, frames=3, side=None):
    side = side or CFG.crop_side
    return DeltaSequence(
        frames=rng.uniform(-1, 1, size=(frames, side, side, 3)),
        neutral_used="first-frame",
    )


# --- config ---

def test_config_divisibility_checks():
    with pytest.raises(ConfigError):
        ModelConfig(d_model=30, heads=4)
    with pytest.raises(ConfigError):
        ModelConfig(crop_side=60, patch_side=8)
    with pytest.raises(ConfigError):
        ModelConfig(num_classes=5)


def test_param_shapes_and_init(params):
    shapes = param_shapes(CFG)
    assert set(params) == set(shapes)
    for name, t in params.items():
        assert t.shape == shapes[name]
        if name.endswith("_g"):
            assert np.all(t.data == 1.0)
        elif name.endswith(("_b", "_b1", "_b2")):
            assert np.all(t.data == 0.0)


def test_init_deterministic():
    a = init_params(CFG, seed=7)
    b = init_params(CFG, seed=7)
    for name in a:
        assert np.array_equal(a[name].data, b[name].data)


# --- patchify ---

def test_patchify_shape_and_reassembly(rng):
    cfg = ModelConfig(crop_side=16, patch_side=8)
    delta = DeltaSequence(rng.uniform(-1, 1, (2, 16, 16, 3)), "first-frame")
    patches = patchify(delta, cfg)
    assert patches.shape == (2, 4, 192)
    # invert the patch layout and compare to the original frames
    rebuilt = (patches.reshape(2, 2, 2, 8, 8, 3)
               .transpose(0, 1, 3, 2, 4, 5)
               .reshape(2, 16, 16, 3))
    assert np.array_equal(rebuilt, delta.frames)


def test_patchify_rejects_wrong_side(rng):
    with pytest.raises(ConfigError):
        patchify(_delta(rng, side=CFG.crop_side * 2), CFG)


# --- embed_frames ---

def test_embed_frames_zero_input_is_positional_only(params):
    f = 3
    patches = np.zeros((f, CFG.patches_per_frame, CFG.patch_dim))
    out = embed_frames(patches, params, CFG).data
    # bias-free projection of zeros leaves only the positional terms
    expected = (params["patch_pos"].data.mean(axis=0)[None, :]
                + params["frame_pos"].data[:f])
    assert np.allclose(out, expected, atol=1e-12)


def test_embed_frames_respects_max_frames(params):
    patches = np.zeros((CFG.max_frames + 1, CFG.patches_per_frame, CFG.patch_dim))
    with pytest.raises(ConfigError):
        embed_frames(patches, params, CFG)


# --- layer norm and attention oracles ---

def test_layer_norm_matches_numpy_reference(rng):
    x = rng.standard_normal((5, 8))
    g = rng.standard_normal(8)
    b = rng.standard_normal(8)
    got = _layer_norm(Tensor(x), Tensor(g), Tensor(b)).data
    mu = x.mean(-1, keepdims=True)
    var = x.var(-1, keepdims=True)
    want = (x - mu) / np.sqrt(var + 1e-5) * g + b
    assert np.allclose(got, want, atol=1e-10)


def _mha_reference(x, p, prefix, cfg):
    q = x @ p[f"{prefix}wq"].data
    k = x @ p[f"{prefix}wk"].data
    v = x @ p[f"{prefix}wv"].data
    dh = cfg.d_model // cfg.heads
    outs = []
    for i in range(cfg.heads):
        sl = slice(i * dh, (i + 1) * dh)
        scores = q[:, sl] @ k[:, sl].T / np.sqrt(dh)
        e = np.exp(scores - scores.max(-1, keepdims=True))
        probs = e / e.sum(-1, keepdims=True)
        outs.append(probs @ v[:, sl])
    return np.concatenate(outs, axis=1) @ p[f"{prefix}wo"].data


def test_mha_matches_reference(params, rng):
    x = rng.standard_normal((6, CFG.d_model))
    got = _mha(Tensor(x), Tensor(x), params, "vis0_", CFG).data
    want = _mha_reference(x, params, "vis0_", CFG)
    assert np.allclose(got, want, atol=1e-10)


def test_attention_rows_sum_to_one(params, rng):
    x = Tensor(rng.standard_normal((5, CFG.d_model)))
    probs = []
    _mha(x, x, params, "txt0_", CFG, attn_probs=probs)
    assert len(probs) == CFG.heads
    for pr in probs:
        assert pr.shape == (5, 5)
        assert np.allclose(pr.sum(axis=-1), 1.0)
        assert pr.min() >= 0


def test_single_token_attention_is_identity_weight(params, rng):
    x = Tensor(rng.standard_normal((1, CFG.d_model)))
    probs = []
    _mha(x, x, params, "txt0_", CFG, attn_probs=probs)
    for pr in probs:
        assert np.allclose(pr, 1.0)


# --- encoders and fusion ---

def test_encode_vision_shape(params, rng):
    out = encode_vision(_delta(rng, frames=4), params, CFG)
    assert out.shape == (4, CFG.d_model)


def test_encode_vision_empty(params):
    assert encode_vision(None, params, CFG).shape == (0, CFG.d_model)


def test_encode_text_shape(params):
    out = encode_text(np.array([1, 2, 5, 9]), params, CFG)
    assert out.shape == (4, CFG.d_model)


def test_encode_text_empty_raises(params):
    with pytest.raises(NoTextInput):
        encode_text(np.array([], dtype=np.int64), params, CFG)


def test_encode_text_over_limit(params):
    with pytest.raises(ConfigError):
        encode_text(np.zeros(CFG.max_tokens + 1, dtype=np.int64), params, CFG)


def test_forward_sample_logit_shape(params, rng):
    logits = forward_sample(np.array([1, 2, 3]), _delta(rng), params, CFG)
    assert logits.shape == (1, 7)


def test_degraded_mode_uses_null_vision(params):
    tokens = np.array([4, 5, 6])
    base = forward_sample(tokens, None, params, CFG).data.copy()
    # perturbing the null-vision row must change the text-only prediction
    params2 = init_params(CFG, seed=0)
    params2["null_vision"].data += 1.0
    moved = forward_sample(tokens, None, params2, CFG).data
    assert not np.allclose(base, moved)
    # predictions are still a valid distribution
    probs = predict(tokens, None, params, CFG)
    assert probs.shape == (7,)
    assert probs.sum() == pytest.approx(1.0)


def test_vision_affects_prediction(params, rng):
    tokens = np.array([4, 5, 6])
    a = forward_sample(tokens, _delta(rng), params, CFG).data
    b = forward_sample(tokens, None, params, CFG).data
    assert not np.allclose(a, b)


# --- losses and batch API ---

def test_cross_entropy_matches_log_softmax(rng):
    logits = Tensor(rng.standard_normal((1, 7)))
    for label in range(7):
        got = cross_entropy(logits, label).data.item()
        ref = -(logits.data[0, label]
                - np.log(np.exp(logits.data[0]).sum()))
        assert got == pytest.approx(ref, abs=1e-10)


def test_forward_batch_mean_and_shapes(params):
    batch = make_check_batch(CFG, seed=1)
    logits, loss = forward_batch(batch, params, CFG)
    assert logits.shape == (len(batch), 7)
    singles = [forward_batch([s], params, CFG)[1].data.item() for s in batch]
    assert loss.data.item() == pytest.approx(np.mean(singles))


def test_forward_batch_rejects_bad_label(params):
    batch = [(np.array([1, 2]), None, 9)]
    with pytest.raises(BadLabel):
        forward_batch(batch, params, CFG)
    with pytest.raises(ValueError):
        forward_batch([], params, CFG)


def test_backward_batch_covers_all_params(params):
    batch = make_check_batch(CFG, seed=2)
    logits, loss, grads = backward_batch(batch, params, CFG)
    assert set(grads) == set(param_shapes(CFG))
    assert np.isfinite(loss)
    for name, g in grads.items():
        assert g.shape == params[name].shape
        assert np.all(np.isfinite(g))
    # the classifier head always receives gradient
    assert np.abs(grads["cls_w"]).max() > 0


def test_spot_finite_difference_on_full_model(params):
    batch = make_check_batch(CFG, seed=3)
    _, _, grads = backward_batch(batch, params, CFG)
    rng = np.random.default_rng(0)
    eps = 1e-5
    for name in ("cls_w", "vis0_wq", "cm0_t2v_wk", "tok_emb", "null_vision"):
        flat = params[name].data.reshape(-1)
        idx = int(rng.integers(flat.size))
        orig = flat[idx]
        flat[idx] = orig + eps
        up = forward_batch(batch, params, CFG)[1].data.item()
        flat[idx] = orig - eps
        dn = forward_batch(batch, params, CFG)[1].data.item()
        flat[idx] = orig
        fd = (up - dn) / (2 * eps)
        an = grads[name].reshape(-1)[idx]
        denom = max(abs(fd) + abs(an), 1e-6)
        assert abs(fd - an) / denom < 1e-4, name


def test_softmax_probs_valid(rng):
    p = softmax_probs(rng.standard_normal((4, 7)) * 30)
    assert np.allclose(p.sum(-1), 1.0)
    assert p.min() >= 0


# --- model file round trip ---

def test_save_load_roundtrip_f64(params, tmp_path):
    path = tmp_path / "m.vl2e"
    save_params(params, path)
    loaded = load_params(path, CFG)
    assert set(loaded) == set(params)
    for name in params:
        assert np.array_equal(loaded[name].data, params[name].data)


def test_save_load_roundtrip_f32(params, tmp_path):
    path = tmp_path / "m32.vl2e"
    save_params(params, path, dtype=np.float32)
    loaded = load_params(path, CFG)
    for name in params:
        assert np.allclose(loaded[name].data, params[name].data, atol=1e-6)


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.vl2e"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(ModelFormatError):
        load_params(path)


def test_load_rejects_truncation(params, tmp_path):
    path = tmp_path / "trunc.vl2e"
    save_params(params, path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(ModelFormatError):
        load_params(path)


def test_load_rejects_trailing_bytes(params, tmp_path):
    path = tmp_path / "trail.vl2e"
    save_params(params, path)
    path.write_bytes(path.read_bytes() + b"x")
    with pytest.raises(ModelFormatError):
        load_params(path)


def test_load_names_missing_tensor(params, tmp_path):
    partial = dict(params)
    del partial["cls_w"]
    path = tmp_path / "partial.vl2e"
    save_params(partial, path)
    with pytest.raises(ModelFormatError, match="cls_w"):
        load_params(path, CFG)


def test_load_names_shape_mismatch(params, tmp_path):
    mangled = dict(params)
    mangled["cls_b"] = Tensor(np.zeros(3), requires_grad=True)
    path = tmp_path / "shape.vl2e"
    save_params(mangled, path)
    with pytest.raises(ModelFormatError, match="cls_b"):
        load_params(path, CFG)


def test_load_without_config_skips_shape_check(params, tmp_path):
    partial = {"cls_w": params["cls_w"]}
    path = tmp_path / "free.vl2e"
    save_params(partial, path)
    loaded = load_params(path)
    assert list(loaded) == ["cls_w"]
