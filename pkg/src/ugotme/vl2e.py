"""Vision-language to emotion model.

Per-frame delta images are patch-embedded and mean-pooled into frame
features, run through a self-attention stack, and fused with the encoded
dialogue context by bidirectional cross-attention blocks (queries from one
modality, keys/values from the other). The pooled branches are
concatenated and fed to a 7-way classifier head. When no usable face was
extracted, a learned null-vision row stands in so text-only turns still
get a prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .emotions import NUM_EMOTIONS
from .errors import BadLabel, ConfigError, NoTextInput
from .nn.autograd import Tensor, concat, gelu, take_rows
from .percept import DeltaSequence

LN_EPS = 1e-5


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 32
    heads: int = 4
    vision_layers: int = 2
    text_layers: int = 2
    crossmodal_layers: int = 1
    patch_side: int = 8
    crop_side: int = 64
    max_frames: int = 32
    max_tokens: int = 256
    vocab_size: int = 4096
    num_classes: int = NUM_EMOTIONS
    ffn_mult: int = 2

    def __post_init__(self):
        if self.d_model % self.heads != 0:
            raise ConfigError("d_model must be divisible by heads")
        if self.crop_side % self.patch_side != 0:
            raise ConfigError("crop_side must be divisible by patch_side")
        if self.num_classes != NUM_EMOTIONS:
            raise ConfigError("the emotion head is fixed at 7 classes")

    @property
    def patches_per_frame(self) -> int:
        return (self.crop_side // self.patch_side) ** 2

    @property
    def patch_dim(self) -> int:
        return self.patch_side * self.patch_side * 3


def _attn_param_shapes(d, ffn):
    return {
        "wq": (d, d), "wk": (d, d), "wv": (d, d), "wo": (d, d),
        "ln1_g": (d,), "ln1_b": (d,),
        "ln2_g": (d,), "ln2_b": (d,),
        "ffn_w1": (d, ffn), "ffn_b1": (ffn,),
        "ffn_w2": (ffn, d), "ffn_b2": (d,),
    }


def _cross_param_shapes(d, ffn):
    shapes = {}
    for branch in ("t2v", "v2t"):  # queries from text / queries from vision
        for k, v in _attn_param_shapes(d, ffn).items():
            shapes[f"{branch}_{k}"] = v
        shapes[f"{branch}_lnkv_g"] = (d,)
        shapes[f"{branch}_lnkv_b"] = (d,)
    return shapes


def param_shapes(cfg: ModelConfig) -> dict[str, tuple]:
    d = cfg.d_model
    ffn = cfg.ffn_mult * d
    shapes = {
        "patch_proj": (cfg.patch_dim, d),
        "patch_pos": (cfg.patches_per_frame, d),
        "frame_pos": (cfg.max_frames, d),
        "tok_emb": (cfg.vocab_size, d),
        "tok_pos": (cfg.max_tokens, d),
        "null_vision": (1, d),
        "vis_lnf_g": (d,), "vis_lnf_b": (d,),
        "txt_lnf_g": (d,), "txt_lnf_b": (d,),
        "cls_w": (2 * d, cfg.num_classes),
        "cls_b": (cfg.num_classes,),
    }
    for i in range(cfg.vision_layers):
        for k, v in _attn_param_shapes(d, ffn).items():
            shapes[f"vis{i}_{k}"] = v
    for i in range(cfg.text_layers):
        for k, v in _attn_param_shapes(d, ffn).items():
            shapes[f"txt{i}_{k}"] = v
    for i in range(cfg.crossmodal_layers):
        for k, v in _cross_param_shapes(d, ffn).items():
            shapes[f"cm{i}_{k}"] = v
    return shapes


def init_params(cfg: ModelConfig, seed: int = 0) -> dict[str, Tensor]:
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(cfg).items():
        if name.endswith("_g"):
            data = np.ones(shape)
        elif name.endswith(("_b", "_b1", "_b2")):
            data = np.zeros(shape)
        else:
            data = rng.normal(0.0, 0.02, size=shape)
        params[name] = Tensor(data, requires_grad=True, name=name)
    return params


def _layer_norm(x: Tensor, g: Tensor, b: Tensor) -> Tensor:
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered * (var + LN_EPS) ** -0.5 * g + b


def _mha(q_in: Tensor, kv_in: Tensor, p: dict, prefix: str, cfg: ModelConfig,
         attn_probs: list | None = None) -> Tensor:
    d, h = cfg.d_model, cfg.heads
    dh = d // h
    q = q_in @ p[f"{prefix}wq"]
    k = kv_in @ p[f"{prefix}wk"]
    v = kv_in @ p[f"{prefix}wv"]
    heads = []
    scale = 1.0 / np.sqrt(dh)
    for i in range(h):
        sl = slice(i * dh, (i + 1) * dh)
        qi = q[:, sl]
        ki = k[:, sl]
        vi = v[:, sl]
        scores = (qi @ ki.T) * scale
        probs = scores.softmax(axis=-1)
        if attn_probs is not None:
            attn_probs.append(probs.data)
        heads.append(probs @ vi)
    return concat(heads, axis=1) @ p[f"{prefix}wo"]


def _ffn(x: Tensor, p: dict, prefix: str) -> Tensor:
    hidden = gelu(x @ p[f"{prefix}ffn_w1"] + p[f"{prefix}ffn_b1"])
    return hidden @ p[f"{prefix}ffn_w2"] + p[f"{prefix}ffn_b2"]


def self_attend(x: Tensor, p: dict, prefix: str, cfg: ModelConfig,
                attn_probs: list | None = None) -> Tensor:
    """One pre-norm self-attention block with residuals."""
    normed = _layer_norm(x, p[f"{prefix}ln1_g"], p[f"{prefix}ln1_b"])
    x = x + _mha(normed, normed, p, prefix, cfg, attn_probs)
    x = x + _ffn(_layer_norm(x, p[f"{prefix}ln2_g"], p[f"{prefix}ln2_b"]), p, prefix)
    return x


def patchify(delta: DeltaSequence, cfg: ModelConfig) -> np.ndarray:
    """[F', P, patch_dim] patch matrix for a delta sequence."""
    frames = delta.frames
    f, s, _, _ = frames.shape
    if s != cfg.crop_side:
        raise ConfigError(f"crop side {s} != model crop_side {cfg.crop_side}")
    p = cfg.patch_side
    n = s // p
    x = frames.reshape(f, n, p, n, p, 3)
    x = x.transpose(0, 1, 3, 2, 4, 5)
    return x.reshape(f, n * n, p * p * 3)


def embed_frames(patches: np.ndarray, p: dict, cfg: ModelConfig) -> Tensor:
    """Pre-attention frame features [F', d]: bias-free patch projection plus
    patch positions, mean over patches, plus frame positions."""
    f, np_, pd = patches.shape
    if f > cfg.max_frames:
        raise ConfigError(f"{f} frames exceeds model max_frames {cfg.max_frames}")
    flat = Tensor(patches.reshape(f * np_, pd))
    projected = (flat @ p["patch_proj"]).reshape(f, np_, cfg.d_model)
    projected = projected + p["patch_pos"].reshape(1, np_, cfg.d_model)
    return projected.mean(axis=1) + p["frame_pos"][:f]


def encode_vision(delta: DeltaSequence | None, p: dict, cfg: ModelConfig,
                  patches: np.ndarray | None = None) -> Tensor:
    """Frame-level features through the vision self-attention stack.
    Returns [F', d]; F' may be 0."""
    if patches is None:
        if delta is None or len(delta) == 0:
            return Tensor(np.zeros((0, cfg.d_model)))
        patches = patchify(delta, cfg)
    if patches.shape[0] == 0:
        return Tensor(np.zeros((0, cfg.d_model)))
    x = embed_frames(patches, p, cfg)
    for i in range(cfg.vision_layers):
        x = self_attend(x, p, f"vis{i}_", cfg)
    return _layer_norm(x, p["vis_lnf_g"], p["vis_lnf_b"])


def encode_text(token_ids: np.ndarray, p: dict, cfg: ModelConfig) -> Tensor:
    """Full last-hidden-state sequence of the context encoder, [L, d]."""
    token_ids = np.asarray(token_ids, dtype=np.int64)
    if token_ids.size == 0:
        raise NoTextInput("text input is mandatory")
    if token_ids.size > cfg.max_tokens:
        raise ConfigError("token sequence exceeds max_tokens")
    x = take_rows(p["tok_emb"], token_ids) + p["tok_pos"][: token_ids.size]
    for i in range(cfg.text_layers):
        x = self_attend(x, p, f"txt{i}_", cfg)
    return _layer_norm(x, p["txt_lnf_g"], p["txt_lnf_b"])


def _cross_block(xq: Tensor, xkv: Tensor, p: dict, prefix: str,
                 cfg: ModelConfig) -> Tensor:
    q_norm = _layer_norm(xq, p[f"{prefix}ln1_g"], p[f"{prefix}ln1_b"])
    kv_norm = _layer_norm(xkv, p[f"{prefix}lnkv_g"], p[f"{prefix}lnkv_b"])
    x = xq + _mha(q_norm, kv_norm, p, prefix, cfg)
    x = x + _ffn(_layer_norm(x, p[f"{prefix}ln2_g"], p[f"{prefix}ln2_b"]), p, prefix)
    return x


def crossmodal_fuse(vis: Tensor, txt: Tensor, p: dict, cfg: ModelConfig) -> Tensor:
    """Bidirectional cross-attention; mean-pool both branches and concat."""
    if txt.shape[0] == 0:
        raise NoTextInput("text input is mandatory")
    if vis.shape[0] == 0:
        vis = p["null_vision"] + 0.0  # learned stand-in row
    t_branch, v_branch = txt, vis
    for i in range(cfg.crossmodal_layers):
        t_new = _cross_block(t_branch, v_branch, p, f"cm{i}_t2v_", cfg)
        v_new = _cross_block(v_branch, t_branch, p, f"cm{i}_v2t_", cfg)
        t_branch, v_branch = t_new, v_new
    pooled_t = t_branch.mean(axis=0)
    pooled_v = v_branch.mean(axis=0)
    return concat([pooled_t, pooled_v], axis=0)


def forward_sample(token_ids, delta, p: dict, cfg: ModelConfig,
                   patches: np.ndarray | None = None) -> Tensor:
    """Logits [7] for one (context tokens, delta sequence) pair."""
    vis = encode_vision(delta, p, cfg, patches=patches)
    txt = encode_text(token_ids, p, cfg)
    fused = crossmodal_fuse(vis, txt, p, cfg)
    return fused.reshape(1, 2 * cfg.d_model) @ p["cls_w"] + p["cls_b"]


def cross_entropy(logits: Tensor, label: int, class_weight: float = 1.0) -> Tensor:
    shifted = logits - float(logits.data.max())
    log_probs = shifted - shifted.exp().sum(axis=-1, keepdims=True).log()
    onehot = np.zeros((1, logits.shape[-1]))
    onehot[0, label] = 1.0
    return -(log_probs * onehot).sum() * class_weight


def forward_batch(batch, p: dict, cfg: ModelConfig,
                  class_weights: np.ndarray | None = None):
    """Mean cross-entropy over a batch of (token_ids, delta_or_patches, label).

    Returns (logits [B,7] numpy, loss Tensor). The second element of each
    sample may be a DeltaSequence, a precomputed patch array, or None.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    losses = []
    logit_rows = []
    weight_sum = 0.0
    for token_ids, visual, label in batch:
        if not (isinstance(label, (int, np.integer)) and 0 <= int(label) <= 6):
            raise BadLabel(f"label {label!r} outside 0..6")
        patches = visual if isinstance(visual, np.ndarray) else None
        delta = visual if isinstance(visual, DeltaSequence) else None
        logits = forward_sample(token_ids, delta, p, cfg, patches=patches)
        w = 1.0 if class_weights is None else float(class_weights[int(label)])
        losses.append(cross_entropy(logits, int(label), w))
        weight_sum += w
        logit_rows.append(logits.data[0])
    total = losses[0]
    for item in losses[1:]:
        total = total + item
    loss = total * (1.0 / weight_sum)
    return np.stack(logit_rows), loss


def backward_batch(batch, p: dict, cfg: ModelConfig,
                   class_weights: np.ndarray | None = None):
    """Analytic gradients for every parameter tensor; same names/shapes."""
    for t in p.values():
        t.zero_grad()
    logits, loss = forward_batch(batch, p, cfg, class_weights)
    loss.backward()
    grads = {
        name: (t.grad if t.grad is not None else np.zeros_like(t.data))
        for name, t in p.items()
    }
    return logits, float(loss.data), grads


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def predict(token_ids, delta, p: dict, cfg: ModelConfig) -> np.ndarray:
    """7-class probability distribution for one sample."""
    logits = forward_sample(token_ids, delta, p, cfg)
    probs = softmax_probs(logits.data[0])
    if not np.all(np.isfinite(probs)):
        raise FloatingPointError("non-finite probabilities from forward pass")
    return probs
