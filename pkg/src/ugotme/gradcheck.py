"""Central finite-difference verification of the analytic gradients."""

from __future__ import annotations

import numpy as np

from .vl2e import ModelConfig, backward_batch, forward_batch, init_params


def small_check_config(d_model: int = 16) -> ModelConfig:
    return ModelConfig(
        d_model=d_model, heads=2, vision_layers=1, text_layers=1,
        crossmodal_layers=1, patch_side=8, crop_side=8, max_frames=4,
        max_tokens=8, vocab_size=32,
    )


def make_check_batch(cfg: ModelConfig, seed: int = 0, with_empty_vision: bool = True):
    rng = np.random.default_rng(seed)
    batch = []
    n_tok = min(8, cfg.max_tokens)
    tokens = rng.integers(0, cfg.vocab_size, size=n_tok)
    patches = rng.uniform(-1, 1, size=(cfg.max_frames, cfg.patches_per_frame,
                                       cfg.patch_dim))
    batch.append((tokens, patches, 3))
    if with_empty_vision:
        tokens2 = rng.integers(0, cfg.vocab_size, size=n_tok)
        empty = np.zeros((0, cfg.patches_per_frame, cfg.patch_dim))
        batch.append((tokens2, empty, 5))
    return batch


def gradient_check(
    cfg: ModelConfig | None = None,
    eps: float = 1e-5,
    seed: int = 0,
    progress=None,
    denom_floor: float = 1e-6,
) -> dict[str, float]:
    """Max relative error of analytic vs central-difference gradients, per
    parameter tensor. Everything runs in 64-bit."""
    cfg = cfg or small_check_config()
    params = init_params(cfg, seed=seed)
    batch = make_check_batch(cfg, seed=seed)
    _, _, grads = backward_batch(batch, params, cfg)

    def loss_value() -> float:
        _, loss = forward_batch(batch, params, cfg)
        return float(loss.data)

    errors: dict[str, float] = {}
    for name, tensor in params.items():
        analytic = grads[name]
        flat = tensor.data.reshape(-1)
        worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = loss_value()
            flat[i] = orig - eps
            down = loss_value()
            flat[i] = orig
            numeric = (up - down) / (2 * eps)
            a = analytic.reshape(-1)[i]
            # floor guards the quotient against finite-difference roundoff
            # when both gradients are essentially zero
            denom = max(abs(a) + abs(numeric), denom_floor)
            rel = abs(a - numeric) / denom
            worst = max(worst, rel)
        errors[name] = worst
        if progress is not None:
            progress(name, worst)
    return errors
