"""AdamW trainer with linear warmup and cosine decay to zero."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .percept import DeltaSequence
from .vl2e import ModelConfig, backward_batch, forward_sample, softmax_probs


@dataclass(frozen=True)
class OptimizerConfig:
    peak_lr: float = 3e-3
    warmup_steps: int = 20
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    batch_size: int = 16
    epochs: int = 300
    seed: int = 0
    target_accuracy: float | None = None  # stop early once train acc reaches this


def lr_at(step: int, total_steps: int, cfg: OptimizerConfig) -> float:
    """0 at step 0, peak at step == warmup_steps, 0 at the final step."""
    w = min(cfg.warmup_steps, max(total_steps - 1, 1))
    if step <= w:
        return cfg.peak_lr * step / w
    last = total_steps - 1
    if last <= w:
        return cfg.peak_lr
    progress = (step - w) / (last - w)
    return cfg.peak_lr * 0.5 * (1.0 + np.cos(np.pi * progress))


class AdamW:
    def __init__(self, params: dict, cfg: OptimizerConfig, total_steps: int):
        self.params = params
        self.cfg = cfg
        self.total_steps = total_steps
        self.step_count = 0
        self._m = {k: np.zeros_like(t.data) for k, t in params.items()}
        self._v = {k: np.zeros_like(t.data) for k, t in params.items()}

    def step(self, grads: dict) -> float:
        c = self.cfg
        lr = lr_at(self.step_count, self.total_steps, c)
        self.step_count += 1
        t = self.step_count
        for name, p in self.params.items():
            g = grads[name]
            m = self._m[name]
            v = self._v[name]
            m[:] = c.beta1 * m + (1 - c.beta1) * g
            v[:] = c.beta2 * v + (1 - c.beta2) * g * g
            m_hat = m / (1 - c.beta1 ** t)
            v_hat = v / (1 - c.beta2 ** t)
            p.data -= lr * (m_hat / (np.sqrt(v_hat) + c.eps) + c.weight_decay * p.data)
        return lr


@dataclass
class TrainResult:
    loss_history: list[float] = field(default_factory=list)
    accuracy_history: list[float] = field(default_factory=list)
    steps: int = 0
    epochs_run: int = 0


def train(dataset, params: dict, model_cfg: ModelConfig,
          opt_cfg: OptimizerConfig, class_weights=None,
          log=None) -> TrainResult:
    """Minibatch AdamW training; deterministic under opt_cfg.seed.

    ``dataset`` is a list of (token_ids, visual, label) samples where
    ``visual`` is a precomputed patch array, a DeltaSequence, or None.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    rng = np.random.default_rng(opt_cfg.seed)
    n = len(dataset)
    batches_per_epoch = (n + opt_cfg.batch_size - 1) // opt_cfg.batch_size
    total_steps = batches_per_epoch * opt_cfg.epochs
    opt = AdamW(params, opt_cfg, total_steps)
    result = TrainResult()
    for epoch in range(opt_cfg.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        correct = 0
        for b in range(batches_per_epoch):
            idx = order[b * opt_cfg.batch_size:(b + 1) * opt_cfg.batch_size]
            batch = [dataset[i] for i in idx]
            logits, loss, grads = backward_batch(
                batch, params, model_cfg, class_weights
            )
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss at step {result.steps}", result.steps
                )
            opt.step(grads)
            result.steps += 1
            epoch_losses.append(loss)
            preds = softmax_probs(logits).argmax(axis=1)
            correct += int(sum(p == s[2] for p, s in zip(preds, batch)))
        acc = correct / n
        result.loss_history.append(float(np.mean(epoch_losses)))
        result.accuracy_history.append(acc)
        result.epochs_run = epoch + 1
        if log is not None:
            log(epoch, result.loss_history[-1], acc)
        if opt_cfg.target_accuracy is not None and acc >= opt_cfg.target_accuracy:
            break
    return result


def evaluate_accuracy(dataset, params, model_cfg) -> float:
    correct = 0
    for token_ids, visual, label in dataset:
        probs = predict_visual(token_ids, visual, params, model_cfg)
        if int(probs.argmax()) == int(label):
            correct += 1
    return correct / len(dataset)


def predict_visual(token_ids, visual, params, model_cfg):
    """predict() that also accepts precomputed patch arrays."""
    patches = visual if isinstance(visual, np.ndarray) else None
    delta = visual if isinstance(visual, DeltaSequence) else None
    logits = forward_sample(token_ids, delta, params, model_cfg, patches=patches)
    return softmax_probs(logits.data[0])
