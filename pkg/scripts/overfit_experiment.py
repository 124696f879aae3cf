"""Overfit sanity run: train on a separable synthetic set until the model
memorizes it. Prints per-epoch loss/accuracy and the final wall time."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ugotme.context import ContextConfig, Tokenizer
from ugotme.harness.dataset import build_training_set
from ugotme.harness.synth import SyntheticGenConfig, generate_synthetic_session
from ugotme.modelio import save_params
from ugotme.percept import PerceptConfig
from ugotme.train import OptimizerConfig, train
from ugotme.vl2e import ModelConfig, init_params


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sessions", type=int, default=25)
    ap.add_argument("--epochs", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--target", type=float, default=0.95)
    ap.add_argument("--out", default=None, help="optional model output path")
    args = ap.parse_args()

    scripts = [
        generate_synthetic_session(SyntheticGenConfig(
            seed=s, num_turns=8, frames_per_turn=6, text_noise=0.0,
            session_id=f"overfit{s}",
        ))
        for s in range(args.sessions)
    ]
    model_cfg = ModelConfig()
    dataset = build_training_set(
        scripts, PerceptConfig(), ContextConfig(), Tokenizer(), model_cfg
    )
    print(f"{len(dataset)} training samples")

    params = init_params(model_cfg, seed=args.seed)
    started = time.monotonic()
    result = train(
        dataset, params, model_cfg,
        OptimizerConfig(epochs=args.epochs, seed=args.seed,
                        target_accuracy=args.target),
        log=lambda e, l, a: print(f"epoch {e}: loss {l:.4f} acc {a:.3f}"),
    )
    elapsed = time.monotonic() - started
    print(f"final accuracy {result.accuracy_history[-1]:.3f} "
          f"after {result.epochs_run} epochs in {elapsed:.1f}s")
    if args.out:
        save_params(params, args.out)
        print(f"saved model -> {args.out}")
    return 0 if result.accuracy_history[-1] >= args.target else 1


if __name__ == "__main__":
    sys.exit(main())
