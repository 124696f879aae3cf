"""Denoising ablation study.

Trains the model on distractor-laden noisy-text sessions, then evaluates
held-out sessions under stage toggles (full pipeline, no active-face
selection, no neutral normalization, vision-only, text-only) and prints
one accuracy/F1 row per configuration.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ugotme.context import ContextConfig, Tokenizer
from ugotme.harness.ablation import STANDARD_TOGGLES, run_ablation
from ugotme.harness.dataset import build_training_set
from ugotme.harness.synth import SyntheticGenConfig, generate_synthetic_session
from ugotme.modelio import load_params, save_params
from ugotme.percept import PerceptConfig
from ugotme.pipeline import ModelTurnClassifier, TurnPipeline
from ugotme.train import OptimizerConfig, train
from ugotme.vl2e import ModelConfig, init_params


def _sessions(base_seed: int, count: int, tag: str):
    return [
        generate_synthetic_session(SyntheticGenConfig(
            seed=base_seed + s, num_turns=8, frames_per_turn=6,
            text_noise=0.5, distractor_count=2, session_id=f"{tag}{s}",
        ))
        for s in range(count)
    ]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--train-sessions", type=int, default=40)
    ap.add_argument("--eval-sessions", type=int, default=63)
    ap.add_argument("--epochs", type=int, default=120)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--model", default=None,
                    help="reuse a trained model instead of training")
    ap.add_argument("--save-model", default=None)
    args = ap.parse_args()

    model_cfg = ModelConfig()
    started = time.monotonic()
    if args.model:
        params = load_params(args.model, model_cfg)
        print(f"loaded model from {args.model}")
    else:
        train_scripts = _sessions(args.seed, args.train_sessions, "abl-train")
        dataset = build_training_set(
            train_scripts, PerceptConfig(), ContextConfig(), Tokenizer(), model_cfg
        )
        print(f"{len(dataset)} training samples")
        params = init_params(model_cfg, seed=args.seed)
        result = train(
            dataset, params, model_cfg,
            OptimizerConfig(epochs=args.epochs, seed=args.seed,
                            target_accuracy=0.99),
            log=lambda e, l, a: print(f"epoch {e}: loss {l:.4f} acc {a:.3f}"),
        )
        print(f"trained {result.epochs_run} epochs "
              f"in {time.monotonic() - started:.1f}s")
        if args.save_model:
            save_params(params, args.save_model)

    eval_scripts = _sessions(1000, args.eval_sessions, "abl-eval")
    print(f"evaluating {sum(len(s.turns) for s in eval_scripts)} turns")
    result = run_ablation(
        eval_scripts,
        lambda toggles, script: TurnPipeline(
            classifier=ModelTurnClassifier(params, model_cfg),
            detector=script.detector(), toggles=toggles, selection_seed=7,
        ),
        STANDARD_TOGGLES,
    )
    print(f"{'configuration':<22}{'accuracy':>10}{'weighted F1':>13}")
    for name, report in result.reports.items():
        print(f"{name:<22}{report.accuracy:>10.4f}{report.weighted_f1:>13.4f}")
    gap = (result.reports["full"].accuracy
           - result.reports["no_active_selection"].accuracy)
    print(f"selection gap: {gap * 100:.1f} points")
    return 0


if __name__ == "__main__":
    sys.exit(main())
