"""Command-line entry points for the full pipeline."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path


def _addr(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def _build_pipeline(args, script=None, toggles=None):
    from .context import ContextConfig, Tokenizer
    from .percept import BlobDetector, PerceptConfig
    from .pipeline import ModelTurnClassifier, StubTurnClassifier, TurnPipeline
    from .modelio import load_params
    from .vl2e import ModelConfig

    percept_cfg = PerceptConfig()
    context_cfg = ContextConfig(k=args.k, named=not getattr(args, "unnamed", False))
    model_cfg = ModelConfig()
    if getattr(args, "model", None):
        classifier = ModelTurnClassifier(load_params(args.model, model_cfg), model_cfg)
    else:
        classifier = StubTurnClassifier()
    detector = script.detector() if script is not None else BlobDetector()
    return TurnPipeline(
        classifier=classifier,
        detector=detector,
        percept_cfg=percept_cfg,
        context_cfg=context_cfg,
        tokenizer=Tokenizer(vocab_size=model_cfg.vocab_size),
        toggles=toggles,
    )


def cmd_serve(args):
    from .transport import EdgeServer

    host, port = _addr(args.listen)
    ghost, gport = _addr(args.gateway)
    pipeline = _build_pipeline(args)
    server = EdgeServer(
        handler=pipeline.handle_turn,
        host=host, port=port, gateway_port=gport,
        buffer_capacity=args.buffer,
        console_dir=args.console_dir,
        gateway_pipeline_factory=lambda: _build_pipeline(args),
    )
    server.start()
    print(f"robot protocol on {host}:{server.robot_port}, "
          f"gateway on {ghost}:{server.gateway_port}")
    if args.console_dir:
        print(f"console at http://{ghost}:{server.gateway_port}/console/")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_simulate(args):
    from .harness.script import load_session
    from .transport import run_robot_simulator

    script = load_session(args.script)
    log = run_robot_simulator(script, _addr(args.target), fps=args.fps)
    print(f"frames sent: {log.frames_sent}, dropped: {log.frames_dropped}, "
          f"turns: {log.turns_sent}")
    for rec in sorted(log.expr_cmds, key=lambda r: r.cmd.turn_index):
        lat = f"{rec.latency_s * 1000:.1f} ms" if rec.latency_s is not None else "n/a"
        print(f"  turn {rec.cmd.turn_index}: expression {rec.cmd.expression} ({lat})")
    for err in log.errors:
        print(f"  error: {err}", file=sys.stderr)
    return 0 if log.clean_close else 1


def cmd_gen(args):
    from .harness.script import save_session
    from .harness.synth import SyntheticGenConfig, generate_synthetic_session

    cfg_doc = json.loads(Path(args.config).read_text()) if args.config else {}
    if "distractor_offset_range" in cfg_doc:
        cfg_doc["distractor_offset_range"] = tuple(cfg_doc["distractor_offset_range"])
    if "speakers" in cfg_doc:
        cfg_doc["speakers"] = tuple(cfg_doc["speakers"])
    cfg = SyntheticGenConfig(**cfg_doc)
    script = generate_synthetic_session(cfg)
    save_session(script, args.out)
    print(f"wrote session {script.session_id!r}: {len(script.frames)} frames, "
          f"{len(script.turns)} turns -> {args.out}")
    return 0


def cmd_train(args):
    from .context import ContextConfig, Tokenizer
    from .harness.dataset import build_training_set
    from .harness.script import load_session
    from .modelio import save_params
    from .percept import PerceptConfig
    from .train import OptimizerConfig, train
    from .vl2e import ModelConfig, init_params

    model_cfg = ModelConfig()
    sessions = sorted(p for p in Path(args.data).iterdir() if p.is_dir())
    scripts = [load_session(p) for p in sessions]
    dataset = build_training_set(
        scripts, PerceptConfig(), ContextConfig(k=args.k),
        Tokenizer(vocab_size=model_cfg.vocab_size), model_cfg,
    )
    print(f"{len(dataset)} samples from {len(scripts)} sessions")
    params = init_params(model_cfg, seed=args.seed)
    opt_cfg = OptimizerConfig(epochs=args.epochs, seed=args.seed,
                              target_accuracy=args.target_accuracy)
    result = train(
        dataset, params, model_cfg, opt_cfg,
        log=lambda e, l, a: print(f"epoch {e}: loss {l:.4f} acc {a:.3f}"),
    )
    save_params(params, args.out)
    print(f"trained {result.epochs_run} epochs -> {args.out}")
    return 0


def cmd_gradcheck(args):
    from .gradcheck import gradient_check, small_check_config

    errors = gradient_check(
        small_check_config(args.dmodel), eps=args.eps,
        progress=lambda name, err: print(f"  {name}: {err:.2e}"),
    )
    worst = max(errors.values())
    print(f"max relative error: {worst:.2e}")
    return 0 if worst < 1e-4 else 1


def cmd_replay(args):
    from .harness.replay import replay_session
    from .harness.script import load_session

    script = load_session(args.script)
    pipeline = _build_pipeline(args, script=script)
    result = replay_session(script, pipeline, mode=args.mode, fps=args.fps)
    from .emotions import EMOTION_NAMES

    for i, pred in enumerate(result.predictions):
        gold = result.golds[i]
        gold_name = EMOTION_NAMES[gold] if gold is not None else "?"
        print(f"turn {i}: predicted {EMOTION_NAMES[pred]} (gold {gold_name})")
    if result.partial:
        print("warning: partial results (transport failure)", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args):
    from .harness.metrics import EvalReport
    from .harness.replay import replay_offline
    from .harness.script import load_session

    dialogues = []
    for path in args.script:
        script = load_session(path)
        pipeline = _build_pipeline(args, script=script)
        result = replay_offline(script, pipeline)
        golds = [g if g is not None else 0 for g in result.golds]
        dialogues.append((result.predictions, golds))
    report = EvalReport.from_dialogues(dialogues)
    print(report.format_table())
    print(f"response accuracy: {report.response_accuracy:.4f}")
    if args.json_out:
        Path(args.json_out).write_text(report.to_json())
    return 0


def cmd_ablate(args):
    from .harness.ablation import STANDARD_TOGGLES, run_ablation
    from .harness.script import load_session

    scripts = [load_session(p) for p in args.script]
    toggles = {
        name: STANDARD_TOGGLES[name]
        for name in (args.toggles or list(STANDARD_TOGGLES))
    }
    result = run_ablation(
        scripts,
        lambda t, s: _build_pipeline(args, script=s, toggles=t),
        toggles,
    )
    for name, report in result.reports.items():
        print(f"{name}: accuracy {report.accuracy:.4f}, "
              f"weighted F1 {report.weighted_f1:.4f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ugotme")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the edge server")
    p.add_argument("--listen", default="127.0.0.1:7788")
    p.add_argument("--gateway", default="127.0.0.1:7789")
    p.add_argument("--buffer", type=int, default=640)
    p.add_argument("--model", default=None, help="model file (default: stub classifier)")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--unnamed", action="store_true")
    p.add_argument("--console-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="stream a session to a server")
    p.add_argument("--script", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--fps", type=float, default=25.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate a synthetic session")
    p.add_argument("--config", default=None, help="JSON generator config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the emotion model")
    p.add_argument("--data", required=True, help="directory of session dirs")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="model.vl2e")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--target-accuracy", type=float, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--dmodel", type=int, default=16)
    p.add_argument("--eps", type=float, default=1e-5)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("replay", help="replay a session through the pipeline")
    p.add_argument("--script", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--mode", choices=["live", "offline"], default="offline")
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--k", type=int, default=4)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("eval", help="evaluate on labeled sessions")
    p.add_argument("--script", nargs="+", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="run pipeline-stage ablations")
    p.add_argument("--script", nargs="+", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--toggles", nargs="*", default=None)
    p.set_defaults(func=cmd_ablate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
