"""Session replay: in-process (offline) or over loopback TCP (live).

Both modes feed identical per-turn inputs to the pipeline, so a fixed
model and script yield identical predictions either way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..emotions import Emotion
from ..pipeline import TurnPipeline
from ..transport import EdgeServer, SessionLog, run_robot_simulator
from ..wire import TurnMsg
from .script import SessionScript


@dataclass
class ReplayResult:
    predictions: list[int]
    golds: list[int | None]
    stage_logs: list[dict] = field(default_factory=list)
    session_log: SessionLog | None = None
    partial: bool = False


def replay_offline(script: SessionScript, pipeline: TurnPipeline) -> ReplayResult:
    pipeline.reset()
    predictions = []
    stage_logs = []
    for turn in script.turns:
        snapshot = script.frames_in_window(turn.start_ts_us, turn.end_ts_us)
        msg = TurnMsg(
            turn_index=turn.index, start_ts_us=turn.start_ts_us,
            end_ts_us=turn.end_ts_us, speaker=turn.speaker, text=turn.text,
        )
        outcome = pipeline.handle_turn(msg, snapshot)
        predictions.append(int(outcome.emotion))
        stage_logs.append(outcome.stage_log)
    return ReplayResult(
        predictions=predictions,
        golds=[t.gold_emotion for t in script.turns],
        stage_logs=stage_logs,
    )


def replay_live(
    script: SessionScript,
    pipeline: TurnPipeline,
    fps: float | None = None,
    buffer_capacity: int = 640,
) -> ReplayResult:
    pipeline.reset()
    with EdgeServer(
        handler=pipeline.handle_turn,
        buffer_capacity=buffer_capacity,
        gateway_pipeline_factory=lambda: pipeline,
    ) as server:
        log = run_robot_simulator(
            script, ("127.0.0.1", server.robot_port), fps=fps
        )
        ordered = sorted(log.expr_cmds, key=lambda r: r.cmd.turn_index)
        predictions = [r.cmd.expression for r in ordered]
        partial = len(predictions) < len(script.turns)
        return ReplayResult(
            predictions=predictions,
            golds=[t.gold_emotion for t in script.turns[:len(predictions)]],
            stage_logs=list(server.stage_logs),
            session_log=log,
            partial=partial,
        )


def replay_session(script, pipeline, mode: str = "offline", fps=None) -> ReplayResult:
    if mode == "offline":
        return replay_offline(script, pipeline)
    if mode == "live":
        return replay_live(script, pipeline, fps=fps)
    raise ValueError(f"unknown replay mode {mode!r}")
