"""Emotion -> robotic facial expression (parallel empathy: mirror the peer)."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .emotions import Emotion
from .wire import ExprCmdMsg


@dataclass(frozen=True)
class ExpressionCommand:
    expression: Emotion
    turn_index: int
    issue_ts_us: int


@dataclass(frozen=True)
class ExecutionRecord:
    command: ExpressionCommand
    latency_us: int


def map_emotion(label: Emotion, turn_index: int, issue_ts_us: int | None = None) -> ExpressionCommand:
    """Identity mapping over the predefined 7-expression set."""
    if issue_ts_us is None:
        issue_ts_us = time.time_ns() // 1000
    return ExpressionCommand(Emotion(label), turn_index, issue_ts_us)


class SimulatedActuator:
    """Stands in for the robot face; records what would be executed."""

    def __init__(self):
        self.log: list[ExecutionRecord] = []

    def execute(self, cmd: ExpressionCommand, turn_arrival_ts_us: int | None = None) -> ExecutionRecord:
        latency = max(0, cmd.issue_ts_us - turn_arrival_ts_us) if turn_arrival_ts_us else 0
        record = ExecutionRecord(cmd, latency)
        self.log.append(record)
        return record


def to_wire(cmd: ExpressionCommand) -> ExprCmdMsg:
    return ExprCmdMsg(int(cmd.expression), cmd.turn_index, cmd.issue_ts_us)
