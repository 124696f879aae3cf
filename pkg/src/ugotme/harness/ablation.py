"""Ablation runner: replay identical eval sessions under stage toggles."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..pipeline import PipelineToggles, TurnPipeline
from .metrics import EvalReport
from .replay import replay_offline

STANDARD_TOGGLES = {
    "full": PipelineToggles(),
    "no_active_selection": PipelineToggles(active_selection=False),
    "no_neutral_norm": PipelineToggles(neutral_norm=False),
    "no_vision": PipelineToggles(vision=False),
    "no_text": PipelineToggles(text=False),
}


@dataclass
class AblationResult:
    reports: dict[str, EvalReport]
    stage_logs: dict[str, list[list[dict]]] = field(default_factory=dict)


def run_ablation(
    scripts,
    pipeline_factory,
    toggle_sets: dict[str, PipelineToggles] | None = None,
) -> AblationResult:
    """``pipeline_factory(toggles, script) -> TurnPipeline``; each script is
    one dialogue. Returns one EvalReport per toggle configuration, computed
    on the identical session set."""
    toggle_sets = toggle_sets or STANDARD_TOGGLES
    reports = {}
    logs = {}
    for name, toggles in toggle_sets.items():
        per_dialogue = []
        per_script_logs = []
        for script in scripts:
            pipeline = pipeline_factory(toggles, script)
            result = replay_offline(script, pipeline)
            labeled = [
                (p, g) for p, g in zip(result.predictions, result.golds)
                if g is not None
            ]
            per_dialogue.append(
                ([p for p, _ in labeled], [g for _, g in labeled])
            )
            per_script_logs.append(result.stage_logs)
        reports[name] = EvalReport.from_dialogues(per_dialogue)
        logs[name] = per_script_logs
    return AblationResult(reports=reports, stage_logs=logs)
