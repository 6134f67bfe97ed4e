"""Prompt rendering, agents and experiment runs."""

from .agents import RemoteAgent, RemoteConfig, ScriptedAgent, TokenBucket, TransportError, agent_from_config, parse_action
from .prompts import FRAMINGS, SYSTEM_PROMPT, PromptSpec, Treatment, render_actual_play, render_prompt
from .runner import (ElicitationResult, ExperimentRecord, Transcript, read_jsonl, run_actual_play,
                     run_elicitation, treatment_from_config, write_jsonl)
