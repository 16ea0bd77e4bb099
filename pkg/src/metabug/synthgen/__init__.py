"""Synthetic corpus: interpreter, program templates, grouped generation."""

from .generator import (
    GenConfig, GeneratedProgram, GenerationError, InvalidConfig,
    build_battery, find_witness, generate_corpus, make_truth, minimize_trace,
    runs_clean, synthesize_group,
)
from .interp import (
    OK, InterpError, InterpResult, Outcome, ProgramInput, StepBudgetExceeded,
    interpret, replay,
)
from .templates import BUG_OUTCOME, TEMPLATES, derive_rng, make_source

__all__ = [
    "GenConfig", "GeneratedProgram", "GenerationError", "InvalidConfig",
    "build_battery", "find_witness", "generate_corpus", "make_truth",
    "minimize_trace", "runs_clean", "synthesize_group",
    "OK", "InterpError", "InterpResult", "Outcome", "ProgramInput",
    "StepBudgetExceeded", "interpret", "replay",
    "BUG_OUTCOME", "TEMPLATES", "derive_rng", "make_source",
]
