"""OpenAI-compatible inference: templates, sampling, sweeps, streaming."""

from .client import Completion, InferenceClient
from .config import DEFAULT_API_KEY_ENV, EndpointConfig, SamplingParams
from .sweep import JobRegistry, JobState, SweepSpec, run_sweep
from .templates import (
    PROMPT_BASED,
    TEMPLATE_BASED,
    FewShotSpec,
    PromptTemplate,
    placeholder_names,
    prompt_for,
    render_template,
)

__all__ = [
    "Completion",
    "DEFAULT_API_KEY_ENV",
    "EndpointConfig",
    "FewShotSpec",
    "InferenceClient",
    "JobRegistry",
    "JobState",
    "PROMPT_BASED",
    "PromptTemplate",
    "SamplingParams",
    "SweepSpec",
    "TEMPLATE_BASED",
    "placeholder_names",
    "prompt_for",
    "render_template",
    "run_sweep",
]
