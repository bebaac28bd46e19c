"""High-level task planning: prompts, LLM client, and the template planner."""

from .llm import Attempt, HttpTransport, LlmConfig, OfflineTransport, plan_with_llm
from .prompts import (
    EXEMPLARS,
    FROZEN_PRIMITIVES,
    PRIMITIVE_DISCOVERY_PROMPT,
    Exemplar,
    PromptBundle,
    build_prompt,
)
from .task import FAMILIES, FOLD_DIRECTIONS, TaskSpec
from .template import template_plan

__all__ = [
    "TaskSpec", "FAMILIES", "FOLD_DIRECTIONS",
    "build_prompt", "PromptBundle", "Exemplar", "EXEMPLARS",
    "PRIMITIVE_DISCOVERY_PROMPT", "FROZEN_PRIMITIVES",
    "LlmConfig", "plan_with_llm", "OfflineTransport", "HttpTransport", "Attempt",
    "template_plan",
]
