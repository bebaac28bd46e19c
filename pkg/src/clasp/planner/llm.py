"""Chat-completions LLM client with a parse-validate-repair loop.

Online mode POSTs to a chat-completions-compatible endpoint. Offline mode
replays numbered transcript files ``000.json, 001.json, ...`` from a
directory, each holding ``{"request": ..., "response": ...}``; only the
response is consumed, so hand-written scripts work as well as recorded
sessions. Every attempt (request and response) is logged to the transcript
directory when one is configured for recording.

Environment variables: CLASP_LLM_URL, CLASP_LLM_KEY, CLASP_LLM_OFFLINE
(the transcript directory; its presence selects offline mode).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ParseError, PlanningFailed, TransportError
from ..percept import SemanticKeypointSet
from ..planlang import Plan, SceneCapabilities, parse_plan, validate_plan
from ..vocab import vocabulary_for
from .prompts import PromptBundle, build_prompt


@dataclass
class LlmConfig:
    endpoint: str = ""
    model: str = "planner"
    api_key: str = ""
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 3               # total attempts, counting the first
    offline_dir: str | Path | None = None
    record_dir: str | Path | None = None

    @classmethod
    def from_env(cls) -> "LlmConfig":
        return cls(
            endpoint=os.environ.get("CLASP_LLM_URL", ""),
            api_key=os.environ.get("CLASP_LLM_KEY", ""),
            offline_dir=os.environ.get("CLASP_LLM_OFFLINE") or None,
        )


class OfflineTransport:
    """Replays responses from numbered transcript files in order."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.cursor = 0

    def send(self, request: dict) -> str:
        path = self.directory / f"{self.cursor:03d}.json"
        if not path.exists():
            raise TransportError(f"offline transcript exhausted: no {path.name} in {self.directory}")
        self.cursor += 1
        payload = json.loads(path.read_text())
        response = payload["response"]
        if isinstance(response, dict):
            return response["choices"][0]["message"]["content"]
        return str(response)


class HttpTransport:
    """POSTs a chat-completions request; returns the first choice's content."""

    def __init__(self, config: LlmConfig):
        if not config.endpoint:
            raise TransportError("no LLM endpoint configured (set CLASP_LLM_URL or use offline mode)")
        self.config = config

    def send(self, request: dict) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        try:
            resp = requests.post(
                self.config.endpoint, json=request, headers=headers, timeout=self.config.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"LLM request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"LLM endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"malformed LLM response: {exc}") from exc


@dataclass
class Attempt:
    request: dict
    response: str
    issues: str = ""


def _record(record_dir: Path | None, index: int, attempt: Attempt) -> None:
    if record_dir is None:
        return
    record_dir.mkdir(parents=True, exist_ok=True)
    payload = {"request": attempt.request, "response": attempt.response, "issues": attempt.issues}
    (record_dir / f"{index:03d}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def plan_with_llm(
    config: LlmConfig,
    task,
    keypoints: SemanticKeypointSet,
    capabilities: SceneCapabilities = SceneCapabilities(True, True),
    transport=None,
) -> Plan:
    """Prompt, parse, validate; on failure feed the errors back and retry.

    The returned plan always passes validation. After max_retries attempts
    PlanningFailed carries the full attempt log.
    """
    if transport is None:
        if config.offline_dir is not None:
            transport = OfflineTransport(config.offline_dir)
        else:
            transport = HttpTransport(config)
    record_dir = Path(config.record_dir) if config.record_dir else None
    vocab = vocabulary_for(keypoints.category)

    bundle: PromptBundle = build_prompt(task, keypoints)
    messages = bundle.messages()
    attempts: list[Attempt] = []

    for attempt_no in range(max(config.max_retries, 1)):
        request = {
            "model": config.model,
            "temperature": config.temperature,
            "messages": list(messages),
        }
        response = transport.send(request)
        attempt = Attempt(request=request, response=response)
        attempts.append(attempt)
        _record(record_dir, attempt_no, attempt)

        try:
            plan = parse_plan(response, provenance="llm")
        except ParseError as exc:
            attempt.issues = f"{exc.code}: {exc}"
            messages = messages + [
                {"role": "assistant", "content": response},
                {"role": "user", "content": f"That plan failed to parse: {exc}. "
                                            "Output only corrected plan lines."},
            ]
            continue

        report = validate_plan(plan, vocab, capabilities)
        if report.ok:
            plan.provenance = "llm"
            return plan
        attempt.issues = report.summary()
        messages = messages + [
            {"role": "assistant", "content": response},
            {"role": "user", "content": f"That plan is invalid: {report.summary()}. "
                                        "Output only corrected plan lines."},
        ]

    raise PlanningFailed(
        f"no valid plan after {len(attempts)} attempts; last issues: {attempts[-1].issues}",
        attempts=attempts,
    )
