"""Agent wire contract and the validation-retry loop."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Protocol

from ..errors import AgentExhausted, InvalidConfig, SoftpropError

ROLES = ("analyzer", "grounder", "synthesizer")

RETRY_FEEDBACK = "Your previous output was invalid because: {error}"


@dataclass
class AgentConfig:
    role: str
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.1
    max_exception_retry: int = 3
    max_interrupt_times: int = 5
    knowledge_cutoff: str = ""

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidConfig(f"unknown agent role {self.role!r}")
        if self.max_exception_retry < 0:
            raise InvalidConfig("max_exception_retry must be >= 0")
        if self.temperature < 0:
            raise InvalidConfig("temperature must be >= 0")

    @classmethod
    def from_env(cls, role: str, **overrides) -> "AgentConfig":
        upper = role.upper()
        fields = {
            "role": role,
            "endpoint": os.environ.get(f"AGENT_ENDPOINT_{upper}", ""),
            "model": os.environ.get(f"AGENT_MODEL_{upper}", ""),
        }
        fields.update(overrides)
        return cls(**fields)


@dataclass
class AgentRequest:
    """One call's worth of context.

    ``messages`` is the rendered transcript a chat backend consumes;
    ``node_id`` and ``statement`` let deterministic doubles answer without
    parsing prompts. Retries extend ``messages`` with error feedback.
    """

    role: str
    messages: list[dict[str, str]]
    node_id: str | None = None
    statement: str | None = None
    attempt: int = 1
    metadata: dict = field(default_factory=dict)


class Agent(Protocol):
    def respond(self, request: AgentRequest) -> str: ...


@dataclass
class RetryOutcome:
    value: object
    raw_response: str
    attempts: int
    retries: int


def call_with_retry(agent: Agent, request: AgentRequest,
                    validator: Callable[[str], object],
                    max_exception_retry: int = 3) -> RetryOutcome:
    """Invoke the agent; on a retryable validation failure, append the
    error as a new user turn and re-call, up to max_exception_retry re-calls.
    """
    messages = list(request.messages)
    last_raw: str | None = None
    last_error: Exception | None = None
    for attempt in range(1, max_exception_retry + 2):
        attempt_request = AgentRequest(
            role=request.role,
            messages=messages,
            node_id=request.node_id,
            statement=request.statement,
            attempt=attempt,
            metadata=request.metadata,
        )
        raw = agent.respond(attempt_request)
        last_raw = raw
        try:
            value = validator(raw)
        except SoftpropError as exc:
            if not exc.retryable:
                raise
            last_error = exc
            messages = messages + [
                {"role": "assistant", "content": raw},
                {"role": "user", "content": RETRY_FEEDBACK.format(error=exc)},
            ]
            continue
        return RetryOutcome(value=value, raw_response=raw,
                            attempts=attempt, retries=attempt - 1)
    raise AgentExhausted(
        f"{request.role} failed validation after {max_exception_retry + 1} attempts: "
        f"{last_error}",
        last_response=last_raw,
        last_error=last_error,
    )
