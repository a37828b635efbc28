"""Generic remote chat backend speaking a minimal POST contract.

Request:  {"model": ..., "temperature": ..., "messages": [{"role", "content"}]}
Response: {"content": "<assistant text>"}

Anything that answers this shape is usable as an analyzer, grounder, or
synthesizer endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import httpx

from ..errors import InvalidConfig, Transport
from .base import AgentConfig, AgentRequest


@dataclass
class RemoteChatAgent:
    config: AgentConfig
    timeout: float = 120.0
    _client: httpx.Client | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.config.endpoint:
            raise InvalidConfig(f"remote {self.config.role} has no endpoint")

    def _http(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=self.timeout)
        return self._client

    def respond(self, request: AgentRequest) -> str:
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": request.messages,
        }
        try:
            response = self._http().post(self.config.endpoint, json=body)
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as exc:
            raise Transport(f"chat backend error: {exc}") from exc
        except ValueError as exc:
            raise Transport(f"chat backend returned non-JSON body: {exc}") from exc
        content = payload.get("content")
        if not isinstance(content, str):
            raise Transport("chat backend response missing 'content' text")
        return content

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
