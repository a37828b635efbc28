from .base import Agent, AgentConfig, AgentRequest, call_with_retry
from .payload import extract_fenced_payload, parse_synthesizer_output
from .prompts import render_prompt
from .scripted import ScriptedAgent, statement_hash
from .search import SearchClient, SearchResult

__all__ = [
    "Agent",
    "AgentConfig",
    "AgentRequest",
    "call_with_retry",
    "extract_fenced_payload",
    "parse_synthesizer_output",
    "render_prompt",
    "ScriptedAgent",
    "statement_hash",
    "SearchClient",
    "SearchResult",
]
