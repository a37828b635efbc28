"""Search client with a hard knowledge-cutoff filter.

Whatever the backend claims to do, results are post-filtered locally so
that nothing published on or after the cutoff ever surfaces. That makes
the leak-proofing guarantee independent of backend behavior.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date, datetime
from typing import Callable, Iterable

import httpx

from ..errors import InvalidConfig, Transport


@dataclass
class SearchResult:
    title: str
    url: str
    published: str  # ISO date
    snippet: str


def _parse_date(text: str) -> date:
    return datetime.fromisoformat(text.replace("Z", "+00:00")).date()


BackendFn = Callable[[str], Iterable[dict]]


class SearchClient:
    def __init__(self, backend: BackendFn | str | None = None,
                 cutoff: str | None = None, timeout: float = 30.0):
        if backend is None:
            backend = os.environ.get("SEARCH_ENDPOINT", "")
        if cutoff is None:
            cutoff = os.environ.get("SEARCH_CUTOFF", "")
        if not cutoff:
            raise InvalidConfig("search cutoff date is required")
        self.cutoff = _parse_date(cutoff)
        self._backend = backend
        self._timeout = timeout

    def _fetch(self, query: str) -> Iterable[dict]:
        if callable(self._backend):
            return self._backend(query)
        if not self._backend:
            raise InvalidConfig("no search backend configured")
        try:
            response = httpx.get(self._backend, params={"q": query},
                                 timeout=self._timeout)
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as exc:
            raise Transport(f"search backend error: {exc}") from exc
        if isinstance(payload, dict):
            payload = payload.get("results", [])
        return payload

    def search(self, query: str) -> list[SearchResult]:
        results = []
        for raw in self._fetch(query):
            published = str(raw.get("published", ""))
            try:
                when = _parse_date(published)
            except ValueError:
                continue  # undated results cannot be proven pre-cutoff
            if when >= self.cutoff:
                continue  # hard local filter, strict inequality
            results.append(SearchResult(
                title=str(raw.get("title", "")),
                url=str(raw.get("url", "")),
                published=published,
                snippet=str(raw.get("snippet", "")),
            ))
        return results
