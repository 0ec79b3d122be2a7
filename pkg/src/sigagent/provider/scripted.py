"""Deterministic chat provider driven by a fixture of canned replies."""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

from ..errors import FixtureExhausted
from .base import ChatRequest

Matcher = Union[None, str, "re.Pattern[str]", Callable[[ChatRequest], bool]]


@dataclass
class FixtureEntry:
    """One canned reply.

    ``match`` may be None (matches anything), a case-insensitive substring,
    a compiled regex, or a predicate. Persistent entries are never consumed.
    """

    match: Matcher
    response: str
    persistent: bool = False

    def matches(self, request: ChatRequest) -> bool:
        m = self.match
        if m is None:
            return True
        if isinstance(m, str):
            return m.lower() in request.text().lower()
        if isinstance(m, re.Pattern):
            return m.search(request.text()) is not None
        return bool(m(request))


class ScriptedProvider:
    """Replays fixture entries in order.

    Each call takes the first unconsumed entry whose matcher accepts the
    request. When nothing matches, the exhaustion policy decides: ``error``
    raises FixtureExhausted, ``repeat-last`` returns the previous reply.
    """

    def __init__(self, entries, exhaustion: str = "error"):
        if exhaustion not in ("error", "repeat-last"):
            raise ValueError(f"unknown exhaustion policy {exhaustion!r}")
        self.entries = [e if isinstance(e, FixtureEntry) else FixtureEntry(*e) for e in entries]
        self.exhaustion = exhaustion
        self._used = [False] * len(self.entries)
        self._last: str | None = None
        self._lock = threading.Lock()
        self.calls: list[ChatRequest] = []

    @classmethod
    def from_file(cls, path) -> "ScriptedProvider":
        """Load ``{"exhaustion": ..., "entries": [{"match", "regex", "response", "persistent"}]}``."""
        spec = json.loads(Path(path).read_text())
        entries = []
        for e in spec["entries"]:
            match = re.compile(e["regex"]) if "regex" in e else e.get("match")
            entries.append(FixtureEntry(match, e["response"], e.get("persistent", False)))
        return cls(entries, spec.get("exhaustion", "error"))

    def chat(self, request: ChatRequest) -> str:
        with self._lock:
            self.calls.append(request)
            for i, entry in enumerate(self.entries):
                if self._used[i] or not entry.matches(request):
                    continue
                if not entry.persistent:
                    self._used[i] = True
                self._last = entry.response
                return entry.response
            if self.exhaustion == "repeat-last" and self._last is not None:
                return self._last
            raise FixtureExhausted(f"no fixture entry matches request #{len(self.calls)}")

    @property
    def remaining(self) -> int:
        return sum(1 for used, e in zip(self._used, self.entries) if not used and not e.persistent)
