"""The top-N generation contract and a lookup-table backend for tests."""

from __future__ import annotations

import abc
import json
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

log = logging.getLogger(__name__)


class BackendNotReady(RuntimeError):
    pass


@dataclass(frozen=True)
class Candidate:
    text: str
    score: float

    def __post_init__(self):
        if not (0.0 < self.score <= 1.0) or math.isnan(self.score):
            raise ValueError(f"candidate score must lie in (0, 1], got {self.score}")


@dataclass(frozen=True)
class GenerationRequest:
    source: str
    top_n: int = 1

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")


def normalize_candidates(candidates: Iterable[Candidate]) -> list[Candidate]:
    """Deduplicate by text (keeping the best score) and sort by score, then text."""
    best: dict[str, Candidate] = {}
    for c in candidates:
        if c.text not in best or c.score > best[c.text].score:
            best[c.text] = c
    return sorted(best.values(), key=lambda c: (-c.score, c.text))


class GenerationBackend(abc.ABC):
    """Anything that can return scored target sequences for a source string.

    Implementations return at most ``top_n`` candidates, distinct by text,
    sorted by raw (not length-normalized) sequence probability, ties broken
    by text. ``generate_top_n`` must be safe to call concurrently.
    """

    @abc.abstractmethod
    def generate_top_n(self, request: GenerationRequest) -> list[Candidate]:
        ...

    def generate_many(self, sources: Sequence[str], top_n: int) -> list[list[Candidate]]:
        return [self.generate_top_n(GenerationRequest(s, top_n)) for s in sources]


class MockBackend(GenerationBackend):
    def __init__(self):
        self._table: dict[str, list[Candidate]] = {}

    def register(self, source: str, candidates: Iterable[Candidate]) -> None:
        if source in self._table:
            log.warning("replacing registered candidates for source %r", source)
        self._table[source] = normalize_candidates(candidates)

    def generate_top_n(self, request: GenerationRequest) -> list[Candidate]:
        return list(self._table.get(request.source, ())[:request.top_n])

    def __len__(self):
        return len(self._table)

    def sources(self) -> list[str]:
        return list(self._table)

    @classmethod
    def from_jsonl(cls, path) -> "MockBackend":
        """Load fixtures of the form ``{source, candidates: [{text, score}]}``."""
        mock = cls()
        with open(path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                rec = json.loads(line)
                mock.register(rec["source"],
                              [Candidate(c["text"], float(c["score"]))
                               for c in rec["candidates"]])
        return mock

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for source, cands in self._table.items():
                f.write(json.dumps({
                    "source": source,
                    "candidates": [{"text": c.text, "score": c.score} for c in cands],
                }, ensure_ascii=False) + "\n")
