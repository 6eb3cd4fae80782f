"""Analyst session state: selections, pinned insights, QA history.

Sessions are persisted to a JSON file on every mutation so an analysis
survives server restarts; mutations are serialized per session id.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .store import FilterRules

NUMERIC_REF = "numeric"


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class PinnedItem:
    text: str
    source_refs: list[str]      # article ids, or "numeric" for model output
    timestamp: str


@dataclass
class QaRecord:
    question: str
    answer: str
    references: list[str]
    timestamp: str


@dataclass
class AnalysisSession:
    session_id: str
    city_id: str = ""
    selected_date: str = ""     # ISO date
    index_kind: str = "temperature"
    resolution: str = "daily"
    search_id: str | None = None
    rules: FilterRules = field(default_factory=FilterRules)
    pins: list[PinnedItem] = field(default_factory=list)
    qa_history: list[QaRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rules"] = self.rules.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisSession":
        return cls(
            session_id=d["session_id"],
            city_id=d.get("city_id", ""),
            selected_date=d.get("selected_date", ""),
            index_kind=d.get("index_kind", "temperature"),
            resolution=d.get("resolution", "daily"),
            search_id=d.get("search_id"),
            rules=FilterRules.from_dict(d.get("rules", {})),
            pins=[PinnedItem(**p) for p in d.get("pins", [])],
            qa_history=[QaRecord(**q) for q in d.get("qa_history", [])],
        )


class SessionStore:
    def __init__(self, path: Path | None = None):
        self.path = path
        self.sessions: dict[str, AnalysisSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global = threading.Lock()
        if path is not None and path.exists():
            raw = json.loads(path.read_text(encoding="utf-8"))
            for sid, d in raw.items():
                self.sessions[sid] = AnalysisSession.from_dict(d)

    def _lock(self, session_id: str) -> threading.Lock:
        with self._global:
            return self._locks.setdefault(session_id, threading.Lock())

    def get(self, session_id: str) -> AnalysisSession:
        if session_id not in self.sessions:
            raise KeyError(f"unknown session {session_id!r}")
        return self.sessions[session_id]

    def upsert(self, session_id: str, **updates) -> AnalysisSession:
        with self._lock(session_id):
            session = self.sessions.get(session_id) or AnalysisSession(session_id=session_id)
            for key, value in updates.items():
                if value is not None:
                    setattr(session, key, value)
            self.sessions[session_id] = session
            self._flush()
            return session

    def pin(self, session_id: str, text: str, source_refs: list[str]) -> AnalysisSession:
        with self._lock(session_id):
            session = self.sessions.get(session_id) or AnalysisSession(session_id=session_id)
            session.pins.append(PinnedItem(text=text, source_refs=list(source_refs),
                                           timestamp=_now_iso()))
            self.sessions[session_id] = session
            self._flush()
            return session

    def record_qa(self, session_id: str, question: str, answer: str,
                  references: list[str]) -> None:
        with self._lock(session_id):
            session = self.sessions.get(session_id) or AnalysisSession(session_id=session_id)
            session.qa_history.append(QaRecord(question=question, answer=answer,
                                               references=list(references),
                                               timestamp=_now_iso()))
            self.sessions[session_id] = session
            self._flush()

    def _flush(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps({sid: s.to_dict() for sid, s in self.sessions.items()},
                                  sort_keys=True), encoding="utf-8")
        tmp.replace(self.path)
