"""Structured extraction schema and prompt template plumbing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from string import Template

TAG_COUNT = 3
TAG_FILLERS = ("general", "weather", "news", "report", "update")


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class Casualty:
    deaths: int | None = None
    injuries: int | None = None
    impacted: int | None = None

    def __post_init__(self) -> None:
        for name in ("deaths", "injuries", "impacted"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0")

    def total(self) -> int | None:
        parts = [v for v in (self.deaths, self.injuries, self.impacted) if v is not None]
        return sum(parts) if parts else None

    def to_dict(self) -> dict:
        return {"deaths": self.deaths, "injuries": self.injuries, "impacted": self.impacted}


@dataclass(frozen=True)
class StructuralInfo:
    """Fixed per-article extraction schema: what the article says about heat risk."""

    is_heat_risk: bool
    location: str
    event_date: date
    completion_flags: frozenset[str]      # subset of {"day", "month", "year"}
    risk: str
    consequence: str
    reason: str
    temperature: float | None
    casualty: Casualty
    advice: str
    tags: tuple[str, str, str]

    def __post_init__(self) -> None:
        if len(self.tags) != TAG_COUNT:
            raise ValueError("exactly 3 tags required")
        if not self.completion_flags <= {"day", "month", "year"}:
            raise ValueError(f"bad completion flags {self.completion_flags}")

    def to_dict(self) -> dict:
        return {
            "is_heat_risk": self.is_heat_risk,
            "location": self.location,
            "event_date": self.event_date.isoformat(),
            "completion_flags": sorted(self.completion_flags),
            "risk": self.risk,
            "consequence": self.consequence,
            "reason": self.reason,
            "temperature": self.temperature,
            "casualty": self.casualty.to_dict(),
            "advice": self.advice,
            "tags": list(self.tags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StructuralInfo":
        return cls(
            is_heat_risk=bool(d["is_heat_risk"]),
            location=d["location"],
            event_date=date.fromisoformat(d["event_date"]),
            completion_flags=frozenset(d.get("completion_flags", [])),
            risk=d.get("risk", ""),
            consequence=d.get("consequence", ""),
            reason=d.get("reason", ""),
            temperature=d.get("temperature"),
            casualty=Casualty(**d.get("casualty", {})),
            advice=d.get("advice", ""),
            tags=tuple(d["tags"]),
        )


def normalize_tags(raw: list[str]) -> tuple[str, str, str]:
    """Force exactly three distinct, trimmed, case-folded tags."""
    tags: list[str] = []
    for t in raw:
        t = str(t).strip().casefold()
        if t and t not in tags:
            tags.append(t)
    for filler in TAG_FILLERS:
        if len(tags) >= TAG_COUNT:
            break
        if filler not in tags:
            tags.append(filler)
    return tuple(tags[:TAG_COUNT])  # type: ignore[return-value]


_PLACEHOLDER_RE = re.compile(r"\$(?:\{([_a-zA-Z][_a-zA-Z0-9]*)\}|([_a-zA-Z][_a-zA-Z0-9]*))")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    version: int
    body: str
    schema_id: str

    def placeholders(self) -> set[str]:
        return {a or b for a, b in _PLACEHOLDER_RE.findall(self.body)}

    def render(self, **params: str) -> str:
        missing = self.placeholders() - set(params)
        if missing:
            raise TemplateError(f"unbound placeholders: {sorted(missing)}")
        return Template(self.body).substitute(**params)


# Output schema identifier per template id.
_SCHEMAS = {
    "extract": "structural-info-v1",
    "relevance": "yes-no-v1",
    "name_cluster": "topic-label-v1",
    "answer": "grounded-answer-v1",
    "report": "report-v1",
}

_TEMPLATE_FILE_RE = re.compile(r"^([a-z_]+)_v(\d+)\.txt$")


class TemplateRegistry:
    """Versioned prompt templates loaded from text files; (id, version) unique."""

    def __init__(self, directory: str | Path | None = None):
        if directory is None:
            directory = Path(__file__).parent / "templates"
        self._templates: dict[tuple[str, int], PromptTemplate] = {}
        for path in sorted(Path(directory).glob("*.txt")):
            m = _TEMPLATE_FILE_RE.match(path.name)
            if not m:
                continue
            tid, version = m.group(1), int(m.group(2))
            key = (tid, version)
            if key in self._templates:
                raise TemplateError(f"duplicate template {key}")
            self._templates[key] = PromptTemplate(
                id=tid, version=version, body=path.read_text(encoding="utf-8"),
                schema_id=_SCHEMAS.get(tid, "text-v1"),
            )
        if not self._templates:
            raise TemplateError(f"no templates found in {directory}")

    def get(self, tid: str, version: int | None = None) -> PromptTemplate:
        versions = [v for (i, v) in self._templates if i == tid]
        if not versions:
            raise TemplateError(f"unknown template {tid!r}")
        return self._templates[(tid, version if version is not None else max(versions))]
