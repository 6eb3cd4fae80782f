"""Uniform gateway to a text-generation/embedding provider.

All provider traffic flows through one object that renders versioned prompt
templates, retries with exponential backoff, caps in-flight requests, parses
and validates provider output, and enforces hard output guarantees (exactly
three tags, completed event dates, citations restricted to supplied context).
"""

from __future__ import annotations

import json
import logging
import random
import re
import threading
import time
from dataclasses import dataclass
from datetime import date

import numpy as np

from ..config import ProviderConfig
from .providers import HttpProvider, MockProvider, Provider, ProviderError
from .schema import (
    Casualty,
    PromptTemplate,
    StructuralInfo,
    TemplateError,
    TemplateRegistry,
    normalize_tags,
)

__all__ = [
    "Casualty", "ExtractionFailure", "Gateway", "HttpProvider", "MockProvider",
    "PromptTemplate", "Provider", "ProviderError", "StructuralInfo",
    "TemplateError", "TemplateRegistry",
]

logger = logging.getLogger(__name__)

REPORT_SECTIONS = (
    "Meteorological conditions",
    "Risk scenarios",
    "Historical events",
    "Advice for government",
    "Advice for citizens",
)


class ExtractionFailure(RuntimeError):
    """Provider output could not be parsed after all retries; carries the raw text."""

    def __init__(self, message: str, raw_output: str):
        super().__init__(message)
        self.raw_output = raw_output


def _first_json_object(text: str) -> dict:
    """Extract the first balanced JSON object, tolerating surrounding prose."""
    start = text.find("{")
    while start >= 0:
        depth = 0
        in_str = False
        escape = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_str:
                if escape:
                    escape = False
                elif ch == "\\":
                    escape = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        obj = json.loads(text[start:i + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(obj, dict):
                        return obj
                    break
        start = text.find("{", start + 1)
    raise ValueError("no JSON object in provider output")


@dataclass
class QaAnswer:
    text: str
    cited_chunk_ids: list[str]


class Gateway:
    """Shareable front door to one provider pair (generation + embeddings)."""

    def __init__(self, provider: Provider, config: ProviderConfig | None = None,
                 templates: TemplateRegistry | None = None,
                 backoff_base: float = 1.0, seed: int = 0):
        self.provider = provider
        self.config = config or ProviderConfig()
        self.templates = templates or TemplateRegistry()
        self.backoff_base = backoff_base
        self._rng = random.Random(seed)
        self._gate = threading.BoundedSemaphore(self.config.concurrency)

    # -- provider plumbing ----------------------------------------------------

    def _call(self, prompt: str) -> str:
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                with self._gate:
                    return self.provider.complete(prompt)
            except (TimeoutError, ProviderError) as exc:
                last_error = exc
                if attempt < self.config.max_retries:
                    delay = self.backoff_base * (2 ** attempt) * (0.5 + self._rng.random())
                    time.sleep(delay)
        raise ProviderError(f"provider failed after {self.config.max_retries + 1} "
                            f"attempts: {last_error}")

    # -- extraction -----------------------------------------------------------

    def extract(self, article, template: PromptTemplate | None = None) -> StructuralInfo:
        """Run structural extraction for one article.

        ``article`` needs title, body and published_at attributes. A partial
        or missing event date is completed from the publication date, with
        the filled-in parts recorded in completion_flags.
        """
        if not article.body:
            raise ValueError("article body is empty")
        tpl = template or self.templates.get("extract")
        prompt = tpl.render(published=article.published_at.isoformat(),
                            title=article.title, body=article.body)

        raw = ""
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                raw = self._call(prompt)
                obj = _first_json_object(raw)
                return self._coerce(obj, article.published_at)
            except ProviderError as exc:
                raise ExtractionFailure(f"provider unavailable: {exc}", raw) from exc
            except (ValueError, KeyError, TypeError) as exc:
                last_error = exc
        raise ExtractionFailure(f"unparseable provider output: {last_error}", raw)

    def _coerce(self, obj: dict, published: date) -> StructuralInfo:
        is_heat = obj["is_heat_risk"]
        if isinstance(is_heat, str):
            is_heat = is_heat.strip().casefold() in ("yes", "true")

        event = obj.get("event_date") or {}
        if not isinstance(event, dict):
            raise ValueError("event_date must be an object")
        flags = set()
        parts = {}
        for name, pub_part in (("year", published.year), ("month", published.month),
                               ("day", published.day)):
            value = event.get(name)
            if value is None:
                flags.add(name)
                parts[name] = pub_part
            else:
                parts[name] = int(value)
        try:
            event_date = date(parts["year"], parts["month"], parts["day"])
        except ValueError:
            # stated day does not exist in the stated month; fall back to the
            # publication day for the invalid component
            flags.add("day")
            event_date = date(parts["year"], parts["month"], published.day)

        casualty_obj = obj.get("casualty") or {}
        casualty = Casualty(
            deaths=None if casualty_obj.get("deaths") is None else int(casualty_obj["deaths"]),
            injuries=None if casualty_obj.get("injuries") is None else int(casualty_obj["injuries"]),
            impacted=None if casualty_obj.get("impacted") is None else int(casualty_obj["impacted"]),
        )

        temperature = obj.get("temperature")
        if temperature is not None:
            temperature = float(temperature)

        raw_tags = obj.get("tags") or []
        if not isinstance(raw_tags, list):
            raise ValueError("tags must be a list")

        return StructuralInfo(
            is_heat_risk=bool(is_heat),
            location=str(obj.get("location") or ""),
            event_date=event_date,
            completion_flags=frozenset(flags),
            risk=str(obj.get("risk") or ""),
            consequence=str(obj.get("consequence") or ""),
            reason=str(obj.get("reason") or ""),
            temperature=temperature,
            casualty=casualty,
            advice=str(obj.get("advice") or ""),
            tags=normalize_tags([str(t) for t in raw_tags]),
        )

    # -- pure filters ----------------------------------------------------------

    @staticmethod
    def relevance_filter(info: StructuralInfo, city_names: tuple[str, ...]) -> bool:
        """Keep only extractions flagged heat-risk and located in the target city."""
        if not info.is_heat_risk:
            return False
        loc = info.location.strip().casefold()
        return any(loc == name.strip().casefold() for name in city_names)

    # -- provider-backed operations ---------------------------------------------

    def name_cluster(self, tags: list[str]) -> str:
        if not tags:
            raise ValueError("cannot name an empty cluster")
        tpl = self.templates.get("name_cluster")
        raw = self._call(tpl.render(tags="\n".join(f"- {t}" for t in sorted(tags))))
        label = raw.strip().splitlines()[0].strip() if raw.strip() else ""
        if not label:
            raise ProviderError("provider returned an empty topic label")
        words = label.split()
        return " ".join(words[:6]) if len(words) > 6 else label

    def embed(self, text: str) -> np.ndarray:
        vec = np.asarray(self.provider.embed(text), dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("provider returned a zero embedding")
        if abs(norm - 1.0) > 1e-6:
            vec = vec / norm
        return vec

    def generate_answer(self, question: str,
                        context_chunks: list[tuple[str, str]]) -> QaAnswer:
        """Grounded answer over context chunks; citations are hard-filtered to them."""
        if not context_chunks:
            raise ValueError("no knowledge selected")
        if not question.strip():
            raise ValueError("empty question")
        tpl = self.templates.get("answer")
        context = "\n".join(f"[{cid}] {text.replace(chr(10), ' ')}"
                            for cid, text in context_chunks)
        raw = self._call(tpl.render(question=question.replace("\n", " "), context=context))

        known = {cid for cid, _ in context_chunks}
        cited: list[str] = []
        lines = raw.splitlines()
        answer_lines: list[str] = []
        for line in lines:
            m = re.match(r"\s*SOURCES:\s*(.*)$", line)
            if m:
                for cid in re.split(r"[,\s]+", m.group(1)):
                    cid = cid.strip()
                    if not cid:
                        continue
                    if cid in known:
                        if cid not in cited:
                            cited.append(cid)
                    else:
                        logger.warning("stripped citation of unknown chunk %r", cid)
            else:
                answer_lines.append(line)
        return QaAnswer(text="\n".join(answer_lines).strip(), cited_chunk_ids=cited)

    def synthesize_report(self, numeric_summary: str, pinned_insights: list[str],
                          qa_excerpts: list[str]) -> str:
        """Five-section report grounded in the numeric summary, pins, and QA history."""
        tpl = self.templates.get("report")
        pins = "\n".join(p.replace("\n", " ") for p in pinned_insights) or "(none)"
        qa = "\n".join(q.replace("\n", " ") for q in qa_excerpts) or "(none)"
        raw = self._call(tpl.render(numeric=numeric_summary, pins=pins, qa=qa))
        missing = [s for s in REPORT_SECTIONS if s not in raw]
        if missing:
            raise ProviderError(f"report missing sections: {missing}")
        return raw
