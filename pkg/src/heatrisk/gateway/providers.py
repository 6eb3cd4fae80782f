"""Text-generation and embedding providers.

The mock provider is a deterministic, rule-based stand-in used for all
offline tests: it reads the same rendered prompts a hosted model would and
answers from fixed lexical rules, so identical inputs give bit-identical
outputs on every platform.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from typing import Protocol

import numpy as np

from ..config import ProviderConfig


class ProviderError(RuntimeError):
    """Provider unreachable or returned an unusable response."""


class Provider(Protocol):
    def complete(self, prompt: str) -> str: ...
    def embed(self, text: str) -> np.ndarray: ...


# ---------------------------------------------------------------------------
# Mock provider
# ---------------------------------------------------------------------------

HEAT_LEXICON = (
    "heatwave", "heat wave", "high temperature", "extreme heat", "heatstroke",
    "heat stroke", "hot weather", "scorching", "sweltering", "drought",
    "record heat",
)

_MONTHS = {
    name: i + 1 for i, name in enumerate(
        ["january", "february", "march", "april", "may", "june", "july",
         "august", "september", "october", "november", "december"])
}
_MONTH_ALT = "|".join(_MONTHS)

_ISO_DATE_RE = re.compile(r"\b(\d{4})-(\d{1,2})-(\d{1,2})\b")
_MDY_RE = re.compile(rf"\b({_MONTH_ALT})\s+(\d{{1,2}}),\s*(\d{{4}})\b", re.IGNORECASE)
_MD_RE = re.compile(rf"\b({_MONTH_ALT})\s+(\d{{1,2}})\b", re.IGNORECASE)
_MY_RE = re.compile(rf"\b({_MONTH_ALT})\s+(\d{{4}})\b", re.IGNORECASE)

_TEMP_RE = re.compile(r"(-?\d+(?:\.\d+)?)\s*(?:°\s?C|degrees Celsius)", re.IGNORECASE)
_DEATHS_RE = re.compile(r"(\d+)\s+(?:deaths?|dead|fatalities|died)", re.IGNORECASE)
_INJURIES_RE = re.compile(r"(\d+)\s+(?:injur(?:ed|ies)|hospitali[sz]ed)", re.IGNORECASE)
_IMPACTED_RE = re.compile(r"(\d+)\s+(?:affected|impacted|evacuated)", re.IGNORECASE)
_TAGS_LINE_RE = re.compile(r"^tags:\s*(.+)$", re.IGNORECASE | re.MULTILINE)

_RISK_CUES = ("risk", "warning", "alert", "danger")
_CONSEQUENCE_CUES = ("resulted in", "led to", "killed", "damage", "disrupt",
                     "strain", "loss", "left ")
_REASON_CUES = ("because", "due to", "attributed to", "as a result of", "driven by")
_ADVICE_CUES = ("should", "advised", "urged", "recommend", "avoid", "stay hydrated")

_STOPWORDS = frozenset(
    "the a an and or of in on at to for is are was were be been what which how "
    "when where who why did do does this that these those with from as by it its "
    "their there have has had not".split()
)


def content_tokens(text: str) -> set[str]:
    return {t for t in re.findall(r"[a-z0-9]+", text.casefold())
            if len(t) >= 3 and t not in _STOPWORDS}


def _first_sentence_with(sentences: list[str], cues: tuple[str, ...]) -> str:
    for s in sentences:
        lowered = s.casefold()
        if any(c in lowered for c in cues):
            return s.strip()
    return ""


def split_sentences(text: str) -> list[str]:
    return [s for s in re.split(r"(?<=[.!?])\s+", text) if s.strip()]


class MockProvider:
    """Deterministic rule-based provider; dispatches on the prompt's TASK line."""

    def __init__(self, known_locations: list[str] | None = None, embed_dim: int = 256):
        if embed_dim < 1:
            raise ValueError("embed_dim must be >= 1")
        self.known_locations = sorted(known_locations or [], key=len, reverse=True)
        self.embed_dim = embed_dim

    # -- completion ---------------------------------------------------------

    def complete(self, prompt: str) -> str:
        task = prompt.splitlines()[0].removeprefix("TASK: ").strip() if prompt else ""
        if task == "extract-structural-v1":
            return self._extract(prompt)
        if task == "relevance-v1":
            return self._relevance(prompt)
        if task == "name-cluster-v1":
            return self._name_cluster(prompt)
        if task == "grounded-answer-v1":
            return self._answer(prompt)
        if task == "synthesize-report-v1":
            return self._report(prompt)
        raise ProviderError(f"mock cannot serve task {task!r}")

    @staticmethod
    def _section(prompt: str, start: str, end: str | None) -> str:
        idx = prompt.find(start)
        if idx < 0:
            raise ProviderError(f"prompt missing {start!r}")
        chunk = prompt[idx + len(start):]
        if end is not None:
            stop = chunk.find(end)
            if stop >= 0:
                chunk = chunk[:stop]
        return chunk.strip("\n")

    @staticmethod
    def _line_value(prompt: str, key: str) -> str:
        for line in prompt.splitlines():
            if line.startswith(key):
                return line[len(key):].strip()
        return ""

    def _extract(self, prompt: str) -> str:
        title = self._line_value(prompt, "TITLE:")
        body = self._section(prompt, "BODY:\n", "\nEND BODY")
        text = f"{title}\n{body}"
        lowered = text.casefold()

        is_heat = any(cue in lowered for cue in HEAT_LEXICON)

        location = ""
        best_pos = len(lowered) + 1
        for name in self.known_locations:
            pos = lowered.find(name.casefold())
            if pos >= 0 and pos < best_pos:
                best_pos = pos
                location = name

        event: dict[str, int | None] = {"year": None, "month": None, "day": None}
        m = _ISO_DATE_RE.search(body)
        if m:
            event = {"year": int(m.group(1)), "month": int(m.group(2)), "day": int(m.group(3))}
        elif (m := _MDY_RE.search(body)):
            event = {"year": int(m.group(3)), "month": _MONTHS[m.group(1).casefold()],
                     "day": int(m.group(2))}
        elif (m := _MD_RE.search(body)):
            event = {"year": None, "month": _MONTHS[m.group(1).casefold()],
                     "day": int(m.group(2))}
        elif (m := _MY_RE.search(body)):
            event = {"year": int(m.group(2)), "month": _MONTHS[m.group(1).casefold()],
                     "day": None}

        temp_m = _TEMP_RE.search(text)
        temperature = float(temp_m.group(1)) if temp_m else None

        def first_int(rx: re.Pattern) -> int | None:
            mm = rx.search(text)
            return int(mm.group(1)) if mm else None

        sentences = split_sentences(body)
        tags = self._derive_tags(title, body, lowered)

        obj = {
            "is_heat_risk": is_heat,
            "location": location,
            "event_date": event,
            "risk": _first_sentence_with(sentences, _RISK_CUES),
            "consequence": _first_sentence_with(sentences, _CONSEQUENCE_CUES),
            "reason": _first_sentence_with(sentences, _REASON_CUES),
            "temperature": temperature,
            "casualty": {
                "deaths": first_int(_DEATHS_RE),
                "injuries": first_int(_INJURIES_RE),
                "impacted": first_int(_IMPACTED_RE),
            },
            "advice": _first_sentence_with(sentences, _ADVICE_CUES),
            "tags": tags,
        }
        return json.dumps(obj, sort_keys=True, ensure_ascii=False)

    def _derive_tags(self, title: str, body: str, lowered: str) -> list[str]:
        m = _TAGS_LINE_RE.search(body)
        if m:
            parts = re.split(r"[;,]", m.group(1))
            return [p.strip() for p in parts if p.strip()]
        hits = sorted((lowered.find(cue), cue) for cue in HEAT_LEXICON if cue in lowered)
        found = [cue for _, cue in hits]
        for word in re.findall(r"[a-z]{4,}", title.casefold()):
            if word not in _STOPWORDS and word not in found:
                found.append(word)
        return found[:3]

    def _relevance(self, prompt: str) -> str:
        is_heat = self._line_value(prompt, "IS_HEAT_RISK:").casefold() in ("true", "yes")
        return "yes" if is_heat else "no"

    def _name_cluster(self, prompt: str) -> str:
        block = self._section(prompt, "TAGS:\n", "\nEND TAGS")
        tags = [line.strip().removeprefix("- ") for line in block.splitlines() if line.strip()]
        if not tags:
            raise ProviderError("no tags to name")
        if len(tags) == 1:
            return tags[0]
        return "topic: " + min(tags)

    def _answer(self, prompt: str) -> str:
        question = self._line_value(prompt, "QUESTION:")
        block = self._section(prompt, "CONTEXT:\n", "\nEND CONTEXT")
        chunks: list[tuple[str, str]] = []
        for line in block.splitlines():
            m = re.match(r"\[([^\]]+)\]\s*(.*)", line)
            if m:
                chunks.append((m.group(1), m.group(2)))
        q_tokens = content_tokens(question)
        cited = [(cid, text) for cid, text in chunks
                 if q_tokens & content_tokens(text)]
        if not cited:
            return "not found in selected news\nSOURCES:"
        answer = " ".join(split_sentences(text)[0] for _, text in cited if text.strip())
        return f"{answer}\nSOURCES: {', '.join(cid for cid, _ in cited)}"

    def _report(self, prompt: str) -> str:
        numeric = self._section(prompt, "NUMERIC:\n", "\nEND NUMERIC")
        pins_block = self._section(prompt, "PINS:\n", "\nEND PINS")
        qa_block = self._section(prompt, "QA:\n", "\nEND QA")
        pins = [p for p in pins_block.splitlines() if p.strip() and p.strip() != "(none)"]
        qa = [q for q in qa_block.splitlines() if q.strip() and q.strip() != "(none)"]

        def advice_lines(keyword: str, fallback: str) -> str:
            picked = [p for p in pins if keyword in p.casefold()]
            return "\n".join(picked) if picked else fallback

        sections = [
            "# Heat risk report",
            "## Meteorological conditions",
            numeric if numeric.strip() else "No numeric summary available.",
            "## Risk scenarios",
            "\n".join(pins) if pins else "No pinned insights.",
            "## Historical events",
            "\n".join(qa) if qa else "No question-answer excerpts.",
            "## Advice for government",
            advice_lines("government",
                         "Review contingency plans against the conditions above."),
            "## Advice for citizens",
            advice_lines("citizen",
                         "Follow official heat guidance and check on vulnerable people."),
        ]
        return "\n".join(sections) + "\n"

    # -- embeddings ---------------------------------------------------------

    def embed(self, text: str) -> np.ndarray:
        """Character trigrams hashed into fixed buckets, then L2-normalized."""
        if not text:
            raise ValueError("cannot embed empty text")
        normalized = text.casefold()
        grams = ([normalized] if len(normalized) < 3 else
                 [normalized[i:i + 3] for i in range(len(normalized) - 2)])
        vec = np.zeros(self.embed_dim, dtype=np.float64)
        for g in grams:
            bucket = int.from_bytes(hashlib.md5(g.encode("utf-8")).digest()[:8], "big")
            vec[bucket % self.embed_dim] += 1.0
        return vec / np.linalg.norm(vec)

    def embed_buckets(self, text: str) -> set[int]:
        """Bucket indices a text occupies; exposed so tests can reason about overlap."""
        return {i for i, v in enumerate(self.embed(text)) if v > 0}


# ---------------------------------------------------------------------------
# HTTP provider
# ---------------------------------------------------------------------------

class HttpProvider:
    """JSON-over-HTTP provider: POST {model, prompt, temperature: 0}.

    The credential is read from the environment variable named in the config
    and sent as a bearer token; it is never logged.
    """

    def __init__(self, config: ProviderConfig):
        import httpx

        self.config = config
        self._client = httpx.Client(timeout=config.timeout_s)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.credential_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str) -> str:
        import httpx

        try:
            resp = self._client.post(
                self.config.endpoint,
                json={"model": self.config.model, "prompt": prompt, "temperature": 0},
                headers=self._headers(),
            )
        except httpx.TimeoutException as exc:
            raise TimeoutError(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise ProviderError(f"provider request failed: {type(exc).__name__}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"provider returned status {resp.status_code}")
        payload = resp.json()
        if "text" not in payload:
            raise ProviderError("provider response missing 'text'")
        return payload["text"]

    def embed(self, text: str) -> np.ndarray:
        import httpx

        try:
            resp = self._client.post(
                self.config.endpoint.rstrip("/") + "/embed",
                json={"model": self.config.model, "input": text},
                headers=self._headers(),
            )
        except httpx.HTTPError as exc:
            raise ProviderError(f"embedding request failed: {type(exc).__name__}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"provider returned status {resp.status_code}")
        vec = np.asarray(resp.json()["embedding"], dtype=np.float64)
        return vec / np.linalg.norm(vec)
