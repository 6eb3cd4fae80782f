"""Retrieval-augmented answering over an expert-selected article scope.

Bodies are split on sentence boundaries into chunks whose ordered
concatenation reproduces the original text exactly, so citations always point
at verbatim source passages. Answer references are guaranteed to stay inside
the selected scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .gateway import Gateway

NUMERIC_SCOPE_ID = "numeric"

_SENTENCE_RE = re.compile(r".*?(?:[.!?。！?]+\s*|$)", re.DOTALL)


class RagError(ValueError):
    pass


@dataclass(frozen=True)
class Chunk:
    article_id: str
    chunk_index: int
    text: str

    @property
    def chunk_id(self) -> str:
        return f"{self.article_id}#{self.chunk_index}"


@dataclass
class KnowledgeIndex:
    scope: frozenset[str]
    chunks: list[Chunk] = field(default_factory=list)
    embeddings: np.ndarray | None = None


@dataclass
class Answer:
    text: str
    references: list[str]


def split_chunks(body: str, max_chars: int) -> list[str]:
    """Greedy sentence packing into chunks of <= max_chars whose concatenation
    equals the body; a single oversized sentence is hard-split."""
    if max_chars < 1:
        raise RagError("max_chars must be >= 1")
    sentences = [m.group(0) for m in _SENTENCE_RE.finditer(body) if m.group(0)]
    pieces: list[str] = []
    for s in sentences:
        while len(s) > max_chars:
            pieces.append(s[:max_chars])
            s = s[max_chars:]
        if s:
            pieces.append(s)
    chunks: list[str] = []
    current = ""
    for piece in pieces:
        if current and len(current) + len(piece) > max_chars:
            chunks.append(current)
            current = piece
        else:
            current += piece
    if current:
        chunks.append(current)
    return chunks


def build_index(article_ids: list[str], store, gateway: Gateway,
                max_chunk_chars: int = 500,
                numeric_summary: str | None = None) -> KnowledgeIndex:
    """Chunk and embed the selected articles; optionally inject the numeric
    summary as a synthetic chunk so answers can cite it."""
    if not article_ids:
        raise RagError("empty article selection")
    scope = set()
    chunks: list[Chunk] = []
    for aid in sorted(article_ids):
        article = store.get(aid)
        scope.add(aid)
        for i, text in enumerate(split_chunks(article.body, max_chunk_chars)):
            chunks.append(Chunk(article_id=aid, chunk_index=i, text=text))
    if numeric_summary:
        scope.add(NUMERIC_SCOPE_ID)
        for i, text in enumerate(split_chunks(numeric_summary, max_chunk_chars)):
            chunks.append(Chunk(article_id=NUMERIC_SCOPE_ID, chunk_index=i, text=text))
    if not chunks:
        raise RagError("selected articles have no text")
    embeddings = np.stack([gateway.embed(c.text) for c in chunks])
    return KnowledgeIndex(scope=frozenset(scope), chunks=chunks, embeddings=embeddings)


def retrieve(index: KnowledgeIndex, question: str, gateway: Gateway,
             k: int = 5) -> list[Chunk]:
    """Top-k chunks by cosine similarity; ties break on (article_id, chunk_index)."""
    if k < 1:
        raise RagError("k must be >= 1")
    if not question.strip():
        raise RagError("empty question")
    qvec = gateway.embed(question)
    scores = index.embeddings @ qvec
    order = sorted(range(len(index.chunks)),
                   key=lambda i: (-float(scores[i]), index.chunks[i].article_id,
                                  index.chunks[i].chunk_index))
    return [index.chunks[i] for i in order[:k]]


def answer(index: KnowledgeIndex, question: str, gateway: Gateway, k: int = 5) -> Answer:
    """Grounded answer whose references always lie inside the index scope."""
    if not index.chunks:
        raise RagError("empty knowledge scope")
    top = retrieve(index, question, gateway, k=k)
    qa = gateway.generate_answer(question, [(c.chunk_id, c.text) for c in top])
    references: list[str] = []
    for cid in qa.cited_chunk_ids:
        aid = cid.rsplit("#", 1)[0]
        if aid in index.scope and aid not in references:
            references.append(aid)
    return Answer(text=qa.text, references=references)
