"""Per-field extraction accuracy from human annotations.

Annotators judge each extracted field good / medium (cannot decide) / bad;
accuracy for a field is its good fraction. The harness accepts any overlap
pattern between annotators and reports n per field.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

FIELDS = ("risk", "consequence", "reason", "temperature", "casualty",
          "advice", "tag", "time")
JUDGMENTS = ("good", "medium", "bad")


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    article_id: str
    field: str
    judgment: str
    annotator_id: str

    def __post_init__(self) -> None:
        if self.field not in FIELDS:
            raise EvalError(f"unknown field {self.field!r}")
        if self.judgment not in JUDGMENTS:
            raise EvalError(f"unknown judgment {self.judgment!r}")


@dataclass(frozen=True)
class FieldAccuracy:
    field: str
    good_frac: float
    medium_frac: float
    bad_frac: float
    n: int


def load_annotations(path: str | Path) -> list[Annotation]:
    """Delimited file with header article_id,field,judgment,annotator_id."""
    rows: list[Annotation] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(Annotation(
                article_id=row["article_id"].strip(),
                field=row["field"].strip().casefold(),
                judgment=row["judgment"].strip().casefold(),
                annotator_id=row["annotator_id"].strip(),
            ))
    return rows


def accuracy(annotations: list[Annotation]) -> dict[str, FieldAccuracy]:
    """Good/medium/bad fractions per field; duplicate judgments are invalid."""
    seen: set[tuple[str, str, str]] = set()
    counts: dict[str, dict[str, int]] = {}
    for a in annotations:
        key = (a.article_id, a.field, a.annotator_id)
        if key in seen:
            raise EvalError(f"duplicate judgment for {key}")
        seen.add(key)
        field_counts = counts.setdefault(a.field, {j: 0 for j in JUDGMENTS})
        field_counts[a.judgment] += 1

    out: dict[str, FieldAccuracy] = {}
    for f in FIELDS:
        if f not in counts:
            logger.warning("field %r has no annotations; omitted", f)
            continue
        c = counts[f]
        n = sum(c.values())
        out[f] = FieldAccuracy(
            field=f,
            good_frac=c["good"] / n,
            medium_frac=c["medium"] / n,
            bad_frac=c["bad"] / n,
            n=n,
        )
    return out


def export_chart_data(results: dict[str, FieldAccuracy], path: str | Path) -> None:
    """Stacked-bar chart data, one row per field, fractions plus n."""
    rows = [
        {"field": r.field, "good": r.good_frac, "medium": r.medium_frac,
         "bad": r.bad_frac, "n": r.n}
        for r in results.values()
    ]
    Path(path).write_text(json.dumps(rows, sort_keys=True, indent=1), encoding="utf-8")


def format_table(results: dict[str, FieldAccuracy]) -> str:
    lines = [f"{'field':<12} {'good':>7} {'medium':>7} {'bad':>7} {'n':>5}"]
    for r in results.values():
        lines.append(f"{r.field:<12} {r.good_frac:>6.1%} {r.medium_frac:>6.1%} "
                     f"{r.bad_frac:>6.1%} {r.n:>5d}")
    return "\n".join(lines)
