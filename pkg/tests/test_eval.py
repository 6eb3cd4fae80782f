import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatrisk.evaluation import (
    Annotation,
    EvalError,
    accuracy,
    export_chart_data,
    format_table,
    load_annotations,
)


def make(n_good, n_medium, n_bad, field="tag"):
    rows = []
    i = 0
    for judgment, count in (("good", n_good), ("medium", n_medium), ("bad", n_bad)):
        for _ in range(count):
            rows.append(Annotation(f"a{i:03d}", field, judgment, f"ann{i % 8}"))
            i += 1
    return rows


class TestAccuracy:
    def test_tag_fraction_arithmetic(self):
        # oracle: 23 / (23 + 1) = 0.958333...
        results = accuracy(make(23, 1, 0))
        assert results["tag"].good_frac == pytest.approx(23 / 24)
        assert results["tag"].good_frac == pytest.approx(0.9583, abs=1e-4)
        assert results["tag"].n == 24

    def test_all_good(self):
        results = accuracy(make(10, 0, 0, field="time"))
        assert results["time"].good_frac == 1.0

    def test_empty_field_omitted(self):
        results = accuracy(make(5, 0, 0, field="risk"))
        assert "advice" not in results

    def test_fractions_sum_to_one(self):
        results = accuracy(make(7, 5, 3))
        r = results["tag"]
        assert abs(r.good_frac + r.medium_frac + r.bad_frac - 1.0) <= 1e-9

    def test_duplicate_judgment_rejected(self):
        a = Annotation("a1", "tag", "good", "ann1")
        with pytest.raises(EvalError, match="duplicate"):
            accuracy([a, a])

    def test_shuffle_invariant(self):
        rows = make(9, 4, 2) + make(3, 3, 3, field="time")
        base = accuracy(rows)
        rng = random.Random(0)
        for _ in range(5):
            shuffled = rows[:]
            rng.shuffle(shuffled)
            assert accuracy(shuffled) == base

    @given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
    def test_fraction_property(self, g, m, b):
        if g + m + b == 0:
            return
        r = accuracy(make(g, m, b))["tag"]
        assert r.good_frac + r.medium_frac + r.bad_frac == pytest.approx(1.0, abs=1e-9)
        assert r.n == g + m + b

    def test_unknown_field_rejected(self):
        with pytest.raises(EvalError):
            Annotation("a1", "sentiment", "good", "ann1")

    def test_unknown_judgment_rejected(self):
        with pytest.raises(EvalError):
            Annotation("a1", "tag", "excellent", "ann1")


class TestIO:
    def test_load_and_export(self, tmp_path):
        path = tmp_path / "annotations.csv"
        path.write_text(
            "article_id,field,judgment,annotator_id\n"
            "a1,tag,good,e1\n"
            "a1,time,medium,e1\n"
            "a2,tag,bad,e2\n",
            encoding="utf-8")
        rows = load_annotations(path)
        assert len(rows) == 3
        results = accuracy(rows)
        out = tmp_path / "chart.json"
        export_chart_data(results, out)
        chart = json.loads(out.read_text(encoding="utf-8"))
        tag_row = next(r for r in chart if r["field"] == "tag")
        assert tag_row["good"] == 0.5
        assert tag_row["n"] == 2
        table = format_table(results)
        assert "tag" in table and "time" in table
