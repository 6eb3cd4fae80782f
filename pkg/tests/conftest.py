import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from heatrisk.climate import Climatology, DailySeries, DayEntry
from heatrisk.config import ProviderConfig
from heatrisk.gateway import Gateway, MockProvider

FIXTURES = Path(__file__).parent.parent / "data" / "fixtures"

CITY_NAMES = ["Hong Kong", "Beijing", "Shanghai"]


def make_series(values, start=date(2020, 1, 1), city_id="test", source="observed"):
    """Daily series from a list of temps; None marks a skipped (missing) day."""
    entries = []
    day = start
    for v in values:
        if v is not None:
            entries.append(DayEntry(day, float(v), source, 24))
        day += timedelta(days=1)
    return DailySeries(city_id=city_id, entries=entries)


def make_climatology(values, city_id="test", start=date(2020, 1, 1)):
    values = list(values)
    end = start + timedelta(days=len(values) - 1)
    return Climatology(
        city_id=city_id,
        window_start=start,
        window_end=end,
        sorted_means=np.sort(np.asarray(values, dtype=float)),
        n_years=len(values) / 365.25,
    )


@pytest.fixture
def mock_gateway():
    provider = MockProvider(known_locations=CITY_NAMES, embed_dim=256)
    return Gateway(provider, ProviderConfig(), backoff_base=0.0, seed=0)


@pytest.fixture(scope="session")
def fixture_corpus_path():
    path = FIXTURES / "corpus.jsonl"
    if not path.exists():
        pytest.skip("fixture corpus not generated")
    return path


@pytest.fixture(scope="session")
def fixture_manifest():
    path = FIXTURES / "manifest.json"
    if not path.exists():
        pytest.skip("fixture manifest not generated")
    return json.loads(path.read_text(encoding="utf-8"))
