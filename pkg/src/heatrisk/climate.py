"""Climate indices from gridded hourly temperature data.

Daily means are the primary exposure variable: the mean over the 24 UTC hours
of a day, pooled across all grid cells of a city. Percentiles and return
periods are computed empirically against a multi-year reference distribution
of daily means, with no distribution fitting. Heatwave events are maximal
runs of consecutive days above a high percentile threshold.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

TEMP_MIN_C = -90.0
TEMP_MAX_C = 60.0
MIN_HOURS_PER_DAY = 18      # days with fewer UTC hours are flagged missing
MAX_FORECAST_DAYS = 14
DAYS_PER_YEAR = 365.25

# Percentile breakpoints for the temperature/percentile band table. 97.5 is
# included so the heatwave threshold is always a band edge.
BAND_BREAKPOINTS = (0.0, 10.0, 25.0, 50.0, 75.0, 90.0, 97.5, 100.0)

# Cold-to-hot band palette (blue through green to red), one entry per band.
BAND_COLORS = (
    "#3b4cc0", "#6f91f2", "#8db0fe", "#76c893", "#f7b89c", "#e36b54", "#b40426",
)


class ClimateError(ValueError):
    """Contract violation in climate inputs or windows."""


Cell = tuple[float, float]   # (lat, lon)


@dataclass(frozen=True)
class HourlyRecord:
    timestamp: datetime        # whole UTC hour
    cell: Cell
    temperature: float         # degC


@dataclass(frozen=True)
class DayEntry:
    day: date
    mean_temp: float
    source: str                # "observed" | "forecast"
    hours_used: int


@dataclass
class DailySeries:
    """Per-city daily mean temperatures, observed first, then up to 14 forecast days."""

    city_id: str
    entries: list[DayEntry] = field(default_factory=list)
    missing_dates: list[date] = field(default_factory=list)
    rejected_records: int = 0

    def observed(self) -> list[DayEntry]:
        return [e for e in self.entries if e.source == "observed"]

    def forecast(self) -> list[DayEntry]:
        return [e for e in self.entries if e.source == "forecast"]

    def last_observed_date(self) -> date | None:
        obs = self.observed()
        return obs[-1].day if obs else None

    def validate(self) -> None:
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.day <= prev.day:
                raise ClimateError(f"dates not strictly increasing at {cur.day}")
            if prev.source == "forecast" and cur.source == "observed":
                raise ClimateError("forecast entries must follow all observed entries")
        if len(self.forecast()) > MAX_FORECAST_DAYS:
            raise ClimateError(f"more than {MAX_FORECAST_DAYS} forecast days")


@dataclass
class Climatology:
    """Sorted reference distribution of observed daily means for one city."""

    city_id: str
    window_start: date
    window_end: date
    sorted_means: np.ndarray   # ascending
    n_years: float             # fractional years covered by the window

    @property
    def n_days(self) -> int:
        return int(self.sorted_means.size)


@dataclass(frozen=True)
class HeatwaveEvent:
    city_id: str
    start_date: date
    end_date: date
    peak_temp: float
    threshold_percentile: float = 97.5

    @property
    def duration(self) -> int:
        return (self.end_date - self.start_date).days + 1


@dataclass
class TemperatureHistogram:
    bin_edges: np.ndarray      # uniform, strictly increasing
    counts: np.ndarray         # non-negative ints, len = len(bin_edges) - 1


@dataclass(frozen=True)
class GlyphBand:
    percentile_lo: float
    percentile_hi: float
    temp_lo: float
    temp_hi: float
    color_band_index: int


@dataclass
class ThermoglyphTable:
    """Bands linking percentile ranges to temperature ranges on two parallel axes."""

    bands: list[GlyphBand]

    def band_from_percentile(self, p: float) -> int:
        if not 0.0 <= p <= 100.0:
            raise ClimateError(f"percentile {p} outside [0, 100]")
        for b in self.bands:
            if b.percentile_lo <= p < b.percentile_hi:
                return b.color_band_index
        return self.bands[-1].color_band_index    # p == 100

    def band_from_temperature(self, t: float) -> int:
        # Highest band whose lower temperature edge does not exceed t. For any
        # observed temperature this agrees with the percentile-side lookup.
        idx = 0
        for b in self.bands:
            if t >= b.temp_lo:
                idx = b.color_band_index
        return idx


@dataclass
class ReturnPeriod:
    """Empirical return period in years; unbounded when nothing in the record exceeds t."""

    years: float | None
    min_years: float | None = None

    @property
    def bounded(self) -> bool:
        return self.years is not None

    def display(self) -> str:
        if self.bounded:
            return f"{self.years:.4g} years"
        return f"> {self.min_years:g} years"


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def compute_daily_means(hourly: list[HourlyRecord], city_cells: set[Cell],
                        city_id: str = "") -> DailySeries:
    """Pool the hourly values of all city cells into one daily mean per date.

    A date observed for fewer than 18 of its 24 UTC hours is flagged missing
    and excluded from the series. Records whose timestamp is not aligned to a
    whole hour are rejected (counted, not fatal).
    """
    if not city_cells:
        raise ClimateError("no city cells")
    if not hourly:
        raise ClimateError("no data")

    sums: dict[date, float] = {}
    counts: dict[date, int] = {}
    hours: dict[date, set[int]] = {}
    rejected = 0
    for rec in hourly:
        if rec.timestamp.minute or rec.timestamp.second or rec.timestamp.microsecond:
            rejected += 1
            continue
        if rec.cell not in city_cells:
            continue
        d = rec.timestamp.date()
        sums[d] = sums.get(d, 0.0) + rec.temperature
        counts[d] = counts.get(d, 0) + 1
        hours.setdefault(d, set()).add(rec.timestamp.hour)
    if rejected:
        logger.warning("rejected %d non-hour-aligned records", rejected)
    if not sums:
        raise ClimateError("no data")

    entries: list[DayEntry] = []
    missing: list[date] = []
    for d in sorted(sums):
        used = len(hours[d])
        if used < MIN_HOURS_PER_DAY:
            missing.append(d)
            continue
        entries.append(DayEntry(d, sums[d] / counts[d], "observed", used))
    series = DailySeries(city_id=city_id, entries=entries,
                         missing_dates=missing, rejected_records=rejected)
    series.validate()
    return series


def build_climatology(series: DailySeries, window: tuple[date, date]) -> Climatology:
    """Sorted reference distribution over the observed daily means inside the window."""
    start, end = window
    if end < start:
        raise ClimateError("window end precedes start")
    means = [e.mean_temp for e in series.observed() if start <= e.day <= end]
    if len(means) < 365:
        raise ClimateError("insufficient reference window")
    calendar_days = (end - start).days + 1
    return Climatology(
        city_id=series.city_id,
        window_start=start,
        window_end=end,
        sorted_means=np.sort(np.asarray(means, dtype=float)),
        n_years=calendar_days / DAYS_PER_YEAR,
    )


def percentile_of(clim: Climatology, t: float) -> float:
    """Empirical percentile: 100 * (count of reference values <= t) / n_days."""
    count = int(np.searchsorted(clim.sorted_means, t, side="right"))
    return 100.0 * count / clim.n_days


def inverse_cdf(clim: Climatology, pct: float) -> float:
    """Smallest observed value whose empirical percentile is >= pct."""
    if not 0.0 <= pct <= 100.0:
        raise ClimateError(f"percentile {pct} outside [0, 100]")
    idx = math.ceil(clim.n_days * pct / 100.0) - 1
    idx = min(max(idx, 0), clim.n_days - 1)
    return float(clim.sorted_means[idx])


def return_period(clim: Climatology, t: float) -> ReturnPeriod:
    """Average interval in years between exceedances of t in the reference record."""
    count_le = int(np.searchsorted(clim.sorted_means, t, side="right"))
    exceed = clim.n_days - count_le
    if exceed == 0:
        return ReturnPeriod(years=None, min_years=clim.n_years)
    return ReturnPeriod(years=clim.n_years / exceed)


def detect_heatwaves(series: DailySeries, clim: Climatology,
                     pct: float = 97.5, min_run: int = 4) -> list[HeatwaveEvent]:
    """Maximal runs of >= min_run consecutive days above the pct threshold.

    Consecutive means calendar-adjacent: any gap in the series (a missing or
    unobserved day) terminates a run.
    """
    if not 0.0 < pct < 100.0:
        raise ClimateError("threshold percentile must be in (0, 100)")
    if min_run < 1:
        raise ClimateError("min_run must be >= 1")
    threshold = inverse_cdf(clim, pct)

    events: list[HeatwaveEvent] = []
    run: list[DayEntry] = []

    def flush() -> None:
        if len(run) >= min_run:
            events.append(HeatwaveEvent(
                city_id=series.city_id,
                start_date=run[0].day,
                end_date=run[-1].day,
                peak_temp=max(e.mean_temp for e in run),
                threshold_percentile=pct,
            ))
        run.clear()

    for entry in series.entries:
        if entry.mean_temp > threshold:
            if run and entry.day != run[-1].day + timedelta(days=1):
                flush()
            run.append(entry)
        else:
            flush()
    flush()
    return events


def histogram(series: DailySeries, bin_width: float = 1.0) -> TemperatureHistogram:
    """Counts of daily means over uniform half-open bins [lo, lo + bin_width)."""
    values = np.array([e.mean_temp for e in series.entries], dtype=float)
    if values.size == 0:
        raise ClimateError("empty series")
    if bin_width <= 0:
        raise ClimateError("bin width must be positive")
    lo = math.floor(values.min() / bin_width) * bin_width
    n_bins = int(math.floor(values.max() / bin_width)) - int(math.floor(values.min() / bin_width)) + 1
    edges = lo + bin_width * np.arange(n_bins + 1)
    idx = np.floor((values - lo) / bin_width).astype(int)
    counts = np.bincount(idx, minlength=n_bins)
    return TemperatureHistogram(bin_edges=edges, counts=counts)


def thermoglyph_table(clim: Climatology,
                      breakpoints: tuple[float, ...] = BAND_BREAKPOINTS) -> ThermoglyphTable:
    """Band table anchored at fixed percentile breakpoints, temps via inverse CDF."""
    if len(breakpoints) < 2:
        raise ClimateError("need at least two breakpoints")
    if any(not 0.0 <= b <= 100.0 for b in breakpoints):
        raise ClimateError("breakpoints outside [0, 100]")
    if breakpoints[0] != 0.0 or breakpoints[-1] != 100.0:
        raise ClimateError("breakpoints must span [0, 100]")
    if any(b1 <= b0 for b0, b1 in zip(breakpoints, breakpoints[1:])):
        raise ClimateError("breakpoints must be strictly increasing")

    temps = [inverse_cdf(clim, b) for b in breakpoints]
    bands = [
        GlyphBand(
            percentile_lo=breakpoints[i],
            percentile_hi=breakpoints[i + 1],
            temp_lo=temps[i],
            temp_hi=temps[i + 1],
            color_band_index=i,
        )
        for i in range(len(breakpoints) - 1)
    ]
    return ThermoglyphTable(bands=bands)


def citywide_average(grid_field: dict[Cell, float], city_cells: set[Cell]) -> float:
    """Arithmetic mean of a per-cell field over the city's cells."""
    values = [grid_field[c] for c in city_cells if c in grid_field]
    if not values:
        raise ClimateError("no cells with data for this city/date")
    return sum(values) / len(values)


def ingest_forecast(rows: list[tuple[date, float]], series: DailySeries) -> DailySeries:
    """Append daily forecast rows to an observed series.

    Rows must be contiguous daily dates starting the day after the last
    observed date, at most 14 of them. Forecast entries never enter a
    Climatology.
    """
    if len(rows) > MAX_FORECAST_DAYS:
        raise ClimateError(f"forecast exceeds {MAX_FORECAST_DAYS} days")
    last = series.last_observed_date()
    if last is None:
        raise ClimateError("no observed data to anchor forecast")
    expected = last + timedelta(days=1)
    for d, temp in rows:
        if d <= last:
            raise ClimateError(f"forecast date {d} overlaps observed data")
        if d != expected:
            raise ClimateError(f"forecast dates not contiguous at {d}")
        series.entries.append(DayEntry(d, temp, "forecast", 24))
        expected = d + timedelta(days=1)
    series.validate()
    return series


# ---------------------------------------------------------------------------
# File ingestion and the dataset facade
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CityDef:
    city_id: str
    name: str
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    aliases: tuple[str, ...] = ()

    def contains(self, cell: Cell) -> bool:
        lat, lon = cell
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max

    def centroid(self) -> tuple[float, float]:
        return ((self.lat_min + self.lat_max) / 2, (self.lon_min + self.lon_max) / 2)

    def all_names(self) -> tuple[str, ...]:
        return (self.name, *self.aliases)


def load_cities(path: str | Path) -> dict[str, CityDef]:
    """City definition file: city_id, name, lat_min, lat_max, lon_min, lon_max[, aliases]."""
    cities: dict[str, CityDef] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            aliases = tuple(a.strip() for a in row.get("aliases", "").split(";") if a.strip())
            c = CityDef(
                city_id=row["city_id"].strip(),
                name=row["name"].strip(),
                lat_min=float(row["lat_min"]), lat_max=float(row["lat_max"]),
                lon_min=float(row["lon_min"]), lon_max=float(row["lon_max"]),
                aliases=aliases,
            )
            cities[c.city_id] = c
    if not cities:
        raise ClimateError("empty city definition file")
    return cities


def _parse_climate_row(row: dict, line_no: int) -> tuple[datetime, Cell, float]:
    ts = datetime.fromisoformat(row["timestamp"].strip())
    cell = (float(row["lat"]), float(row["lon"]))
    temp = float(row["temperature"])
    unit = row.get("unit", "C").strip().upper()
    if unit == "K":
        temp -= 273.15
    elif unit != "C":
        raise ClimateError(f"line {line_no}: unknown unit {unit!r}")
    if not TEMP_MIN_C <= temp <= TEMP_MAX_C:
        raise ClimateError(f"line {line_no}: temperature {temp} outside plausible range")
    return ts, cell, temp


class ClimateDataset:
    """Per-cell daily means plus per-city series/climatologies derived from them.

    Ingests the delimited climate format (timestamp, lat, lon, temperature,
    unit). ``resolution="hourly"`` applies the 24-hour pooling and the >= 18
    hour coverage rule; ``resolution="daily"`` takes each row as a finished
    per-cell daily mean.
    """

    def __init__(self, cities: dict[str, CityDef]):
        self.cities = cities
        # cell -> {date: (mean_temp, hours_used)}
        self.cell_daily: dict[Cell, dict[date, tuple[float, int]]] = {}
        self._series: dict[str, DailySeries] = {}
        self._clim: dict[str, Climatology] = {}
        self._cell_clim: dict[Cell, Climatology] = {}

    # -- ingestion ----------------------------------------------------------

    def ingest_file(self, path: str | Path, resolution: str = "hourly") -> int:
        if resolution not in ("hourly", "daily"):
            raise ClimateError(f"unknown resolution {resolution!r}")
        rows = 0
        if resolution == "hourly":
            records: list[HourlyRecord] = []
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                if reader.fieldnames is None:
                    raise ClimateError("missing header row")
                for i, row in enumerate(reader, start=2):
                    ts, cell, temp = _parse_climate_row(row, i)
                    records.append(HourlyRecord(ts, cell, temp))
                    rows += 1
            self._ingest_hourly(records)
        else:
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                if reader.fieldnames is None:
                    raise ClimateError("missing header row")
                for i, row in enumerate(reader, start=2):
                    ts, cell, temp = _parse_climate_row(row, i)
                    self.cell_daily.setdefault(cell, {})[ts.date()] = (temp, 24)
                    rows += 1
        self._series.clear()
        self._clim.clear()
        self._cell_clim.clear()
        return rows

    def _ingest_hourly(self, records: list[HourlyRecord]) -> None:
        by_cell: dict[Cell, dict[date, tuple[float, int, set[int]]]] = {}
        rejected = 0
        for rec in records:
            if rec.timestamp.minute or rec.timestamp.second or rec.timestamp.microsecond:
                rejected += 1
                continue
            d = rec.timestamp.date()
            days = by_cell.setdefault(rec.cell, {})
            total, n, hrs = days.get(d, (0.0, 0, set()))
            hrs = set(hrs)
            hrs.add(rec.timestamp.hour)
            days[d] = (total + rec.temperature, n + 1, hrs)
        if rejected:
            logger.warning("rejected %d non-hour-aligned records", rejected)
        for cell, days in by_cell.items():
            target = self.cell_daily.setdefault(cell, {})
            for d, (total, n, hrs) in days.items():
                if len(hrs) < MIN_HOURS_PER_DAY:
                    continue
                target[d] = (total / n, len(hrs))

    def ingest_forecast_file(self, path: str | Path, city_id: str) -> DailySeries:
        series = self.city_series(city_id)
        city = self._city(city_id)
        rows: list[tuple[date, float]] = []
        with open(path, newline="", encoding="utf-8") as fh:
            for i, row in enumerate(csv.DictReader(fh), start=2):
                ts, cell, temp = _parse_climate_row(row, i)
                if city.contains(cell):
                    rows.append((ts.date(), temp))
        if not rows:
            raise ClimateError(f"forecast file has no rows inside city {city_id!r}")
        # one value per date (cities may ship one row per cell): average them
        by_date: dict[date, list[float]] = {}
        for d, t in rows:
            by_date.setdefault(d, []).append(t)
        daily = [(d, sum(v) / len(v)) for d, v in sorted(by_date.items())]
        return ingest_forecast(daily, series)

    # -- derived views ------------------------------------------------------

    def city_cells(self, city_id: str) -> set[Cell]:
        city = self._city(city_id)
        return {c for c in self.cell_daily if city.contains(c)}

    def _city(self, city_id: str) -> CityDef:
        if city_id not in self.cities:
            raise KeyError(f"unknown city {city_id!r}")
        return self.cities[city_id]

    def city_series(self, city_id: str) -> DailySeries:
        if city_id not in self._series:
            cells = self.city_cells(city_id)
            if not cells:
                raise ClimateError(f"no grid cells with data for city {city_id!r}")
            by_date: dict[date, list[tuple[float, int]]] = {}
            for cell in cells:
                for d, (mean, hrs) in self.cell_daily[cell].items():
                    by_date.setdefault(d, []).append((mean, hrs))
            entries = [
                DayEntry(d, sum(m for m, _ in vals) / len(vals), "observed",
                         max(h for _, h in vals))
                for d, vals in sorted(by_date.items())
            ]
            self._series[city_id] = DailySeries(city_id=city_id, entries=entries)
        return self._series[city_id]

    def climatology(self, city_id: str, window: tuple[date, date] | None = None) -> Climatology:
        if city_id not in self._clim:
            series = self.city_series(city_id)
            if window is None:
                obs = series.observed()
                if not obs:
                    raise ClimateError("no observed data")
                window = (obs[0].day, obs[-1].day)
            self._clim[city_id] = build_climatology(series, window)
        return self._clim[city_id]

    def cell_climatology(self, cell: Cell) -> Climatology:
        if cell not in self._cell_clim:
            days = self.cell_daily.get(cell)
            if not days:
                raise ClimateError(f"no data for cell {cell}")
            entries = [DayEntry(d, m, "observed", h) for d, (m, h) in sorted(days.items())]
            series = DailySeries(city_id=f"cell:{cell[0]},{cell[1]}", entries=entries)
            window = (entries[0].day, entries[-1].day)
            self._cell_clim[cell] = build_climatology(series, window)
        return self._cell_clim[cell]

    def grid_field(self, city_id: str, day: date, index: str = "temperature") -> dict[Cell, float]:
        """Per-cell index values for one date, for the map heat layer."""
        cells = self.city_cells(city_id)
        field_values: dict[Cell, float] = {}
        for cell in cells:
            rec = self.cell_daily[cell].get(day)
            if rec is None:
                continue
            temp = rec[0]
            if index == "temperature":
                field_values[cell] = temp
            elif index == "percentile":
                field_values[cell] = percentile_of(self.cell_climatology(cell), temp)
            elif index == "return_period":
                rp = return_period(self.cell_climatology(cell), temp)
                field_values[cell] = rp.years if rp.bounded else rp.min_years
            else:
                raise ClimateError(f"unknown index {index!r}")
        return field_values
