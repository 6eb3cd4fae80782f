"""Climate index tests: every derived expectation comes from a brute-force
oracle written here, independent of the implementation path."""

from datetime import date, datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatrisk.climate import (
    ClimateError,
    DayEntry,
    HourlyRecord,
    build_climatology,
    citywide_average,
    compute_daily_means,
    detect_heatwaves,
    histogram,
    ingest_forecast,
    inverse_cdf,
    percentile_of,
    return_period,
    thermoglyph_table,
)

from conftest import make_climatology, make_series

CELL = (22.25, 114.0)


def hourly_day(day, temps, cell=CELL):
    return [HourlyRecord(datetime(day.year, day.month, day.day, h), cell, float(t))
            for h, t in enumerate(temps)]


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def percentile_oracle(values, t):
    return 100.0 * sum(1 for x in values if x <= t) / len(values)


def return_period_oracle(values, n_years, t):
    exceed = sum(1 for x in values if x > t)
    return None if exceed == 0 else n_years / exceed


def heatwave_runs_oracle(entries, threshold, min_run):
    """Linear scan for maximal runs of calendar-consecutive days above threshold."""
    runs = []
    current = []
    for e in entries:
        if e.mean_temp > threshold:
            if current and e.day != current[-1].day + timedelta(days=1):
                if len(current) >= min_run:
                    runs.append((current[0].day, current[-1].day))
                current = []
            current.append(e)
        else:
            if len(current) >= min_run:
                runs.append((current[0].day, current[-1].day))
            current = []
    if len(current) >= min_run:
        runs.append((current[0].day, current[-1].day))
    return runs


# ---------------------------------------------------------------------------
# daily means
# ---------------------------------------------------------------------------

class TestDailyMeans:
    def test_constant_day(self):
        series = compute_daily_means(hourly_day(date(2020, 7, 1), [30.0] * 24), {CELL})
        assert len(series.entries) == 1
        assert series.entries[0].mean_temp == 30.0
        assert series.entries[0].hours_used == 24

    def test_arithmetic_mean(self):
        # oracle: sum(range(24)) / 24 == 11.5
        temps = list(range(24))
        assert sum(temps) / len(temps) == 11.5
        series = compute_daily_means(hourly_day(date(2020, 7, 1), temps), {CELL})
        assert series.entries[0].mean_temp == 11.5

    def test_short_day_flagged_missing(self):
        series = compute_daily_means(
            hourly_day(date(2020, 7, 1), [25.0] * 10)
            + hourly_day(date(2020, 7, 2), [26.0] * 24),
            {CELL},
        )
        assert [e.day for e in series.entries] == [date(2020, 7, 2)]
        assert series.missing_dates == [date(2020, 7, 1)]

    def test_exactly_18_hours_kept(self):
        series = compute_daily_means(hourly_day(date(2020, 7, 1), [25.0] * 18), {CELL})
        assert len(series.entries) == 1

    def test_pooled_over_cells(self):
        other = (22.5, 114.25)
        records = hourly_day(date(2020, 7, 1), [20.0] * 24) + \
            hourly_day(date(2020, 7, 1), [30.0] * 24, cell=other)
        series = compute_daily_means(records, {CELL, other})
        assert series.entries[0].mean_temp == pytest.approx(25.0)

    def test_empty_input(self):
        with pytest.raises(ClimateError, match="no data"):
            compute_daily_means([], {CELL})

    def test_misaligned_timestamp_rejected(self):
        bad = HourlyRecord(datetime(2020, 7, 1, 3, 30), CELL, 25.0)
        series = compute_daily_means(hourly_day(date(2020, 7, 1), [25.0] * 24) + [bad], {CELL})
        assert series.rejected_records == 1
        assert series.entries[0].mean_temp == 25.0


# ---------------------------------------------------------------------------
# climatology / percentile / return period
# ---------------------------------------------------------------------------

class TestClimatology:
    def test_requires_365_days(self):
        series = make_series([20.0] * 200)
        with pytest.raises(ClimateError, match="insufficient reference window"):
            build_climatology(series, (series.entries[0].day, series.entries[-1].day))

    def test_window_and_years(self):
        series = make_series(range(400), start=date(2020, 1, 1))
        window = (date(2020, 1, 1), date(2020, 12, 31))  # 366 days (leap year)
        clim = build_climatology(series, window)
        assert clim.n_days == 366
        assert clim.n_years == pytest.approx(366 / 365.25)
        assert np.all(np.diff(clim.sorted_means) >= 0)

    def test_forecast_excluded(self):
        series = make_series([20.0] * 366)
        series.entries.append(DayEntry(series.entries[-1].day + timedelta(days=1),
                                       99.0, "forecast", 24))
        clim = build_climatology(series, (series.entries[0].day, series.entries[-1].day))
        assert clim.n_days == 366
        assert 99.0 not in clim.sorted_means


class TestPercentile:
    def test_below_min_is_zero(self):
        clim = make_climatology([20, 22, 24, 26, 28])
        assert percentile_of(clim, 19.0) == 0.0

    def test_max_is_hundred(self):
        clim = make_climatology([20, 22, 24, 26, 28])
        assert percentile_of(clim, 28.0) == 100.0

    def test_direct_count(self):
        clim = make_climatology([20, 22, 24, 26, 28])
        assert percentile_of(clim, 26.0) == 80.0   # oracle: 4 of 5 values <= 26

    @given(st.lists(st.floats(-40, 50, allow_nan=False), min_size=5, max_size=400),
           st.floats(-45, 55, allow_nan=False))
    def test_matches_oracle(self, values, t):
        clim = make_climatology(values)
        assert percentile_of(clim, t) == percentile_oracle(values, t)

    @given(st.lists(st.floats(-40, 50, allow_nan=False), min_size=5, max_size=100),
           st.floats(-45, 55), st.floats(0, 10))
    def test_monotone(self, values, t, dt):
        clim = make_climatology(values)
        assert percentile_of(clim, t) <= percentile_of(clim, t + dt)

    def test_round_trip_on_observed(self):
        values = [18.0, 21.0, 21.0, 24.0, 30.0, 30.0, 31.5]
        clim = make_climatology(values)
        for x in values:
            p = percentile_of(clim, x)
            assert percentile_of(clim, inverse_cdf(clim, p)) == p


class TestReturnPeriod:
    def test_every_day_exceeds_over_one_year(self):
        values = [30.0] * 365
        clim = make_climatology(values)
        rp = return_period(clim, 25.0)
        n_years = 365 / 365.25
        assert rp.years == pytest.approx(n_years / 365)
        assert rp.years == pytest.approx(1 / 365, rel=1e-2)

    def test_five_exceedances_over_ten_years(self):
        # oracle: 10.0 years / 5 exceedances = 2.0
        n = 3653
        values = [20.0] * (n - 5) + [35.0] * 5
        clim = make_climatology(values)
        clim.n_years = 10.0
        rp = return_period(clim, 30.0)
        assert rp.years == 2.0

    def test_unbounded(self):
        clim = make_climatology([20.0] * 400)
        clim.n_years = 9.0
        rp = return_period(clim, 50.0)
        assert not rp.bounded
        assert rp.min_years == 9.0
        assert rp.display() == "> 9 years"

    def test_below_min(self):
        values = list(range(365))
        clim = make_climatology(values)
        rp = return_period(clim, -1.0)
        assert rp.years == pytest.approx(clim.n_years / clim.n_days)

    @given(st.lists(st.floats(-40, 50, allow_nan=False), min_size=365, max_size=500),
           st.floats(-45, 55, allow_nan=False))
    @settings(max_examples=50)
    def test_matches_oracle(self, values, t):
        clim = make_climatology(values)
        expected = return_period_oracle(values, clim.n_years, t)
        rp = return_period(clim, t)
        if expected is None:
            assert not rp.bounded and rp.min_years == clim.n_years
        else:
            assert rp.years == expected


# ---------------------------------------------------------------------------
# heatwaves
# ---------------------------------------------------------------------------

class TestHeatwaves:
    def base_values(self):
        # 400 days: mild cycle in [20, 23.8] plus ten isolated 24.0 spikes, so
        # the 97.5th-percentile threshold is 23.8 and no base run reaches 4 days
        return [24.0 if i % 40 == 20 else 20.0 + (i % 20) * 0.2 for i in range(400)]

    def clim_from(self, values):
        return make_climatology(values)

    def test_nothing_above_threshold(self):
        values = self.base_values()
        series = make_series(values)
        assert detect_heatwaves(series, self.clim_from(values)) == []

    def test_single_run_of_five(self):
        values = self.base_values()
        clim = self.clim_from(values)
        threshold = inverse_cdf(clim, 97.5)
        hot = [threshold + 2.0] * 5
        series = make_series(values + hot)
        events = detect_heatwaves(series, clim)
        oracle = heatwave_runs_oracle(series.entries, threshold, 4)
        assert [(e.start_date, e.end_date) for e in events] == oracle
        assert len(events) == 1
        assert events[0].duration == 5
        assert events[0].peak_temp == pytest.approx(threshold + 2.0)

    def test_three_day_run_rejected(self):
        values = self.base_values()
        clim = self.clim_from(values)
        threshold = inverse_cdf(clim, 97.5)
        tail = [threshold + 1] * 3 + [10.0] + [threshold + 1] * 4
        series = make_series(values + tail)
        events = detect_heatwaves(series, clim)
        oracle = heatwave_runs_oracle(series.entries, threshold, 4)
        assert [(e.start_date, e.end_date) for e in events] == oracle
        assert len(events) == 1
        assert events[0].duration == 4

    def test_missing_day_breaks_run(self):
        values = self.base_values()
        clim = self.clim_from(values)
        threshold = inverse_cdf(clim, 97.5)
        # 3 hot days, a missing day, then 3 more: no event despite 6 hot days
        tail = [threshold + 1] * 3 + [None] + [threshold + 1] * 3
        series = make_series(values + tail)
        assert detect_heatwaves(series, clim) == []

    def test_events_maximal_and_disjoint(self):
        values = self.base_values()
        clim = self.clim_from(values)
        threshold = inverse_cdf(clim, 97.5)
        tail = [threshold + 1] * 6 + [threshold - 5] + [threshold + 0.5] * 4
        series = make_series(values + tail)
        events = detect_heatwaves(series, clim)
        assert [(e.start_date, e.end_date) for e in events] == \
            heatwave_runs_oracle(series.entries, threshold, 4)
        # brute re-scan: every day inside every event exceeds the threshold
        by_day = {e.day: e.mean_temp for e in series.entries}
        for ev in events:
            d = ev.start_date
            while d <= ev.end_date:
                assert by_day[d] > threshold
                d += timedelta(days=1)
        for a, b in zip(events, events[1:]):
            assert a.end_date < b.start_date


# ---------------------------------------------------------------------------
# histogram
# ---------------------------------------------------------------------------

class TestHistogram:
    def test_single_day(self):
        h = histogram(make_series([25.3]))
        assert list(h.bin_edges) == [25.0, 26.0]
        assert list(h.counts) == [1]

    def test_direct_binning(self):
        h = histogram(make_series([24.1, 24.9, 25.0]))
        assert list(h.bin_edges) == [24.0, 25.0, 26.0]
        assert list(h.counts) == [2, 1]

    def test_empty_series_errors(self):
        with pytest.raises(ClimateError):
            histogram(make_series([]))

    @given(st.lists(st.floats(-30, 45, allow_nan=False), min_size=1, max_size=300))
    def test_counts_sum_and_coverage(self, values):
        series = make_series(values)
        h = histogram(series)
        assert int(h.counts.sum()) == len(values)
        assert all(h.bin_edges[0] <= v < h.bin_edges[-1] or v == max(values)
                   for v in values)
        assert h.bin_edges[0] <= min(values) < h.bin_edges[-1]
        assert h.bin_edges[0] <= max(values) < h.bin_edges[-1]


# ---------------------------------------------------------------------------
# thermoglyph band table
# ---------------------------------------------------------------------------

class TestThermoglyph:
    def test_uniform_climatology_band_edges(self):
        # uniform values 0..100: inverse-CDF oracle puts band [75, 90] near temps
        # [75, 90], within one sample step
        values = list(np.linspace(0, 100, 1001))
        clim = make_climatology(values)
        table = thermoglyph_table(clim)
        band = next(b for b in table.bands if b.percentile_lo == 75.0)
        step = 100 / 1000
        assert abs(band.temp_lo - 75.0) <= step + 1e-9
        assert abs(band.temp_hi - 90.0) <= step + 1e-9

    def test_constant_climatology(self):
        clim = make_climatology([20.0] * 400)
        table = thermoglyph_table(clim)
        assert all(b.temp_lo == 20.0 and b.temp_hi == 20.0 for b in table.bands)

    def test_bad_breakpoints(self):
        clim = make_climatology([20.0] * 400)
        with pytest.raises(ClimateError):
            thermoglyph_table(clim, breakpoints=(0.0, 50.0, 120.0))
        with pytest.raises(ClimateError):
            thermoglyph_table(clim, breakpoints=(5.0, 50.0, 100.0))

    def test_partition_and_monotone(self):
        clim = make_climatology(np.random.default_rng(1).normal(22, 6, 500))
        table = thermoglyph_table(clim)
        assert table.bands[0].percentile_lo == 0.0
        assert table.bands[-1].percentile_hi == 100.0
        for a, b in zip(table.bands, table.bands[1:]):
            assert a.percentile_hi == b.percentile_lo
            assert a.temp_hi <= b.temp_hi
        assert [b.color_band_index for b in table.bands] == list(range(7))

    @given(st.lists(st.floats(-10, 40, allow_nan=False), min_size=365, max_size=800))
    @settings(max_examples=30)
    def test_band_consistency_both_axes(self, values):
        clim = make_climatology(values)
        table = thermoglyph_table(clim)
        for t in values:
            by_temp = table.band_from_temperature(t)
            by_pct = table.band_from_percentile(percentile_of(clim, t))
            assert by_temp == by_pct


# ---------------------------------------------------------------------------
# citywide average / forecast
# ---------------------------------------------------------------------------

class TestSpatialAndForecast:
    def test_single_cell(self):
        assert citywide_average({(22.25, 114.0): 28.0}, {(22.25, 114.0)}) == 28.0

    def test_mean_of_two_cells(self):
        field = {(22.25, 114.0): 28.0, (22.5, 114.0): 32.0}
        assert citywide_average(field, set(field)) == 30.0   # oracle: (28+32)/2

    def test_no_cells_errors(self):
        with pytest.raises(ClimateError):
            citywide_average({}, {(22.25, 114.0)})

    def test_forecast_append(self):
        series = make_series([20.0] * 366)
        last = series.entries[-1].day
        rows = [(last + timedelta(days=i + 1), 25.0) for i in range(14)]
        ingest_forecast(rows, series)
        assert len(series.forecast()) == 14

    def test_forecast_too_long(self):
        series = make_series([20.0] * 366)
        last = series.entries[-1].day
        rows = [(last + timedelta(days=i + 1), 25.0) for i in range(15)]
        with pytest.raises(ClimateError):
            ingest_forecast(rows, series)

    def test_forecast_overlap(self):
        series = make_series([20.0] * 366)
        rows = [(series.entries[-1].day, 25.0)]
        with pytest.raises(ClimateError):
            ingest_forecast(rows, series)
