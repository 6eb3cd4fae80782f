#!/usr/bin/env python3
"""Generate the committed fixture dataset: synthetic daily climate for three
cities (2016-2024, with a July 2022 heat spike and a June 2018 drought spell
in Hong Kong), a 50-article news corpus with markup the mock extractor reads,
risk curves, forecasts, annotations, and a manifest of expected subsets.

Everything is seeded; rerunning reproduces the files byte for byte.
"""

import argparse
import csv
import json
import math
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from heatrisk.gateway import MockProvider  # noqa: E402
from heatrisk.risk import synthesize_curve  # noqa: E402

ROOT = Path(__file__).parent.parent
OUT = ROOT / "data" / "fixtures"

START = date(2016, 1, 1)
END = date(2024, 12, 31)          # 3288 days

CITIES = {
    "hong_kong": {
        "name": "Hong Kong", "aliases": ["HongKong", "HK"],
        "bbox": (22.15, 22.55, 113.85, 114.35),
        "mean": 23.5, "amp": 5.5, "mmt": 24.5,
    },
    "beijing": {
        "name": "Beijing", "aliases": ["Peking"],
        "bbox": (39.6, 40.4, 116.0, 116.8),
        "mean": 13.0, "amp": 14.0, "mmt": 22.0,
    },
    "shanghai": {
        "name": "Shanghai", "aliases": [],
        "bbox": (30.9, 31.5, 121.2, 121.8),
        "mean": 17.5, "amp": 10.5, "mmt": 23.5,
    },
}

GRID_STEP = 0.25   # degrees, roughly the reanalysis grid


def city_cells(bbox):
    lat_min, lat_max, lon_min, lon_max = bbox
    lats = np.arange(math.ceil(lat_min / GRID_STEP) * GRID_STEP, lat_max, GRID_STEP)
    lons = np.arange(math.ceil(lon_min / GRID_STEP) * GRID_STEP, lon_max, GRID_STEP)
    return [(round(float(la), 2), round(float(lo), 2)) for la in lats for lo in lons]


def seasonal(day, mean, amp):
    doy = day.timetuple().tm_yday
    return mean + amp * math.sin(2 * math.pi * (doy - 110) / 365.25)


def bump(city_id, day):
    """Event spells layered on the seasonal cycle."""
    if city_id == "hong_kong":
        if date(2022, 7, 12) <= day <= date(2022, 7, 27):
            return 2.4
        if date(2018, 6, 1) <= day <= date(2018, 6, 12):
            return 2.0
    if city_id == "beijing" and date(2022, 7, 10) <= day <= date(2022, 7, 18):
        return 2.5
    if city_id == "shanghai" and date(2022, 7, 15) <= day <= date(2022, 7, 30):
        return 2.2
    return 0.0


def write_cities():
    with open(OUT / "cities.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["city_id", "name", "lat_min", "lat_max", "lon_min", "lon_max", "aliases"])
        for cid, c in CITIES.items():
            w.writerow([cid, c["name"], *c["bbox"], ";".join(c["aliases"])])


def write_daily_climate(rng):
    path = OUT / "climate_daily.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "lat", "lon", "temperature", "unit"])
        for cid, c in CITIES.items():
            cells = city_cells(c["bbox"])
            offsets = rng.normal(0, 0.25, size=len(cells))
            day = START
            while day <= END:
                base = seasonal(day, c["mean"], c["amp"]) + bump(cid, day)
                noise = rng.normal(0, 0.55)
                for cell, off in zip(cells, offsets):
                    temp = base + noise + off + rng.normal(0, 0.15)
                    w.writerow([day.isoformat() + "T00:00:00", cell[0], cell[1],
                                f"{temp:.2f}", "C"])
                day += timedelta(days=1)
    return path


def write_hourly_sample(rng):
    """Ten July-2022 days of hourly Hong Kong data for ingest tests."""
    path = OUT / "climate_hourly_sample.csv"
    cells = city_cells(CITIES["hong_kong"]["bbox"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "lat", "lon", "temperature", "unit"])
        day = date(2022, 7, 18)
        for _ in range(10):
            base = seasonal(day, CITIES["hong_kong"]["mean"], CITIES["hong_kong"]["amp"]) \
                + bump("hong_kong", day)
            for hour in range(24):
                diurnal = 2.0 * math.sin(2 * math.pi * (hour - 9) / 24)
                for cell in cells:
                    temp = base + diurnal + rng.normal(0, 0.2)
                    # exercise the Kelvin conversion path on one cell
                    if cell == cells[0]:
                        w.writerow([f"{day.isoformat()}T{hour:02d}:00:00",
                                    cell[0], cell[1], f"{temp + 273.15:.2f}", "K"])
                    else:
                        w.writerow([f"{day.isoformat()}T{hour:02d}:00:00",
                                    cell[0], cell[1], f"{temp:.2f}", "C"])
            day += timedelta(days=1)
    return path


def write_forecast(rng):
    path = OUT / "forecast.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "lat", "lon", "temperature", "unit"])
        for cid, c in CITIES.items():
            cell = city_cells(c["bbox"])[0]
            day = END + timedelta(days=1)
            for _ in range(14):
                temp = seasonal(day, c["mean"], c["amp"]) + rng.normal(0, 0.4)
                w.writerow([day.isoformat() + "T00:00:00", cell[0], cell[1],
                            f"{temp:.2f}", "C"])
                day += timedelta(days=1)
    return path


# ---------------------------------------------------------------------------
# News corpus
# ---------------------------------------------------------------------------

# Tag families must cluster under the fixture clustering settings (checked in
# verify_tag_families); singleton tags below are deliberate noise.
FIX_EPS = 0.45
FIX_MIN_PTS = 3

WATER_TAGS = ["water supply problem", "water supply shortage", "water supply warning"]
HEATSTROKE_TAGS = ["heatstroke cases rising", "heatstroke cases in elderly",
                   "heatstroke cases outdoors"]
OUTDOOR_TAGS = ["outdoor work heat protection", "outdoor work heat safety",
                "outdoor work heat breaks"]
CROP_TAGS = ["crop damage from drought", "crop damage from hot spells",
             "crop damage from insects"]
NOISE_TAGS = ["power grid strain", "reservoir dried up", "butterfly migration",
              "marathon safety", "air conditioning demand", "subway ridership"]


def verify_tag_families():
    provider = MockProvider(embed_dim=256)
    families = [WATER_TAGS, HEATSTROKE_TAGS, OUTDOOR_TAGS, CROP_TAGS]
    for fam in families:
        for a in fam:
            for b in fam:
                if a < b:
                    sim = float(provider.embed(a) @ provider.embed(b))
                    assert 1 - sim <= FIX_EPS, f"family pair too far: {a!r} vs {b!r} ({sim:.3f})"
    all_family = [t for fam in families for t in fam]
    for i, a in enumerate(all_family):
        for b in all_family[i + 1:]:
            same = any(a in fam and b in fam for fam in families)
            if not same:
                sim = float(provider.embed(a) @ provider.embed(b))
                assert 1 - sim > FIX_EPS, f"cross-family pair too close: {a!r} vs {b!r} ({sim:.3f})"
    for t in NOISE_TAGS:
        for other in all_family + [n for n in NOISE_TAGS if n != t]:
            sim = float(provider.embed(t) @ provider.embed(other))
            assert 1 - sim > FIX_EPS, f"noise tag too close: {t!r} vs {other!r} ({sim:.3f})"


def build_articles():
    """Hand-authored article table; bodies carry the markup the mock reads."""
    articles = []

    def add(aid, city_id, title, body, published, media="web", publisher="Harbour Daily",
            geo_jitter=None, heatwave_word=False):
        c = CITIES[city_id]
        geo = None
        if geo_jitter is not None:
            lat = (c["bbox"][0] + c["bbox"][1]) / 2 + geo_jitter[0]
            lon = (c["bbox"][2] + c["bbox"][3]) / 2 + geo_jitter[1]
            geo = {"lat": round(lat, 4), "lon": round(lon, 4)}
        rec = {
            "id": aid, "title": title, "body": body,
            "published_at": published, "publisher": publisher, "media_type": media,
        }
        if geo:
            rec["geo"] = geo
        articles.append((rec, city_id, heatwave_word))
        assert (("heatwave" in (title + body).casefold()) == heatwave_word), aid

    def tags_line(*tags):
        return "Tags: " + "; ".join(tags)

    # --- Hong Kong: July 2022 heat spell -----------------------------------
    add("hk001", "hong_kong", "Hong Kong issues very hot weather warning",
        "Hong Kong recorded 31.5 °C on 2022-07-24 as the heatwave entered a second week. "
        "The observatory issued a hot weather warning for outdoor workers. "
        "Officials reported 2 deaths and 34 injured after prolonged exposure. "
        "Residents should stay hydrated and avoid the midday sun.\n"
        + tags_line(*HEATSTROKE_TAGS[:1], OUTDOOR_TAGS[0], "power grid strain"),
        "2022-07-24", geo_jitter=(0.01, 0.02), heatwave_word=True)

    add("hk002", "hong_kong", "Heatstroke cases climb in elderly homes",
        "Hospitals in Hong Kong admitted dozens for heatstroke on 2022-07-22. "
        "Doctors warned of rising risk for elderly residents without air conditioning, "
        "because flats without sky view and green space trap heat. "
        "The heat led to 8 deaths among mental health patients at 31 °C. "
        "Care homes should check on residents every two hours.\n"
        + tags_line(HEATSTROKE_TAGS[0], HEATSTROKE_TAGS[1], "air conditioning demand"),
        "2022-07-23", media="publication", publisher="Island Post",
        geo_jitter=(-0.03, 0.01))

    add("hk003", "hong_kong", "Marathon held in extreme heat leaves runners injured",
        "A marathon in Hong Kong went ahead during the heatwave of July 2022. "
        "The race resulted in 30 injured runners treated for heat exhaustion at 32 °C. "
        "Organisers were urged to reschedule endurance events away from summer. "
        "Event on 2022-07-17.\n"
        + tags_line("marathon safety", OUTDOOR_TAGS[1], HEATSTROKE_TAGS[2]),
        "2022-07-18", geo_jitter=(0.02, -0.04), heatwave_word=True)

    add("hk004", "hong_kong", "Outdoor workers collapse on construction sites",
        "Three construction workers collapsed in Hong Kong on 2022-07-20 as temperatures "
        "hit 33 °C. Unions said 1 death and 12 injured showed the danger of fixed "
        "work schedules. Employers should provide shaded rest breaks every hour.\n"
        + tags_line(*OUTDOOR_TAGS),
        "2022-07-21", geo_jitter=(0.04, 0.03))

    add("hk005", "hong_kong", "Power grid strains under record cooling demand",
        "Electricity demand in Hong Kong peaked during the heatwave on 2022-07-25. "
        "The grid operator warned of localised outages due to sustained high temperature. "
        "Households should raise thermostat settings to reduce strain.\n"
        + tags_line("power grid strain", "air conditioning demand", HEATSTROKE_TAGS[0]),
        "2022-07-25", heatwave_word=True)

    # --- Hong Kong: June 2018 drought and water crisis ----------------------
    add("hk006", "hong_kong", "Reservoirs shrink as drought grips the city",
        "Hong Kong reservoirs fell to record lows in the June 2018 drought. "
        "Villages in remote districts reported water supply problems because rainfall "
        "was extremely limited. About 1200 affected residents queued for bottled water. "
        "The government should extend mains coverage to remote villages.\n"
        + tags_line(WATER_TAGS[0], WATER_TAGS[1], "reservoir dried up"),
        "2018-06-09", media="publication", publisher="Island Post",
        geo_jitter=(0.05, -0.02))

    add("hk007", "hong_kong", "Tap water restricted in remote villages",
        "Water trucks served villages in Hong Kong on June 8 after supply lines ran dry. "
        "The drought left 800 affected households on rationed supply. "
        "Authorities urged residents to store water and report leaks. "
        "Hot weather is expected to persist.\n"
        + tags_line(WATER_TAGS[0], WATER_TAGS[2], "subway ridership"),
        "2018-06-10", geo_jitter=(-0.05, 0.05))

    add("hk008", "hong_kong", "Water supply warning extended through the weekend",
        "The supply warning for Hong Kong stayed in force on 2018-06-11 due to the "
        "drought. Reservoir levels risk falling below operational minimums. "
        "Residents should cut non-essential use immediately.\n"
        + tags_line(*WATER_TAGS),
        "2018-06-11")

    add("hk009", "hong_kong", "Drought damages vegetable farms in the New Territories",
        "Farmers in Hong Kong reported crop damage as the June 2018 drought continued. "
        "The dry spell resulted in losses across leafy crops, and 300 affected farm "
        "plots because irrigation ponds dried up. Farmers should adopt drip irrigation "
        "and shade nets.\n"
        + tags_line(CROP_TAGS[0], CROP_TAGS[2], "butterfly migration"),
        "2018-06-12", geo_jitter=(0.06, 0.06))

    # --- Hong Kong: crops 2021/2022 -----------------------------------------
    add("hk010", "hong_kong", "Butterfly influx linked to crop losses",
        "Tropical butterflies colonised farms around Hong Kong in July 2021, driven by "
        "extreme temperature swings and prolonged dry spells. The infestation killed "
        "seedlings and resulted in heavy crop damage. Agronomists recommend "
        "strengthening pest control and improving the irrigation system.\n"
        + tags_line(CROP_TAGS[1], CROP_TAGS[2], "butterfly migration"),
        "2021-07-19", geo_jitter=(0.01, -0.06))

    add("hk011", "hong_kong", "Heatwave returns and fields wilt again",
        "Crop damage recurred across Hong Kong smallholdings on 2022-07-19 during the "
        "heatwave. Growers counted 150 affected plots and warned of recurring risk. "
        "Farms should use shade nets to reduce plant heat stress.\n"
        + tags_line(CROP_TAGS[0], CROP_TAGS[1], "marathon safety"),
        "2022-07-20", heatwave_word=True)

    # --- Hong Kong: filler heat-risk stories en route to 30 -----------------
    hk_filler = [
        ("hk012", "Very hot nights strain sleep and health",
         "Hong Kong logged a string of very hot nights around 2022-07-15 at 30 °C. "
         "Clinics warned of dehydration risk and 5 injured workers were hospitalised. "
         "People should keep rooms ventilated overnight.",
         "2022-07-16", [HEATSTROKE_TAGS[1], "air conditioning demand", "subway ridership"], False),
        ("hk013", "Cooling centres open across districts",
         "Hong Kong opened cooling centres on 2022-07-21 during the heatwave. "
         "Social workers urged elderly residents to use them during peak afternoon heat.",
         "2022-07-21", [HEATSTROKE_TAGS[0], HEATSTROKE_TAGS[2], "power grid strain"], True),
        ("hk014", "Heat warning keeps schools indoors",
         "Schools in Hong Kong cancelled outdoor activity on 2022-07-13 as the hot spell "
         "began. The education bureau said children should carry water bottles.",
         "2022-07-13", [OUTDOOR_TAGS[2], HEATSTROKE_TAGS[1], "subway ridership"], False),
        ("hk015", "Ferry crews get mandatory heat breaks",
         "Operators in Hong Kong added rest rotations on 2022-07-18 because deck "
         "temperatures reached 35 °C. Crews should hydrate every thirty minutes.",
         "2022-07-18", [*OUTDOOR_TAGS[:2], "marathon safety"], False),
        ("hk016", "Street cleaners issued cooling vests",
         "Hong Kong contractors handed out cooling vests on 2022-07-22 during the "
         "heatwave. The union logged 9 injured cleaners this month and warned of risk "
         "on afternoon shifts. Supervisors should rotate duties before noon.",
         "2022-07-22", [OUTDOOR_TAGS[0], OUTDOOR_TAGS[2], "power grid strain"], True),
        ("hk017", "Night markets wilt as heat keeps crowds away",
         "Vendors in Hong Kong saw thin crowds on 2022-07-23 due to the lingering heat. "
         "Stalls reported losses and called for misting fans.",
         "2022-07-23", ["subway ridership", "air conditioning demand", WATER_TAGS[1]], False),
        ("hk018", "Hikers rescued from ridge trail",
         "Rescue teams in Hong Kong carried two hikers off a trail on 2022-07-24 after "
         "heatstroke symptoms at 34 °C. Hikers should start before dawn in summer.",
         "2022-07-24", [HEATSTROKE_TAGS[2], "marathon safety", OUTDOOR_TAGS[1]], False),
        ("hk019", "Warning signs posted at sports grounds",
         "Hong Kong posted heat index boards on 2018-06-05 during the dry spell. "
         "Coaches should shorten drills, officials said, citing injury risk.",
         "2018-06-05", [OUTDOOR_TAGS[1], "marathon safety", WATER_TAGS[2]], False),
        ("hk020", "Water theme park caps visitor numbers",
         "A Hong Kong water park limited entry on June 10 because of the drought "
         "restrictions. Guests were urged to shower briefly.",
         "2018-06-10", [WATER_TAGS[1], WATER_TAGS[2], "subway ridership"], False),
        ("hk021", "Chillers failed in wet market during heatwave",
         "A market in Hong Kong lost refrigeration on 2022-07-26 amid the heatwave. "
         "Spoilage resulted in losses for 40 affected stalls. Vendors should add "
         "backup power.",
         "2022-07-26", ["power grid strain", "air conditioning demand", CROP_TAGS[2]], True),
        ("hk022", "Elderly checks expand to rooftop flats",
         "Volunteers in Hong Kong visited rooftop flats on 2022-07-25 where indoor "
         "readings hit 36 °C. The drive follows 3 deaths this month. Neighbours "
         "should knock twice daily.",
         "2022-07-25", [HEATSTROKE_TAGS[1], HEATSTROKE_TAGS[0], "power grid strain"], False),
        ("hk023", "Bus depot adds shaded waiting bays",
         "Hong Kong transit crews built shade canopies on 2022-07-14 as the hot spell "
         "built. Drivers should log cab temperatures each shift.",
         "2022-07-14", [OUTDOOR_TAGS[0], "subway ridership", "air conditioning demand"], False),
        ("hk024", "Reservoir tours suspended during drought",
         "Hong Kong suspended reservoir tours on 2018-06-07 as levels fell due to the "
         "drought. Rangers warned of wildfire risk on dry slopes.",
         "2018-06-07", ["reservoir dried up", WATER_TAGS[0], "butterfly migration"], False),
    ]
    for aid, title, body, published, tags, hw in hk_filler:
        add(aid, "hong_kong", title, body + "\n" + tags_line(*tags), published,
            heatwave_word=hw)

    # --- Hong Kong: irrelevant stories (is_heat_risk must be false) ----------
    add("hk025", "hong_kong", "Flat prices climb for a third month",
        "Hong Kong real-estate prices rose again in July 2022 on tight supply. "
        "Analysts expect the trend to continue into autumn.\n"
        + tags_line("property market", "interest rates", "housing supply"),
        "2022-07-28")
    add("hk026", "hong_kong", "Harbour ferry line adds night sailings",
        "A Hong Kong operator extended its timetable on 2022-03-02. "
        "Commuters welcomed the change.\n"
        + tags_line("ferry timetable", "commuting", "harbour transport"),
        "2022-03-02")
    add("hk027", "hong_kong", "Stock exchange tests new listing rules",
        "Regulators in Hong Kong opened consultation on 2021-11-15 over listing reform.\n"
        + tags_line("listing rules", "regulation", "equities"),
        "2021-11-15", media="publication", publisher="Ledger Weekly")
    add("hk028", "hong_kong", "Museum quarter draws record visitors",
        "A Hong Kong museum cluster reported record attendance in May 2022.\n"
        + tags_line("museums", "tourism", "culture"),
        "2022-05-20")
    add("hk029", "hong_kong", "Typhoon season preparedness drill held",
        "Hong Kong ran its annual storm drill on 2022-05-12. Crews cleared drains "
        "ahead of the wet season.\n" + tags_line("typhoon drill", "drainage", "storm season"),
        "2022-05-12")
    add("hk030", "hong_kong", "Night heat lingers at 29 degrees",
        "Hong Kong staying warm overnight on 2022-07-27; forecasters see the heatwave "
        "easing. Clinics still flag dehydration risk for outdoor staff, and 4 injured "
        "couriers were treated. Riders should carry electrolyte drinks at 31 °C.\n"
        + tags_line(HEATSTROKE_TAGS[0], OUTDOOR_TAGS[2], "air conditioning demand"),
        "2022-07-27", heatwave_word=True)

    # --- Beijing ------------------------------------------------------------
    bj = [
        ("bj001", "Beijing bakes at forty degrees",
         "Beijing hit 40 °C on 2022-07-12 as the heatwave spread north. "
         "Authorities reported 4 deaths and 52 injured from heat illness. "
         "Residents should avoid outdoor exercise at noon.",
         "2022-07-13", [HEATSTROKE_TAGS[0], HEATSTROKE_TAGS[2], "power grid strain"], True),
        ("bj002", "Capital opens fountains as cooling refuges",
         "Beijing turned plazas into cooling zones on 2022-07-14 during the hot spell. "
         "City crews handed out water to 2000 affected commuters.",
         "2022-07-14", [HEATSTROKE_TAGS[1], "air conditioning demand", "subway ridership"], False),
        ("bj003", "Grid posts record load in northern heatwave",
         "Beijing grid demand broke records on 2022-07-15 because of air conditioning. "
         "Engineers warned of outage risk in older districts.",
         "2022-07-15", ["power grid strain", "air conditioning demand", OUTDOOR_TAGS[0]], True),
        ("bj004", "Wheat belt counts drought losses",
         "Farms outside Beijing tallied crop damage in June 2022 after weeks without "
         "rain. The dry heat resulted in losses on 600 affected hectares. "
         "Provinces should expand drought insurance.",
         "2022-06-30", [CROP_TAGS[0], CROP_TAGS[2], "butterfly migration"], False),
        ("bj005", "Couriers win mandatory heat allowance",
         "Beijing delivery platforms agreed to heat pay on 2022-07-16. Unions said "
         "riders risk heatstroke on asphalt at 39 °C and 18 injured this week. "
         "Platforms should cap afternoon orders.",
         "2022-07-16", [OUTDOOR_TAGS[0], OUTDOOR_TAGS[1], HEATSTROKE_TAGS[0]], False),
        ("bj006", "Metro extends hours in evening heat",
         "Beijing kept trains running later on 2022-07-17 so residents could wait out "
         "the heatwave underground.",
         "2022-07-17", ["subway ridership", "air conditioning demand", HEATSTROKE_TAGS[1]], True),
        ("bj007", "Car sales dip in sweltering month",
         "Beijing showrooms saw fewer visitors in July 2022. Dealers blamed the "
         "sweltering weather for thin foot traffic.",
         "2022-07-29", ["car sales", "retail traffic", "summer slowdown"], False),
        ("bj008", "Museums extend evening openings",
         "Beijing museums trialled late hours on 2022-04-10 for spring crowds.",
         "2022-04-10", ["museums", "tourism", "culture"], False),
        ("bj009", "Water trucks cool stone plazas",
         "Beijing sprayed plazas on 2022-07-18 to cut surface heat. Officials said "
         "the water supply warning remains in force in two districts.",
         "2022-07-18", [WATER_TAGS[2], WATER_TAGS[0], "power grid strain"], False),
        ("bj010", "Heat tourists flock to mountain resorts",
         "Beijing residents escaped the heatwave to hill resorts on 2022-07-19. "
         "Park managers should add shaded rest stops, a survey said.",
         "2022-07-19", ["tourism", OUTDOOR_TAGS[2], HEATSTROKE_TAGS[2]], True),
    ]
    for aid, title, body, published, tags, hw in bj:
        add(aid, "beijing", title, body + "\n" + tags_line(*tags), published,
            publisher="Capital Courier", heatwave_word=hw)

    # --- Shanghai -------------------------------------------------------------
    sh = [
        ("sh001", "Shanghai logs longest hot streak in a decade",
         "Shanghai stayed above 37 °C through 2022-07-20 in a heatwave. "
         "Clinics treated 26 injured outdoor staff and confirmed 1 death. "
         "Companies should shift deliveries to early morning.",
         "2022-07-21", [HEATSTROKE_TAGS[0], OUTDOOR_TAGS[1], "power grid strain"], True),
        ("sh002", "Port slows as deck heat peaks",
         "Shanghai container cranes ran reduced shifts on 2022-07-22 because steel "
         "decks reached 55 °C surface readings. Stevedores should rotate hourly.",
         "2022-07-22", [OUTDOOR_TAGS[0], OUTDOOR_TAGS[2], "subway ridership"], False),
        ("sh003", "Rice paddies stressed by hot nights",
         "Growers near Shanghai flagged crop damage on 2022-07-24 as night temperatures "
         "held at 31 °C. The heat resulted in early grain fill losses. "
         "Extension officers recommend staggered irrigation.",
         "2022-07-24", [CROP_TAGS[1], CROP_TAGS[0], "butterfly migration"], False),
        ("sh004", "Cooling shelters open along the Bund",
         "Shanghai opened riverfront shelters on 2022-07-23 during the heatwave. "
         "Volunteers urged elderly visitors to rest indoors at noon.",
         "2022-07-23", [HEATSTROKE_TAGS[1], HEATSTROKE_TAGS[2], "air conditioning demand"], True),
        ("sh005", "Street food stalls adapt to heat rules",
         "Shanghai inspectors relaxed night market hours on 2022-07-25 so vendors "
         "avoid afternoon heat. Stalls should chill produce below 8 °C.",
         "2022-07-25", ["subway ridership", "air conditioning demand", WATER_TAGS[1]], False),
        ("sh006", "Financial district tests flexible hours",
         "Shanghai firms piloted staggered starts on 2022-07-26 due to transit heat. "
         "HR groups said staff risk exhaustion on platforms and 6 injured commuters "
         "were treated.",
         "2022-07-26", [HEATSTROKE_TAGS[2], "subway ridership", OUTDOOR_TAGS[1]], False),
        ("sh007", "Heatwave strains suburban water plants",
         "Shanghai suburbs issued a water supply warning on 2022-07-27 as demand "
         "spiked in the heatwave. Utilities should stagger pressure cycles.",
         "2022-07-27", [WATER_TAGS[2], WATER_TAGS[1], "power grid strain"], True),
        ("sh008", "Autumn art fair announces dates",
         "A Shanghai gallery group set its fair for October on 2022-05-30.",
         "2022-05-30", ["art fair", "culture", "tourism"], False),
        ("sh009", "New ferry link opens across the river",
         "Shanghai opened a commuter ferry line on 2022-04-02.",
         "2022-04-02", ["ferry timetable", "commuting", "harbour transport"], False),
        ("sh010", "Office towers dim lights in heat alert",
         "Shanghai towers cut display lighting on 2022-07-28 during the heat alert "
         "to relieve the grid. Building managers should precool before peak hours.",
         "2022-07-28", ["power grid strain", "air conditioning demand", OUTDOOR_TAGS[0]], False),
    ]
    for aid, title, body, published, tags, hw in sh:
        add(aid, "shanghai", title, body + "\n" + tags_line(*tags), published,
            publisher="Bund Review", heatwave_word=hw)

    return articles


def write_corpus(articles):
    path = OUT / "corpus.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for rec, _, _ in articles:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def write_manifest(articles):
    manifest = {
        "cities": {cid: {"name": c["name"], "aliases": c["aliases"]}
                   for cid, c in CITIES.items()},
        "article_count": len(articles),
        "by_city": {},
        "heatwave_ids": {},
        "clustering": {"eps": FIX_EPS, "min_pts": FIX_MIN_PTS},
        "tag_families": {
            "water": WATER_TAGS, "heatstroke": HEATSTROKE_TAGS,
            "outdoor": OUTDOOR_TAGS, "crop": CROP_TAGS, "noise": NOISE_TAGS,
        },
        "reference_window": [START.isoformat(), END.isoformat()],
    }
    for rec, city_id, hw in articles:
        manifest["by_city"].setdefault(city_id, []).append(rec["id"])
        if hw:
            manifest["heatwave_ids"].setdefault(city_id, []).append(rec["id"])
    # independent recount: which articles contain the city name AND "heatwave"
    for cid, c in CITIES.items():
        expected = sorted(manifest["heatwave_ids"].get(cid, []))
        scanned = sorted(
            rec["id"] for rec, _, _ in articles
            if c["name"].casefold() in (rec["title"] + "\n" + rec["body"]).casefold()
            and "heatwave" in (rec["title"] + "\n" + rec["body"]).casefold())
        assert expected == scanned, (cid, expected, scanned)
    (OUT / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1), encoding="utf-8")


def write_curves():
    (OUT / "curves").mkdir(exist_ok=True)
    params = {"hong_kong": (0.035, 0.105, (10.0, 35.0)),
              "beijing": (0.020, 0.085, (-8.0, 41.0)),
              "shanghai": (0.028, 0.095, (0.0, 39.0))}
    for cid, (b_cold, b_heat, rng_) in params.items():
        curve = synthesize_curve(CITIES[cid]["mmt"], b_cold, b_heat, rng_, 0.5,
                                 city_id=cid)
        with open(OUT / "curves" / f"{cid}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["city_id", cid])
            w.writerow(["temp", "relative_risk"])
            for t, r in zip(curve.temps, curve.rrs):
                w.writerow([f"{t:g}", f"{r:.10g}"])


def write_annotations():
    """Judgment mix per field; tag is 23 good + 1 medium, time lands at 73%."""
    mixes = {
        "tag": (23, 1, 0), "casualty": (22, 1, 1), "reason": (21, 2, 1),
        "consequence": (21, 1, 2), "risk": (20, 2, 2), "temperature": (20, 3, 1),
        "advice": (19, 3, 2), "time": (19, 4, 3),
    }
    with open(OUT / "annotations.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["article_id", "field", "judgment", "annotator_id"])
        for field, (g, m, b) in mixes.items():
            i = 0
            for judgment, count in (("good", g), ("medium", m), ("bad", b)):
                for _ in range(count):
                    # 25 and 8 are coprime, so (article, annotator) pairs stay
                    # unique well past the largest per-field row count
                    w.writerow([f"hk{(i % 25) + 1:03d}", field, judgment, f"e{i % 8 + 1}"])
                    i += 1


def write_config():
    config = {
        "clustering": {"eps": FIX_EPS, "min_pts": FIX_MIN_PTS},
        "layout": {"hex_size": 1.0, "projector": "pca"},
        "rag": {"max_chunk_chars": 500, "top_k": 5},
        "embed_dim": 256,
        "seed": 0,
    }
    (OUT / "config.json").write_text(json.dumps(config, sort_keys=True, indent=1),
                                     encoding="utf-8")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    verify_tag_families()
    write_cities()
    write_daily_climate(rng)
    write_hourly_sample(rng)
    write_forecast(rng)
    articles = build_articles()
    write_corpus(articles)
    write_manifest(articles)
    write_curves()
    write_annotations()
    write_config()
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
