"""Regenerate ``src/landslide_risk/fixtures/hma_mini.csv``.

The fixture is committed; this script documents how it was authored.
Layout (60 data rows):

* rows 1-8: a dense, high-impact cluster around (28.25, 85.25), all
  catastrophic / very large, monsoon months, heavy casualties;
* rows 9-55: scattered in-region events; each locality carries a latent
  risk tier that drives casualties, size and season together, so nearby
  events share risk and the synthetic labels are learnable;
* 3 valid rows outside the default region (Jakarta, Cebu, Zurich);
* 2 malformed rows: latitude 91.0 and an impossible event date.
"""
import csv
import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "landslide_risk" / "fixtures" / "hma_mini.csv"

COLUMNS = (
    "event_id", "event_date", "submitted_date", "latitude", "longitude",
    "location_description", "location_accuracy", "fatality_count", "injury_count",
    "event_title", "event_description", "landslide_size", "trigger",
    "source_name", "source_link",
)

PLACES = [
    ("Pokhara, Nepal", 28.21, 83.99), ("Dharan, Nepal", 26.81, 87.28),
    ("Jumla, Nepal", 29.27, 82.18), ("Shimla, India", 31.10, 77.17),
    ("Darjeeling, India", 27.04, 88.26), ("Uttarkashi, India", 30.73, 78.45),
    ("Kedarnath, India", 30.73, 79.07), ("Gangtok, India", 27.33, 88.61),
    ("Muzaffarabad, Pakistan", 34.37, 73.47), ("Gilgit, Pakistan", 35.92, 74.31),
    ("Swat, Pakistan", 35.22, 72.43), ("Wenchuan, China", 31.48, 103.59),
    ("Zhouqu, China", 33.79, 104.37), ("Nyingchi, China", 29.65, 94.36),
    ("Thimphu, Bhutan", 27.47, 89.64), ("Trashigang, Bhutan", 27.33, 91.55),
    ("Sylhet, Bangladesh", 24.90, 91.87), ("Rangamati, Bangladesh", 24.65, 92.19),
    ("Khorog, Tajikistan", 37.49, 71.55), ("Osh, Kyrgyzstan", 40.51, 72.80),
]
SIZES = ["small", "medium", "large", "very_large", "catastrophic", "unknown"]
TRIGGERS = ["rain", "downpour", "monsoon", "earthquake", "snowmelt", "construction", ""]
ACCURACY = ["exact", "1km", "5km", "10km", "25km", "50km", "unknown"]
SOURCES = [
    ("Kathmandu Post", "https://kathmandupost.example/landslides"),
    ("Himalayan Times", "https://himalayantimes.example/news"),
    ("Times of India", "https://timesofindia.example/disasters"),
    ("Dawn", "https://dawn.example/landslide"),
    ("Xinhua", "https://xinhua.example/disaster"),
    ("Kuensel", "https://kuensel.example/news"),
    ("Daily Star", "https://dailystar.example/landslide"),
    ("ReliefWeb", "https://reliefweb.example/report"),
    ("", ""),
]


def row(eid, date, lat, lon, place, acc, fat, inj, size, trig, src, submitted=""):
    trig_text = trig or "unknown causes"
    title = f"{place} {size.replace('_', ' ')} landslide {date}"
    desc = (f"A {size.replace('_', ' ')} landslide caused by {trig_text} struck near {place} "
            f"on {date}; reported fatalities {fat if fat != '' else 'unknown'}, "
            f"injuries {inj if inj != '' else 'unknown'}, event {eid}.")
    return {
        "event_id": eid, "event_date": date, "submitted_date": submitted,
        "latitude": f"{lat:.4f}", "longitude": f"{lon:.4f}",
        "location_description": place, "location_accuracy": acc,
        "fatality_count": fat, "injury_count": inj, "event_title": title,
        "event_description": desc, "landslide_size": size, "trigger": trig,
        "source_name": src[0], "source_link": src[1],
    }


def main():
    rng = np.random.default_rng(2024)
    rows = []
    # dense high-risk cluster (Sindhupalchok area, ~5 km spread)
    for k in range(8):
        lat = 28.25 + rng.uniform(-0.04, 0.04)
        lon = 85.25 + rng.uniform(-0.04, 0.04)
        month = int(rng.choice([7, 8]))
        day = int(rng.integers(1, 28))
        rows.append(row(
            f"GLC-{1000 + k}", f"2014-{month:02d}-{day:02d}", lat, lon,
            "Sindhupalchok, Nepal", "1km", str(int(rng.integers(60, 160))),
            str(int(rng.integers(20, 90))), ["catastrophic", "very_large"][k % 2],
            "monsoon", SOURCES[k % 2], submitted=f"2014-{month:02d}-28"))
    # scattered events; the locality's tier makes impact, size and season co-vary
    tier_sizes = (["small", "medium", "unknown"], ["medium", "large"],
                  ["large", "very_large", "catastrophic"])
    dry = [1, 2, 3, 4, 5, 10, 11, 12]
    wet = [6, 7, 8, 9]
    for k in range(47):
        name, plat, plon = PLACES[k % len(PLACES)]
        tier = (k % len(PLACES)) % 3
        lat = plat + rng.uniform(-0.3, 0.3)
        lon = plon + rng.uniform(-0.3, 0.3)
        year = int(rng.integers(2007, 2021))
        if tier == 0:
            month = int(rng.choice(dry))
            fat = int(rng.integers(0, 2))
            inj = int(rng.integers(0, 3))
        elif tier == 1:
            month = int(rng.choice(dry + wet))
            fat = int(rng.integers(1, 10))
            inj = int(rng.integers(0, 15))
        else:
            month = int(rng.choice(wet))
            fat = int(rng.integers(10, 120))
            inj = int(rng.integers(5, 60))
        day = int(rng.integers(1, 28))
        date = f"{year}-{month:02d}-{day:02d}" if k % 5 else f"{month:02d}/{day:02d}/{year}"
        fat_s = "" if (k % 11 == 3 and tier == 0) else str(fat)
        inj_s = "" if k % 7 == 2 else str(inj)
        sizes = tier_sizes[tier]
        rows.append(row(
            f"GLC-{2000 + k}", date, lat, lon, name, ACCURACY[k % len(ACCURACY)],
            fat_s, inj_s, sizes[int(rng.integers(0, len(sizes)))],
            TRIGGERS[int(rng.integers(0, len(TRIGGERS)))], SOURCES[k % len(SOURCES)]))
    # two events sharing an exact gazetteer point
    rows[20]["latitude"], rows[20]["longitude"] = rows[21]["latitude"], rows[21]["longitude"]
    # out of region but valid
    rows.append(row("GLC-3000", "2016-02-10", -6.2000, 106.8166, "Jakarta, Indonesia", "5km",
                    "3", "1", "medium", "rain", SOURCES[7]))
    rows.append(row("GLC-3001", "2013-11-05", 10.3157, 123.8854, "Cebu, Philippines", "10km",
                    "12", "4", "large", "downpour", SOURCES[7]))
    rows.append(row("GLC-3002", "2019-06-14", 47.3769, 8.5417, "Zurich, Switzerland", "exact",
                    "0", "0", "small", "snowmelt", SOURCES[7]))
    # malformed
    bad_lat = row("GLC-9000", "2012-08-01", 28.0, 84.0, "Nowhere", "exact", "1", "0",
                  "small", "rain", SOURCES[0])
    bad_lat["latitude"] = "91.0"
    bad_date = row("GLC-9001", "2015-13-45", 30.0, 80.0, "Nowhere", "exact", "1", "0",
                   "small", "rain", SOURCES[0])
    rows.insert(30, bad_lat)
    rows.insert(45, bad_date)
    assert len(rows) == 60
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
