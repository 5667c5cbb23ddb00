#!/usr/bin/env python3
"""Generate the deterministic demo dataset under data/demo/.

200 well-formed records plus a few intentionally broken lines, a small
gazetteer, a regions table, keyword/survey files, and an annotated
training set. Regenerating with the same seed reproduces identical
files, so the outputs are committed.
"""

from __future__ import annotations

import csv
import json
import random
from datetime import datetime, timezone
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "demo"
SEED = 2022

REGIONS = [
    ("NO020", "Innlandet", 371722),
    ("NO060", "Trøndelag", 468702),
    ("NO071", "Nordland", 240345),
    ("NO074", "Troms og Finnmark", 241235),
    ("NO081", "Oslo", 699827),
    ("NO082", "Viken", 1287048),
    ("NO091", "Vestfold og Telemark", 424832),
    ("NO092", "Agder", 308843),
    ("NO0A1", "Rogaland", 485797),
    ("NO0A2", "Vestland", 641292),
    ("NO0A3", "Møre og Romsdal", 265758),
]

GAZETTEER = [
    ("Oslo", "NO081", 699827),
    ("Bergen", "NO0A2", 285911),
    ("Trondheim", "NO060", 210496),
    ("Stavanger", "NO0A1", 144699),
    ("Kristiansand", "NO092", 113737),
    ("Drammen", "NO082", 101996),
    ("Tromsø", "NO074", 77544),
    ("Ålesund", "NO0A3", 66670),
    ("Bodø", "NO071", 52803),
    ("Skien", "NO091", 55513),
    ("Hamar", "NO020", 32023),
    ("Lillehammer", "NO020", 28493),
    ("Haugesund", "NO0A1", 37357),
    ("Molde", "NO0A3", 32002),
    ("Narvik", "NO071", 21233),
    ("Sandefjord", "NO091", 64943),
    ("Arendal", "NO092", 45509),
    ("Mo i Rana", "NO071", 26184),
    ("Os", "NO020", 1950),
    ("Førde", "NO0A2", 13119),
    ("Steinkjer", "NO060", 24113),
    ("Alta", "NO074", 21072),
    ("Gjøvik", "NO020", 30503),
    ("Fredrikstad", "NO082", 83193),
    ("Haramsøya", "NO0A3", 450),
]

KEYWORDS = [
    "havvind",
    "vindkraft",
    "vindmølle",
    "vindmøller",
    "vindmøllene",
    "vindturbiner",
    "vindenergi",
]

NEGATIVE_WORDS = ["ødelegger", "rasering", "skandale", "naturtap", "protesterer", "uakseptabelt"]
NEUTRAL_WORDS = ["konsesjon", "høring", "utbygging", "rapport", "møtet", "planene"]
POSITIVE_WORDS = ["fantastisk", "grønn", "fornybar", "framtid", "glimrende", "viktig"]

FILLER = [
    "turbinene på fjellet",
    "debatten fortsetter i kommunen",
    "les hele saken om utbyggingen",
    "dette handler om naturen vår",
    "kraftprisene og forsyningssikkerheten",
    "mange møtte opp på folkemøtet",
    "nye tall fra direktoratet i dag",
]

ILLEGIBLE_LOCATIONS = ["the couch", "verdensrommet", "et sted i skogen", "hjemme hos meg", "norge rundt"]


def rfc3339(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def main() -> None:
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)

    with open(OUT / "regions.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nuts3_code", "display_name", "population"])
        w.writerows(REGIONS)

    with open(OUT / "gazetteer.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["place_name", "nuts3_code", "population"])
        w.writerows(GAZETTEER)

    (OUT / "keywords.txt").write_text("\n".join(KEYWORDS) + "\n", encoding="utf-8")

    # --- authors: three retweet clusters plus a broad tail -------------
    towns_by_region: dict[str, list[str]] = {}
    for name, code, _ in GAZETTEER:
        towns_by_region.setdefault(code, []).append(name)

    clusters = [
        ("anchor_vest", "NO0A2", [f"vest_{i}" for i in range(6)]),
        ("anchor_trond", "NO060", [f"trond_{i}" for i in range(6)]),
        ("anchor_oslo", "NO081", [f"oslo_{i}" for i in range(7)]),
    ]
    tail_authors = [f"user_{i:02d}" for i in range(18)]

    author_home: dict[str, str] = {}
    for anchor, region, members in clusters:
        author_home[anchor] = region
        for i, member in enumerate(members):
            # one member of each cluster lives elsewhere
            author_home[member] = region if i else "NO081" if region != "NO081" else "NO0A2"
    region_codes = [code for code, _, _ in [(r[0], r[1], r[2]) for r in REGIONS]]
    for author in tail_authors:
        author_home[author] = rng.choice(region_codes)

    def location_for(author: str, dice: float) -> tuple[str | None, str | None]:
        town = rng.choice(towns_by_region[author_home[author]])
        if dice < 0.06:
            return town, None  # post geo set
        if dice < 0.80:
            suffix = rng.choice(["", ", Norge", " Norge", ""])
            return None, f"{town}{suffix}"
        if dice < 0.92:
            return None, rng.choice(ILLEGIBLE_LOCATIONS)
        return None, None

    def timestamp() -> datetime:
        year = rng.choices([2018, 2019, 2020, 2021, 2022], weights=[2, 5, 5, 3, 3])[0]
        month = rng.randint(1, 10 if year == 2022 else 12)
        return datetime(
            year, month, rng.randint(1, 28), rng.randint(6, 22), rng.randint(0, 59),
            rng.randint(0, 59), tzinfo=timezone.utc,
        )

    def sentence(mood: str) -> str:
        words = {"neg": NEGATIVE_WORDS, "neu": NEUTRAL_WORDS, "pos": POSITIVE_WORDS}[mood]
        parts = [
            rng.choice(KEYWORDS),
            rng.choice(words),
            rng.choice(FILLER),
            rng.choice(words),
            rng.choice(FILLER),
        ]
        rng.shuffle(parts)
        text = " ".join(parts)
        if rng.random() < 0.25:
            text += " https://t.co/" + "".join(rng.choices("abcdefghij", k=6))
        if rng.random() < 0.15:
            text += " 😀" if mood == "pos" else " 😡"
        return text

    records: list[dict] = []
    next_id = [1]

    def add_record(author: str, kind: str, text: str, dt: datetime, **extra) -> dict:
        post_geo, user_location = location_for(author, rng.random())
        rec = {
            "id": f"d{next_id[0]:04d}",
            "author_id": f"uid_{author}",
            "author_handle": author,
            "created_at": rfc3339(dt),
            "text": text,
            "like_count": rng.randint(0, 40),
            "retweet_count": rng.randint(0, 15),
            "post_geo": post_geo,
            "user_location": user_location,
            "kind": kind,
        }
        rec.update(extra)
        records.append(rec)
        next_id[0] += 1
        return rec

    # anchors post long originals that later get retweeted
    anchor_posts: dict[str, list[dict]] = {}
    moods = {"anchor_vest": "neg", "anchor_trond": "neg", "anchor_oslo": "pos"}
    for anchor, _, _ in clusters:
        anchor_posts[anchor] = []
        for _ in range(5):
            text = sentence(moods[anchor]) + " " + sentence("neu")
            rec = add_record(anchor, "original", text, timestamp())
            anchor_posts[anchor].append(rec)

    # cluster members retweet their anchor (mostly truncated), some quote
    for anchor, _, members in clusters:
        for member in members:
            for _ in range(rng.randint(2, 3)):
                orig = rng.choice(anchor_posts[anchor])
                full = f"RT @{anchor}: {orig['text']}"
                if rng.random() < 0.7 and len(full) > 140:
                    text = full[:139] + "…"
                elif rng.random() < 0.5:
                    text = full
                else:
                    add_record(
                        member,
                        "quote",
                        f"@{anchor} {sentence(rng.choice(['neg', 'neu', 'pos']))}",
                        timestamp(),
                    )
                    continue
                add_record(member, "retweet", text, timestamp())

    # orphan truncated retweets: the original author never posts here
    for _ in range(4):
        author = rng.choice(tail_authors)
        ghost_body = sentence("neg") + " " + sentence("neu")
        text = (f"RT @ghost_writer: {ghost_body}")[:139] + "…"
        add_record(author, "retweet", text, timestamp())

    # one self-retweet, truncated, with its original present
    orig = anchor_posts["anchor_vest"][0]
    add_record(
        "anchor_vest",
        "retweet",
        (f"RT @anchor_vest: {orig['text']}")[:139] + "…",
        timestamp(),
    )

    # residue-only posts that the cleaner will drop (keyword + URL only)
    for _ in range(4):
        author = rng.choice(tail_authors)
        text = (
            rng.choice(KEYWORDS)
            + " https://t.co/"
            + "".join(rng.choices("klmnopqr", k=6))
        )
        add_record(author, "original", text, timestamp())

    # tail of ordinary originals
    while len(records) < 200:
        author = rng.choice(tail_authors)
        mood = rng.choices(["neg", "neu", "pos"], weights=[3, 5, 2])[0]
        add_record(author, "original", sentence(mood), timestamp())
    records = records[:200]

    lines = [json.dumps(rec, ensure_ascii=False) for rec in records]
    # two malformed lines and one duplicate id, exercised by quarantine
    lines.insert(37, '{"id": "broken-1", "text": "no other fields"}')
    lines.insert(91, "this is not JSON at all")
    lines.append(json.dumps({**records[0], "text": "duplicate id re-export"}, ensure_ascii=False))
    (OUT / "corpus.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # --- annotated training set (cleaned text, signature vocabulary) ---
    with open(OUT / "annotated.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "text", "label"])
        counts = {0: 44, 1: 60, 2: 24}
        row_id = 1
        for label, n in counts.items():
            words = {0: NEGATIVE_WORDS, 1: NEUTRAL_WORDS, 2: POSITIVE_WORDS}[label]
            for _ in range(n):
                tokens = rng.sample(words, k=3) + rng.choice(FILLER).split()
                rng.shuffle(tokens)
                w.writerow([f"t{row_id:04d}", " ".join(tokens), label])
                row_id += 1

    # --- survey shares (demo values, not survey publications) ----------
    with open(OUT / "survey.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region", "year", "share_negative", "source"])
        for year, share in [(2018, 0.27), (2019, 0.36), (2020, 0.44), (2021, 0.5)]:
            w.writerow(["ALL", year, share, "demo-survey"])
        for region, year, share in [
            ("NO081", 2019, 0.22),
            ("NO0A2", 2019, 0.41),
            ("NO060", 2019, 0.44),
            ("NO081", 2021, 0.3),
            ("NO0A2", 2021, 0.38),
        ]:
            w.writerow([region, year, share, "demo-survey"])

    config = """\
# demo pipeline configuration; paths are relative to this file
run_dir: runs/demo
corpus: corpus.jsonl
gazetteer: gazetteer.csv
regions: regions.csv
keywords: keywords.txt
annotated: annotated.csv
survey: survey.csv
backend: baseline
"""
    (OUT / "config.yaml").write_text(config, encoding="utf-8")
    print(f"wrote demo dataset to {OUT} ({len(records)} records)")


if __name__ == "__main__":
    main()
