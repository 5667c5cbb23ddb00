"""Shared fixtures: record factories and synthetic corpus generators."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from geosent.geocode import Gazetteer, GazetteerEntry, resolve
from geosent.ingest import PostRecord, FiltrationLedger, repair_retweets
from geosent.textprep import clean

BASE_TS = datetime(2019, 1, 1, tzinfo=timezone.utc)


def make_record(
    id="p1",
    author_id="u1",
    author_handle="user1",
    created_at=BASE_TS,
    text="vindkraft er et tema som engasjerer mange i hele landet",
    like_count=0,
    retweet_count=0,
    kind="original",
    post_geo=None,
    user_location=None,
    interaction_target=None,
) -> PostRecord:
    return PostRecord(
        id=id,
        author_id=author_id,
        author_handle=author_handle,
        created_at=created_at,
        text=text,
        like_count=like_count,
        retweet_count=retweet_count,
        kind=kind,
        post_geo=post_geo,
        user_location=user_location,
        interaction_target=interaction_target,
    )


@pytest.fixture
def tiny_gazetteer() -> Gazetteer:
    return Gazetteer(
        [
            GazetteerEntry("oslo", "NO081", 699827),
            GazetteerEntry("bergen", "NO0A2", 285911),
            GazetteerEntry("tromsø", "NO074", 77544),
            GazetteerEntry("trondheim", "NO060", 210496),
            GazetteerEntry("os", "NO020", 1950),
            GazetteerEntry("mo i rana", "NO071", 26184),
        ]
    )


_LONG_BODIES = [
    "turbinene i fjellheimen endrer landskapet for alltid og mange reagerer kraftig på inngrepene",
    "debatten om konsesjoner i kommunestyret fortsetter med nye innspill fra begge sider av saken",
    "rapporten fra direktoratet viser at utbyggingen gir både kraft og konflikter i lokalsamfunnene",
    "folkemøtet om vindparken samlet flere hundre engasjerte innbyggere fra hele distriktet i går",
    "planene for anlegget på øya møter motstand fra naturvernere og lokale hytteeiere i området",
]

_LOCATIONS = ["Oslo", "Bergen", "Tromsø", None, "the couch", "et sted", "Trondheim, Norge"]


def random_corpus(rng: random.Random, size: int) -> list[PostRecord]:
    """Corpus with randomized geodata and retweet noise for property tests.

    Roughly a third of retweets are truncated; originals for most of
    them exist in the corpus, the rest are orphans.
    """
    records: list[PostRecord] = []
    originals: list[PostRecord] = []
    n_authors = max(2, size // 5)
    for i in range(size):
        author = rng.randrange(n_authors)
        ts = BASE_TS + timedelta(hours=rng.randrange(24 * 365 * 3), seconds=rng.randrange(60))
        roll = rng.random()
        post_geo = rng.choice([None, None, None, "Oslo", "Bergen"])
        user_location = rng.choice(_LOCATIONS)
        if roll > 0.93 and originals:
            # residue that the cleaner drops: URL and emoji only
            rec = make_record(
                id=f"r{i:05d}",
                author_id=f"a{author}",
                author_handle=f"h{author}",
                created_at=ts,
                text="https://t.co/" + "".join(rng.choices("abcxyz", k=6)) + " 😀",
                kind="original",
                post_geo=post_geo,
                user_location=user_location,
            )
            records.append(rec)
            continue
        if roll < 0.55 or not originals:
            body = rng.choice(_LONG_BODIES)
            rec = make_record(
                id=f"r{i:05d}",
                author_id=f"a{author}",
                author_handle=f"h{author}",
                created_at=ts,
                text=f"vindkraft {i} {body}",
                kind="original",
                post_geo=post_geo,
                user_location=user_location,
            )
            originals.append(rec)
        elif roll < 0.8:
            orig = rng.choice(originals)
            full = f"RT @{orig.author_handle}: {orig.text}"
            if rng.random() < 0.5 and len(full) > 140:
                text = full[:139] + "…"
            else:
                text = full
            rec = make_record(
                id=f"r{i:05d}",
                author_id=f"a{author}",
                author_handle=f"h{author}",
                created_at=ts,
                text=text,
                kind="retweet",
                post_geo=post_geo,
                user_location=user_location,
            )
        elif roll < 0.9:
            text = f"RT @absent{rng.randrange(99)}: denne originale meldingen finnes ikke lenger i arkivet noensinne…"
            rec = make_record(
                id=f"r{i:05d}",
                author_id=f"a{author}",
                author_handle=f"h{author}",
                created_at=ts,
                text=text,
                kind="retweet",
                post_geo=post_geo,
                user_location=user_location,
            )
        else:
            target = rng.randrange(n_authors)
            rec = make_record(
                id=f"r{i:05d}",
                author_id=f"a{author}",
                author_handle=f"h{author}",
                created_at=ts,
                text=f"@h{target} {rng.choice(_LONG_BODIES)}",
                kind="quote",
                post_geo=post_geo,
                user_location=user_location,
            )
        records.append(rec)
    return records


def run_filtration(
    records: list[PostRecord],
    gaz: Gazetteer,
    stopwords: frozenset[str] = frozenset(),
    keywords: frozenset[str] = frozenset(),
):
    """In-memory repair -> geocode -> clean, mirroring the CLI stages."""
    repaired, report = repair_retweets(records)
    ledger = FiltrationLedger(
        total_in=len(records),
        excluded_unresolvable_retweet=report.dropped_unresolvable,
    )
    survivors = []
    for rec in repaired:
        res = resolve(rec, gaz)
        if res.region is None:
            if not rec.post_geo and not rec.user_location:
                ledger.excluded_no_geodata += 1
            else:
                ledger.excluded_illegible_geodata += 1
            continue
        doc = clean(rec.text, stopwords, keywords, post_id=rec.id)
        if doc is None:
            ledger.excluded_too_short_after_clean += 1
            continue
        survivors.append((rec, res.region, doc))
    ledger.retained = len(survivors)
    return survivors, ledger
