"""Gazetteer geocoding of posts to NUTS3 regions.

Post geodata wins when it resolves; otherwise the free-text user
location is scanned for gazetteer place names as whole token sequences
(no substring hits inside words, so "os" never fires inside "oslo").
Unresolvable posts are a value, not an error: exclusion bookkeeping
happens in the pipeline ledger.
"""

from __future__ import annotations

import csv
import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import InputError
from .ingest import PostRecord

log = logging.getLogger(__name__)

# The 11 post-2020-reform counties; default region set when no regions
# file is supplied.
DEFAULT_REGIONS = {
    "NO020": "Innlandet",
    "NO060": "Trøndelag",
    "NO071": "Nordland",
    "NO074": "Troms og Finnmark",
    "NO081": "Oslo",
    "NO082": "Viken",
    "NO091": "Vestfold og Telemark",
    "NO092": "Agder",
    "NO0A1": "Rogaland",
    "NO0A2": "Vestland",
    "NO0A3": "Møre og Romsdal",
}

_WORD_RE = re.compile(r"\w+", re.UNICODE)
_SURROUND_STRIP = " \t\r\n.,;:!?\"'()[]{}<>«»/\\|-–—_"


def normalize_place(raw: str) -> str:
    """Case-fold and tidy a place string; æ/ø/å survive untouched."""
    text = unicodedata.normalize("NFKC", raw).casefold()
    text = text.strip(_SURROUND_STRIP)
    return " ".join(text.split())


def _tokens(normalized: str) -> tuple[str, ...]:
    return tuple(_WORD_RE.findall(normalized))


@dataclass(frozen=True)
class GazetteerEntry:
    place_name: str  # normalized
    region: str  # NUTS3 code
    population: int


@dataclass(frozen=True)
class GeoResolution:
    region: Optional[str]
    source: str  # "post_geo" | "user_location" | "unresolved"
    matched_name: Optional[str] = None


UNRESOLVED = GeoResolution(region=None, source="unresolved")


class Gazetteer:
    """Lookup table from normalized place names to NUTS3 regions."""

    def __init__(
        self,
        entries: Sequence[GazetteerEntry],
        region_names: Optional[dict[str, str]] = None,
        region_populations: Optional[dict[str, int]] = None,
    ):
        self.region_names = dict(region_names) if region_names else dict(DEFAULT_REGIONS)
        self.region_populations = dict(region_populations or {})
        self.entries: list[GazetteerEntry] = []
        self._by_name: dict[str, GazetteerEntry] = {}
        self._by_tokens: dict[tuple[str, ...], GazetteerEntry] = {}
        for entry in entries:
            if entry.place_name in self._by_name:
                raise InputError(f"duplicate gazetteer place name {entry.place_name!r}")
            if entry.region not in self.region_names:
                raise InputError(
                    f"gazetteer entry {entry.place_name!r} has unknown region {entry.region!r}"
                )
            self.entries.append(entry)
            self._by_name[entry.place_name] = entry
            self._by_tokens[_tokens(entry.place_name)] = entry

    @classmethod
    def load(
        cls, gazetteer_path: str | Path, regions_path: Optional[str | Path] = None
    ) -> "Gazetteer":
        """Load from delimiter-separated files (header rows required)."""
        region_names: Optional[dict[str, str]] = None
        region_pops: dict[str, int] = {}
        if regions_path is not None:
            region_names = {}
            for row_no, row in _read_csv(regions_path, ("nuts3_code", "display_name", "population")):
                region_names[row["nuts3_code"]] = row["display_name"]
                try:
                    region_pops[row["nuts3_code"]] = int(row["population"])
                except ValueError as exc:
                    raise InputError(f"{regions_path}:{row_no}: bad population") from exc
        entries = []
        for row_no, row in _read_csv(gazetteer_path, ("place_name", "nuts3_code", "population")):
            try:
                population = int(row["population"])
            except ValueError as exc:
                raise InputError(f"{gazetteer_path}:{row_no}: bad population") from exc
            if population < 0:
                raise InputError(f"{gazetteer_path}:{row_no}: negative population")
            entries.append(
                GazetteerEntry(
                    place_name=normalize_place(row["place_name"]),
                    region=row["nuts3_code"],
                    population=population,
                )
            )
        return cls(entries, region_names=region_names, region_populations=region_pops)

    def exact(self, raw: str) -> Optional[GazetteerEntry]:
        return self._by_name.get(normalize_place(raw))

    def contained(self, raw: str) -> list[GazetteerEntry]:
        """Entries whose token sequence appears contiguously in ``raw``."""
        toks = _tokens(normalize_place(raw))
        found = []
        for name_toks, entry in self._by_tokens.items():
            k = len(name_toks)
            if k == 0 or k > len(toks):
                continue
            if any(toks[i : i + k] == name_toks for i in range(len(toks) - k + 1)):
                found.append(entry)
        return found


def _read_csv(path: str | Path, required: tuple[str, ...]):
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(required) <= set(reader.fieldnames):
            raise InputError(f"{path}: header row must contain {required}")
        for row_no, row in enumerate(reader, start=2):
            if any(row.get(col) in (None, "") for col in required):
                raise InputError(f"{path}:{row_no}: missing value")
            yield row_no, row


def _select(matches: list[GazetteerEntry]) -> GazetteerEntry:
    # Longest name, then largest population, then lexicographic.
    return min(matches, key=lambda e: (-len(e.place_name), -e.population, e.place_name))


def resolve(record: PostRecord, gaz: Gazetteer) -> GeoResolution:
    """Locate one post: post geodata first, then the user location field."""
    if record.post_geo:
        entry = gaz.exact(record.post_geo)
        if entry is not None:
            return GeoResolution(entry.region, "post_geo", entry.place_name)
    if record.user_location:
        matches = gaz.contained(record.user_location)
        if matches:
            entry = _select(matches)
            return GeoResolution(entry.region, "user_location", entry.place_name)
    return UNRESOLVED


def regional_counts(
    resolved: Sequence[tuple[PostRecord, str]],
    gaz: Optional[Gazetteer] = None,
) -> dict[str, dict]:
    """Per-region post and distinct-user counts over (record, region) pairs.

    When a gazetteer with region populations is given, the population
    column is joined in. Unknown region codes mean corrupt upstream data
    and are fatal.
    """
    known = set(gaz.region_names) if gaz is not None else None
    posts: dict[str, int] = {}
    users: dict[str, set[str]] = {}
    for record, region in resolved:
        if known is not None and region not in known:
            raise InputError(f"unknown region code {region!r} in resolved corpus")
        posts[region] = posts.get(region, 0) + 1
        users.setdefault(region, set()).add(record.author_id)
    out: dict[str, dict] = {}
    for region in sorted(posts):
        row = {"posts": posts[region], "users": len(users[region])}
        if gaz is not None and region in gaz.region_populations:
            row["population"] = gaz.region_populations[region]
        out[region] = row
    return out
