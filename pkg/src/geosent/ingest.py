"""Corpus ingestion: archived record parsing and retweet repair.

Reads line-delimited post records (one JSON object per line, UTF-8),
validates them against the record contract, detects legacy-truncated
retweets and restores their text from the original post when that post
is present in the corpus. Malformed lines are reported with line
numbers, never silently dropped.

Stage output ordering is always (created_at, id) so results are
byte-identical however the input was chunked or permuted.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import requests

from .errors import InputError

log = logging.getLogger(__name__)

KINDS = ("original", "retweet", "quote")

MAX_HANDLE_LEN = 15  # platform rule

# Two accepted retweet-marker spellings: "RT @handle: body" and the
# legacy-export variant "RT : @handle body" (optionally "RT : @handle: body").
_MARKER_RE = re.compile(
    r"^RT (?:@(?P<h1>[A-Za-z0-9_]{1,15}): ?"
    r"|: ?@(?P<h2>[A-Za-z0-9_]{1,15})(?![A-Za-z0-9_]):? ?)"
)

_ELLIPSIS_SUFFIXES = ("...", "…")

# A repaired retweet body must share at least this long a prefix with the
# candidate original before we accept the match.
MIN_MATCH_PREFIX = 20

_REQUIRED_FIELDS = (
    "id",
    "author_id",
    "author_handle",
    "created_at",
    "text",
    "like_count",
    "retweet_count",
    "kind",
)
_OPTIONAL_FIELDS = ("post_geo", "user_location", "interaction_target")


@dataclass(frozen=True)
class PostRecord:
    """One microblog post as it flows through the pipeline.

    ``interaction_target`` is not part of the platform data: repair fills
    it with the original author's handle for restored retweets (whose
    text no longer carries the marker), and downstream network
    construction reads it. It round-trips through the artifact files but
    is absent from pristine input.
    """

    id: str
    author_id: str
    author_handle: str
    created_at: datetime
    text: str
    like_count: int
    retweet_count: int
    kind: str
    post_geo: Optional[str] = None
    user_location: Optional[str] = None
    interaction_target: Optional[str] = None

    def sort_key(self) -> tuple:
        return (self.created_at, self.id)

    def to_json_dict(self) -> dict:
        d = {
            "id": self.id,
            "author_id": self.author_id,
            "author_handle": self.author_handle,
            "created_at": format_rfc3339(self.created_at),
            "text": self.text,
            "like_count": self.like_count,
            "retweet_count": self.retweet_count,
            "post_geo": self.post_geo,
            "user_location": self.user_location,
            "kind": self.kind,
        }
        if self.interaction_target is not None:
            d["interaction_target"] = self.interaction_target
        return d


@dataclass
class FiltrationLedger:
    """Stage-by-stage accounting of retained vs excluded records."""

    total_in: int = 0
    excluded_no_geodata: int = 0
    excluded_illegible_geodata: int = 0
    excluded_unresolvable_retweet: int = 0
    excluded_too_short_after_clean: int = 0
    retained: int = 0

    def excluded_total(self) -> int:
        return (
            self.excluded_no_geodata
            + self.excluded_illegible_geodata
            + self.excluded_unresolvable_retweet
            + self.excluded_too_short_after_clean
        )

    def conserves(self) -> bool:
        return self.total_in == self.retained + self.excluded_total()

    def to_json_dict(self) -> dict:
        return {
            "total_in": self.total_in,
            "excluded_no_geodata": self.excluded_no_geodata,
            "excluded_illegible_geodata": self.excluded_illegible_geodata,
            "excluded_unresolvable_retweet": self.excluded_unresolvable_retweet,
            "excluded_too_short_after_clean": self.excluded_too_short_after_clean,
            "retained": self.retained,
        }


@dataclass(frozen=True)
class IngestError:
    """One rejected input line, kept for the quarantine report."""

    line_no: int
    category: str  # "malformed" | "duplicate"
    message: str
    raw_line: str


@dataclass
class CorpusReadResult:
    records: list[PostRecord]
    errors: list[IngestError] = field(default_factory=list)


@dataclass
class RepairReport:
    """Outcome counts from one repair pass (ledger delta)."""

    repaired: int = 0
    dropped_unresolvable: int = 0
    ambiguous_resolved: int = 0


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp to a UTC datetime at second precision."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp lacks a UTC offset: {value!r}")
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_rfc3339(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _validate_record(obj: dict) -> PostRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    unknown = set(obj) - set(_REQUIRED_FIELDS) - set(_OPTIONAL_FIELDS)
    if unknown:
        raise ValueError(f"unknown fields: {sorted(unknown)}")
    missing = [k for k in _REQUIRED_FIELDS if k not in obj]
    if missing:
        raise ValueError(f"missing fields: {missing}")
    for key in ("id", "author_id", "author_handle", "text", "created_at"):
        if not isinstance(obj[key], str):
            raise ValueError(f"field {key} must be a string")
    if not obj["id"]:
        raise ValueError("field id must be non-empty")
    if len(obj["author_handle"]) > MAX_HANDLE_LEN:
        raise ValueError(f"author_handle longer than {MAX_HANDLE_LEN} characters")
    for key in ("like_count", "retweet_count"):
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ValueError(f"field {key} must be a non-negative integer")
    if obj["kind"] not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    for key in _OPTIONAL_FIELDS:
        v = obj.get(key)
        if v is not None and not isinstance(v, str):
            raise ValueError(f"field {key} must be a string or null")
    created_at = parse_rfc3339(obj["created_at"])
    # repaired retweets carry interaction_target and have had their
    # marker replaced by the original text, so the marker rule applies
    # only to pristine records
    if (
        obj["kind"] == "retweet"
        and obj.get("interaction_target") is None
        and _MARKER_RE.match(obj["text"]) is None
    ):
        raise ValueError("kind is retweet but text lacks the retweet marker")
    return PostRecord(
        id=obj["id"],
        author_id=obj["author_id"],
        author_handle=obj["author_handle"],
        created_at=created_at,
        text=obj["text"],
        like_count=obj["like_count"],
        retweet_count=obj["retweet_count"],
        kind=obj["kind"],
        post_geo=obj.get("post_geo"),
        user_location=obj.get("user_location"),
        interaction_target=obj.get("interaction_target"),
    )


def read_corpus(path: str | Path) -> CorpusReadResult:
    """Read a line-delimited record archive, in file order.

    Malformed lines and duplicate ids are collected into the error
    report; the first occurrence of an id wins (archive re-exports
    commonly overlap).
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read corpus file {path}: {exc}") from exc

    records: list[PostRecord] = []
    errors: list[IngestError] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            errors.append(IngestError(line_no, "malformed", "blank line", line))
            continue
        try:
            obj = json.loads(line)
            record = _validate_record(obj)
        except ValueError as exc:
            errors.append(IngestError(line_no, "malformed", str(exc), line))
            continue
        if record.id in seen_ids:
            errors.append(
                IngestError(line_no, "duplicate", f"duplicate id {record.id}", line)
            )
            log.warning("line %d: duplicate id %s rejected", line_no, record.id)
            continue
        seen_ids.add(record.id)
        records.append(record)
    return CorpusReadResult(records=records, errors=errors)


def write_corpus(records: Iterable[PostRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def parse_retweet_marker(text: str) -> Optional[tuple[str, str]]:
    """Return (quoted handle, body after marker), or None if unmarked."""
    m = _MARKER_RE.match(text)
    if m is None:
        return None
    handle = m.group("h1") or m.group("h2")
    if m.group("h1") is not None:
        log.debug("retweet marker form 'RT @handle:' matched")
    else:
        log.debug("retweet marker form 'RT : @handle' matched")
    return handle, text[m.end():]


def _is_truncated_text(text: str) -> bool:
    return _MARKER_RE.match(text) is not None and text.endswith(_ELLIPSIS_SUFFIXES)


def detect_truncated_retweet(record: PostRecord) -> bool:
    """True iff the record's text is a legacy-truncated retweet stub."""
    return _is_truncated_text(record.text)


def _strip_ellipsis(text: str) -> str:
    if text.endswith("..."):
        return text[:-3]
    if text.endswith("…"):
        return text[:-1]
    return text


def _common_prefix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def repair_retweets(
    corpus: Sequence[PostRecord],
) -> tuple[list[PostRecord], RepairReport]:
    """Restore truncated retweets from their originals; drop orphans.

    A truncated retweet is matched to candidate originals by the quoted
    handle plus the longest common prefix of the truncated body; the
    prefix must reach MIN_MATCH_PREFIX characters. Equal-length matches
    resolve to the earliest post. The retweeting user stays the author.
    Quote posts are never treated as retweets, and a post whose own text
    is a truncated stub can never serve as an original, so repaired text
    is never a stub and a second pass is a no-op.
    """
    by_handle: dict[str, list[PostRecord]] = {}
    for rec in corpus:
        if not _is_truncated_text(rec.text):
            by_handle.setdefault(rec.author_handle.casefold(), []).append(rec)

    report = RepairReport()
    out: list[PostRecord] = []
    for rec in corpus:
        if rec.kind == "quote" or not _is_truncated_text(rec.text):
            out.append(rec)
            continue
        handle, marked_body = parse_retweet_marker(rec.text)
        body = _strip_ellipsis(marked_body)
        candidates = by_handle.get(handle.casefold(), [])
        scored = [(_common_prefix_len(body, c.text), c) for c in candidates]
        best_len = max((s for s, _ in scored), default=0)
        if best_len < MIN_MATCH_PREFIX:
            report.dropped_unresolvable += 1
            log.debug("dropping unresolvable retweet %s (best prefix %d)", rec.id, best_len)
            continue
        best = [c for s, c in scored if s == best_len]
        if len(best) > 1:
            report.ambiguous_resolved += 1
            log.info(
                "ambiguous original for retweet %s: %d candidates, keeping earliest",
                rec.id,
                len(best),
            )
        original = min(best, key=PostRecord.sort_key)
        out.append(
            replace(rec, text=original.text, interaction_target=original.author_handle)
        )
        report.repaired += 1
    out.sort(key=PostRecord.sort_key)
    return out, report


def build_keyword_query(keywords: Sequence[str], lang: str = "no") -> str:
    """Compose the archive-search query string from keyword terms."""
    joined = " OR ".join(keywords)
    return f"({joined}) lang:{lang}"


class FetchClient:
    """Optional HTTP client mapping a remote archive endpoint onto records.

    Disabled by default in the pipeline configuration; given a base URL
    and bearer token it issues GET requests and validates the response
    payload (a JSON array, or an object with a "data" array) through the
    same record contract as file ingestion.
    """

    def __init__(self, base_url: str, token: str, session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.session = session or requests.Session()

    def fetch(self, query: str, **params: str) -> CorpusReadResult:
        headers = {"Authorization": f"Bearer {self.token}"}
        resp = self.session.get(
            self.base_url, params={"query": query, **params}, headers=headers
        )
        if resp.status_code != 200:
            raise InputError(f"fetch failed with status {resp.status_code}")
        payload = resp.json()
        if isinstance(payload, dict):
            payload = payload.get("data", [])
        if not isinstance(payload, list):
            raise InputError("fetch payload is neither a list nor a data object")
        records: list[PostRecord] = []
        errors: list[IngestError] = []
        seen: set[str] = set()
        for idx, obj in enumerate(payload, start=1):
            try:
                rec = _validate_record(obj)
            except ValueError as exc:
                errors.append(IngestError(idx, "malformed", str(exc), json.dumps(obj)))
                continue
            if rec.id in seen:
                errors.append(IngestError(idx, "duplicate", f"duplicate id {rec.id}", ""))
                continue
            seen.add(rec.id)
            records.append(rec)
        return CorpusReadResult(records=records, errors=errors)
