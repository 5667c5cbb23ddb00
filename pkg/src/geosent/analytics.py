"""Aggregate statistics: user activity, sentiment series, survey deltas.

All aggregations are associative reductions over records, so results
are invariant under input permutation; every writer emits sorted rows
with full float precision (display rounding happens only in the report
command).
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import InputError
from .ingest import PostRecord
from .textprep import CleanedDocument

log = logging.getLogger(__name__)

ALL_REGION = "ALL"


@dataclass(frozen=True)
class YearlyUserStats:
    year: int
    tweet_count: int
    new_users: int
    active_users: int
    share_new: float
    tweets_per_user: float
    partial_year: bool = False


@dataclass(frozen=True)
class RegionTimeSeries:
    region: str  # NUTS3 code or ALL
    period: str  # "YYYY" or "YYYY-MM"
    negative_count: int
    non_negative_count: int
    share_negative: Optional[float]


@dataclass(frozen=True)
class SurveyComparison:
    region: str
    year: int
    twitter_share_negative: float
    survey_share_negative: float
    delta: float


@dataclass(frozen=True)
class SurveyRow:
    region: str
    year: int
    share_negative: float
    source: str


@dataclass(frozen=True)
class LabeledPost:
    """Join of a post's timestamp, resolved region, and binary label."""

    post_id: str
    created_at: datetime
    region: str
    negative: bool


@dataclass(frozen=True)
class TrendPoint:
    period: str
    value: Optional[float]


@dataclass
class CoverageReport:
    unmatched_twitter: list[tuple[str, int]]
    unmatched_survey: list[tuple[str, int]]


def derive_user_stats(
    tweet_count: int, new_users: int, active_users: int
) -> tuple[float, float]:
    """Derived columns for one year of user activity."""
    if active_users <= 0:
        raise ValueError("active_users must be positive")
    if new_users > active_users:
        raise ValueError("new_users cannot exceed active_users")
    return new_users / active_users, tweet_count / active_users


def yearly_user_stats(corpus: Sequence[PostRecord]) -> list[YearlyUserStats]:
    """Per-calendar-year (UTC) activity totals and derived shares.

    A new user is an author with no post in any earlier year. The final
    year is flagged partial when the last post predates December, since
    collection evidently stopped mid-year.
    """
    if not corpus:
        return []
    per_year_posts: Counter[int] = Counter()
    per_year_authors: dict[int, set[str]] = {}
    for rec in corpus:
        year = rec.created_at.year
        per_year_posts[year] += 1
        per_year_authors.setdefault(year, set()).add(rec.author_id)
    max_ts = max(rec.created_at for rec in corpus)
    seen: set[str] = set()
    out = []
    for year in sorted(per_year_posts):
        authors = per_year_authors[year]
        new = len(authors - seen)
        seen |= authors
        share_new, per_user = derive_user_stats(per_year_posts[year], new, len(authors))
        out.append(
            YearlyUserStats(
                year=year,
                tweet_count=per_year_posts[year],
                new_users=new,
                active_users=len(authors),
                share_new=share_new,
                tweets_per_user=per_user,
                partial_year=(year == max_ts.year and max_ts.month < 12),
            )
        )
    return out


def _period_key(dt: datetime, granularity: str) -> str:
    if granularity == "year":
        return f"{dt.year:04d}"
    if granularity == "month":
        return f"{dt.year:04d}-{dt.month:02d}"
    raise ValueError(f"unknown granularity {granularity!r}")


def _period_range(first: str, last: str, granularity: str) -> list[str]:
    if granularity == "year":
        return [f"{y:04d}" for y in range(int(first), int(last) + 1)]
    y, m = int(first[:4]), int(first[5:7])
    y2, m2 = int(last[:4]), int(last[5:7])
    periods = []
    while (y, m) <= (y2, m2):
        periods.append(f"{y:04d}-{m:02d}")
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return periods


def sentiment_series(
    posts: Sequence[LabeledPost], granularity: str, region: str = ALL_REGION
) -> list[RegionTimeSeries]:
    """Gap-free negative/non-negative counts per period for one region.

    Periods between the first and last post of the filtered set are all
    emitted; empty ones carry zero counts and a null share.
    """
    if region == ALL_REGION:
        selected = list(posts)
    else:
        selected = [p for p in posts if p.region == region]
    if not selected:
        return []
    neg: Counter[str] = Counter()
    nonneg: Counter[str] = Counter()
    for p in selected:
        key = _period_key(p.created_at, granularity)
        if p.negative:
            neg[key] += 1
        else:
            nonneg[key] += 1
    keys = sorted(set(neg) | set(nonneg))
    out = []
    for period in _period_range(keys[0], keys[-1], granularity):
        n, nn = neg.get(period, 0), nonneg.get(period, 0)
        total = n + nn
        out.append(
            RegionTimeSeries(
                region=region,
                period=period,
                negative_count=n,
                non_negative_count=nn,
                share_negative=(n / total) if total else None,
            )
        )
    return out


def user_frequency_distribution(corpus: Sequence[PostRecord]) -> dict[int, int]:
    """Histogram of posts-per-author: bucket size -> author count."""
    per_author: Counter[str] = Counter(rec.author_id for rec in corpus)
    dist: Counter[int] = Counter(per_author.values())
    return dict(sorted(dist.items()))


def normalized_regional_trends(
    series: Sequence[RegionTimeSeries],
) -> dict[str, list[TrendPoint]]:
    """Scale each region's per-period volume by its grand total.

    Regions with zero volume come back all-null with a warning; at least
    one region must have volume.
    """
    by_region: dict[str, list[RegionTimeSeries]] = {}
    for row in series:
        by_region.setdefault(row.region, []).append(row)
    totals = {
        region: sum(r.negative_count + r.non_negative_count for r in rows)
        for region, rows in by_region.items()
    }
    if not any(total > 0 for total in totals.values()):
        raise ValueError("no region with nonzero volume")
    out: dict[str, list[TrendPoint]] = {}
    for region in sorted(by_region):
        rows = sorted(by_region[region], key=lambda r: r.period)
        total = totals[region]
        if total == 0:
            log.warning("region %s has zero volume; emitting null trend", region)
            out[region] = [TrendPoint(r.period, None) for r in rows]
        else:
            out[region] = [
                TrendPoint(r.period, (r.negative_count + r.non_negative_count) / total)
                for r in rows
            ]
    return out


def read_survey_file(path: str | Path) -> list[SurveyRow]:
    """Survey shares: columns region, year, share_negative, source."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot read survey file {path}: {exc}") from exc
    rows = []
    with fh:
        reader = csv.DictReader(fh)
        required = {"region", "year", "share_negative", "source"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise InputError(f"{path}: header must contain {sorted(required)}")
        for row_no, row in enumerate(reader, start=2):
            try:
                year = int(row["year"])
                share = float(row["share_negative"])
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{row_no}: bad year or share") from exc
            if not (0.0 <= share <= 1.0):
                raise InputError(f"{path}:{row_no}: share_negative outside [0,1]")
            rows.append(SurveyRow(row["region"], year, share, row["source"]))
    return rows


def survey_delta(
    twitter: Sequence[RegionTimeSeries], survey: Sequence[SurveyRow]
) -> tuple[list[SurveyComparison], CoverageReport]:
    """Inner-join yearly twitter shares with survey shares on (region, year)."""
    twitter_shares: dict[tuple[str, int], float] = {}
    for row in twitter:
        if row.share_negative is not None:
            twitter_shares[(row.region, int(row.period))] = row.share_negative
    survey_shares = {(r.region, r.year): r.share_negative for r in survey}
    comparisons = []
    for key in sorted(set(twitter_shares) & set(survey_shares)):
        t, s = twitter_shares[key], survey_shares[key]
        comparisons.append(SurveyComparison(key[0], key[1], t, s, t - s))
    coverage = CoverageReport(
        unmatched_twitter=sorted(set(twitter_shares) - set(survey_shares)),
        unmatched_survey=sorted(set(survey_shares) - set(twitter_shares)),
    )
    return comparisons, coverage


def monthly_token_counts(
    docs: Iterable[tuple[str, CleanedDocument]],
) -> list[tuple[str, str, int]]:
    """Plain (month, token, count) rows, sorted."""
    counts: Counter[tuple[str, str]] = Counter()
    for month, doc in docs:
        for token in doc.tokens:
            counts[(month, token)] += 1
    return [(m, t, c) for (m, t), c in sorted(counts.items())]


# ---------------------------------------------------------------------
# CSV writers (full precision; headers mirror the type fields)
# ---------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_user_stats_csv(stats: Sequence[YearlyUserStats], path: str | Path) -> None:
    _write_rows(
        path,
        ["year", "tweet_count", "new_users", "active_users", "share_new", "tweets_per_user", "partial_year"],
        [
            (s.year, s.tweet_count, s.new_users, s.active_users, s.share_new, s.tweets_per_user, s.partial_year)
            for s in stats
        ],
    )


def write_series_csv(series: Sequence[RegionTimeSeries], path: str | Path) -> None:
    _write_rows(
        path,
        ["region", "period", "negative_count", "non_negative_count", "share_negative"],
        [
            (r.region, r.period, r.negative_count, r.non_negative_count, r.share_negative)
            for r in series
        ],
    )


def write_series_long_csv(series: Sequence[RegionTimeSeries], path: str | Path) -> None:
    """Plot-ready long format: one row per (region, period, category)."""
    rows = []
    for r in series:
        total = r.negative_count + r.non_negative_count
        rows.append(
            (r.region, r.period, "negative", r.negative_count,
             (r.negative_count / total) if total else None)
        )
        rows.append(
            (r.region, r.period, "non_negative", r.non_negative_count,
             (r.non_negative_count / total) if total else None)
        )
    _write_rows(path, ["region", "period", "category", "count", "share"], rows)


def write_frequency_csv(dist: dict[int, int], path: str | Path) -> None:
    _write_rows(path, ["posts_per_user", "user_count"], sorted(dist.items()))


def write_trends_csv(trends: dict[str, list[TrendPoint]], path: str | Path) -> None:
    rows = []
    for region in sorted(trends):
        for point in trends[region]:
            rows.append((region, point.period, point.value))
    _write_rows(path, ["region", "period", "normalized_volume"], rows)


def write_survey_delta_csv(comparisons: Sequence[SurveyComparison], path: str | Path) -> None:
    _write_rows(
        path,
        ["region", "year", "twitter_share_negative", "survey_share_negative", "delta"],
        [
            (c.region, c.year, c.twitter_share_negative, c.survey_share_negative, c.delta)
            for c in comparisons
        ],
    )


def write_coverage_csv(coverage: CoverageReport, path: str | Path) -> None:
    rows = [("twitter_only", r, y) for r, y in coverage.unmatched_twitter]
    rows += [("survey_only", r, y) for r, y in coverage.unmatched_survey]
    _write_rows(path, ["side", "region", "year"], rows)


def write_regional_counts_csv(counts: dict[str, dict], path: str | Path) -> None:
    rows = []
    for region in sorted(counts):
        row = counts[region]
        rows.append((region, row["posts"], row["users"], row.get("population")))
    _write_rows(path, ["region", "posts", "users", "population"], rows)


def write_token_counts_csv(rows: Sequence[tuple[str, str, int]], path: str | Path) -> None:
    _write_rows(path, ["month", "token", "count"], rows)
