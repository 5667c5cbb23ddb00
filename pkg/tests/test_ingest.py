"""Ingestion: parsing, truncation detection, retweet repair."""

from __future__ import annotations

import json
import random
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geosent.errors import InputError
from geosent.ingest import (
    FetchClient,
    build_keyword_query,
    detect_truncated_retweet,
    parse_rfc3339,
    read_corpus,
    repair_retweets,
    write_corpus,
)

from conftest import BASE_TS, make_record, random_corpus


def _write_lines(tmp_path, lines):
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _record_line(**kwargs):
    return json.dumps(make_record(**kwargs).to_json_dict(), ensure_ascii=False)


class TestReadCorpus:
    def test_three_well_formed_lines(self, tmp_path):
        path = _write_lines(
            tmp_path,
            [_record_line(id=f"p{i}") for i in range(3)],
        )
        result = read_corpus(path)
        assert len(result.records) == 3
        assert result.errors == []
        assert [r.id for r in result.records] == ["p0", "p1", "p2"]

    def test_truncated_line_reported_with_line_number(self, tmp_path):
        good = _record_line()
        path = _write_lines(tmp_path, [_record_line(id="a"), _record_line(id="b"), good[:40]])
        result = read_corpus(path)
        assert len(result.records) == 2
        assert len(result.errors) == 1
        assert result.errors[0].line_no == 3
        assert result.errors[0].category == "malformed"

    def test_duplicate_id_keeps_first(self, tmp_path):
        path = _write_lines(
            tmp_path,
            [_record_line(id="x", text="first – long enough text here"),
             _record_line(id="x", text="second version of the text")],
        )
        result = read_corpus(path)
        assert len(result.records) == 1
        assert "first" in result.records[0].text
        assert result.errors[0].category == "duplicate"
        assert result.errors[0].line_no == 2

    def test_unreadable_file_is_fatal(self, tmp_path):
        with pytest.raises(InputError):
            read_corpus(tmp_path / "missing.jsonl")

    def test_validation_rules(self, tmp_path):
        rec = make_record().to_json_dict()
        bad_lines = [
            json.dumps({**rec, "like_count": -1}),
            json.dumps({**rec, "kind": "repost"}),
            json.dumps({**rec, "author_handle": "x" * 16}),
            json.dumps({**rec, "created_at": "not a date"}),
            json.dumps({**rec, "created_at": 1591005600}),
            json.dumps({**rec, "surprise": 1}),
            json.dumps({**rec, "kind": "retweet", "text": "no marker here at all"}),
            "",
        ]
        path = _write_lines(tmp_path, bad_lines)
        result = read_corpus(path)
        assert result.records == []
        assert len(result.errors) == len(bad_lines)

    def test_round_trip(self, tmp_path):
        records = random_corpus(random.Random(5), 40)
        path = tmp_path / "out.jsonl"
        write_corpus(records, path)
        back = read_corpus(path)
        assert back.errors == []
        assert back.records == records


class TestParseRfc3339:
    def test_z_suffix_and_offset(self):
        a = parse_rfc3339("2020-06-01T12:00:00Z")
        b = parse_rfc3339("2020-06-01T14:00:00+02:00")
        assert a == b

    def test_naive_rejected(self):
        with pytest.raises(ValueError):
            parse_rfc3339("2020-06-01T12:00:00")


class TestDetectTruncatedRetweet:
    def test_marker_with_unicode_ellipsis(self):
        rec = make_record(text="RT @user1: great point about…", kind="retweet")
        assert detect_truncated_retweet(rec) is True

    def test_complete_retweet_not_truncated(self):
        rec = make_record(text="RT @user1: complete short retweet.", kind="retweet")
        assert detect_truncated_retweet(rec) is False

    def test_no_marker_prefix(self):
        rec = make_record(text="I disagree with @user1...")
        assert detect_truncated_retweet(rec) is False

    def test_three_dot_suffix(self):
        rec = make_record(text="RT @user1: cut off content here...", kind="retweet")
        assert detect_truncated_retweet(rec) is True

    def test_legacy_marker_form(self):
        rec = make_record(text="RT : @user1 cut off content here…", kind="retweet")
        assert detect_truncated_retweet(rec) is True

    def test_handle_too_long(self):
        rec = make_record(text="RT @abcdefghijklmnop: something trailing off…")
        assert detect_truncated_retweet(rec) is False

    def test_handle_too_long_legacy_form(self):
        rec = make_record(text="RT : @abcdefghijklmnop something trailing off…")
        assert detect_truncated_retweet(rec) is False

    def test_pure_function_of_text(self):
        text = "RT @user1: something trailing off…"
        variants = [
            make_record(text=text, kind="retweet"),
            make_record(text=text, kind="quote", author_id="zz", like_count=99),
        ]
        assert len({detect_truncated_retweet(r) for r in variants}) == 1


def _original_and_truncated(body: str, rt_id="rt1", orig_id="o1"):
    orig = make_record(
        id=orig_id, author_id="orig_author", author_handle="origh", text=body,
        created_at=BASE_TS,
    )
    full = f"RT @origh: {body}"
    trunc = make_record(
        id=rt_id,
        author_id="rt_author",
        author_handle="rth",
        text=full[:139] + "…",
        kind="retweet",
        created_at=BASE_TS + timedelta(days=1),
    )
    return orig, trunc


LONG_BODY = (
    "vindkraft er blitt den mest omdiskuterte saken i kommunen etter at planene "
    "for anlegget ble kjent for innbyggerne i fjor høst"
)


class TestRepairRetweets:
    def test_repaired_to_exact_original_text(self):
        orig, trunc = _original_and_truncated(LONG_BODY)
        out, report = repair_retweets([orig, trunc])
        assert report.dropped_unresolvable == 0
        assert report.repaired == 1
        repaired = next(r for r in out if r.id == "rt1")
        assert repaired.text == orig.text
        assert repaired.author_id == "rt_author"  # retweeter keeps authorship
        assert repaired.kind == "retweet"
        assert repaired.interaction_target == "origh"

    def test_orphan_dropped(self):
        _, trunc = _original_and_truncated(LONG_BODY)
        out, report = repair_retweets([trunc])
        assert out == []
        assert report.dropped_unresolvable == 1

    def test_no_retweets_identity(self):
        records = [make_record(id=f"p{i}", text=f"original number {i} with some text") for i in range(5)]
        out, report = repair_retweets(records)
        assert sorted(out, key=lambda r: r.id) == records
        assert report.repaired == 0
        assert report.dropped_unresolvable == 0

    def test_quote_never_treated_as_retweet(self):
        from dataclasses import replace

        orig, trunc = _original_and_truncated(LONG_BODY)
        quote = replace(trunc, kind="quote", id="q1")
        out, report = repair_retweets([orig, quote])
        assert report.repaired == 0
        assert any(r.id == "q1" and r.text == quote.text for r in out)

    def test_ambiguous_match_earliest_wins(self):
        body = LONG_BODY
        first = make_record(
            id="o1", author_handle="origh", author_id="oa", text=body, created_at=BASE_TS
        )
        repost = make_record(
            id="o2", author_handle="origh", author_id="oa", text=body,
            created_at=BASE_TS + timedelta(days=2),
        )
        trunc = make_record(
            id="rt1", author_handle="rth", author_id="ra", kind="retweet",
            text=(f"RT @origh: {body}")[:139] + "…",
            created_at=BASE_TS + timedelta(days=3),
        )
        out, report = repair_retweets([repost, first, trunc])
        assert report.ambiguous_resolved == 1
        assert report.repaired == 1

    def test_short_shared_prefix_is_orphan(self):
        orig = make_record(
            id="o1", author_handle="origh", author_id="oa",
            text="helt annen tekst som ikke deler prefiks med stubben i det hele tatt",
        )
        trunc = make_record(
            id="rt1", author_handle="rth", author_id="ra", kind="retweet",
            text="RT @origh: dette er en stubbe som ikke matcher originalen overhodet…",
        )
        out, report = repair_retweets([orig, trunc])
        assert report.dropped_unresolvable == 1
        assert [r.id for r in out] == ["o1"]

    def test_output_sorted_by_created_at_then_id(self):
        records = random_corpus(random.Random(11), 60)
        out, _ = repair_retweets(records)
        assert out == sorted(out, key=lambda r: (r.created_at, r.id))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 200), st.integers(0, 2**32 - 1))
def test_repair_conservation_and_idempotence(size, seed):
    records = random_corpus(random.Random(seed), size)
    out, report = repair_retweets(records)
    assert len(records) == len(out) + report.dropped_unresolvable
    again, second = repair_retweets(out)
    assert again == out
    assert second.dropped_unresolvable == 0
    assert second.repaired == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 150), st.integers(0, 2**32 - 1))
def test_repair_author_preservation_and_permutation(size, seed):
    rng = random.Random(seed)
    records = random_corpus(rng, size)
    out, _ = repair_retweets(records)
    from collections import Counter

    in_authors = Counter(r.author_id for r in records)
    out_authors = Counter(r.author_id for r in out)
    assert all(out_authors[a] <= in_authors[a] for a in out_authors)

    shuffled = records[:]
    rng.shuffle(shuffled)
    out2, _ = repair_retweets(shuffled)
    assert out2 == out


def test_filtration_ledger_mirrors_flowchart_proportions(tiny_gazetteer):
    """A 1000-record corpus shaped like the published filtration flow.

    Scaled from the reported stage counts (127668 in, 33758 without
    geodata, 23652 illegible, 68829 retained): the ledger must conserve
    and land on the engineered stage totals exactly.
    """
    from conftest import run_filtration

    body = "utbyggingen av anlegget i fjellheimen skaper fortsatt kraftig debatt i kommunen"
    records = []
    i = 0

    def add(**kwargs):
        nonlocal i
        records.append(make_record(id=f"f{i:04d}", author_id=f"u{i % 97}", **kwargs))
        i += 1

    for _ in range(539):
        add(text=f"{body} nr {i}", user_location="Oslo")
    for _ in range(264):
        add(text=f"{body} nr {i}")
    for _ in range(185):
        add(text=f"{body} nr {i}", user_location="the couch")
    for _ in range(8):
        add(
            text=f"RT @absent{i}: en original som aldri ble arkivert og ikke kan hentes frem…",
            kind="retweet",
            user_location="Oslo",
        )
    for _ in range(4):
        add(text="https://t.co/xyzabc", user_location="Oslo")

    _, ledger = run_filtration(records, tiny_gazetteer)
    assert ledger.total_in == 1000
    assert ledger.excluded_no_geodata == 264
    assert ledger.excluded_illegible_geodata == 185
    assert ledger.excluded_unresolvable_retweet == 8
    assert ledger.excluded_too_short_after_clean == 4
    assert ledger.retained == 539
    assert ledger.conserves()
    assert ledger.retained / ledger.total_in == pytest.approx(68829 / 127668, abs=0.01)


class TestFetchClient:
    class _StubSession:
        def __init__(self, payload, status=200):
            self.payload = payload
            self.status = status
            self.calls = []

        def get(self, url, params=None, headers=None):
            self.calls.append((url, params, headers))
            stub = self

            class _Resp:
                status_code = stub.status

                def json(self):
                    return stub.payload

            return _Resp()

    def test_fetch_maps_onto_records(self):
        payload = {"data": [make_record(id="f1").to_json_dict(), {"id": "bad"}]}
        session = self._StubSession(payload)
        client = FetchClient("https://archive.example/search", "tok", session=session)
        result = client.fetch(build_keyword_query(["vindkraft", "havvind"]))
        assert [r.id for r in result.records] == ["f1"]
        assert len(result.errors) == 1
        url, params, headers = session.calls[0]
        assert params["query"] == "(vindkraft OR havvind) lang:no"
        assert headers["Authorization"] == "Bearer tok"

    def test_fetch_http_error(self):
        session = self._StubSession([], status=500)
        client = FetchClient("https://archive.example", "tok", session=session)
        with pytest.raises(InputError):
            client.fetch("q")
