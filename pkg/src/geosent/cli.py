"""Pipeline command line: stage subcommands over a run directory.

Each stage reads the previous stage's artifacts from the run directory,
writes its own, and updates the run manifest. Artifacts are plain files
so a run can be inspected and diffed; rerunning with identical inputs
and config reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import analytics, geocode, netstats
from .classify import (
    AdapterClient,
    BaselineConfig,
    BaselineModel,
    BinaryLabel,
    Prediction,
    classify_corpus,
    evaluate,
    merge_to_binary,
    read_annotated_file,
    sample_random,
    select_least_certain,
    stratified_split,
    train_baseline,
    transport_from_config,
    write_annotated_file,
)
from .config import RunConfig, load_config
from .errors import AdapterError, ConfigError, InputError, StageOrderError
from .ingest import (
    FiltrationLedger,
    PostRecord,
    parse_rfc3339,
    read_corpus,
    repair_retweets,
    write_corpus,
)
from .ingest import _validate_record as record_from_dict  # artifact round-trip
from .manifest import RunManifest
from .textprep import CleanedDocument, clean, load_terms

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_STAGE_ORDER = 4
EXIT_ADAPTER = 5

A_QUARANTINE = "quarantine.jsonl"
A_INGESTED = "corpus_ingested.jsonl"
A_LEDGER = "ledger.json"
A_GEOCODED = "corpus_geocoded.jsonl"
A_CLEAN = "corpus_clean.jsonl"
A_MODEL = "model_baseline.json"
A_TRAIN_METRICS = "train_metrics.json"
A_PREDICTIONS = "predictions.csv"
A_SAMPLE = "annotation_sample.csv"
A_REGIONAL_COUNTS = "regional_counts.csv"
A_USER_STATS = "user_stats_yearly.csv"
A_SENT_YEARLY = "sentiment_yearly.csv"
A_SENT_MONTHLY = "sentiment_monthly.csv"
A_SENT_YEARLY_LONG = "sentiment_yearly_long.csv"
A_SENT_MONTHLY_LONG = "sentiment_monthly_long.csv"
A_FREQUENCY = "user_frequency.csv"
A_TRENDS = "normalized_trends.csv"
A_SURVEY_DELTA = "survey_delta.csv"
A_SURVEY_COVERAGE = "survey_coverage.csv"
A_TOKEN_COUNTS = "token_counts_monthly.csv"
A_GRAPH = "graph.graphml"
A_COMMUNITIES = "communities.csv"
A_ASSOCIATION = "association.csv"
A_ASSOC_SUMMARY = "association_summary.json"


def _require(cfg: RunConfig, artifact: str, producer: str) -> Path:
    path = cfg.run_dir / artifact
    if not path.exists():
        raise StageOrderError(
            f"stage order violation: {artifact} missing, run 'geosent {producer}' first"
        )
    return path


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _manifest(cfg: RunConfig) -> RunManifest:
    cfg.run_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(cfg.run_dir)
    manifest.set_config(cfg.canonical_hash(), cfg.seeds())
    return manifest


def _finish(manifest: RunManifest, stage: str, counts: dict, artifacts: Sequence[Path]) -> None:
    for path in artifacts:
        manifest.record_artifact(path)
    manifest.record_stage(stage, counts)
    manifest.save()


def _parse_window_bound(raw: str, end: bool) -> datetime:
    try:
        return parse_rfc3339(raw)
    except ValueError:
        pass
    try:
        day = datetime.strptime(raw, "%Y-%m-%d")
    except ValueError as exc:
        raise ConfigError(f"bad window bound {raw!r}") from exc
    if end:
        day = day.replace(hour=23, minute=59, second=59)
    return day.replace(tzinfo=timezone.utc)


# ---------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------


def stage_ingest(cfg: RunConfig) -> None:
    if cfg.corpus is None:
        raise ConfigError("config key 'corpus' is required for ingest")
    result = read_corpus(cfg.corpus)
    records = result.records
    if cfg.window_start or cfg.window_end:
        lo = _parse_window_bound(cfg.window_start, end=False) if cfg.window_start else None
        hi = _parse_window_bound(cfg.window_end, end=True) if cfg.window_end else None
        records = [
            r
            for r in records
            if (lo is None or r.created_at >= lo) and (hi is None or r.created_at <= hi)
        ]
    repaired, report = repair_retweets(records)
    ledger = FiltrationLedger(
        total_in=len(records),
        excluded_unresolvable_retweet=report.dropped_unresolvable,
    )

    manifest = _manifest(cfg)
    manifest.record_input("corpus", cfg.corpus)
    out = cfg.run_dir / A_INGESTED
    write_corpus(repaired, out)
    quarantine = cfg.run_dir / A_QUARANTINE
    with open(quarantine, "w", encoding="utf-8", newline="\n") as fh:
        for err in result.errors:
            fh.write(
                json.dumps(
                    {
                        "line_no": err.line_no,
                        "category": err.category,
                        "message": err.message,
                        "raw_line": err.raw_line,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    ledger_path = cfg.run_dir / A_LEDGER
    _write_json(ledger_path, ledger.to_json_dict())
    _finish(
        manifest,
        "ingest",
        {
            "parsed": len(records),
            "malformed": sum(1 for e in result.errors if e.category == "malformed"),
            "duplicates": sum(1 for e in result.errors if e.category == "duplicate"),
            "repaired": report.repaired,
            "dropped_unresolvable": report.dropped_unresolvable,
            "ambiguous_resolved": report.ambiguous_resolved,
        },
        [out, quarantine, ledger_path],
    )
    log.info(
        "ingest: %d parsed, %d repaired, %d dropped, %d quarantined",
        len(records),
        report.repaired,
        report.dropped_unresolvable,
        len(result.errors),
    )


def _load_ingested(cfg: RunConfig) -> list[PostRecord]:
    path = _require(cfg, A_INGESTED, "ingest")
    result = read_corpus(path)
    if result.errors:
        raise InputError(f"{path} is corrupt: line {result.errors[0].line_no}")
    return result.records


def _load_gazetteer(cfg: RunConfig) -> geocode.Gazetteer:
    if cfg.gazetteer is None:
        raise ConfigError("config key 'gazetteer' is required for geocode")
    return geocode.Gazetteer.load(cfg.gazetteer, cfg.regions)


def stage_geocode(cfg: RunConfig) -> None:
    records = _load_ingested(cfg)
    gaz = _load_gazetteer(cfg)
    manifest = _manifest(cfg)
    manifest.record_input("gazetteer", cfg.gazetteer)
    if cfg.regions is not None:
        manifest.record_input("regions", cfg.regions)

    resolved: list[tuple[PostRecord, geocode.GeoResolution]] = []
    no_geodata = 0
    illegible = 0
    for rec in records:
        res = geocode.resolve(rec, gaz)
        if res.region is not None:
            resolved.append((rec, res))
        elif not rec.post_geo and not rec.user_location:
            no_geodata += 1
        else:
            illegible += 1

    out = cfg.run_dir / A_GEOCODED
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for rec, res in resolved:
            obj = rec.to_json_dict()
            obj["region"] = res.region
            obj["geo_source"] = res.source
            obj["matched_name"] = res.matched_name
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")

    counts = geocode.regional_counts([(rec, res.region) for rec, res in resolved], gaz)
    counts_path = cfg.run_dir / A_REGIONAL_COUNTS
    analytics.write_regional_counts_csv(counts, counts_path)

    ledger_path = _require(cfg, A_LEDGER, "ingest")
    ledger = json.loads(ledger_path.read_text(encoding="utf-8"))
    ledger["excluded_no_geodata"] = no_geodata
    ledger["excluded_illegible_geodata"] = illegible
    _write_json(ledger_path, ledger)

    _finish(
        manifest,
        "geocode",
        {"resolved": len(resolved), "no_geodata": no_geodata, "illegible": illegible},
        [out, counts_path, ledger_path],
    )
    log.info("geocode: %d resolved, %d no geodata, %d illegible", len(resolved), no_geodata, illegible)


def _load_geocoded(cfg: RunConfig) -> list[tuple[PostRecord, str, str]]:
    path = _require(cfg, A_GEOCODED, "geocode")
    rows = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        try:
            obj = json.loads(line)
            region = obj.pop("region")
            source = obj.pop("geo_source")
            obj.pop("matched_name", None)
            rec = record_from_dict(obj)
        except (ValueError, KeyError) as exc:
            raise InputError(f"{path}:{line_no} is corrupt: {exc}") from exc
        rows.append((rec, region, source))
    return rows


def stage_clean(cfg: RunConfig) -> None:
    geocoded = _load_geocoded(cfg)
    stopwords = load_terms(cfg.stopwords)
    keywords = load_terms(cfg.keywords) if cfg.keywords else frozenset()
    manifest = _manifest(cfg)
    manifest.record_input("stopwords", cfg.stopwords)
    if cfg.keywords:
        manifest.record_input("keywords", cfg.keywords)

    docs: list[CleanedDocument] = []
    dropped = 0
    for rec, _, _ in geocoded:
        doc = clean(rec.text, stopwords, keywords, post_id=rec.id)
        if doc is None:
            dropped += 1
        else:
            docs.append(doc)

    out = cfg.run_dir / A_CLEAN
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json_dict(), ensure_ascii=False, sort_keys=True) + "\n")

    ledger_path = _require(cfg, A_LEDGER, "ingest")
    ledger_data = json.loads(ledger_path.read_text(encoding="utf-8"))
    ledger_data["excluded_too_short_after_clean"] = dropped
    ledger_data["retained"] = len(docs)
    ledger = FiltrationLedger(**ledger_data)
    if not ledger.conserves():
        raise InputError(
            "filtration ledger does not conserve; upstream artifacts are inconsistent"
        )
    _write_json(ledger_path, ledger.to_json_dict())

    _finish(
        manifest,
        "clean",
        {"cleaned": len(docs), "dropped_too_short": dropped},
        [out, ledger_path],
    )
    log.info("clean: %d kept, %d dropped as residue", len(docs), dropped)


def _load_clean(cfg: RunConfig) -> list[CleanedDocument]:
    path = _require(cfg, A_CLEAN, "clean")
    docs = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        try:
            obj = json.loads(line)
            docs.append(
                CleanedDocument(
                    post_id=obj["post_id"],
                    tokens=tuple(obj["tokens"]),
                    raw_length=obj["raw_length"],
                    clean_length=obj["clean_length"],
                )
            )
        except (ValueError, KeyError) as exc:
            raise InputError(f"{path}:{line_no} is corrupt: {exc}") from exc
    return docs


def stage_train(cfg: RunConfig) -> None:
    if cfg.annotated is None:
        raise ConfigError("config key 'annotated' is required for train")
    annotated = read_annotated_file(cfg.annotated)
    train_part, test_part = stratified_split(annotated, 0.2, cfg.split_seed)
    model_cfg = BaselineConfig(
        hash_dim=cfg.hash_dim, l2=cfg.l2, max_iter=cfg.max_iter, tol=cfg.tol
    )
    try:
        model = train_baseline(train_part, model_cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    manifest = _manifest(cfg)
    manifest.record_input("annotated", cfg.annotated)
    model_path = cfg.run_dir / A_MODEL
    model.save(model_path)

    payload: dict = {
        "train_counts": {str(int(k)): v for k, v in train_part.counts().items()},
        "split": {"seed": cfg.split_seed, "test_fraction": 0.2},
        "ternary": None,
        "binary": None,
    }
    if test_part.items:
        docs = [doc for doc, _ in test_part.items]
        gold = {doc.post_id: label for doc, label in test_part.items}
        preds = classify_corpus(model, docs)
        payload["ternary"] = evaluate(preds, gold, "ternary").to_json_dict()
        payload["binary"] = evaluate(preds, gold, "binary").to_json_dict()
    metrics_path = cfg.run_dir / A_TRAIN_METRICS
    _write_json(metrics_path, payload)

    _finish(
        manifest,
        "train",
        {"train_size": len(train_part.items), "test_size": len(test_part.items)},
        [model_path, metrics_path],
    )
    log.info("train: %d train / %d held out", len(train_part.items), len(test_part.items))


def _write_predictions(preds: Sequence[Prediction], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["post_id", "score_negative", "score_neutral", "score_positive", "label"]
        )
        for p in preds:
            writer.writerow(
                [p.post_id, repr(p.scores[0]), repr(p.scores[1]), repr(p.scores[2]), int(p.label)]
            )


def _load_predictions(cfg: RunConfig) -> list[Prediction]:
    path = _require(cfg, A_PREDICTIONS, "classify")
    preds = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row_no, row in enumerate(reader, start=2):
            try:
                preds.append(
                    Prediction.from_scores(
                        row["post_id"],
                        [
                            float(row["score_negative"]),
                            float(row["score_neutral"]),
                            float(row["score_positive"]),
                        ],
                    )
                )
            except (TypeError, ValueError, KeyError) as exc:
                raise InputError(f"{path}:{row_no} is corrupt: {exc}") from exc
    return preds


def stage_classify(cfg: RunConfig) -> None:
    docs = _load_clean(cfg)
    manifest = _manifest(cfg)
    if cfg.backend == "baseline":
        model_path = _require(cfg, A_MODEL, "train")
        backend = BaselineModel.load(model_path)
        preds = classify_corpus(backend, docs)
    else:
        client = AdapterClient(
            transport_from_config(cfg.adapter_command, cfg.adapter_address),
            batch_size=cfg.adapter_batch_size,
            timeout=cfg.adapter_timeout,
        )
        try:
            preds = classify_corpus(client, docs)
        finally:
            client.close()
    out = cfg.run_dir / A_PREDICTIONS
    _write_predictions(preds, out)
    _finish(manifest, "classify", {"predicted": len(preds), "backend": cfg.backend}, [out])
    log.info("classify: %d predictions via %s backend", len(preds), cfg.backend)


def stage_annotate_sample(cfg: RunConfig, mode: str, k: int) -> None:
    docs = _load_clean(cfg)
    by_id = {d.post_id: d for d in docs}
    if mode == "random":
        ids = sample_random(docs, k, cfg.sample_seed)
    else:
        preds = _load_predictions(cfg)
        ids = select_least_certain(preds, k)
    manifest = _manifest(cfg)
    out = cfg.run_dir / A_SAMPLE
    write_annotated_file(
        out, [(i, by_id[i].text, None) for i in ids if i in by_id]
    )
    _finish(manifest, "annotate-sample", {"mode": mode, "k": k}, [out])
    log.info("annotate-sample: %d docs exported (%s)", len(ids), mode)


def stage_aggregate(cfg: RunConfig) -> None:
    geocoded = _load_geocoded(cfg)
    preds = _load_predictions(cfg)
    docs = {d.post_id: d for d in _load_clean(cfg)}
    manifest = _manifest(cfg)
    pred_by_id = {p.post_id: p for p in preds}

    labeled: list[analytics.LabeledPost] = []
    records_classified: list[PostRecord] = []
    for rec, region, _ in geocoded:
        pred = pred_by_id.get(rec.id)
        if pred is None:
            continue
        records_classified.append(rec)
        labeled.append(
            analytics.LabeledPost(
                post_id=rec.id,
                created_at=rec.created_at,
                region=region,
                negative=merge_to_binary(pred.label) is BinaryLabel.NEGATIVE,
            )
        )

    artifacts = []

    stats = analytics.yearly_user_stats(records_classified)
    p = cfg.run_dir / A_USER_STATS
    analytics.write_user_stats_csv(stats, p)
    artifacts.append(p)

    freq = analytics.user_frequency_distribution(records_classified)
    p = cfg.run_dir / A_FREQUENCY
    analytics.write_frequency_csv(freq, p)
    artifacts.append(p)

    regions = sorted({lp.region for lp in labeled})
    yearly = analytics.sentiment_series(labeled, "year")
    monthly = analytics.sentiment_series(labeled, "month")
    region_monthly: list[analytics.RegionTimeSeries] = []
    for region in regions:
        yearly += analytics.sentiment_series(labeled, "year", region)
        series = analytics.sentiment_series(labeled, "month", region)
        monthly += series
        region_monthly += series
    for series, name, long_name in (
        (yearly, A_SENT_YEARLY, A_SENT_YEARLY_LONG),
        (monthly, A_SENT_MONTHLY, A_SENT_MONTHLY_LONG),
    ):
        p = cfg.run_dir / name
        analytics.write_series_csv(series, p)
        artifacts.append(p)
        p = cfg.run_dir / long_name
        analytics.write_series_long_csv(series, p)
        artifacts.append(p)

    p = cfg.run_dir / A_TRENDS
    if region_monthly:
        trends = analytics.normalized_regional_trends(region_monthly)
        analytics.write_trends_csv(trends, p)
    else:
        analytics.write_trends_csv({}, p)
    artifacts.append(p)

    if cfg.survey is not None:
        manifest.record_input("survey", cfg.survey)
        survey_rows = analytics.read_survey_file(cfg.survey)
        comparisons, coverage = analytics.survey_delta(yearly, survey_rows)
        p = cfg.run_dir / A_SURVEY_DELTA
        analytics.write_survey_delta_csv(comparisons, p)
        artifacts.append(p)
        p = cfg.run_dir / A_SURVEY_COVERAGE
        analytics.write_coverage_csv(coverage, p)
        artifacts.append(p)

    month_docs = []
    for lp in labeled:
        doc = docs.get(lp.post_id)
        if doc is not None:
            month_docs.append((lp.created_at.strftime("%Y-%m"), doc))
    p = cfg.run_dir / A_TOKEN_COUNTS
    analytics.write_token_counts_csv(analytics.monthly_token_counts(month_docs), p)
    artifacts.append(p)

    _finish(manifest, "aggregate", {"classified_posts": len(labeled)}, artifacts)
    log.info("aggregate: %d classified posts across %d regions", len(labeled), len(regions))


def stage_network(cfg: RunConfig) -> None:
    records = _load_ingested(cfg)
    geocoded = _load_geocoded(cfg)
    manifest = _manifest(cfg)
    author_regions = netstats.majority_author_regions(
        [(rec, region) for rec, region, _ in geocoded]
    )
    net = netstats.build_network(records, author_regions)

    artifacts = []
    summary: dict = {
        "nodes": len(net.nodes),
        "edges": len(net.edges),
        "modularity": None,
        "communities": None,
        "chi_square": None,
        "degrees_of_freedom": None,
        "n": None,
        "p_value": None,
        "cramers_v": None,
    }
    partition = None
    if net.edges:
        result = netstats.detect_communities(net, cfg.resolution, cfg.community_seed)
        partition = result.partition
        summary["modularity"] = result.modularity
        summary["communities"] = len(set(partition.values()))
        try:
            assoc = netstats.association(net, partition, cfg.min_community_size)
            summary.update(
                chi_square=assoc.chi_square,
                degrees_of_freedom=assoc.degrees_of_freedom,
                n=assoc.n,
                p_value=assoc.p_value,
                cramers_v=assoc.cramers_v,
            )
            p = cfg.run_dir / A_ASSOCIATION
            with open(p, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["region", "community", "count"])
                for i, region in enumerate(assoc.region_labels):
                    for j, comm in enumerate(assoc.community_labels):
                        writer.writerow([region, comm, assoc.contingency[i][j]])
            artifacts.append(p)
        except ValueError as exc:
            log.warning("association test skipped: %s", exc)
    else:
        log.warning("network has no edges; communities and association skipped")

    p = cfg.run_dir / A_COMMUNITIES
    with open(p, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["author_id", "community", "region"])
        if partition is not None:
            for node in sorted(partition):
                writer.writerow([node, partition[node], net.nodes.get(node) or ""])
    artifacts.append(p)

    graph_path = cfg.run_dir / A_GRAPH
    netstats.export_graph(net, graph_path, partition)
    artifacts.append(graph_path)

    summary_path = cfg.run_dir / A_ASSOC_SUMMARY
    _write_json(summary_path, summary)
    artifacts.append(summary_path)

    _finish(
        manifest,
        "network",
        {"nodes": len(net.nodes), "edges": len(net.edges)},
        artifacts,
    )
    log.info("network: %d nodes, %d edges", len(net.nodes), len(net.edges))


def stage_report(cfg: RunConfig) -> None:
    manifest_path = cfg.run_dir / "manifest.json"
    if not manifest_path.exists():
        raise StageOrderError(
            "stage order violation: no manifest in run directory, run 'geosent ingest' first"
        )
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    print(f"run directory: {cfg.run_dir}")
    print(f"config hash:   {manifest.get('config_hash')}")
    print(f"stages done:   {', '.join(sorted(manifest.get('stages', {}))) or 'none'}")

    ledger_path = cfg.run_dir / A_LEDGER
    if ledger_path.exists():
        ledger = json.loads(ledger_path.read_text(encoding="utf-8"))
        print("\nfiltration ledger:")
        for key in (
            "total_in",
            "excluded_no_geodata",
            "excluded_illegible_geodata",
            "excluded_unresolvable_retweet",
            "excluded_too_short_after_clean",
            "retained",
        ):
            print(f"  {key:34s} {ledger.get(key, 0)}")

    stats_path = cfg.run_dir / A_USER_STATS
    if stats_path.exists():
        print("\nyearly user statistics (rounded):")
        with open(stats_path, encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                print(
                    f"  {row['year']}  tweets {row['tweet_count']:>7s}"
                    f"  new {row['new_users']:>6s}  active {row['active_users']:>6s}"
                    f"  share_new {float(row['share_new']):.2f}"
                    f"  tweets/user {float(row['tweets_per_user']):.2f}"
                    + ("  (partial)" if row["partial_year"] == "true" else "")
                )

    metrics_path = cfg.run_dir / A_TRAIN_METRICS
    if metrics_path.exists():
        metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
        for scheme in ("ternary", "binary"):
            report = metrics.get(scheme)
            if report:
                print(f"\n{scheme} held-out metrics: macro F1 {report['macro_f1']:.3f}")

    summary_path = cfg.run_dir / A_ASSOC_SUMMARY
    if summary_path.exists():
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        print(
            f"\nnetwork: {summary['nodes']} nodes, {summary['edges']} edges, "
            f"{summary['communities']} communities, modularity "
            f"{summary['modularity'] if summary['modularity'] is None else round(summary['modularity'], 4)}"
        )
        if summary.get("chi_square") is not None:
            print(
                f"  chi2({summary['degrees_of_freedom']}, N={summary['n']}) = "
                f"{summary['chi_square']:.2f}, p = {summary['p_value']:.3g}, "
                f"V = {summary['cramers_v']:.3f}"
            )


# ---------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geosent",
        description="Spatio-temporal sentiment statistics from microblog archives.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the run config YAML")
    common.add_argument("--run-dir", help="override the configured run directory")
    common.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config value (repeatable)",
    )
    for name, help_text in (
        ("ingest", "read, validate and repair the raw corpus"),
        ("geocode", "resolve records to NUTS3 regions"),
        ("clean", "clean text for classification"),
        ("train", "train the baseline classifier on annotated data"),
        ("classify", "classify the cleaned corpus"),
        ("aggregate", "compute all aggregate statistics"),
        ("network", "build the interaction network and association test"),
        ("report", "print a run summary"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    annotate = sub.add_parser(
        "annotate-sample", parents=[common], help="export documents for annotation"
    )
    annotate.add_argument(
        "--mode", choices=("random", "least-certain"), default="random"
    )
    annotate.add_argument("-k", type=int, default=50, help="sample size")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, args.set)
        if args.run_dir:
            cfg.run_dir = Path(args.run_dir)
        if args.command == "ingest":
            stage_ingest(cfg)
        elif args.command == "geocode":
            stage_geocode(cfg)
        elif args.command == "clean":
            stage_clean(cfg)
        elif args.command == "train":
            stage_train(cfg)
        elif args.command == "classify":
            stage_classify(cfg)
        elif args.command == "annotate-sample":
            stage_annotate_sample(cfg, args.mode, args.k)
        elif args.command == "aggregate":
            stage_aggregate(cfg)
        elif args.command == "network":
            stage_network(cfg)
        elif args.command == "report":
            stage_report(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageOrderError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_STAGE_ORDER
    except AdapterError as exc:
        print(f"adapter error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except (InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
