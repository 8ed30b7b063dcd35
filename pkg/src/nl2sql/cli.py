"""Command-line interface.

Subcommands: ingest, emit-corpus, run, evaluate, triage, report, ast.
Exit codes are stable so scripts can branch on failure class:

    0  success
    2  usage or configuration error
    3  dataset missing or malformed
    4  network failure after exhausting retries
    5  replay fixture miss
    6  harness fault (database file missing)
    1  any other error
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import emit_chat_corpus, emit_skeleton_corpus
from .dataset import load_dataset
from .errors import (
    ConfigError,
    DatabaseMissingError,
    DatasetError,
    Nl2SqlError,
    ReplayMissError,
    RetriesExhaustedError,
)
from .evaluate import (
    EvalReport,
    BucketScore,
    render_report_markdown,
    run_metadata,
    score,
    write_report,
)
from .execution import ExecLimits
from .hardness import Hardness
from .llm import HttpChatTransport, ModelEndpoint, RecordingTransport, ReplayTransport, Sampling
from .pipeline import PipelineConfig, read_transcripts, run_many, write_transcripts
from .sqlast import canonicalize, diff, parse
from .triage import Category, TriageVerdict, triage

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATASET = 3
EXIT_NETWORK = 4
EXIT_REPLAY = 5
EXIT_FAULT = 6
EXIT_OTHER = 1

DEFAULT_CONFIG = {
    "generator": {
        "model": "generator",
        "base_url": "https://api.openai.com/v1",
        "temperature": 0.0,
        "max_tokens": 512,
    },
    "corrector": {
        "model": "corrector",
        "base_url": "https://api.openai.com/v1",
        "temperature": 0.0,
        "max_tokens": 512,
    },
    "max_example_correction_rounds": 1,
    "enable_error_correction": True,
    "execution": {"timeout_seconds": 30.0, "max_rows": 10000},
    "workers": 1,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DatabaseMissingError as exc:
        print(f"harness fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except ReplayMissError as exc:
        print(f"replay miss: {exc}", file=sys.stderr)
        return EXIT_REPLAY
    except RetriesExhaustedError as exc:
        print(f"network failure: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (ConfigError,) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except Nl2SqlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nl2sql", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a dataset split and report hardness buckets")
    _dataset_args(p)
    p.add_argument("--out", type=Path, help="write the summary as JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("emit-corpus", help="emit a fine-tune corpus")
    p.add_argument("kind", choices=["skeleton", "chat"])
    _dataset_args(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_emit_corpus)

    p = sub.add_parser("run", help="run the synthesis pipeline")
    _dataset_args(p)
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--replay", type=Path, help="replay store directory (no network)")
    p.add_argument("--record", type=Path, help="record live responses into this directory")
    p.add_argument("--limit", type=int, help="only the first N examples")
    p.add_argument("--workers", type=int, help="parallel pipeline workers")
    p.add_argument("--out", type=Path, required=True, help="transcripts JSONL path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evaluate", help="score transcripts into a report")
    _dataset_args(p)
    p.add_argument("--transcripts", type=Path, required=True)
    p.add_argument("--out", type=Path, help="report JSON path")
    p.add_argument("--markdown", type=Path, help="also write a markdown report")
    p.add_argument("--no-triage", action="store_true")
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--strict-ordering", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("triage", help="classify every failed transcript")
    _dataset_args(p)
    p.add_argument("--transcripts", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="verdicts JSONL path")
    p.set_defaults(func=cmd_triage)

    p = sub.add_parser("report", help="render a report from transcripts")
    p.add_argument("--transcripts", type=Path, required=True)
    p.add_argument("--dataset", type=Path, help="dataset dir (needed to score non-empty transcripts)")
    p.add_argument("--split", default="dev", choices=["dev", "train"])
    p.add_argument("--format", default="markdown", choices=["markdown", "json"])
    p.add_argument("--out", type=Path, help="write to file instead of stdout")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("ast", help="debug: print the AST, canonical form or diff")
    _dataset_args(p)
    p.add_argument("--db", required=True, help="database id")
    p.add_argument("sql")
    p.add_argument("--canonical", action="store_true")
    p.add_argument("--diff", metavar="SQL2", help="diff against a second query")
    p.set_defaults(func=cmd_ast)
    return parser


def _dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", type=Path, required=True, help="Spider-layout dataset directory")
    p.add_argument("--split", default="dev", choices=["dev", "train"])


def cmd_ingest(args) -> int:
    loaded = load_dataset(args.dataset, args.split)
    profile = loaded.hardness_profile()
    summary = {
        "split": args.split,
        "loaded": len(loaded.examples),
        "quarantined": len(loaded.quarantined),
        "raw_total": loaded.raw_count,
        "hardness": {h.value: profile.counts[h] for h in Hardness},
        "quarantine_reasons": [
            {"id": q.id, "db_id": q.db_id, "reason": q.reason} for q in loaded.quarantined
        ],
    }
    text = json.dumps(summary, indent=2, ensure_ascii=False)
    if args.out:
        args.out.write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def cmd_emit_corpus(args) -> int:
    loaded = load_dataset(args.dataset, args.split)
    if args.kind == "skeleton":
        n = emit_skeleton_corpus(loaded.examples, loaded.schemas, args.out)
    else:
        n = emit_chat_corpus(loaded.examples, loaded.schemas, args.out)
    print(f"wrote {n} records to {args.out}")
    return EXIT_OK


def _load_config(path: Path | None) -> dict:
    config = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            user = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        for key, value in user.items():
            if key not in config:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(config[key], dict):
                if not isinstance(value, dict):
                    raise ConfigError(f"config key {key!r} must be an object")
                config[key].update(value)
            else:
                config[key] = value
    return config


def _endpoint(role: str, spec: dict, args) -> ModelEndpoint:
    sampling = Sampling(
        temperature=float(spec.get("temperature", 0.0)),
        max_tokens=int(spec.get("max_tokens", 512)),
    )
    if args.replay is not None:
        transport = ReplayTransport(args.replay)
    else:
        transport = HttpChatTransport(base_url=spec["base_url"])
        if args.record is not None:
            transport = RecordingTransport(transport, args.record)
    return ModelEndpoint(
        role=role, transport=transport, model_name=spec["model"], sampling=sampling
    )


def cmd_run(args) -> int:
    config = _load_config(args.config)
    loaded = load_dataset(args.dataset, args.split)
    examples = list(loaded.examples)
    if args.limit is not None:
        examples = examples[: args.limit]
    generator = _endpoint("generator", config["generator"], args)
    corrector = _endpoint("corrector", config["corrector"], args)
    limits = ExecLimits(
        timeout_seconds=float(config["execution"]["timeout_seconds"]),
        max_rows=int(config["execution"]["max_rows"]),
    )
    pipeline_config = PipelineConfig(
        max_example_correction_rounds=int(config["max_example_correction_rounds"]),
        enable_error_correction=bool(config["enable_error_correction"]),
        limits=limits,
    )
    workers = args.workers if args.workers is not None else int(config.get("workers", 1))
    transcripts = run_many(
        examples, loaded.schemas, pipeline_config, generator, corrector, workers=workers
    )
    write_transcripts(transcripts, args.out)
    counts: dict[str, int] = {}
    for t in transcripts:
        counts[t.final_verdict.value] = counts.get(t.final_verdict.value, 0) + 1
    print(f"wrote {len(transcripts)} transcripts to {args.out}: {counts}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    loaded = load_dataset(args.dataset, args.split)
    transcripts = read_transcripts(args.transcripts)
    ids = {t.example_id for t in transcripts}
    examples = [ex for ex in loaded.examples if ex.id in ids]
    metadata = run_metadata(
        config=None,
        endpoints=sorted({s.model for t in transcripts for s in t.stages}),
        timestamp=not args.no_timestamp,
    )
    report = score(
        transcripts,
        examples,
        loaded.schemas,
        quarantined=len(loaded.quarantined),
        with_triage=not args.no_triage,
        strict_ordering=args.strict_ordering,
        metadata=metadata,
    )
    if args.out:
        write_report(report, args.out)
    if args.markdown:
        args.markdown.write_text(render_report_markdown(report), encoding="utf-8")
    print(json.dumps(report.results_payload(), indent=2, ensure_ascii=False))
    return EXIT_OK


def cmd_triage(args) -> int:
    loaded = load_dataset(args.dataset, args.split)
    by_id = {ex.id: ex for ex in loaded.examples}
    transcripts = read_transcripts(args.transcripts)
    written = 0
    from .execution import execute_for_comparison, tables_equivalent

    with args.out.open("w", encoding="utf-8") as fh:
        for t in transcripts:
            ex = by_id.get(t.example_id)
            if ex is None or t.final_sql is None:
                continue
            schema = loaded.schemas[ex.db_id]
            gold_outcome = execute_for_comparison(ex.gold_sql, schema)
            pred_outcome = execute_for_comparison(t.final_sql, schema)
            if gold_outcome.table is not None and pred_outcome.table is not None:
                if tables_equivalent(pred_outcome.table, gold_outcome.table).equivalent:
                    continue
            try:
                verdict = triage(
                    parse(t.final_sql, schema),
                    parse(ex.gold_sql, schema),
                    pred_outcome.table,
                    gold_outcome.table,
                    schema,
                )
            except Nl2SqlError as exc:
                verdict = TriageVerdict(
                    category=Category.UNCLASSIFIABLE,
                    subtag="ParseError",
                    confidence="definite",
                    evidence={"error": str(exc), "sql": t.final_sql},
                )
            record = {"example_id": t.example_id, **verdict.to_json()}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    print(f"wrote {written} verdicts to {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    transcripts = read_transcripts(args.transcripts)
    if not transcripts:
        report = EvalReport(
            buckets={h: BucketScore(0, 0) for h in Hardness},
            overall=0.0,
            quarantined=0,
            verdict_distribution={},
            triage_distribution={"total": 0, "categories": {}, "subtags": {}},
            faults=0,
            metadata={},
        )
    else:
        if args.dataset is None:
            raise DatasetError("--dataset is required to score non-empty transcripts")
        loaded = load_dataset(args.dataset, args.split)
        ids = {t.example_id for t in transcripts}
        examples = [ex for ex in loaded.examples if ex.id in ids]
        report = score(
            transcripts, examples, loaded.schemas, quarantined=len(loaded.quarantined)
        )
    if args.format == "markdown":
        text = render_report_markdown(report)
    else:
        text = json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_ast(args) -> int:
    loaded = load_dataset(args.dataset, args.split)
    schema = loaded.schemas.get(args.db)
    if schema is None:
        raise DatasetError(f"unknown db id {args.db!r}")
    ast = parse(args.sql, schema)
    if args.diff is not None:
        other = parse(args.diff, schema)
        delta = diff(canonicalize(ast), canonicalize(other))
        print(json.dumps(delta.summary(), indent=2, ensure_ascii=False))
        return EXIT_OK
    if args.canonical:
        print(canonicalize(ast).sql)
        return EXIT_OK
    print(json.dumps(_ast_json(ast), indent=2, ensure_ascii=False))
    return EXIT_OK


def _ast_json(node) -> object:
    from dataclasses import fields, is_dataclass

    if is_dataclass(node):
        out = {"node": type(node).__name__}
        for f in fields(node):
            if f.name == "_lookup":
                continue
            value = getattr(node, f.name)
            out[f.name] = _ast_json(value)
        return out
    if isinstance(node, tuple):
        return [_ast_json(v) for v in node]
    if isinstance(node, Hardness):
        return node.value
    return node


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
