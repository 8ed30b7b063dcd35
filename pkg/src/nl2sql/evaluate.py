"""Hardness-stratified execution accuracy and report generation.

Correctness of a transcript is decided from its final SQL alone (stage
history never affects the score): the final SQL and the gold SQL are both
executed and their tables compared. Bucket accuracies combine into the
overall number as the count-weighted average

    overall = sum(count_b * accuracy_b) / sum(count_b)

which is recomputed verbatim in reports so the identity is checkable.
Report payloads split into a deterministic ``results`` section and a
``metadata`` section (timestamps, config digest, endpoints); regenerating a
report from the same transcripts yields byte-identical results bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .dataset import SpiderExample
from .errors import DatasetError, Nl2SqlError
from .execution import ExecLimits, execute_for_comparison, tables_equivalent
from .hardness import Hardness
from .pipeline import PipelineTranscript, Verdict
from .schema import DatabaseSchema
from .sqlast import parse
from .triage import Category, TriageVerdict, triage, triage_report

BUCKET_ORDER = (Hardness.EASY, Hardness.MEDIUM, Hardness.HARD, Hardness.EXTRA)


@dataclass(frozen=True)
class BucketScore:
    count: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.count if self.count else 0.0


@dataclass
class EvalReport:
    buckets: dict[Hardness, BucketScore]
    overall: float
    quarantined: int
    verdict_distribution: dict[str, int]
    triage_distribution: dict
    faults: int
    metadata: dict = field(default_factory=dict)

    def results_payload(self) -> dict:
        return {
            "buckets": {
                h.value: {
                    "count": b.count,
                    "correct": b.correct,
                    "accuracy": round(b.accuracy, 3),
                }
                for h, b in ((h, self.buckets[h]) for h in BUCKET_ORDER)
            },
            "overall": round(self.overall, 3),
            "quarantined": self.quarantined,
            "faults": self.faults,
            "verdicts": dict(sorted(self.verdict_distribution.items())),
            "triage": self.triage_distribution,
        }

    def to_json(self) -> dict:
        return {"results": self.results_payload(), "metadata": self.metadata}


def weighted_execution_accuracy(buckets: dict[Hardness, tuple[int, float]]) -> float:
    """The count-weighted average of per-bucket accuracies."""
    total = sum(count for count, _ in buckets.values())
    if total == 0:
        return 0.0
    return sum(count * accuracy for count, accuracy in buckets.values()) / total


def score(
    transcripts: list[PipelineTranscript],
    examples: list[SpiderExample],
    schemas: dict[str, DatabaseSchema],
    limits: ExecLimits = ExecLimits(),
    quarantined: int = 0,
    with_triage: bool = True,
    strict_ordering: bool = False,
    metadata: dict | None = None,
) -> EvalReport:
    """Score transcripts against their examples.

    Raises DatasetError when a transcript is missing for some example, with
    the offending ids listed.
    """
    by_id = {t.example_id: t for t in transcripts}
    missing = [ex.id for ex in examples if ex.id not in by_id]
    if missing:
        raise DatasetError(f"missing transcripts for example ids: {missing}")

    per_bucket: dict[Hardness, list[bool]] = {h: [] for h in Hardness}
    verdict_distribution: dict[str, int] = {}
    triage_verdicts: list[TriageVerdict] = []
    faults = 0

    for ex in examples:
        transcript = by_id[ex.id]
        verdict_distribution[transcript.final_verdict.value] = (
            verdict_distribution.get(transcript.final_verdict.value, 0) + 1
        )
        if transcript.final_verdict is Verdict.FAULT:
            faults += 1
            per_bucket[ex.hardness].append(False)
            continue
        schema = schemas[ex.db_id]
        correct, verdict = _score_one(transcript, ex, schema, limits, with_triage, strict_ordering)
        per_bucket[ex.hardness].append(correct)
        if verdict is not None:
            triage_verdicts.append(verdict)

    buckets = {
        h: BucketScore(count=len(flags), correct=sum(flags)) for h, flags in per_bucket.items()
    }
    overall = weighted_execution_accuracy(
        {h: (b.count, b.accuracy) for h, b in buckets.items()}
    )
    return EvalReport(
        buckets=buckets,
        overall=overall,
        quarantined=quarantined,
        verdict_distribution=verdict_distribution,
        triage_distribution=triage_report(triage_verdicts),
        faults=faults,
        metadata=metadata or {},
    )


def _score_one(
    transcript: PipelineTranscript,
    example: SpiderExample,
    schema: DatabaseSchema,
    limits: ExecLimits,
    with_triage: bool,
    strict_ordering: bool,
) -> tuple[bool, TriageVerdict | None]:
    gold_outcome = execute_for_comparison(example.gold_sql, schema, limits)
    if gold_outcome.table is None:
        return False, None
    if transcript.final_sql is None:
        return False, None
    pred_outcome = execute_for_comparison(transcript.final_sql, schema, limits)
    pred_table = pred_outcome.table
    correct = False
    if pred_table is not None:
        correct = tables_equivalent(pred_table, gold_outcome.table, strict_ordering).equivalent
    if correct or not with_triage:
        return correct, None
    try:
        pred_ast = parse(transcript.final_sql, schema)
        gold_ast = parse(example.gold_sql, schema)
    except Nl2SqlError as exc:
        verdict = TriageVerdict(
            category=Category.UNCLASSIFIABLE,
            subtag="ParseError",
            confidence="definite",
            evidence={"error": str(exc), "sql": transcript.final_sql},
        )
        return False, verdict
    verdict = triage(
        pred_ast, gold_ast, pred_table, gold_outcome.table, schema, limits, strict_ordering
    )
    return False, verdict


# --------------------------------------------------------------------------- rendering

def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def run_metadata(config: dict | None, endpoints: list[str], timestamp: bool = True) -> dict:
    meta = {
        "config_digest": config_digest(config or {}),
        "endpoints": endpoints,
    }
    if timestamp:
        meta["generated_at"] = datetime.now(timezone.utc).isoformat()
    return meta


def render_report_markdown(report: EvalReport) -> str:
    """Human-readable report: accuracy by difficulty plus the triage table."""
    results = report.results_payload()
    lines = ["# Execution accuracy report", ""]
    header = ["", *[h.value.capitalize() for h in BUCKET_ORDER], "All"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    counts = [str(results["buckets"][h.value]["count"]) for h in BUCKET_ORDER]
    total = sum(report.buckets[h].count for h in BUCKET_ORDER)
    lines.append("| Count | " + " | ".join(counts) + f" | {total} |")
    accs = [f"{results['buckets'][h.value]['accuracy']:.3f}" for h in BUCKET_ORDER]
    lines.append("| Exec Accuracy | " + " | ".join(accs) + f" | {results['overall']:.3f} |")
    lines.append("")
    lines.append(f"Quarantined examples: {report.quarantined}")
    lines.append(f"Harness faults: {report.faults}")
    lines.append("")
    lines.append("## Pipeline stage outcomes")
    lines.append("")
    for verdict, count in sorted(report.verdict_distribution.items()):
        lines.append(f"- {verdict}: {count}")
    lines.append("")
    lines.append("## Failure triage")
    lines.append("")
    triage_dist = report.triage_distribution
    if triage_dist.get("total", 0) == 0:
        lines.append("No failures to triage.")
    else:
        lines.append("| Category | Count | Fraction |")
        lines.append("|---|---|---|")
        for name, row in triage_dist["categories"].items():
            lines.append(f"| {name} | {row['count']} | {row['fraction']:.3f} |")
        lines.append("")
        lines.append("| Subtag | Count | Fraction |")
        lines.append("|---|---|---|")
        for name, row in triage_dist["subtags"].items():
            lines.append(f"| {name} | {row['count']} | {row['fraction']:.3f} |")
    if report.metadata:
        lines.append("")
        lines.append("## Metadata")
        lines.append("")
        for key, value in sorted(report.metadata.items()):
            lines.append(f"- {key}: {value}")
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out: Path | str) -> None:
    Path(out).write_text(
        json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
