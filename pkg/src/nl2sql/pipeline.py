"""The staged synthesis pipeline.

Three stages, each gated on the previous one failing:

1. zero shot: schema-bearing prompt to the generator model.
2. example-driven correction: when the predicted table mismatches the gold
   table, the generator is told so *in the same conversation* and shown the
   gold result table in markdown, then asked to revise. Repeats up to the
   configured round count.
3. error-driven correction: one fresh zero-shot request to the corrector
   model carrying only the schema, the question, the failed SQL and (when
   the failure was an engine error) the verbatim error text. No earlier
   conversation content leaks into this prompt.

Every prompt, reply, extraction, execution and comparison is recorded in a
PipelineTranscript. Transcripts contain no timestamps: a replay run is
byte-for-byte reproducible.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .dataset import SpiderExample
from .errors import NoSqlFoundError
from .execution import (
    ExecLimits,
    ExecOutcome,
    ResultTable,
    TableComparison,
    execute_for_comparison,
    tables_equivalent,
)
from .llm import Message, ModelEndpoint
from .mdtable import MAX_PROMPT_ROWS, render_markdown
from .prompts import (
    CORRECTOR_SYSTEM_PROMPT,
    SYSTEM_PROMPT,
    error_correction_prompt,
    example_correction_prompt,
    zero_shot_user_prompt,
)
from .schema import DatabaseSchema
from .sqlast.tokens import tokenize

_FENCE = re.compile(r"```(?:sql)?\s*\n?(.*?)```", re.DOTALL | re.IGNORECASE)
_SELECT_START = re.compile(r"\bselect\b", re.IGNORECASE)


class Verdict(str, Enum):
    CORRECT_FIRST_SHOT = "correct_first_shot"
    CORRECTED_BY_EXAMPLE = "corrected_by_example"
    CORRECTED_BY_ERROR = "corrected_by_error"
    FAILED = "failed"
    FAULT = "fault"  # harness fault (e.g. gold would not execute), not a model failure

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


PROMPT_TEMPLATES = ("default",)


@dataclass(frozen=True)
class PipelineConfig:
    max_example_correction_rounds: int = 1
    enable_error_correction: bool = True
    limits: ExecLimits = field(default_factory=ExecLimits)
    prompt_template: str = "default"

    def __post_init__(self) -> None:
        if self.max_example_correction_rounds < 0:
            raise ValueError("max_example_correction_rounds must be >= 0")
        if self.prompt_template not in PROMPT_TEMPLATES:
            raise ValueError(
                f"unknown prompt template {self.prompt_template!r}; "
                f"available: {PROMPT_TEMPLATES}"
            )


@dataclass
class StageRecord:
    stage: str
    model: str
    messages: list[Message]
    reply: str
    request_digest: str
    sql: str | None
    extraction_error: str | None
    execution: dict | None
    comparison: dict | None

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "model": self.model,
            "messages": self.messages,
            "reply": self.reply,
            "request_digest": self.request_digest,
            "sql": self.sql,
            "extraction_error": self.extraction_error,
            "execution": self.execution,
            "comparison": self.comparison,
        }


@dataclass
class PipelineTranscript:
    example_id: int
    db_id: str
    question: str
    gold_sql: str
    stages: list[StageRecord]
    final_sql: str | None
    final_verdict: Verdict
    fault: str | None = None

    @property
    def model_calls(self) -> int:
        return len(self.stages)

    def to_json(self) -> dict:
        return {
            "example_id": self.example_id,
            "db_id": self.db_id,
            "question": self.question,
            "gold_sql": self.gold_sql,
            "stages": [s.to_json() for s in self.stages],
            "final_sql": self.final_sql,
            "final_verdict": self.final_verdict.value,
            "fault": self.fault,
            "model_calls": self.model_calls,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PipelineTranscript":
        stages = [
            StageRecord(
                stage=s["stage"],
                model=s.get("model", ""),
                messages=s["messages"],
                reply=s["reply"],
                request_digest=s["request_digest"],
                sql=s["sql"],
                extraction_error=s["extraction_error"],
                execution=s["execution"],
                comparison=s["comparison"],
            )
            for s in data["stages"]
        ]
        return cls(
            example_id=data["example_id"],
            db_id=data["db_id"],
            question=data["question"],
            gold_sql=data["gold_sql"],
            stages=stages,
            final_sql=data["final_sql"],
            final_verdict=Verdict(data["final_verdict"]),
            fault=data.get("fault"),
        )


# --------------------------------------------------------------------------- SQL extraction

def extract_sql(model_reply: str) -> str:
    """Pull the first SQL statement out of a model reply.

    Handles fenced code blocks, skeleton-then-query replies (the text after
    the last ``|||`` wins), and trailing prose after a semicolon.
    """
    candidate = model_reply
    if "|||" in candidate:
        candidate = candidate.rsplit("|||", 1)[1]
    fenced = _FENCE.findall(candidate)
    for block in fenced:
        if _SELECT_START.search(block):
            candidate = block
            break
    match = _SELECT_START.search(candidate)
    if match is None:
        raise NoSqlFoundError("reply contains no SELECT statement")
    sql = candidate[match.start() :].strip()
    if ";" in sql:
        sql = sql.split(";", 1)[0].strip()
    sql = _trim_trailing_prose(sql)
    try:
        tokens = tokenize(sql)
    except Exception as exc:
        raise NoSqlFoundError(f"extracted text does not tokenize: {exc}") from exc
    if not tokens or not tokens[0].is_keyword("select"):
        raise NoSqlFoundError("extracted text is not a SELECT statement")
    return sql


def _trim_trailing_prose(sql: str) -> str:
    # A blank line typically separates the statement from an explanation.
    parts = re.split(r"\n\s*\n", sql, maxsplit=1)
    return parts[0].strip()


# --------------------------------------------------------------------------- stage helpers

def _execution_summary(outcome: ExecOutcome) -> dict:
    if outcome.table is not None:
        return {
            "kind": "table",
            "rows": len(outcome.table.rows),
            "columns": len(outcome.table.columns),
            "truncated": outcome.table.truncated,
        }
    if outcome.timed_out:
        return {"kind": "timeout"}
    return {"kind": "error", "error": outcome.error, "error_class": outcome.error_class}


def _comparison_summary(comparison: TableComparison | None) -> dict | None:
    if comparison is None:
        return None
    return {"status": comparison.status, "detail": comparison.detail}


class _StageOutcome:
    def __init__(
        self,
        record: StageRecord,
        sql: str | None,
        outcome: ExecOutcome | None,
        comparison: TableComparison | None,
    ):
        self.record = record
        self.sql = sql
        self.outcome = outcome
        self.comparison = comparison

    @property
    def equivalent(self) -> bool:
        return self.comparison is not None and self.comparison.equivalent


def _run_model_stage(
    stage: str,
    endpoint: ModelEndpoint,
    messages: list[Message],
    schema: DatabaseSchema,
    gold_table: ResultTable,
    limits: ExecLimits,
    strict_ordering: bool,
) -> _StageOutcome:
    reply, digest = endpoint.complete(messages)
    sql: str | None = None
    extraction_error: str | None = None
    outcome: ExecOutcome | None = None
    comparison: TableComparison | None = None
    try:
        sql = extract_sql(reply)
    except NoSqlFoundError as exc:
        extraction_error = str(exc)
    if sql is not None:
        outcome = execute_for_comparison(sql, schema, limits)
        if outcome.table is not None:
            comparison = tables_equivalent(outcome.table, gold_table, strict_ordering)
    record = StageRecord(
        stage=stage,
        model=endpoint.model_name,
        messages=list(messages),
        reply=reply,
        request_digest=digest,
        sql=sql,
        extraction_error=extraction_error,
        execution=_execution_summary(outcome) if outcome is not None else None,
        comparison=_comparison_summary(comparison),
    )
    return _StageOutcome(record, sql, outcome, comparison)


# --------------------------------------------------------------------------- pipeline

def run_pipeline(
    example: SpiderExample,
    schema: DatabaseSchema,
    config: PipelineConfig,
    generator: ModelEndpoint,
    corrector: ModelEndpoint | None = None,
    strict_ordering: bool = False,
) -> PipelineTranscript:
    """Run all stages for one example. Total model calls are bounded by
    1 + max_example_correction_rounds + 1."""
    transcript = PipelineTranscript(
        example_id=example.id,
        db_id=example.db_id,
        question=example.question,
        gold_sql=example.gold_sql,
        stages=[],
        final_sql=None,
        final_verdict=Verdict.FAILED,
    )

    gold_outcome = execute_for_comparison(example.gold_sql, schema, config.limits)
    if gold_outcome.table is None or gold_outcome.table.truncated:
        transcript.final_verdict = Verdict.FAULT
        transcript.fault = f"gold execution unusable: {_execution_summary(gold_outcome)}"
        return transcript
    gold_table = gold_outcome.table
    gold_markdown = render_markdown(gold_table, max_rows=MAX_PROMPT_ROWS)

    messages: list[Message] = [
        {"role": "system", "content": SYSTEM_PROMPT},
        {"role": "user", "content": zero_shot_user_prompt(example.question, schema)},
    ]
    stage = _run_model_stage(
        "zero_shot", generator, messages, schema, gold_table, config.limits, strict_ordering
    )
    transcript.stages.append(stage.record)
    if stage.sql is not None:
        transcript.final_sql = stage.sql
    if stage.equivalent:
        transcript.final_verdict = Verdict.CORRECT_FIRST_SHOT
        return transcript

    # Example-driven rounds continue the same conversation.
    last = stage
    for round_no in range(1, config.max_example_correction_rounds + 1):
        if last.sql is None:
            break  # nothing to revise in-conversation; fall through to error stage
        messages = messages + [
            {"role": "assistant", "content": last.record.reply},
            {"role": "user", "content": example_correction_prompt(gold_markdown)},
        ]
        last = _run_model_stage(
            f"example_correction_{round_no}",
            generator,
            messages,
            schema,
            gold_table,
            config.limits,
            strict_ordering,
        )
        transcript.stages.append(last.record)
        if last.sql is not None:
            transcript.final_sql = last.sql
        if last.equivalent:
            transcript.final_verdict = Verdict.CORRECTED_BY_EXAMPLE
            return transcript

    if not config.enable_error_correction or corrector is None:
        return transcript
    if transcript.final_sql is None:
        return transcript  # no failed SQL to hand to the corrector

    failed_sql = transcript.final_sql
    error_text = None
    if last.outcome is not None and last.outcome.kind == "error":
        error_text = last.outcome.error
    fresh: list[Message] = [
        {"role": "system", "content": CORRECTOR_SYSTEM_PROMPT},
        {
            "role": "user",
            "content": error_correction_prompt(example.question, schema, failed_sql, error_text),
        },
    ]
    stage = _run_model_stage(
        "error_correction", corrector, fresh, schema, gold_table, config.limits, strict_ordering
    )
    transcript.stages.append(stage.record)
    if stage.sql is not None:
        transcript.final_sql = stage.sql
    if stage.equivalent:
        transcript.final_verdict = Verdict.CORRECTED_BY_ERROR
    return transcript


def run_many(
    examples: Iterable[SpiderExample],
    schemas: dict[str, DatabaseSchema],
    config: PipelineConfig,
    generator: ModelEndpoint,
    corrector: ModelEndpoint | None = None,
    workers: int = 1,
    strict_ordering: bool = False,
) -> list[PipelineTranscript]:
    """Run the pipeline over many examples; output order follows example id
    regardless of worker interleaving."""
    examples = list(examples)

    def one(example: SpiderExample) -> PipelineTranscript:
        return run_pipeline(
            example, schemas[example.db_id], config, generator, corrector, strict_ordering
        )

    if workers <= 1:
        transcripts = [one(ex) for ex in examples]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            transcripts = list(pool.map(one, examples))
    return sorted(transcripts, key=lambda t: t.example_id)


def write_transcripts(transcripts: Iterable[PipelineTranscript], out: Path | str) -> None:
    with Path(out).open("w", encoding="utf-8") as fh:
        for t in transcripts:
            fh.write(json.dumps(t.to_json(), ensure_ascii=False) + "\n")


def read_transcripts(path: Path | str) -> list[PipelineTranscript]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(PipelineTranscript.from_json(json.loads(line)))
    return out
