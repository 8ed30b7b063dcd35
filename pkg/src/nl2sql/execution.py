"""Sandboxed query execution and result-table equivalence.

Queries run against the example's SQLite file through a read-only
connection, with a wall-clock interrupt and a row cap so a runaway
cartesian product cannot hang the harness. Outcomes are a tagged union:
a table, an engine error (message kept verbatim: correction prompts quote
it), or a timeout. A missing database file is a harness fault and raises
instead.

Equivalence compares cell contents only: column names are ignored (gold
and predictions alias columns differently), rows compare as sequences when
both queries are ordered and as multisets otherwise. Numeric cells are
canonicalized (integral floats to int, others rounded to a configurable
number of significant digits, default 7 ~ relative 1e-6) before comparison
so that equivalence is a true equivalence relation.
"""

from __future__ import annotations

import math
import sqlite3
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import quote

from .errors import DatabaseMissingError
from .schema import DatabaseSchema
from .sqlast.tokens import tokenize

Cell = None | int | float | str | bytes

DEFAULT_TIMEOUT_SECONDS = 30.0
DEFAULT_MAX_ROWS = 10_000
SIGNIFICANT_DIGITS = 7


@dataclass(frozen=True)
class ExecLimits:
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS
    max_rows: int = DEFAULT_MAX_ROWS


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...]
    ordered: bool  # the producing query has a top-level ORDER BY
    truncated: bool = False
    row_limit_applied: int | None = None

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row arity differs from column count")


@dataclass(frozen=True)
class ExecOutcome:
    """Exactly one of table / error / timeout is populated."""

    table: ResultTable | None = None
    error: str | None = None
    error_class: str | None = None
    timed_out: bool = False

    @property
    def kind(self) -> str:
        if self.table is not None:
            return "table"
        if self.timed_out:
            return "timeout"
        return "error"


def query_is_ordered(sql: str) -> bool:
    """True iff the statement has a top-level ORDER BY (paren depth zero).

    Token-based on purpose: execution must work even for model output our
    grammar rejects, so this cannot go through the parser.
    """
    try:
        tokens = tokenize(sql)
    except Exception:
        return False
    depth = 0
    for tok in tokens:
        if tok.kind == "punct" and tok.text == "(":
            depth += 1
        elif tok.kind == "punct" and tok.text == ")":
            depth -= 1
        elif depth == 0 and tok.is_keyword("order"):
            return True
    return False


def execute(sql: str, schema: DatabaseSchema, limits: ExecLimits = ExecLimits()) -> ExecOutcome:
    """Run one SELECT against the schema's database, read-only."""
    db_path = schema.db_path
    if db_path is None or not Path(db_path).is_file():
        raise DatabaseMissingError(f"database file missing for {schema.db_id}: {db_path}")
    ordered = query_is_ordered(sql)
    uri_path = quote(str(Path(db_path).resolve()))
    conn = sqlite3.connect(f"file:{uri_path}?mode=ro", uri=True)
    interrupted = threading.Event()

    def interrupt() -> None:
        interrupted.set()
        conn.interrupt()

    timer = threading.Timer(limits.timeout_seconds, interrupt)
    timer.start()
    try:
        cursor = conn.execute(sql)
        rows = cursor.fetchmany(limits.max_rows + 1)
        columns = tuple(d[0] for d in cursor.description) if cursor.description else ()
        truncated = len(rows) > limits.max_rows
        if truncated:
            rows = rows[: limits.max_rows]
        table = ResultTable(
            columns=columns,
            rows=tuple(tuple(row) for row in rows),
            ordered=ordered,
            truncated=truncated,
            row_limit_applied=limits.max_rows if truncated else None,
        )
        return ExecOutcome(table=table)
    except sqlite3.Error as exc:
        if interrupted.is_set():
            return ExecOutcome(timed_out=True)
        return ExecOutcome(error=str(exc), error_class=type(exc).__name__)
    finally:
        timer.cancel()
        conn.close()


def execute_for_comparison(
    sql: str, schema: DatabaseSchema, limits: ExecLimits = ExecLimits()
) -> ExecOutcome:
    """Execute, retrying once with a 10x row cap if the table truncated."""
    outcome = execute(sql, schema, limits)
    if outcome.table is not None and outcome.table.truncated:
        outcome = execute(
            sql, schema, ExecLimits(timeout_seconds=limits.timeout_seconds,
                                    max_rows=limits.max_rows * 10)
        )
    return outcome


# --------------------------------------------------------------------------- equivalence

@dataclass(frozen=True)
class TableComparison:
    status: str  # "equivalent" | "different" | "inconclusive"
    detail: str = ""

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"


def normalize_cell(cell: Cell, digits: int = SIGNIFICANT_DIGITS) -> Cell:
    """Canonical form under which cell equality is decided."""
    if isinstance(cell, bool):  # sqlite3 never returns bool, but be safe
        return int(cell)
    if isinstance(cell, float):
        if math.isnan(cell) or math.isinf(cell):
            return repr(cell)
        if cell == int(cell) and abs(cell) < 2**53:
            return int(cell)
        rounded = float(f"%.{digits}g" % cell)
        if rounded == int(rounded) and abs(rounded) < 2**53:
            return int(rounded)
        return rounded
    return cell


def _normalize_row(row: tuple[Cell, ...], digits: int) -> tuple[Cell, ...]:
    return tuple(normalize_cell(c, digits) for c in row)


def tables_equivalent(
    pred: ResultTable,
    gold: ResultTable,
    strict_ordering: bool = False,
    digits: int = SIGNIFICANT_DIGITS,
) -> TableComparison:
    """Decide result equivalence; the report names the first divergence.

    Ordered (sequence) comparison applies when both tables came from
    ORDER BY queries; with ``strict_ordering`` it applies when either did.
    Truncated inputs are inconclusive by construction.
    """
    if pred.truncated or gold.truncated:
        return TableComparison("inconclusive", "a table was truncated by the row cap")
    if len(pred.columns) != len(gold.columns):
        return TableComparison(
            "different", f"column count {len(pred.columns)} != {len(gold.columns)}"
        )
    if len(pred.rows) != len(gold.rows):
        return TableComparison("different", f"row count {len(pred.rows)} != {len(gold.rows)}")

    pred_rows = [_normalize_row(r, digits) for r in pred.rows]
    gold_rows = [_normalize_row(r, digits) for r in gold.rows]

    as_sequences = (pred.ordered and gold.ordered) or (
        strict_ordering and (pred.ordered or gold.ordered)
    )
    if as_sequences:
        for idx, (p, g) in enumerate(zip(pred_rows, gold_rows)):
            if p != g:
                return TableComparison("different", f"row {idx} differs: {p!r} != {g!r}")
        return TableComparison("equivalent")

    note = ""
    if pred.ordered != gold.ordered:
        note = " (exactly one side is ordered; compared as multisets)"
    pred_count = Counter(pred_rows)
    gold_count = Counter(gold_rows)
    if pred_count == gold_count:
        return TableComparison("equivalent", detail=note.strip())
    for row, n in pred_count.items():
        if gold_count.get(row, 0) != n:
            return TableComparison(
                "different",
                f"row {row!r} appears {n}x in pred, {gold_count.get(row, 0)}x in gold{note}",
            )
    for row, n in gold_count.items():  # pragma: no cover - symmetric fallback
        if pred_count.get(row, 0) != n:
            return TableComparison(
                "different",
                f"row {row!r} appears {pred_count.get(row, 0)}x in pred, {n}x in gold{note}",
            )
    return TableComparison("equivalent", detail=note.strip())
