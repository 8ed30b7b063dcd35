"""Fine-tune corpus emitters and query skeletonization.

Two corpus shapes are emitted, both line-delimited UTF-8 JSON:

skeleton corpus
    First line is a header record ``{"format": "skeleton-corpus",
    "version": 1}``; each following line is ``{"id", "db_id", "prompt",
    "response"}`` where the response is ``<skeleton> ||| <gold SQL>``.

chat corpus
    No header (fine-tune APIs ingest the file as-is); each line is
    ``{"messages": [system, user, assistant]}`` with the schema-bearing
    user turn and the gold SQL as the assistant turn.

Skeletonization replaces every table reference, column reference and
literal with ``_`` while keeping keywords and operators, then collapses
adjacent placeholders (``t.col`` is a single ``_``). Emission is
deterministic: same input, byte-identical output.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Iterable

from .dataset import SpiderExample
from .errors import Nl2SqlError
from .prompts import SYSTEM_PROMPT, schema_block, zero_shot_user_prompt
from .schema import DatabaseSchema
from .sqlast.tokens import Token, tokenize

logger = logging.getLogger(__name__)

SKELETON_HEADER = {"format": "skeleton-corpus", "version": 1}
_STAR_PRECEDERS = {"select", "distinct", ",", "(", "."}


def skeletonize(sql: str) -> str:
    """Reduce a query to its keyword/operator skeleton."""
    tokens = tokenize(sql)
    pieces: list[str] = []
    prev = ""
    for idx, tok in enumerate(tokens):
        if tok.kind == "end":
            break
        piece = _skeleton_piece(tok, tokens[idx + 1], prev)
        if piece is not None:
            pieces.append(piece)
        prev = tok.text.lower()
    return _join_skeleton(pieces)


def _skeleton_piece(tok: Token, nxt: Token, prev: str) -> str | None:
    if tok.kind in ("string", "number", "qident"):
        return "_"
    if tok.kind == "ident":
        kw = tok.keyword()
        if kw is not None:
            return kw.upper()
        if nxt.kind == "punct" and nxt.text == "(":
            return tok.text.lower()  # function name
        return "_"
    if tok.kind == "op" and tok.text == "*":
        # '*' is a column star after SELECT / ',' / '(' / '.'; else arithmetic.
        return "_" if prev in _STAR_PRECEDERS else "*"
    if tok.kind == "punct" and tok.text == ";":
        return None
    return tok.text


def _join_skeleton(pieces: list[str]) -> str:
    # Collapse qualified names and runs of placeholders into one "_".
    collapsed: list[str] = []
    for piece in pieces:
        if piece == "." and collapsed and collapsed[-1] == "_":
            continue
        if piece == "_" and collapsed and collapsed[-1] == "_":
            continue
        collapsed.append(piece)
    text = " ".join(collapsed)
    text = text.replace("( ", "(").replace(" )", ")").replace(" ,", ",")
    # Reattach function names to their opening paren; keywords stay separate.
    text = re.sub(r"\b([a-z][a-z0-9_]*) \(", r"\1(", text)
    return text


def emit_skeleton_corpus(
    examples: Iterable[SpiderExample],
    schemas: dict[str, DatabaseSchema],
    out: Path | str,
) -> int:
    """Write the skeleton-format corpus; returns the number of records."""
    out = Path(out)
    written = 0
    with out.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(SKELETON_HEADER) + "\n")
        for ex in examples:
            try:
                skeleton = skeletonize(ex.gold_sql)
            except Nl2SqlError as exc:
                logger.warning("skipping example %d: %s", ex.id, exc)
                continue
            record = {
                "id": ex.id,
                "db_id": ex.db_id,
                "prompt": f"{schema_block(schemas[ex.db_id])}\n\n### Question: {ex.question}",
                "response": f"{skeleton} ||| {ex.gold_sql}",
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    return written


def emit_chat_corpus(
    examples: Iterable[SpiderExample],
    schemas: dict[str, DatabaseSchema],
    out: Path | str,
) -> int:
    """Write the chat fine-tune corpus; returns the number of records."""
    out = Path(out)
    written = 0
    with out.open("w", encoding="utf-8") as fh:
        for ex in examples:
            record = {
                "messages": [
                    {"role": "system", "content": SYSTEM_PROMPT},
                    {"role": "user", "content": zero_shot_user_prompt(ex.question, schemas[ex.db_id])},
                    {"role": "assistant", "content": ex.gold_sql},
                ]
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    return written
