"""Tokenizer for the SQLite-flavored SELECT dialect."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError

KEYWORDS = frozenset(
    """
    select distinct from where group by having order limit offset as join
    inner left right full outer cross natural on and or not in like between
    is null exists union intersect except all asc desc case when then else
    end cast with
    """.split()
)

# Statement kinds we refuse outright; the dialect is read-only SELECT.
FORBIDDEN_LEADS = frozenset(
    "insert update delete create drop alter replace pragma attach detach vacuum".split()
)

_TWO_CHAR_OPS = ("<=", ">=", "<>", "!=", "==", "||")
_ONE_CHAR_OPS = "=<>+-*/%"


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "qident" | "string" | "number" | "op" | "punct" | "end"
    text: str
    pos: int

    def keyword(self) -> str | None:
        """Lower-cased keyword name, or None for non-keyword tokens."""
        if self.kind == "ident" and self.text.lower() in KEYWORDS:
            return self.text.lower()
        return None

    def is_keyword(self, *names: str) -> bool:
        kw = self.keyword()
        return kw is not None and kw in names


def tokenize(sql: str) -> list[Token]:
    """Split SQL text into tokens, raising ParseError on malformed input."""
    tokens: list[Token] = []
    i = 0
    n = len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "-" and sql.startswith("--", i):
            nl = sql.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if ch == "/" and sql.startswith("/*", i):
            end = sql.find("*/", i + 2)
            if end < 0:
                raise ParseError("unterminated block comment", i)
            i = end + 2
            continue
        if ch == "'":
            start = i
            text, i = _read_string(sql, i)
            tokens.append(Token("string", text, start))
            continue
        if ch in '"`[':
            start = i
            text, i = _read_quoted_ident(sql, i)
            tokens.append(Token("qident", text, start))
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and sql[i + 1].isdigit()):
            start = i
            i = _scan_number(sql, i)
            tokens.append(Token("number", sql[start:i], start))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (sql[i].isalnum() or sql[i] == "_"):
                i += 1
            tokens.append(Token("ident", sql[start:i], start))
            continue
        two = sql[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("op", two, i))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("op", ch, i))
            i += 1
            continue
        if ch in "(),.;":
            tokens.append(Token("punct", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(Token("end", "", n))
    return tokens


def _read_string(sql: str, i: int) -> tuple[str, int]:
    # Single-quoted string; '' is the escape for a literal quote.
    start = i
    i += 1
    out: list[str] = []
    while i < len(sql):
        ch = sql[i]
        if ch == "'":
            if sql.startswith("''", i):
                out.append("'")
                i += 2
                continue
            return "".join(out), i + 1
        out.append(ch)
        i += 1
    raise ParseError("unterminated string literal", start)


def _read_quoted_ident(sql: str, i: int) -> tuple[str, int]:
    opener = sql[i]
    closer = {"[": "]"}.get(opener, opener)
    start = i
    i += 1
    out: list[str] = []
    while i < len(sql):
        ch = sql[i]
        if ch == closer:
            if closer in '"`' and sql.startswith(closer * 2, i):
                out.append(closer)
                i += 2
                continue
            return "".join(out), i + 1
        out.append(ch)
        i += 1
    raise ParseError("unterminated quoted identifier", start)


def _scan_number(sql: str, i: int) -> int:
    n = len(sql)
    while i < n and sql[i].isdigit():
        i += 1
    if i < n and sql[i] == ".":
        i += 1
        while i < n and sql[i].isdigit():
            i += 1
    if i < n and sql[i] in "eE":
        j = i + 1
        if j < n and sql[j] in "+-":
            j += 1
        if j < n and sql[j].isdigit():
            i = j
            while i < n and sql[i].isdigit():
                i += 1
    return i
