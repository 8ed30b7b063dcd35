"""Immutable AST node types for the supported SELECT dialect.

Every node is a frozen dataclass holding tuples, so a parsed query can be
shared freely across threads. Column references carry their binding: the
``source`` field names the FROM-clause entry (alias or table, lower-cased)
the reference resolved to, or None when the reference is ambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

AGGREGATE_FUNCTIONS = frozenset({"count", "sum", "avg", "min", "max", "total", "group_concat"})


# --------------------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str, None]
    text: str  # verbatim source spelling, used when printing

    @property
    def is_number(self) -> bool:
        return isinstance(self.value, (int, float))


@dataclass(frozen=True)
class ColumnRef:
    table: str | None  # qualifier as written, None when unqualified
    column: str  # as written
    source: str | None = None  # resolved source key (lower-cased), None if ambiguous
    ambiguous: bool = False


@dataclass(frozen=True)
class AliasRef:
    """A GROUP BY / HAVING / ORDER BY reference to a select-item output alias."""

    name: str
    index: int  # position of the aliased select item


@dataclass(frozen=True)
class Star:
    table: str | None = None  # t.* carries the qualifier
    source: str | None = None


@dataclass(frozen=True)
class FuncCall:
    name: str  # stored lower-cased; SQL function names are case-insensitive
    args: tuple["Expr", ...]
    distinct: bool = False
    star: bool = False  # count(*)

    @property
    def is_aggregate(self) -> bool:
        return self.name in AGGREGATE_FUNCTIONS


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "+" | "not"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic / concat: + - * / % ||
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Comparison:
    op: str  # = != < <= > >= like  (<> and == are normalized at parse)
    left: "Expr"
    right: "Expr"
    negated: bool = False  # NOT LIKE


@dataclass(frozen=True)
class Between:
    expr: "Expr"
    low: "Expr"
    high: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class InList:
    expr: "Expr"
    items: tuple["Expr", ...]
    negated: bool = False


@dataclass(frozen=True)
class InSubquery:
    expr: "Expr"
    query: "Select"
    negated: bool = False


@dataclass(frozen=True)
class Exists:
    query: "Select"
    negated: bool = False


@dataclass(frozen=True)
class IsNull:
    expr: "Expr"
    negated: bool = False  # IS NOT NULL


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or", n-ary and flattened
    terms: tuple["Expr", ...]


@dataclass(frozen=True)
class ScalarSubquery:
    query: "Select"


Expr = Union[
    Literal,
    ColumnRef,
    AliasRef,
    Star,
    FuncCall,
    Unary,
    Binary,
    Comparison,
    Between,
    InList,
    InSubquery,
    Exists,
    IsNull,
    BoolOp,
    ScalarSubquery,
]


# --------------------------------------------------------------------------- sources

@dataclass(frozen=True)
class TableSource:
    table: str  # as written
    alias: str | None = None
    key: str = ""  # binding key: (alias or table).lower()


@dataclass(frozen=True)
class SubquerySource:
    query: "Select"
    alias: str | None = None
    key: str = ""


Source = Union[TableSource, SubquerySource]


@dataclass(frozen=True)
class FromItem:
    """One FROM-clause entry: the first has join_type None, the rest carry
    how they were joined in ("join", "left", "cross", ",") and an optional
    ON condition. A missing condition is meaningful: it is what the
    condition-less-join detector looks for."""

    source: Source
    join_type: str | None = None
    condition: Expr | None = None


# --------------------------------------------------------------------------- select

@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: str | None = None


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    descending: bool = False


@dataclass(frozen=True)
class Select:
    items: tuple[SelectItem, ...]
    from_items: tuple[FromItem, ...] = ()
    where: Expr | None = None
    group_by: tuple[Expr, ...] = ()
    having: Expr | None = None
    order_by: tuple[OrderItem, ...] = ()
    limit: int | None = None
    distinct: bool = False
    # ("union" | "union all" | "intersect" | "except", right-hand query).
    # order_by / limit on a compound query live on the left (this) node and
    # apply to the whole compound, mirroring SQLite.
    set_op: tuple[str, "Select"] | None = field(default=None)

    @property
    def has_top_level_order(self) -> bool:
        return len(self.order_by) > 0
