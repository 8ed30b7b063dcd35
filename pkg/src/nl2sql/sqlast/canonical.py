"""Alias- and case-normalization of bound SELECT trees.

Two queries that differ only in table alias names and identifier casing
canonicalize to equal trees: every FROM source is renamed to a positional
alias (t1, t2, ... assigned in FROM order, numbering shared across nested
scopes so correlated references stay unambiguous), identifiers are folded to
lower case, output aliases are dropped after substituting any references to
them, positional ORDER BY keys are replaced by the select item they point
at, and numeric literals get one canonical spelling. String literals keep
their exact characters: 'Lost' and 'lost' stay different.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .nodes import (
    AliasRef,
    Between,
    Binary,
    BoolOp,
    ColumnRef,
    Comparison,
    Exists,
    Expr,
    FromItem,
    FuncCall,
    InList,
    InSubquery,
    IsNull,
    Literal,
    OrderItem,
    ScalarSubquery,
    Select,
    SelectItem,
    Star,
    SubquerySource,
    TableSource,
    Unary,
)
from .printer import to_sql


@dataclass(frozen=True)
class CanonicalAst:
    """A canonicalized query; equality is structural tree equality."""

    query: Select

    @property
    def sql(self) -> str:
        return to_sql(self.query)


def canonicalize(select: Select) -> CanonicalAst:
    counter = _Counter()
    return CanonicalAst(query=_canon_select(select, {}, counter))


class _Counter:
    def __init__(self) -> None:
        self.n = 0

    def next_alias(self) -> str:
        self.n += 1
        return f"t{self.n}"


def _canon_select(s: Select, outer_map: dict[str, str], counter: _Counter) -> Select:
    # Assign canonical aliases to this scope's sources first, left to right.
    mapping = dict(outer_map)
    local: list[tuple[FromItem, str]] = []
    for item in s.from_items:
        canon = counter.next_alias()
        mapping[item.source.key] = canon
        local.append((item, canon))

    from_items = []
    for item, canon in local:
        src = item.source
        if isinstance(src, TableSource):
            new_src: TableSource | SubquerySource = TableSource(
                table=src.table.lower(), alias=canon, key=canon
            )
        else:
            # FROM subqueries are uncorrelated; canonicalize independently of
            # the outer mapping but share the global alias counter.
            new_src = SubquerySource(
                query=_canon_select(src.query, {}, counter), alias=canon, key=canon
            )
        condition = _canon_expr(item.condition, mapping, counter, s) if item.condition else None
        from_items.append(replace(item, source=new_src, condition=condition))

    items = tuple(
        SelectItem(expr=_canon_expr(i.expr, mapping, counter, s), alias=None) for i in s.items
    )
    where = _canon_expr(s.where, mapping, counter, s) if s.where is not None else None
    group_by = tuple(_canon_expr(e, mapping, counter, s) for e in s.group_by)
    having = _canon_expr(s.having, mapping, counter, s) if s.having is not None else None
    order_by = tuple(
        OrderItem(expr=_canon_expr(_deref(o.expr, s), mapping, counter, s), descending=o.descending)
        for o in s.order_by
    )
    set_op = None
    if s.set_op is not None:
        set_op = (s.set_op[0], _canon_select(s.set_op[1], outer_map, counter))
    return Select(
        items=items,
        from_items=tuple(from_items),
        where=where,
        group_by=group_by,
        having=having,
        order_by=order_by,
        limit=s.limit,
        distinct=s.distinct,
        set_op=set_op,
    )


def _deref(expr: Expr, s: Select) -> Expr:
    """Resolve positional ORDER BY keys to the select item they denote."""
    if isinstance(expr, Literal) and isinstance(expr.value, int):
        idx = expr.value - 1
        if 0 <= idx < len(s.items):
            return s.items[idx].expr
    return expr


def _canon_expr(e: Expr, mapping: dict[str, str], counter: _Counter, scope: Select) -> Expr:
    if isinstance(e, Literal):
        return _canon_literal(e)
    if isinstance(e, ColumnRef):
        if e.source is not None and e.source in mapping:
            alias = mapping[e.source]
            return ColumnRef(table=alias, column=e.column.lower(), source=alias)
        return ColumnRef(table=None, column=e.column.lower(), source=None, ambiguous=e.ambiguous)
    if isinstance(e, AliasRef):
        # Replace the output-alias reference with the expression it names.
        target = scope.items[e.index].expr
        return _canon_expr(target, mapping, counter, scope)
    if isinstance(e, Star):
        if e.source is not None and e.source in mapping:
            alias = mapping[e.source]
            return Star(table=alias, source=alias)
        return Star()
    if isinstance(e, FuncCall):
        return replace(e, args=tuple(_canon_expr(a, mapping, counter, scope) for a in e.args))
    if isinstance(e, Unary):
        folded = _fold_signed_number(e)
        if folded is not None:
            return folded
        return replace(e, operand=_canon_expr(e.operand, mapping, counter, scope))
    if isinstance(e, Binary):
        return replace(
            e,
            left=_canon_expr(e.left, mapping, counter, scope),
            right=_canon_expr(e.right, mapping, counter, scope),
        )
    if isinstance(e, Comparison):
        return replace(
            e,
            left=_canon_expr(e.left, mapping, counter, scope),
            right=_canon_expr(e.right, mapping, counter, scope),
        )
    if isinstance(e, Between):
        return replace(
            e,
            expr=_canon_expr(e.expr, mapping, counter, scope),
            low=_canon_expr(e.low, mapping, counter, scope),
            high=_canon_expr(e.high, mapping, counter, scope),
        )
    if isinstance(e, InList):
        return replace(
            e,
            expr=_canon_expr(e.expr, mapping, counter, scope),
            items=tuple(_canon_expr(i, mapping, counter, scope) for i in e.items),
        )
    if isinstance(e, InSubquery):
        return replace(
            e,
            expr=_canon_expr(e.expr, mapping, counter, scope),
            query=_canon_select(e.query, mapping, counter),
        )
    if isinstance(e, Exists):
        return replace(e, query=_canon_select(e.query, mapping, counter))
    if isinstance(e, IsNull):
        return replace(e, expr=_canon_expr(e.expr, mapping, counter, scope))
    if isinstance(e, BoolOp):
        return replace(e, terms=tuple(_canon_expr(t, mapping, counter, scope) for t in e.terms))
    if isinstance(e, ScalarSubquery):
        return replace(e, query=_canon_select(e.query, mapping, counter))
    raise TypeError(f"cannot canonicalize {type(e).__name__}")


def _canon_literal(lit: Literal) -> Literal:
    if lit.value is None:
        return Literal(value=None, text="NULL")
    if isinstance(lit.value, int):
        return Literal(value=lit.value, text=str(lit.value))
    if isinstance(lit.value, float):
        value = lit.value
        if value.is_integer():
            # 3.0 and 3 compare equal by value; give them one spelling.
            as_int = int(value)
            return Literal(value=as_int, text=str(as_int))
        return Literal(value=value, text=repr(value))
    return Literal(value=lit.value, text="'" + lit.value.replace("'", "''") + "'")


def _fold_signed_number(e: Unary) -> Literal | None:
    if e.op == "-" and isinstance(e.operand, Literal) and e.operand.is_number:
        value = -e.operand.value
        return _canon_literal(Literal(value=value, text=str(value)))
    if e.op == "+" and isinstance(e.operand, Literal) and e.operand.is_number:
        return _canon_literal(e.operand)
    return None
