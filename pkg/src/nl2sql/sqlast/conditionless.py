"""Detection of joins that lack a joining condition.

A join is flagged when it has no ON clause and no WHERE equality predicate
links the joined source to any other source in the same scope. Such joins
degenerate into cartesian products, which is how a broken gold query shows
itself: the result set balloons with rows that should have been filtered by
the missing key equality.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import ColumnRef, Comparison, Expr, Select, SubquerySource, TableSource
from .walk import flatten_and, iter_expr_nodes


@dataclass(frozen=True)
class ConditionlessJoin:
    table: str  # resolved table name (lower) or subquery alias
    key: str  # binding key of the flagged source
    index: int  # position in from_items


def detect_conditionless_join(select: Select) -> list[ConditionlessJoin]:
    """Flag condition-less joins in this query and any nested subquery."""
    flags = list(_scan_scope(select))
    for item in select.from_items:
        if isinstance(item.source, SubquerySource):
            flags.extend(detect_conditionless_join(item.source.query))
    for expr in _predicate_exprs(select):
        for node in iter_expr_nodes(expr):
            if hasattr(node, "query"):
                flags.extend(detect_conditionless_join(node.query))
    if select.set_op is not None:
        flags.extend(detect_conditionless_join(select.set_op[1]))
    return flags


def _scan_scope(select: Select) -> list[ConditionlessJoin]:
    if len(select.from_items) < 2:
        return []
    linked = _where_linked_keys(select)
    flags = []
    for idx, item in enumerate(select.from_items):
        if idx == 0 or item.condition is not None:
            continue
        key = item.source.key
        if key in linked:
            continue
        src = item.source
        table = src.table.lower() if isinstance(src, TableSource) else key
        flags.append(ConditionlessJoin(table=table, key=key, index=idx))
    return flags


def _where_linked_keys(select: Select) -> set[str]:
    """Source keys constrained by a WHERE equality against another source."""
    linked: set[str] = set()
    for conj in flatten_and(select.where):
        if (
            isinstance(conj, Comparison)
            and conj.op == "="
            and isinstance(conj.left, ColumnRef)
            and isinstance(conj.right, ColumnRef)
        ):
            left, right = conj.left.source, conj.right.source
            if left is not None and right is not None and left != right:
                linked.add(left)
                linked.add(right)
    return linked


def _predicate_exprs(select: Select) -> list[Expr]:
    out = [i.expr for i in select.items]
    out.extend(fi.condition for fi in select.from_items if fi.condition is not None)
    if select.where is not None:
        out.append(select.where)
    out.extend(select.group_by)
    if select.having is not None:
        out.append(select.having)
    out.extend(o.expr for o in select.order_by)
    return out
