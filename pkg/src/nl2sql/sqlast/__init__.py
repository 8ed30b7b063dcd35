"""SQL SELECT parsing, canonicalization and structural diffing."""

from .canonical import CanonicalAst, canonicalize
from .conditionless import ConditionlessJoin, detect_conditionless_join
from .diff import AstDiff, diff
from .nodes import (
    AGGREGATE_FUNCTIONS,
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
from .parser import parse
from .printer import expr_sql, to_sql

__all__ = [
    "AGGREGATE_FUNCTIONS",
    "AliasRef",
    "AstDiff",
    "Between",
    "Binary",
    "BoolOp",
    "CanonicalAst",
    "ColumnRef",
    "Comparison",
    "ConditionlessJoin",
    "Exists",
    "Expr",
    "FromItem",
    "FuncCall",
    "InList",
    "InSubquery",
    "IsNull",
    "Literal",
    "OrderItem",
    "ScalarSubquery",
    "Select",
    "SelectItem",
    "Star",
    "SubquerySource",
    "TableSource",
    "Unary",
    "canonicalize",
    "detect_conditionless_join",
    "diff",
    "expr_sql",
    "parse",
    "to_sql",
]
