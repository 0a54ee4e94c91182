"""Core mini-language: types, values, and the program AST.

Programs are the unit of search: a typed signature, locals with fixed
initializers, a statement body, and an optional return expression. AST
nodes are plain dataclasses and are treated as immutable after
construction; every rewrite builds a new tree.

Size convention (used for budgets and simplification keys): constants and
variables count 1; binary/unary operators, indexing, and assignments count
1 plus their children; calls count 1 plus all argument subtrees; control
statements count 1 plus condition plus body; an angelic condition counts
1; a bare call statement counts the same as its call; a local declaration
counts 1 plus its initializer; a return adds 1 plus its expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


# ---------------------------------------------------------------- types

@dataclass(frozen=True, slots=True)
class TypeRef:
    """A named type, optionally parameterized (only List takes a parameter)."""

    name: str
    params: tuple["TypeRef", ...] = ()


INT = TypeRef("Int")
FLOAT = TypeRef("Float")
BOOL = TypeRef("Bool")
STR = TypeRef("Str")
NULL_T = TypeRef("Null")

_PRIMITIVE_ALIASES = {
    "int": "Int", "float": "Float", "bool": "Bool", "str": "Str",
    "null": "Null", "list": "List",
}


def list_of(elem: TypeRef) -> TypeRef:
    return TypeRef("List", (elem,))


def is_list_type(t: TypeRef) -> bool:
    return t.name == "List"


def is_nullable(t: TypeRef) -> bool:
    """Reference types accept null; Int/Float/Bool do not."""
    return t.name not in ("Int", "Float", "Bool")


def type_text(t: TypeRef) -> str:
    if t.params:
        inner = ", ".join(type_text(p) for p in t.params)
        return f"{t.name}[{inner}]"
    return t.name


def parse_type(text: str) -> TypeRef:
    """Parse a type name like `Int` or `List[Str]` (primitive names are
    accepted case-insensitively)."""
    s = text.strip()
    if not s:
        raise ValueError("empty type name")
    if "[" in s:
        if not s.endswith("]"):
            raise ValueError(f"malformed type: {text!r}")
        head, _, rest = s.partition("[")
        head = head.strip()
        head = _PRIMITIVE_ALIASES.get(head, head)
        if head != "List":
            raise ValueError(f"only List takes a type parameter: {text!r}")
        return TypeRef("List", (parse_type(rest[:-1]),))
    name = _PRIMITIVE_ALIASES.get(s, s)
    if not all(c.isalnum() or c == "_" for c in name):
        raise ValueError(f"malformed type: {text!r}")
    return TypeRef(name)


# ---------------------------------------------------------------- values

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


class Value:
    """Base class for self-contained constant values (the wire model)."""

    __slots__ = ()


@dataclass(slots=True)
class IntV(Value):
    v: int


@dataclass(slots=True)
class FloatV(Value):
    v: float


@dataclass(slots=True)
class BoolV(Value):
    v: bool


@dataclass(slots=True)
class StrV(Value):
    v: str


@dataclass(slots=True)
class NullV(Value):
    pass


@dataclass(slots=True)
class ListV(Value):
    elem: TypeRef
    items: tuple[Value, ...]


@dataclass(slots=True)
class RecordV(Value):
    """An opaque record: a type tag plus named field values."""

    type: TypeRef
    fields: dict[str, Value] = field(default_factory=dict)


NULL = NullV()
TRUE = BoolV(True)
FALSE = BoolV(False)


def value_type(v: Value) -> TypeRef:
    if isinstance(v, IntV):
        return INT
    if isinstance(v, FloatV):
        return FLOAT
    if isinstance(v, BoolV):
        return BOOL
    if isinstance(v, StrV):
        return STR
    if isinstance(v, ListV):
        return list_of(v.elem)
    if isinstance(v, RecordV):
        return v.type
    if isinstance(v, NullV):
        return NULL_T
    raise TypeError(f"not a value: {v!r}")


def floats_close(a: float, b: float, tol: float) -> bool:
    """True when a and b agree within `tol`, absolute or relative,
    whichever is looser. NaN equals NaN for comparison purposes."""
    if a == b:
        return True
    if math.isnan(a) and math.isnan(b):
        return True
    if tol <= 0.0 or math.isinf(a) or math.isinf(b):
        return False
    diff = abs(a - b)
    return diff <= tol or diff <= tol * max(abs(a), abs(b))


def deep_equal(a: Value, b: Value, float_tol: float = 0.0) -> bool:
    """Structural equality over values; floats compare within float_tol."""
    if isinstance(a, FloatV):
        return isinstance(b, FloatV) and floats_close(a.v, b.v, float_tol)
    if isinstance(a, BoolV):
        return isinstance(b, BoolV) and a.v == b.v
    if isinstance(a, IntV):
        return isinstance(b, IntV) and a.v == b.v
    if isinstance(a, StrV):
        return isinstance(b, StrV) and a.v == b.v
    if isinstance(a, NullV):
        return isinstance(b, NullV)
    if isinstance(a, ListV):
        return (isinstance(b, ListV) and a.elem == b.elem
                and len(a.items) == len(b.items)
                and all(deep_equal(x, y, float_tol)
                        for x, y in zip(a.items, b.items)))
    if isinstance(a, RecordV):
        return (isinstance(b, RecordV) and a.type == b.type
                and a.fields.keys() == b.fields.keys()
                and all(deep_equal(a.fields[k], b.fields[k], float_tol)
                        for k in a.fields))
    raise TypeError(f"not a value: {a!r}")


# ---------------------------------------------------------------- AST

class Expr:
    __slots__ = ()


@dataclass(slots=True)
class VarRef(Expr):
    name: str
    type: TypeRef


# Marks constants whose runtime value must be rebuilt on every
# evaluation (lists, records) so evaluations never share mutable state.
PER_USE_RT = object()


@dataclass(slots=True)
class ConstLit(Expr):
    value: Value
    rt: object = field(init=False, compare=False, repr=False, default=None)

    def __post_init__(self) -> None:
        v = self.value
        cls = v.__class__
        if cls is NullV:
            self.rt = None
        elif cls is IntV or cls is FloatV or cls is BoolV or cls is StrV:
            self.rt = v.v
        else:
            self.rt = PER_USE_RT


@dataclass(slots=True)
class BinOp(Expr):
    op: str  # one of + - * / % && || == < <=
    lhs: Expr
    rhs: Expr


@dataclass(slots=True)
class NotOp(Expr):
    operand: Expr


@dataclass(slots=True)
class Call(Expr):
    component: str
    args: list[Expr]
    ret: TypeRef | None  # declared return type of the component


@dataclass(slots=True)
class Index(Expr):
    coll: Expr
    index: Expr


class _Angelic:
    """Singleton marker for an unresolved control-structure condition."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "ANGELIC"


ANGELIC = _Angelic()

# A condition is either a concrete Bool expression or the angelic marker.
Cond = Expr | _Angelic


def is_angelic(cond: Cond) -> bool:
    return cond is ANGELIC


class Stmt:
    __slots__ = ()


@dataclass(slots=True)
class Assign(Stmt):
    name: str
    value: Expr


@dataclass(slots=True)
class IndexAssign(Stmt):
    coll: Expr
    index: Expr
    value: Expr


@dataclass(slots=True)
class ExprStmt(Stmt):
    call: Call


@dataclass(slots=True)
class If(Stmt):
    cond: Cond
    body: list[Stmt]


@dataclass(slots=True)
class ForCounter(Stmt):
    var: str  # Int counter, starts at 0, post-incremented, loop-scoped
    cond: Cond
    body: list[Stmt]


@dataclass(slots=True)
class ForEach(Stmt):
    var: str
    elem_type: TypeRef
    iter_name: str  # an in-scope variable of list type
    body: list[Stmt]


@dataclass(slots=True)
class Param:
    name: str
    type: TypeRef


@dataclass(slots=True)
class LocalDecl:
    name: str
    type: TypeRef
    init: Expr


@dataclass(slots=True)
class Program:
    name: str
    params: list[Param]
    ret: TypeRef | None
    locals: list[LocalDecl]
    body: list[Stmt]
    ret_expr: Expr | None


# ---------------------------------------------------------------- size

def cond_size(cond: Cond) -> int:
    return 1 if cond is ANGELIC else size_of(cond)


def size_of(node) -> int:
    """Total AST node count; every listed variant is 1 + its children."""
    t = node.__class__
    if t is VarRef or t is ConstLit:
        return 1
    if t is BinOp:
        return 1 + size_of(node.lhs) + size_of(node.rhs)
    if t is Call:
        n = 1
        for a in node.args:
            n += size_of(a)
        return n
    if t is NotOp:
        return 1 + size_of(node.operand)
    if t is Index:
        return 1 + size_of(node.coll) + size_of(node.index)
    if t is Assign:
        return 1 + size_of(node.value)
    if t is IndexAssign:
        return 1 + size_of(node.coll) + size_of(node.index) + size_of(node.value)
    if t is ExprStmt:
        return size_of(node.call)
    if t is If:
        n = 1 + cond_size(node.cond)
        for s in node.body:
            n += size_of(s)
        return n
    if t is ForCounter:
        n = 1 + cond_size(node.cond)
        for s in node.body:
            n += size_of(s)
        return n
    if t is ForEach:
        n = 1
        for s in node.body:
            n += size_of(s)
        return n
    if t is Program:
        n = 0
        for d in node.locals:
            n += 1 + size_of(d.init)
        for s in node.body:
            n += size_of(s)
        if node.ret_expr is not None:
            n += 1 + size_of(node.ret_expr)
        return n
    raise TypeError(f"size_of: not an AST node: {node!r}")


def expr_type(e: Expr) -> TypeRef:
    """Static type of an expression (Call return types are stored on the
    node, so no registry is needed)."""
    t = e.__class__
    if t is VarRef:
        return e.type
    if t is ConstLit:
        return value_type(e.value)
    if t is BinOp:
        if e.op in ("+", "-", "*", "/", "%"):
            return expr_type(e.lhs)
        return BOOL
    if t is NotOp:
        return BOOL
    if t is Call:
        if e.ret is None:
            raise ValueError(f"void call {e.component} used as expression")
        return e.ret
    if t is Index:
        ct = expr_type(e.coll)
        if not is_list_type(ct):
            raise ValueError("indexing a non-list expression")
        return ct.params[0]
    raise TypeError(f"not an expression: {e!r}")


# ------------------------------------------------------------ tree walks

def iter_exprs(node):
    """Yield every Expr subtree under an Expr/Stmt/Program (inclusive)."""
    t = node.__class__
    if isinstance(node, Expr):
        yield node
        if t is BinOp:
            yield from iter_exprs(node.lhs)
            yield from iter_exprs(node.rhs)
        elif t is NotOp:
            yield from iter_exprs(node.operand)
        elif t is Call:
            for a in node.args:
                yield from iter_exprs(a)
        elif t is Index:
            yield from iter_exprs(node.coll)
            yield from iter_exprs(node.index)
        return
    if t is Assign:
        yield from iter_exprs(node.value)
    elif t is IndexAssign:
        yield from iter_exprs(node.coll)
        yield from iter_exprs(node.index)
        yield from iter_exprs(node.value)
    elif t is ExprStmt:
        yield from iter_exprs(node.call)
    elif t in (If, ForCounter):
        if not is_angelic(node.cond):
            yield from iter_exprs(node.cond)
        for s in node.body:
            yield from iter_exprs(s)
    elif t is ForEach:
        for s in node.body:
            yield from iter_exprs(s)
    elif t is Program:
        for d in node.locals:
            yield from iter_exprs(d.init)
        for s in node.body:
            yield from iter_exprs(s)
        if node.ret_expr is not None:
            yield from iter_exprs(node.ret_expr)


def iter_stmts(node):
    """Yield every Stmt subtree under a Stmt/Program (inclusive)."""
    t = node.__class__
    if isinstance(node, Stmt):
        yield node
        if t in (If, ForCounter, ForEach):
            for s in node.body:
                yield from iter_stmts(s)
        return
    if t is Program:
        for s in node.body:
            yield from iter_stmts(s)


def iter_conds(node):
    """Yield every control-structure condition (If/ForCounter) in order."""
    for s in iter_stmts(node):
        if s.__class__ in (If, ForCounter):
            yield s.cond


def has_angelic(node) -> bool:
    return any(is_angelic(c) for c in iter_conds(node))


# ---------------------------------------------------------------- cloning

def clone_expr(e: Expr) -> Expr:
    t = e.__class__
    if t is VarRef:
        return VarRef(e.name, e.type)
    if t is ConstLit:
        return ConstLit(e.value)
    if t is BinOp:
        return BinOp(e.op, clone_expr(e.lhs), clone_expr(e.rhs))
    if t is NotOp:
        return NotOp(clone_expr(e.operand))
    if t is Call:
        return Call(e.component, [clone_expr(a) for a in e.args], e.ret)
    if t is Index:
        return Index(clone_expr(e.coll), clone_expr(e.index))
    raise TypeError(f"not an expression: {e!r}")


def clone_cond(c: Cond) -> Cond:
    return ANGELIC if c is ANGELIC else clone_expr(c)


def clone_stmt(s: Stmt) -> Stmt:
    t = s.__class__
    if t is Assign:
        return Assign(s.name, clone_expr(s.value))
    if t is IndexAssign:
        return IndexAssign(clone_expr(s.coll), clone_expr(s.index),
                           clone_expr(s.value))
    if t is ExprStmt:
        return ExprStmt(clone_expr(s.call))
    if t is If:
        return If(clone_cond(s.cond), [clone_stmt(q) for q in s.body])
    if t is ForCounter:
        return ForCounter(s.var, clone_cond(s.cond),
                          [clone_stmt(q) for q in s.body])
    if t is ForEach:
        return ForEach(s.var, s.elem_type, s.iter_name,
                       [clone_stmt(q) for q in s.body])
    raise TypeError(f"not a statement: {s!r}")


def clone_program(p: Program) -> Program:
    return Program(
        p.name,
        [Param(q.name, q.type) for q in p.params],
        p.ret,
        [LocalDecl(d.name, d.type, clone_expr(d.init)) for d in p.locals],
        [clone_stmt(s) for s in p.body],
        None if p.ret_expr is None else clone_expr(p.ret_expr),
    )
