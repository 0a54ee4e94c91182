"""Compact injective program encoding used for duplicate detection.

The encoding is a prefix code: every node emits a one-byte tag followed
by its children, string payloads are length-prefixed, call arity and
block brackets are explicit, and identifiers are interned (first
occurrence spells the name, later occurrences backreference its index).
A decoder could reconstruct the tree unambiguously, which is what makes
the map injective; tests additionally check injectivity against
structural equality over seeded random programs.

Locals are encoded with their declared types (programs may differ only
there); signatures are not encoded, since every candidate in one search
shares the task signature.
"""

from __future__ import annotations

from .lang import (
    Assign, BinOp, BoolV, Call, ConstLit, ExprStmt, FloatV, ForCounter,
    ForEach, If, Index, IndexAssign, IntV, NotOp, NullV, Program, StrV,
    TypeRef, VarRef, is_angelic,
)

_OP_CODES = {"+": "+", "-": "-", "*": "*", "/": "/", "%": "%",
             "&&": "&", "||": "|", "==": "=", "<": "<", "<=": "L"}


class _Encoder:
    __slots__ = ("parts", "atoms")

    def __init__(self):
        self.parts: list[str] = []
        self.atoms: dict[str, int] = {}

    def atom(self, name: str) -> None:
        idx = self.atoms.get(name)
        if idx is None:
            self.atoms[name] = len(self.atoms)
            self.parts.append(f"'{name};")
        else:
            self.parts.append(f"${idx};")

    def type(self, t: TypeRef) -> None:
        if t.params:
            self.parts.append("Y")
            self.atom(t.name)
            self.type(t.params[0])
        else:
            self.parts.append("y")
            self.atom(t.name)

    def expr(self, e) -> None:
        t = e.__class__
        p = self.parts
        if t is VarRef:
            p.append("v")
            self.atom(e.name)
        elif t is ConstLit:
            v = e.value
            vt = v.__class__
            if vt is IntV:
                p.append(f"i{v.v};")
            elif vt is FloatV:
                p.append(f"d{v.v!r};")
            elif vt is BoolV:
                p.append("b1" if v.v else "b0")
            elif vt is StrV:
                p.append(f"s{len(v.v)}:{v.v}")
            elif vt is NullV:
                p.append("n")
            else:
                raise TypeError(f"constant value has no encoding: {v!r}")
        elif t is BinOp:
            p.append(_OP_CODES[e.op])
            self.expr(e.lhs)
            self.expr(e.rhs)
        elif t is NotOp:
            p.append("!")
            self.expr(e.operand)
        elif t is Call:
            p.append("f")
            self.atom(e.component)
            p.append(f"{len(e.args)};")
            for a in e.args:
                self.expr(a)
        elif t is Index:
            p.append("x")
            self.expr(e.coll)
            self.expr(e.index)
        else:
            raise TypeError(f"not an expression: {e!r}")

    def cond(self, c) -> None:
        if is_angelic(c):
            self.parts.append("?")
        else:
            self.expr(c)

    def block(self, stmts) -> None:
        self.parts.append("[")
        for s in stmts:
            self.stmt(s)
        self.parts.append("]")

    def stmt(self, s) -> None:
        t = s.__class__
        p = self.parts
        if t is Assign:
            p.append("a")
            self.atom(s.name)
            self.expr(s.value)
        elif t is IndexAssign:
            p.append("A")
            self.expr(s.coll)
            self.expr(s.index)
            self.expr(s.value)
        elif t is ExprStmt:
            p.append("e")
            self.expr(s.call)
        elif t is If:
            p.append("I")
            self.cond(s.cond)
            self.block(s.body)
        elif t is ForCounter:
            p.append("F")
            self.atom(s.var)
            self.cond(s.cond)
            self.block(s.body)
        elif t is ForEach:
            p.append("E")
            self.atom(s.var)
            self.atom(s.iter_name)
            self.block(s.body)
        else:
            raise TypeError(f"not a statement: {s!r}")


def encode_program(p: Program) -> str:
    enc = _Encoder()
    enc.parts.append("P")
    for d in p.locals:
        enc.parts.append("l")
        enc.atom(d.name)
        enc.type(d.type)
        enc.expr(d.init)
    enc.block(p.body)
    if p.ret_expr is not None:
        enc.parts.append("r")
        enc.expr(p.ret_expr)
    else:
        enc.parts.append(".")
    return "".join(enc.parts)


def encode_expr(e) -> str:
    enc = _Encoder()
    enc.expr(e)
    return "".join(enc.parts)


def encode_stmt(s) -> str:
    enc = _Encoder()
    enc.stmt(s)
    return "".join(enc.parts)
