"""Static typechecker for programs against a type universe.

Returns a list of issues (empty means well-typed). Checking is
scope-aware: parameters and locals are assignable; counter and for-each
variables are readable but not assignable inside their bodies. Arithmetic
requires matching numeric operand types, comparisons are numeric,
equality needs one common type, and logic operators take Bool. Null
conforms to any reference type.
"""

from __future__ import annotations

from dataclasses import dataclass

from .components import TypeUniverse
from .lang import (
    ANGELIC, BOOL, FLOAT, INT, Assign, BinOp, Call, Cond, ConstLit, Expr,
    ExprStmt, ForCounter, ForEach, If, Index, IndexAssign, NotOp, Program,
    Stmt, TypeRef, VarRef, is_angelic, is_list_type, type_text, value_type,
)

_ARITH = ("+", "-", "*", "/", "%")
_COMPARE = ("<", "<=")
_LOGIC = ("&&", "||")


@dataclass(slots=True)
class TypeIssue:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


class _Checker:
    def __init__(self, universe: TypeUniverse):
        self.u = universe
        self.issues: list[TypeIssue] = []
        self.scope: dict[str, tuple[TypeRef, bool]] = {}

    def fail(self, where: str, message: str) -> None:
        self.issues.append(TypeIssue(where, message))

    def declare(self, where: str, name: str, t: TypeRef, assignable: bool):
        if name in self.scope:
            self.fail(where, f"duplicate variable {name!r}")
        self.scope[name] = (t, assignable)

    # -- expressions; returns the static type or None after reporting

    def expr(self, e: Expr, where: str) -> TypeRef | None:
        t = e.__class__
        if t is VarRef:
            entry = self.scope.get(e.name)
            if entry is None:
                self.fail(where, f"unknown variable {e.name!r}")
                return None
            if entry[0] != e.type:
                self.fail(where, f"variable {e.name!r} annotated "
                                 f"{type_text(e.type)} but declared "
                                 f"{type_text(entry[0])}")
            return entry[0]
        if t is ConstLit:
            vt = value_type(e.value)
            if vt.name != "Null" and vt not in self.u.types:
                self.fail(where, f"constant of type {type_text(vt)} outside "
                                 "the universe")
            return vt
        if t is BinOp:
            lt = self.expr(e.lhs, where + ".lhs")
            rt = self.expr(e.rhs, where + ".rhs")
            if lt is None or rt is None:
                return None
            if e.op in _ARITH:
                if lt not in (INT, FLOAT) or rt != lt:
                    self.fail(where, f"'{e.op}' needs matching numeric "
                                     f"operands, got {type_text(lt)} and "
                                     f"{type_text(rt)}")
                    return None
                return lt
            if e.op in _COMPARE:
                if lt not in (INT, FLOAT) or rt != lt:
                    self.fail(where, f"'{e.op}' needs matching numeric "
                                     f"operands, got {type_text(lt)} and "
                                     f"{type_text(rt)}")
                return BOOL
            if e.op in _LOGIC:
                if lt != BOOL or rt != BOOL:
                    self.fail(where, f"'{e.op}' needs Bool operands")
                return BOOL
            if e.op == "==":
                if not (self.u.conforms(lt, rt) or self.u.conforms(rt, lt)):
                    self.fail(where, f"'==' needs a common type, got "
                                     f"{type_text(lt)} and {type_text(rt)}")
                return BOOL
            self.fail(where, f"unknown operator {e.op!r}")
            return None
        if t is NotOp:
            ot = self.expr(e.operand, where + ".operand")
            if ot is not None and ot != BOOL:
                self.fail(where, "'!' needs a Bool operand")
            return BOOL
        if t is Call:
            return self.call(e, where, as_expr=True)
        if t is Index:
            ct = self.expr(e.coll, where + ".coll")
            it = self.expr(e.index, where + ".index")
            if it is not None and it != INT:
                self.fail(where, "index must be Int")
            if ct is None:
                return None
            if not is_list_type(ct):
                self.fail(where, f"cannot index {type_text(ct)}")
                return None
            return ct.params[0]
        self.fail(where, f"not an expression: {e!r}")
        return None

    def call(self, e: Call, where: str, as_expr: bool) -> TypeRef | None:
        sig = self.u.component_map.get(e.component)
        if sig is None:
            self.fail(where, f"unknown component {e.component!r}")
            return None
        if e.ret != sig.ret:
            self.fail(where, f"call {e.component!r} annotated with wrong "
                             "return type")
        if len(e.args) != len(sig.params):
            self.fail(where, f"{e.component!r} takes {len(sig.params)} "
                             f"arguments, got {len(e.args)}")
            return sig.ret
        for i, (arg, want) in enumerate(zip(e.args, sig.params)):
            got = self.expr(arg, f"{where}.args[{i}]")
            if got is not None and not self.u.conforms(got, want):
                self.fail(f"{where}.args[{i}]",
                          f"{e.component!r} argument {i} needs "
                          f"{type_text(want)}, got {type_text(got)}")
        if as_expr and sig.ret is None:
            self.fail(where, f"void component {e.component!r} used as an "
                             "expression")
            return None
        return sig.ret

    # -- statements

    def cond(self, c: Cond, where: str) -> None:
        if is_angelic(c):
            return
        ct = self.expr(c, where)
        if ct is not None and ct != BOOL:
            self.fail(where, f"condition must be Bool, got {type_text(ct)}")

    def block(self, body: list[Stmt], where: str) -> None:
        if not body:
            self.fail(where, "control-structure body may not be empty")
        for i, s in enumerate(body):
            self.stmt(s, f"{where}[{i}]")

    def stmt(self, s: Stmt, where: str) -> None:
        t = s.__class__
        if t is Assign:
            entry = self.scope.get(s.name)
            if entry is None:
                self.fail(where, f"unknown variable {s.name!r}")
                return
            vt, assignable = entry
            if not assignable:
                self.fail(where, f"variable {s.name!r} is read-only here")
            got = self.expr(s.value, where + ".value")
            if got is not None and not self.u.conforms(got, vt):
                self.fail(where, f"cannot assign {type_text(got)} to "
                                 f"{s.name!r}: {type_text(vt)}")
        elif t is IndexAssign:
            ct = self.expr(s.coll, where + ".coll")
            it = self.expr(s.index, where + ".index")
            vt = self.expr(s.value, where + ".value")
            if it is not None and it != INT:
                self.fail(where, "index must be Int")
            if ct is not None:
                if not is_list_type(ct):
                    self.fail(where, f"cannot index-assign {type_text(ct)}")
                elif vt is not None and not self.u.conforms(vt, ct.params[0]):
                    self.fail(where, f"cannot store {type_text(vt)} into "
                                     f"{type_text(ct)}")
        elif t is ExprStmt:
            self.call(s.call, where, as_expr=False)
        elif t is If:
            self.cond(s.cond, where + ".cond")
            self.block(s.body, where + ".body")
        elif t is ForCounter:
            saved = dict(self.scope)
            self.declare(where, s.var, INT, assignable=False)
            self.cond(s.cond, where + ".cond")
            self.block(s.body, where + ".body")
            self.scope = saved
        elif t is ForEach:
            entry = self.scope.get(s.iter_name)
            if entry is None:
                self.fail(where, f"unknown variable {s.iter_name!r}")
                return
            it = entry[0]
            if not is_list_type(it):
                self.fail(where, f"foreach over non-list {s.iter_name!r}")
                return
            if s.elem_type != it.params[0]:
                self.fail(where, "foreach element type does not match the "
                                 "list element type")
            saved = dict(self.scope)
            self.declare(where, s.var, it.params[0], assignable=False)
            self.block(s.body, where + ".body")
            self.scope = saved
        else:
            self.fail(where, f"not a statement: {s!r}")


def typecheck(p: Program, universe: TypeUniverse) -> list[TypeIssue]:
    ck = _Checker(universe)
    for q in p.params:
        if q.type not in universe.types:
            ck.fail(f"params.{q.name}", f"type {type_text(q.type)} is not in "
                                        "the universe")
        ck.declare(f"params.{q.name}", q.name, q.type, assignable=True)
    if p.ret is not None and p.ret not in universe.types:
        ck.fail("return", f"type {type_text(p.ret)} is not in the universe")
    for d in p.locals:
        if d.type not in universe.types:
            ck.fail(f"locals.{d.name}", f"type {type_text(d.type)} is not in "
                                        "the universe")
        got = ck.expr(d.init, f"locals.{d.name}.init")
        if got is not None and not universe.conforms(got, d.type):
            ck.fail(f"locals.{d.name}", f"initializer of type "
                                        f"{type_text(got)} does not fit "
                                        f"{type_text(d.type)}")
        ck.declare(f"locals.{d.name}", d.name, d.type, assignable=True)
    for i, s in enumerate(p.body):
        ck.stmt(s, f"body[{i}]")
    if (p.ret is None) != (p.ret_expr is None):
        ck.fail("return", "return expression must match the signature")
    elif p.ret_expr is not None:
        got = ck.expr(p.ret_expr, "return")
        if got is not None and not universe.conforms(got, p.ret):
            ck.fail("return", f"returning {type_text(got)}, signature wants "
                              f"{type_text(p.ret)}")
    return ck.issues
