"""Program simplification.

Two passes over a test-passing program: a deterministic pass that keeps
replacing AST subtrees with strictly smaller ones (the empty tree,
single variables or constants, or any descendant subtree) while the
program still passes its tests, run to a fixpoint; and a randomized pass
that regenerates whole statements, structure conditions, or the return
expression under a budget, finishing with one more deterministic pass.
Both preserve the tests they are given and never increase the
(node-count, code-length) key.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from random import Random
from typing import Callable, Sequence

from .components import TypeUniverse
from .fragments import FragmentPool
from .generator import (
    DeadEnd, GenConfig, ScopeEntry, _Gen, _Redraw,
)
from .interpreter import ExecLimits, TestCase, evaluate_test
from .lang import (
    BOOL, INT, Assign, BinOp, Call, ConstLit, Expr, ExprStmt, ForCounter,
    ForEach, If, Index, IndexAssign, NotOp, Program, Stmt, TypeRef, VarRef,
    clone_program, expr_type, size_of,
)
from .syntax import expr_text, stmt_text
from .typecheck import typecheck

BOOL_BUDGET_FALLBACK = 2  # smallest useful condition: a variable or not-X


def _passes_all(p: Program, tests: Sequence[TestCase], components,
                limits: ExecLimits, float_tol: float,
                ignored: frozenset[str]) -> bool:
    return all(evaluate_test(p, t, components, limits, float_tol, ignored)
               for t in tests)


def _node_key(node) -> tuple[int, int]:
    if isinstance(node, Expr):
        return size_of(node), len(expr_text(node))
    return size_of(node), len(stmt_text(node))


# ------------------------------------------------------------ slot model

@dataclass(slots=True)
class _Slot:
    """One replaceable position in the tree."""

    kind: str                              # "stmt" | "expr" | "decl"
    get: Callable[[], object]
    put: Callable[[object], None]
    remove: Callable[[], None] | None      # for statements and decls
    unremove: Callable[[], None] | None
    extras: tuple[ScopeEntry, ...]         # enclosing loop bindings
    expr_wanted: TypeRef | None            # static type for regeneration


def _list_slot(items: list, i: int, kind: str,
               extras: tuple[ScopeEntry, ...], removable: bool) -> _Slot:
    old = items[i]

    def remove() -> None:
        items.pop(i)

    def unremove() -> None:
        items.insert(i, old)

    return _Slot(kind, lambda: items[i],
                 lambda x: items.__setitem__(i, x),
                 remove if removable else None,
                 unremove if removable else None,
                 extras, None)


def _attr_slot(obj, name: str, extras: tuple[ScopeEntry, ...],
               wanted: TypeRef | None) -> _Slot:
    return _Slot("expr", lambda: getattr(obj, name),
                 lambda x: setattr(obj, name, x), None, None, extras, wanted)


def _collect_slots(p: Program, deep: bool) -> list[_Slot]:
    """Replaceable positions in document order.

    ``deep`` also yields declarations and every expression position; the
    shallow set is statements, structure conditions, and the return
    expression only.
    """
    slots: list[_Slot] = []

    def expr_slots(e: Expr, extras: tuple[ScopeEntry, ...]) -> None:
        if not deep:
            return
        cls = e.__class__
        if cls is BinOp:
            slots.append(_attr_slot(e, "lhs", extras, expr_type(e.lhs)))
            expr_slots(e.lhs, extras)
            slots.append(_attr_slot(e, "rhs", extras, expr_type(e.rhs)))
            expr_slots(e.rhs, extras)
        elif cls is NotOp:
            slots.append(_attr_slot(e, "operand", extras, BOOL))
            expr_slots(e.operand, extras)
        elif cls is Call:
            for i, a in enumerate(e.args):
                slots.append(_list_slot(e.args, i, "expr", extras, False))
                slots[-1].expr_wanted = expr_type(a)
                expr_slots(a, extras)
        elif cls is Index:
            slots.append(_attr_slot(e, "coll", extras, expr_type(e.coll)))
            expr_slots(e.coll, extras)
            slots.append(_attr_slot(e, "index", extras, INT))
            expr_slots(e.index, extras)

    def stmt_slots(s: Stmt, extras: tuple[ScopeEntry, ...]) -> None:
        cls = s.__class__
        if cls is Assign:
            if deep:
                slots.append(_attr_slot(s, "value", extras, None))
                expr_slots(s.value, extras)
        elif cls is IndexAssign:
            if deep:
                slots.append(_attr_slot(s, "coll", extras,
                                        expr_type(s.coll)))
                expr_slots(s.coll, extras)
                slots.append(_attr_slot(s, "index", extras, INT))
                expr_slots(s.index, extras)
                slots.append(_attr_slot(s, "value", extras, None))
                expr_slots(s.value, extras)
        elif cls is ExprStmt:
            expr_slots(s.call, extras)
        elif cls is If:
            slots.append(_attr_slot(s, "cond", extras, BOOL))
            expr_slots(s.cond, extras)
            block(s.body, extras)
        elif cls is ForCounter:
            inner = extras + ((s.var, INT, False),)
            slots.append(_attr_slot(s, "cond", inner, BOOL))
            expr_slots(s.cond, inner)
            block(s.body, inner)
        elif cls is ForEach:
            block(s.body, extras + ((s.var, s.elem_type, False),))

    def block(stmts: list[Stmt], extras: tuple[ScopeEntry, ...]) -> None:
        for i in range(len(stmts)):
            slots.append(_list_slot(stmts, i, "stmt", extras, True))
            stmt_slots(stmts[i], extras)

    if deep:
        for i in range(len(p.locals)):
            slots.append(_list_slot(p.locals, i, "decl", (), True))
            slots.append(_attr_slot(p.locals[i], "init", (),
                                    p.locals[i].type))
            expr_slots(p.locals[i].init, ())
    block(p.body, ())
    if p.ret_expr is not None:
        slots.append(_attr_slot(p, "ret_expr", (), p.ret))
        if deep:
            expr_slots(p.ret_expr, ())
    return slots


# ------------------------------------------------------- deterministic

def _program_vars(p: Program) -> list[tuple[str, TypeRef]]:
    out = [(q.name, q.type) for q in p.params]
    out += [(d.name, d.type) for d in p.locals]

    def walk(stmts: list[Stmt]) -> None:
        for s in stmts:
            cls = s.__class__
            if cls is If:
                walk(s.body)
            elif cls is ForCounter:
                out.append((s.var, INT))
                walk(s.body)
            elif cls is ForEach:
                out.append((s.var, s.elem_type))
                walk(s.body)

    walk(p.body)
    return out


def _subtrees(node) -> list:
    """Proper descendants usable as replacements, document order.

    For a statement that means nested statements plus calls (a call is a
    statement on its own); for an expression, every sub-expression.
    """
    out: list = []

    def expr_walk(e: Expr) -> None:
        out.append(e)
        cls = e.__class__
        if cls is BinOp:
            expr_walk(e.lhs)
            expr_walk(e.rhs)
        elif cls is NotOp:
            expr_walk(e.operand)
        elif cls is Call:
            for a in e.args:
                expr_walk(a)
        elif cls is Index:
            expr_walk(e.coll)
            expr_walk(e.index)

    def stmt_walk(s: Stmt) -> None:
        out.append(s)
        cls = s.__class__
        if cls is Assign:
            expr_walk(s.value)
        elif cls is IndexAssign:
            expr_walk(s.coll)
            expr_walk(s.index)
            expr_walk(s.value)
        elif cls is ExprStmt:
            expr_walk(s.call)
        elif cls in (If, ForCounter):
            expr_walk(s.cond)
            for q in s.body:
                stmt_walk(q)
        elif cls is ForEach:
            for q in s.body:
                stmt_walk(q)

    if isinstance(node, Expr):
        expr_walk(node)
    else:
        stmt_walk(node)
    return out[1:]


def _stmt_candidates(old: Stmt, p: Program) -> list[Stmt]:
    """Smaller statements buildable from ``old``'s own parts."""
    cands: list[Stmt] = []
    for d in _subtrees(old):
        if isinstance(d, Stmt):
            cands.append(d)
        elif d.__class__ is Call:
            cands.append(ExprStmt(d))
    key = _node_key(old)
    return [c for c in cands if _node_key(c) < key]


def _expr_candidates(old: Expr, p: Program,
                     universe: TypeUniverse) -> list[Expr]:
    """Constants, variables, and descendants smaller than ``old``.

    Constants come first so that, among equal-sized survivors, the
    plainest replacement wins (e.g. ``x + 0`` collapses to the literal
    the tests demand rather than to ``x``, letting the assignment and
    declaration of ``x`` fall away in later sweeps).
    """
    cands: list[Expr] = [ConstLit(v) for v in universe.constants]
    cands += [VarRef(n, t) for n, t in _program_vars(p)]
    cands += [d for d in _subtrees(old) if isinstance(d, Expr)]
    key = _node_key(old)
    return [c for c in cands if _node_key(c) < key]


def simplify_quick(p: Program, tests: Sequence[TestCase],
                   universe: TypeUniverse, limits: ExecLimits,
                   float_tol: float = 1e-9,
                   ignored: frozenset[str] = frozenset()) -> Program:
    """Shrink ``p`` while it keeps passing ``tests``, to a fixpoint.

    Every node is offered strictly smaller replacements — removal for
    statements and declarations, in-scope variables, grammar constants,
    and its own descendants.  A replacement sticks when the program
    still parses under the type rules and passes every test.  Sweeps are
    preorder and repeat until one changes nothing.  ``p`` is left
    untouched; the simplified copy is returned.
    """
    q = clone_program(p)
    comps = universe.component_map

    def ok() -> bool:
        return (not typecheck(q, universe)
                and _passes_all(q, tests, comps, limits, float_tol, ignored))

    changed = True
    while changed:
        changed = False
        k = 0
        while True:
            slots = _collect_slots(q, deep=True)
            if k >= len(slots):
                break
            slot = slots[k]
            if slot.remove is not None:
                slot.remove()
                if ok():
                    changed = True
                    continue        # same k: the next slot shifted in
                slot.unremove()
            if slot.kind != "decl":
                old = slot.get()
                if isinstance(old, Expr):
                    cands = _expr_candidates(old, q, universe)
                else:
                    cands = _stmt_candidates(old, q)
                accepted = False
                for cand in cands:
                    slot.put(cand)
                    if ok():
                        accepted = True
                        break
                    slot.put(old)
                if accepted:
                    changed = True
                    continue        # same k: retry the shrunken node
            k += 1
    return q


# --------------------------------------------------------- randomized

def simplify_slow(p: Program, tests: Sequence[TestCase],
                  universe: TypeUniverse, pool: FragmentPool,
                  rng: Random,
                  budget_seconds: float | None = None,
                  budget_candidates: int | None = None,
                  cfg: GenConfig | None = None,
                  limits: ExecLimits = ExecLimits(),
                  float_tol: float = 1e-9,
                  ignored: frozenset[str] = frozenset()) -> Program:
    """Randomized large-scale shrinking, then one deterministic pass.

    Statements, structure conditions, and the return expression are
    regenerated with a size budget one below their current size, keeping
    any replacement under which the program still passes every test.
    Runs until the time or candidate budget is spent.
    """
    q = clone_program(p)
    if cfg is None:
        cfg = GenConfig()
    comps = universe.component_map
    start = time.monotonic()
    spent = 0

    def in_budget() -> bool:
        if budget_candidates is not None and spent >= budget_candidates:
            return False
        if (budget_seconds is not None
                and time.monotonic() - start >= budget_seconds):
            return False
        return budget_candidates is not None or budget_seconds is not None

    base: list[ScopeEntry] = [(v.name, v.type, True) for v in q.params]
    base += [(d.name, d.type, True) for d in q.locals]
    slots = _collect_slots(q, deep=False)
    while in_budget() and slots:
        spent += 1
        slot = slots[rng.randrange(len(slots))]
        old = slot.get()
        room = size_of(old) - 1
        if room < 1:
            continue
        g = _Gen(universe, pool, False, cfg, rng, list(base),
                 {v[0] for v in base} | {v[0] for v in slot.extras},
                 allow_new_locals=False)
        try:
            if slot.kind == "stmt":
                cand = g.gen_stmt(room, slot.extras, True)
            else:
                wanted = slot.expr_wanted if slot.expr_wanted else BOOL
                cand = g.gen_expr(wanted, room, slot.extras, True)
        except (DeadEnd, _Redraw):
            continue
        if not _node_key(cand) < _node_key(old):
            continue
        slot.put(cand)
        if (not typecheck(q, universe)
                and _passes_all(q, tests, comps, limits, float_tol, ignored)):
            slots = _collect_slots(q, deep=False)
        else:
            slot.put(old)
    return simplify_quick(q, tests, universe, limits, float_tol, ignored)
