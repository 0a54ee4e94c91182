"""Random typed program generation.

Each candidate program is built toward a target size drawn uniformly
from [1, maxProgramSize]. Basic generation spends a node's size
budget exactly: it chooses uniformly among the node kinds that can
consume the budget and typecheck (a leaf only when the budget is
exactly 1, a k-child node only when the budget covers the node plus one
unit per child), then uniformly among that kind's concrete options,
partitioning the remaining size uniformly among the children. Fragment
splicing is exempt from exactness — a fragment may come in under the
slot's budget — so program sizes are capped, not guaranteed.

Fragment-biased generation makes the same root decision half of the
time (recursing fragment-biased); otherwise it splices in a mined
fragment of the right kind and type: fragment variables that already
resolve in scope keep their names, dangling ones are renamed to
in-scope variables of the same type (declaring new locals when none
exist), and the fragment is used verbatim half of the time or partially
regenerated by a top-down walk that keeps each node with probability
3/4 and rebuilds abandoned subtrees from scratch within that branch's
share of the slot's size budget.

With an empty pool, fragment-biased generation takes exactly the same
random draws as basic generation, so the two are stream-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .components import TypeUniverse
from .fragments import EMPTY_POOL, FragmentPool
from .lang import (
    ANGELIC, BOOL, FALSE, FLOAT, INT, NULL_T, Assign, BinOp, Call, Cond,
    ConstLit, Expr, ExprStmt, FloatV, ForCounter, ForEach, If, Index,
    IndexAssign, IntV, LocalDecl, NotOp, NullV, Param, Program, Stmt, StrV,
    TypeRef, VarRef, clone_expr, clone_stmt, expr_type, is_angelic,
    is_list_type, list_of, size_of,
)

_SITE_RETRIES = 20
_MAX_SITE_FAILURES = 200
_PROGRAM_REDRAWS = 1000

_ARITH_OPS = ("+", "-", "*", "/", "%")
_COMPARE_OPS = ("<", "<=")

_ZERO_INITS = {
    "Int": IntV(0), "Float": FloatV(0.0), "Bool": FALSE, "Str": StrV(""),
}

# Statement counts for program and control-structure bodies, weighted
# toward few statements (solutions are short; extra statements mostly
# arrive through fragments). Capped by the available size.
_BODY_COUNT_WEIGHTS = ((1, 0.5), (2, 0.3), (3, 0.2))


class DeadEnd(Exception):
    """No grammar option fits the requested type and size here. Callers
    react by re-partitioning or re-sizing the slot and trying again."""


class _Redraw(Exception):
    """Too many sites dead-ended; abandon the whole program."""


@dataclass(frozen=True, slots=True)
class GenConfig:
    max_program_size: int = 40
    p_angelic_batch: float = 0.5       # candidates generated with holes
    p_fresh_root: float = 0.5          # fragment-biased: scratch root
    p_fragment_verbatim: float = 0.5   # use the renamed fragment as-is
    p_keep_fragment_node: float = 0.75
    local_count_weights: tuple[tuple[int, float], ...] = (
        (0, 0.5), (1, 0.3), (2, 0.2))


def _weighted_count(weights, rng: Random) -> int:
    x = rng.random()
    acc = 0.0
    for count, w in weights:
        acc += w
        if x < acc:
            return count
    return weights[-1][0]


# Scope entries are (name, type, assignable). Parameters and locals are
# assignable; loop counters and for-each variables are not.
ScopeEntry = tuple[str, TypeRef, bool]


class _Gen:
    """State for generating one program (or one subtree, for condition
    resolution): the base scope may grow as fragments declare locals."""

    def __init__(self, universe: TypeUniverse, pool: FragmentPool,
                 angelic: bool, cfg: GenConfig, rng: Random,
                 base_scope: list[ScopeEntry], used_names: set[str],
                 allow_new_locals: bool = True):
        self.u = universe
        self.pool = pool
        self.angelic = angelic
        self.cfg = cfg
        self.rng = rng
        self.base_scope = base_scope
        self.used_names = used_names
        self.allow_new_locals = allow_new_locals
        self.new_locals: list[LocalDecl] = []
        self._name_seq: dict[str, int] = {}
        self._site_failures = 0

    def _give_up(self) -> None:
        """A site exhausted its retries. Usually the enclosing slot just
        re-partitions, but a program that keeps dead-ending is abandoned
        outright rather than retried forever."""
        self._site_failures += 1
        if self._site_failures > _MAX_SITE_FAILURES:
            raise _Redraw
        raise DeadEnd

    # ---------------------------------------------------------- helpers

    def fresh_name(self, prefix: str) -> str:
        n = self._name_seq.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n}"
            if name not in self.used_names:
                self._name_seq[prefix] = n
                self.used_names.add(name)
                return name

    def scope_vars(self, extras: tuple[ScopeEntry, ...]):
        yield from self.base_scope
        yield from extras

    def conforming_vars(self, t: TypeRef, extras) -> list[ScopeEntry]:
        conforms = self.u.conforms
        return [v for v in self.scope_vars(extras) if conforms(v[1], t)]

    def assignable_vars(self, extras) -> list[ScopeEntry]:
        return [v for v in self.scope_vars(extras) if v[2]]

    def same_type_vars(self, t: TypeRef, extras,
                       must_assign: bool) -> list[ScopeEntry]:
        return [v for v in self.scope_vars(extras)
                if v[1] == t and (v[2] or not must_assign)]

    def compose(self, total: int, k: int) -> list[int]:
        """Uniformly random composition of ``total`` into k positive
        parts."""
        if k == 0:
            return []
        if k == 1:
            return [total]
        cuts = sorted(self.rng.sample(range(1, total), k - 1))
        parts = []
        prev = 0
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(total - prev)
        return parts

    def min_call_expr(self, wanted: TypeRef) -> int:
        best = None
        for c in self.u.components_returning(wanted):
            n = 1 + len(c.params)
            if best is None or n < best:
                best = n
        return best if best is not None else 1 << 30

    def min_base_stmt(self, extras) -> int:
        """Smallest statement possible here via assignment or call."""
        best = 1 << 30
        for c in self.u.components:
            best = min(best, 1 + len(c.params))
        if self.assignable_vars(extras):
            best = min(best, 2)
        if self.u.list_types:
            best = min(best, 4)
        return best

    def new_local(self, t: TypeRef) -> ScopeEntry:
        """Declare a fresh local of type ``t`` with a unit initializer,
        for fragments that need a variable of a missing type."""
        if not self.allow_new_locals:
            raise DeadEnd
        name = self.fresh_name("v")
        self.new_locals.append(LocalDecl(name, t, self.init_expr(t)))
        entry = (name, t, True)
        self.base_scope.append(entry)
        return entry

    def init_expr(self, t: TypeRef) -> Expr:
        """Initializer, by preference: the type's zero-like constant
        (0, 0.0, false, the empty string), else a zero-argument
        constructor, else null."""
        zero = _ZERO_INITS.get(t.name) if not t.params else None
        if zero is not None:
            return ConstLit(zero)
        decl = self.u.decl_of(t)
        if decl is not None and decl.zero_ctor is not None:
            return Call(decl.zero_ctor, [], t)
        consts = self.u.constants_of(t)
        for v in consts:
            if v.__class__ is not NullV:
                return ConstLit(v)
        if consts:
            return ConstLit(consts[0])
        raise DeadEnd

    # ------------------------------------------------------ expressions

    def gen_expr(self, wanted: TypeRef, budget: int, extras, biased: bool,
                 no_null: bool = False) -> Expr:
        """``no_null`` excludes expressions of static type Null — for
        slots like an indexing target, where a bare null never
        typechecks."""
        if biased and not self.pool.is_empty():
            if self.rng.random() >= self.cfg.p_fresh_root:
                conforms = self.u.conforms
                if no_null:
                    def conforms(t, w, _c=self.u.conforms):  # noqa: E306
                        return t != NULL_T and _c(t, w)
                frag = self.pool.pick_expr(wanted, budget, conforms, self.rng)
                if frag is not None:
                    adopted = self.adopt(clone_expr(frag), extras)
                    if self.rng.random() < self.cfg.p_fragment_verbatim:
                        return adopted
                    return self.walk_expr(adopted, extras, budget)
        return self.expr_root(wanted, budget, extras, biased, no_null)

    def expr_root(self, wanted: TypeRef, size: int, extras, biased: bool,
                  no_null: bool = False) -> Expr:
        """An expression of exactly ``size`` nodes: leaves (variables,
        constants, zero-argument calls) only when size is 1; otherwise a
        node whose children consume the rest."""
        rng = self.rng
        for _ in range(_SITE_RETRIES):
            kinds: list[str] = []
            var_opts: list[ScopeEntry] = []
            const_opts: tuple = ()
            op_opts: list[tuple] = []
            call_opts: list = []
            if size == 1:
                var_opts = self.conforming_vars(wanted, extras)
                if var_opts:
                    kinds.append("var")
                const_opts = self.u.constants_of(wanted)
                if no_null:
                    const_opts = tuple(v for v in const_opts
                                       if v.__class__ is not NullV)
                if const_opts:
                    kinds.append("const")
                call_opts = [c for c in self.u.components_returning(wanted)
                             if not c.params]
            else:
                op_opts = self._operator_options(wanted, size)
                if op_opts:
                    kinds.append("op")
                call_opts = [c for c in self.u.components_returning(wanted)
                             if 0 < len(c.params) <= size - 1]
            if call_opts:
                kinds.append("call")
            if not kinds:
                raise DeadEnd
            kind = rng.choice(kinds)
            try:
                if kind == "var":
                    name, t, _ = rng.choice(var_opts)
                    return VarRef(name, t)
                if kind == "const":
                    return ConstLit(rng.choice(const_opts))
                if kind == "op":
                    return self._gen_operator(rng.choice(op_opts), wanted,
                                              size, extras, biased)
                sig = rng.choice(call_opts)
                parts = self.compose(size - 1, len(sig.params))
                args = [self.gen_expr(pt, b, extras, biased)
                        for pt, b in zip(sig.params, parts)]
                return Call(sig.id, args, sig.ret)
            except DeadEnd:
                continue
        self._give_up()


    def _operator_options(self, wanted: TypeRef, budget: int) -> list[tuple]:
        opts: list[tuple] = []
        u = self.u
        if wanted == BOOL:
            if budget >= 2:
                opts.append(("not",))
            if budget >= 3:
                for num in (INT, FLOAT):
                    if num in u.types:
                        for op in _COMPARE_OPS:
                            opts.append(("cmp", op, num))
                for t in u.types_ordered:
                    opts.append(("eq", t))
                opts.append(("logic", "&&"))
                opts.append(("logic", "||"))
        if budget >= 3:
            if wanted in (INT, FLOAT) and wanted in u.types:
                for op in _ARITH_OPS:
                    opts.append(("arith", op))
            if list_of(wanted) in u.types:
                opts.append(("index",))
        return opts

    def _gen_operator(self, opt: tuple, wanted: TypeRef, budget: int,
                      extras, biased: bool) -> Expr:
        tag = opt[0]
        if tag == "not":
            return NotOp(self.gen_expr(BOOL, budget - 1, extras, biased))
        if tag == "index":
            a, b = self.compose(budget - 1, 2)
            return Index(self.gen_expr(list_of(wanted), a, extras, biased,
                                       no_null=True),
                         self.gen_expr(INT, b, extras, biased))
        if tag == "arith":
            operand = wanted
            op = opt[1]
        elif tag == "cmp":
            op, operand = opt[1], opt[2]
        elif tag == "eq":
            op, operand = "==", opt[1]
        else:  # logic
            op, operand = opt[1], BOOL
        a, b = self.compose(budget - 1, 2)
        return BinOp(op, self.gen_expr(operand, a, extras, biased),
                     self.gen_expr(operand, b, extras, biased))

    # ------------------------------------------------------- conditions

    def gen_cond(self, budget: int, extras, biased: bool) -> Cond:
        if self.angelic:
            return ANGELIC
        return self.gen_expr(BOOL, budget, extras, biased)

    # ------------------------------------------------------- statements

    def gen_stmt(self, budget: int, extras, biased: bool) -> Stmt:
        if biased and not self.pool.is_empty():
            if self.rng.random() >= self.cfg.p_fresh_root:
                frag = self.pool.pick_stmt(budget, self.rng)
                if frag is not None:
                    adopted = self.adopt(clone_stmt(frag), extras)
                    if self.angelic:
                        _strip_conditions(adopted)
                    if self.rng.random() < self.cfg.p_fragment_verbatim:
                        return adopted
                    return self.walk_stmt(adopted, extras, budget)
        return self.stmt_root(budget, extras, biased)

    def stmt_root(self, size: int, extras, biased: bool) -> Stmt:
        """A statement of exactly ``size`` nodes."""
        rng = self.rng
        for _ in range(_SITE_RETRIES):
            min_inner = self.min_base_stmt(extras)
            kinds: list[str] = []
            assign_opts: list[tuple] = []
            if size >= 2:
                assign_opts = [("var", v) for v in self.assignable_vars(extras)]
                if size >= 4:
                    assign_opts += [("idx", t) for t in self.u.list_types]
            if assign_opts:
                kinds.append("assign")
            if size == 1:
                call_opts = [c for c in self.u.components if not c.params]
            else:
                call_opts = [c for c in self.u.components
                             if 0 < len(c.params) <= size - 1]
            if call_opts:
                kinds.append("call")
            if size >= 2 + min_inner:
                kinds.append("if")
            for_opts: list[tuple] = []
            if size >= 2 + min_inner:
                for_opts.append(("counter",))
            if size >= 1 + min_inner:
                for_opts += [("each", v) for v in self.scope_vars(extras)
                             if is_list_type(v[1])]
            if for_opts:
                kinds.append("for")
            if not kinds:
                raise DeadEnd
            kind = rng.choice(kinds)
            try:
                if kind == "assign":
                    return self._gen_assign(rng.choice(assign_opts), size,
                                            extras, biased)
                if kind == "call":
                    sig = rng.choice(call_opts)
                    parts = self.compose(size - 1, len(sig.params))
                    args = [self.gen_expr(pt, b, extras, biased)
                            for pt, b in zip(sig.params, parts)]
                    return ExprStmt(Call(sig.id, args, sig.ret))
                if kind == "if":
                    cond, body = self._gen_guarded(size, extras, biased,
                                                   min_inner)
                    return If(cond, body)
                opt = rng.choice(for_opts)
                if opt[0] == "counter":
                    var = self.fresh_name("i")
                    extras2 = extras + ((var, INT, False),)
                    cond, body = self._gen_guarded(size, extras2, biased,
                                                   min_inner)
                    return ForCounter(var, cond, body)
                _, (iter_name, iter_type, _a) = opt
                elem_t = iter_type.params[0]
                var = self.fresh_name("e")
                extras2 = extras + ((var, elem_t, False),)
                m = min(_weighted_count(_BODY_COUNT_WEIGHTS, rng),
                        (size - 1) // min_inner)
                parts = self.compose(size - 1, m)
                body = [self.gen_stmt(b, extras2, biased) for b in parts]
                return ForEach(var, elem_t, iter_name, body)
            except DeadEnd:
                continue
        self._give_up()

    def _gen_assign(self, opt: tuple, budget: int, extras,
                    biased: bool) -> Stmt:
        if opt[0] == "var":
            name, t, _ = opt[1]
            return Assign(name, self.gen_expr(t, budget - 1, extras, biased))
        lt = opt[1]
        a, b, c = self.compose(budget - 1, 3)
        return IndexAssign(self.gen_expr(lt, a, extras, biased, no_null=True),
                           self.gen_expr(INT, b, extras, biased),
                           self.gen_expr(lt.params[0], c, extras, biased))

    def _gen_guarded(self, budget: int, extras, biased: bool,
                     min_inner: int) -> tuple[Cond, list[Stmt]]:
        """Condition and body for an if or counter loop (node cost 1)."""
        rng = self.rng
        m = min(_weighted_count(_BODY_COUNT_WEIGHTS, rng),
                (budget - 2) // min_inner)
        if self.angelic:
            parts = self.compose(budget - 2, m)
            return ANGELIC, [self.gen_stmt(b, extras, biased) for b in parts]
        parts = self.compose(budget - 1, 1 + m)
        cond = self.gen_expr(BOOL, parts[0], extras, biased)
        return cond, [self.gen_stmt(b, extras, biased) for b in parts[1:]]

    # --------------------------------------------- fragment adoption

    def _scope_entry(self, name: str, extras) -> ScopeEntry | None:
        for v in self.scope_vars(extras):
            if v[0] == name:
                return v
        return None

    def adopt(self, node, extras):
        """Make a cloned fragment valid here. A free variable whose name
        already resolves, with the same type, stays untouched; dangling
        names are renamed to in-scope variables of the same type
        (declaring new locals when none exist). Internal binders are
        freshened."""
        bound: dict[str, str] = {}  # binder name -> fresh-name prefix
        reads: dict[str, TypeRef] = {}
        writes: dict[str, list[TypeRef]] = {}
        _collect_names(node, bound, reads, writes)
        rename: dict[str, tuple[str, TypeRef | None]] = {}
        for name, prefix in bound.items():
            rename[name] = (self.fresh_name(prefix), None)
        for name, t in reads.items():
            if name in rename:
                continue
            must_assign = name in writes
            hit = self._scope_entry(name, extras)
            if (hit is not None and hit[1] == t
                    and (hit[2] or not must_assign)):
                rename[name] = (name, hit[1])
                continue
            cands = self.same_type_vars(t, extras, must_assign)
            entry = (self.rng.choice(cands) if cands
                     else self.new_local(t))
            rename[name] = (entry[0], entry[1])
        conforms = self.u.conforms
        for name, value_types in writes.items():
            if name in rename:
                continue
            hit = self._scope_entry(name, extras)
            if (hit is not None and hit[2]
                    and all(conforms(vt, hit[1]) for vt in value_types)):
                rename[name] = (name, hit[1])
                continue
            cands = [v for v in self.assignable_vars(extras)
                     if all(conforms(vt, v[1]) for vt in value_types)]
            entry = (self.rng.choice(cands) if cands
                     else self.new_local(value_types[0]))
            rename[name] = (entry[0], entry[1])
        _apply_rename(node, rename)
        return node

    # ------------------------------------------------ fragment mutation

    def _keep(self) -> bool:
        return self.rng.random() < self.cfg.p_keep_fragment_node

    def _shares(self, remaining: int, k: int) -> list[int]:
        """A kept node's remaining size budget split among its k
        children (floored so every child can hold at least a leaf)."""
        return self.compose(max(remaining, k), k)

    def _walk_child_expr(self, child: Expr, budget: int, extras,
                         no_null: bool = False) -> Expr:
        if self._keep():
            return self.walk_expr(child, extras, budget)
        return self.expr_root(expr_type(child), budget, extras,
                              False, no_null)

    def walk_expr(self, e: Expr, extras, budget: int) -> Expr:
        """Top-down fragment walk: this node is kept; each child is kept
        (and walked) with probability 3/4, else regenerated from scratch
        with its random share of the slot's size budget — so a replaced
        leaf can grow into a larger expression when the slot allows."""
        cls = e.__class__
        if cls is BinOp:
            a, b = self._shares(budget - 1, 2)
            e.lhs = self._walk_child_expr(e.lhs, a, extras)
            e.rhs = self._walk_child_expr(e.rhs, b, extras)
        elif cls is NotOp:
            e.operand = self._walk_child_expr(e.operand, budget - 1, extras)
        elif cls is Call:
            if e.args:
                parts = self._shares(budget - 1, len(e.args))
                e.args = [self._walk_child_expr(a, b, extras)
                          for a, b in zip(e.args, parts)]
        elif cls is Index:
            a, b = self._shares(budget - 1, 2)
            e.coll = self._walk_child_expr(e.coll, a, extras, no_null=True)
            e.index = self._walk_child_expr(e.index, b, extras)
        return e

    def _walk_child_stmt(self, child: Stmt, budget: int, extras) -> Stmt:
        if self._keep():
            return self.walk_stmt(child, extras, budget)
        return self.stmt_root(budget, extras, False)

    def _walk_child_cond(self, cond: Cond, budget: int, extras) -> Cond:
        if self._keep():
            if is_angelic(cond):
                return cond
            return self.walk_expr(cond, extras, budget)
        if self.angelic:
            return ANGELIC
        return self.expr_root(BOOL, budget, extras, False)

    def walk_stmt(self, s: Stmt, extras, budget: int) -> Stmt:
        cls = s.__class__
        if cls is Assign:
            s.value = self._walk_child_expr(s.value, budget - 1, extras)
        elif cls is IndexAssign:
            a, b, c = self._shares(budget - 1, 3)
            s.coll = self._walk_child_expr(s.coll, a, extras, no_null=True)
            s.index = self._walk_child_expr(s.index, b, extras)
            s.value = self._walk_child_expr(s.value, c, extras)
        elif cls is ExprStmt:
            if s.call.args:
                parts = self._shares(budget - 1, len(s.call.args))
                s.call.args = [self._walk_child_expr(a, b, extras)
                               for a, b in zip(s.call.args, parts)]
        elif cls is If:
            parts = self._shares(budget - 1, 1 + len(s.body))
            s.cond = self._walk_child_cond(s.cond, parts[0], extras)
            s.body = [self._walk_child_stmt(q, b, extras)
                      for q, b in zip(s.body, parts[1:])]
        elif cls is ForCounter:
            extras2 = extras + ((s.var, INT, False),)
            parts = self._shares(budget - 1, 1 + len(s.body))
            s.cond = self._walk_child_cond(s.cond, parts[0], extras2)
            s.body = [self._walk_child_stmt(q, b, extras2)
                      for q, b in zip(s.body, parts[1:])]
        elif cls is ForEach:
            extras2 = extras + ((s.var, s.elem_type, False),)
            parts = self._shares(budget - 1, len(s.body))
            s.body = [self._walk_child_stmt(q, b, extras2)
                      for q, b in zip(s.body, parts)]
        return s


def _collect_names(node, bound: dict[str, str], reads: dict,
                   writes: dict) -> None:
    """Free-variable reads/writes and internal binders of a fragment, in
    traversal order. Generated and parsed programs use unique names, so
    flat tables work."""
    cls = node.__class__
    if cls is VarRef:
        if node.name not in bound:
            reads.setdefault(node.name, node.type)
        return
    if cls is ConstLit:
        return
    if cls is BinOp:
        _collect_names(node.lhs, bound, reads, writes)
        _collect_names(node.rhs, bound, reads, writes)
    elif cls is NotOp:
        _collect_names(node.operand, bound, reads, writes)
    elif cls is Call:
        for a in node.args:
            _collect_names(a, bound, reads, writes)
    elif cls is Index:
        _collect_names(node.coll, bound, reads, writes)
        _collect_names(node.index, bound, reads, writes)
    elif cls is Assign:
        if node.name not in bound:
            writes.setdefault(node.name, []).append(expr_type(node.value))
        _collect_names(node.value, bound, reads, writes)
    elif cls is IndexAssign:
        _collect_names(node.coll, bound, reads, writes)
        _collect_names(node.index, bound, reads, writes)
        _collect_names(node.value, bound, reads, writes)
    elif cls is ExprStmt:
        _collect_names(node.call, bound, reads, writes)
    elif cls is If:
        if not is_angelic(node.cond):
            _collect_names(node.cond, bound, reads, writes)
        for q in node.body:
            _collect_names(q, bound, reads, writes)
    elif cls is ForCounter:
        bound[node.var] = "i"
        if not is_angelic(node.cond):
            _collect_names(node.cond, bound, reads, writes)
        for q in node.body:
            _collect_names(q, bound, reads, writes)
    elif cls is ForEach:
        bound[node.var] = "e"
        if node.iter_name not in bound:
            reads.setdefault(node.iter_name, list_of(node.elem_type))
        for q in node.body:
            _collect_names(q, bound, reads, writes)
    else:
        raise TypeError(f"not a fragment node: {node!r}")


def _apply_rename(node, rename: dict[str, tuple[str, TypeRef | None]]):
    cls = node.__class__
    if cls is VarRef:
        hit = rename.get(node.name)
        if hit is not None:
            node.name = hit[0]
            if hit[1] is not None:
                node.type = hit[1]
        return
    if cls is ConstLit:
        return
    if cls is BinOp:
        _apply_rename(node.lhs, rename)
        _apply_rename(node.rhs, rename)
    elif cls is NotOp:
        _apply_rename(node.operand, rename)
    elif cls is Call:
        for a in node.args:
            _apply_rename(a, rename)
    elif cls is Index:
        _apply_rename(node.coll, rename)
        _apply_rename(node.index, rename)
    elif cls is Assign:
        hit = rename.get(node.name)
        if hit is not None:
            node.name = hit[0]
        _apply_rename(node.value, rename)
    elif cls is IndexAssign:
        _apply_rename(node.coll, rename)
        _apply_rename(node.index, rename)
        _apply_rename(node.value, rename)
    elif cls is ExprStmt:
        _apply_rename(node.call, rename)
    elif cls is If:
        if not is_angelic(node.cond):
            _apply_rename(node.cond, rename)
        for q in node.body:
            _apply_rename(q, rename)
    elif cls is ForCounter:
        hit = rename.get(node.var)
        if hit is not None:
            node.var = hit[0]
        if not is_angelic(node.cond):
            _apply_rename(node.cond, rename)
        for q in node.body:
            _apply_rename(q, rename)
    elif cls is ForEach:
        hit = rename.get(node.var)
        if hit is not None:
            node.var = hit[0]
        hit = rename.get(node.iter_name)
        if hit is not None:
            node.iter_name = hit[0]
        for q in node.body:
            _apply_rename(q, rename)


def _strip_conditions(node) -> None:
    """Replace every concrete control-structure condition with a hole."""
    cls = node.__class__
    if cls is If or cls is ForCounter:
        node.cond = ANGELIC
    if cls is If or cls is ForCounter or cls is ForEach:
        for q in node.body:
            _strip_conditions(q)


# ------------------------------------------------------------ programs

def gen_program(name: str, params: list[Param], ret: TypeRef | None,
                universe: TypeUniverse, pool: FragmentPool, angelic: bool,
                cfg: GenConfig, rng: Random) -> Program:
    """A random well-typed program with the given signature. Retries
    internally on dead ends; raises RuntimeError only when the universe
    cannot express any program of the requested shape."""
    for _ in range(_PROGRAM_REDRAWS):
        try:
            return _build_program(name, params, ret, universe, pool,
                                  angelic, cfg, rng)
        except (_Redraw, DeadEnd):
            continue
    raise RuntimeError(f"cannot generate programs for {name!r} "
                       "in this universe")


def _draw_target(rng: Random, cap: int) -> int:
    """Target program size, uniform over [1, cap]. A flat draw keeps
    duplicate small programs rare while giving mid-sized slots enough
    room for fragment splices to grow during mutation."""
    return rng.randint(1, cap)


def _build_program(name, params, ret, universe, pool, angelic, cfg,
                   rng) -> Program:
    used = {q.name for q in params}
    base: list[ScopeEntry] = [(q.name, q.type, True) for q in params]
    g = _Gen(universe, pool, angelic, cfg, rng, base, used)

    target = _draw_target(rng, cfg.max_program_size)
    reserve = 1 if ret is not None else 0
    count = _weighted_count(cfg.local_count_weights, rng)
    count = min(count, (target - reserve) // 2)  # each local costs 2
    decls: list[LocalDecl] = []
    for _ in range(count):
        if ret is not None and rng.random() < 0.5:
            t = ret
        else:
            t = rng.choice(universe.types_ordered)
        decls.append(LocalDecl(g.fresh_name("v"), t, g.init_expr(t)))
        base.append((decls[-1].name, t, True))

    remaining = target - 2 * count

    # The return expression is generated first so an infeasible size for
    # the return type (common when the type is only constructible as a
    # leaf) costs one cheap dead-end here, not a whole program. Scanning
    # sizes in shuffled order keeps the draw uniform over feasible sizes.
    ret_expr = None
    if ret is not None:
        sizes = list(range(1, remaining + 1))
        rng.shuffle(sizes)
        for ret_size in sizes:
            try:
                ret_expr = g.gen_expr(ret, ret_size, (), True)
                break
            except DeadEnd:
                continue
        else:
            raise _Redraw
        remaining -= ret_size

    min_inner = g.min_base_stmt(())
    body: list[Stmt] = []
    if remaining >= min_inner:
        m_cap = remaining // min_inner
        m = min(_weighted_count(_BODY_COUNT_WEIGHTS, rng), m_cap)
        for _ in range(_SITE_RETRIES):
            parts = g.compose(remaining, m)
            if all(q >= min_inner for q in parts):
                break
        else:
            raise _Redraw
        for part in parts:
            for _ in range(_SITE_RETRIES):
                try:
                    body.append(g.gen_stmt(part, (), True))
                    break
                except DeadEnd:
                    continue
            else:
                raise _Redraw

    p = Program(name, [Param(q.name, q.type) for q in params], ret,
                decls + g.new_locals, body, ret_expr)
    if size_of(p) > cfg.max_program_size:
        raise _Redraw
    return p


def gen_condition_expr(universe: TypeUniverse, pool: FragmentPool,
                       scope: list[ScopeEntry], budget: int, cfg: GenConfig,
                       rng: Random) -> Expr:
    """A Boolean expression for filling one condition hole, generated
    fragment-biased over the hole's scope. A fragment may be any size up
    to the budget; fresh generation targets a size drawn uniformly from
    [1, budget]. New locals are not available here, so fragments needing
    missing types signal a dead end."""
    used = {v[0] for v in scope}
    g = _Gen(universe, pool, False, cfg, rng, list(scope), used,
             allow_new_locals=False)
    if not pool.is_empty() and g.rng.random() >= cfg.p_fresh_root:
        frag = pool.pick_expr(BOOL, budget, universe.conforms, g.rng)
        if frag is not None:
            adopted = g.adopt(clone_expr(frag), ())
            if g.rng.random() < cfg.p_fragment_verbatim:
                return adopted
            return g.walk_expr(adopted, (), budget)
    return g.expr_root(BOOL, rng.randint(1, budget), (), True)
