"""Remembered programs and the fragment pool mined from them.

The remembered set keeps, per passed-test subset, the simplest
non-angelic program seen so far — simplest meaning the smallest
(AST-node count, code length) pair. A program is rejected when some
entry is at least as simple and passes a superset of its tests, and an
accepted program evicts every entry it dominates the same way.

Fragments are complete subtrees of remembered programs. The pool indexes
them by kind and static type so generation can sample uniformly among
fragments that fit a size budget.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass
from random import Random

from .encode import encode_expr, encode_stmt
from .lang import (
    ANGELIC, Assign, BinOp, Call, Cond, ConstLit, Expr, ExprStmt, ForCounter,
    ForEach, If, Index, IndexAssign, NotOp, Program, Stmt, TypeRef, VarRef,
    expr_type, iter_exprs, iter_stmts, size_of,
)
from .syntax import pretty_print

logger = logging.getLogger(__name__)

_CROWDED = 1000  # far beyond the handful of entries seen in practice


@dataclass(slots=True)
class Remembered:
    program: Program
    passed: frozenset[int]
    size: int
    code_len: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.size, self.code_len)


def program_key(p: Program) -> tuple[int, int]:
    return (size_of(p), len(pretty_print(p)))


class RememberedSet:
    """Simplest-program-per-passed-subset store with dominance pruning."""

    __slots__ = ("entries", "_warned")

    def __init__(self) -> None:
        self.entries: list[Remembered] = []
        self._warned = False

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def remember(self, p: Program, passed: frozenset[int]) -> bool:
        """Insert ``p`` unless a no-larger entry passes a superset of
        ``passed``; on insert, evict entries ``p`` dominates. Ties in
        both size and tests keep the incumbent."""
        if not passed:
            return False
        key = program_key(p)
        entries = self.entries
        for e in entries:
            if e.key <= key and e.passed >= passed:
                return False
        self.entries = [e for e in entries
                        if not (key <= e.key and passed >= e.passed)]
        self.entries.append(Remembered(p, passed, key[0], key[1]))
        if len(self.entries) > _CROWDED and not self._warned:
            self._warned = True
            logger.warning("remembered set holds %d entries; expected "
                           "far fewer in practice", len(self.entries))
        return True

    def coverage(self) -> frozenset[int]:
        out: set[int] = set()
        for e in self.entries:
            out |= e.passed
        return frozenset(out)


# ------------------------------------------------------------- the pool

class _SizeIndex:
    """Fragments of one category sorted by size, for budget queries."""

    __slots__ = ("sizes", "nodes")

    def __init__(self, items: list[tuple[int, object]]):
        items.sort(key=lambda it: it[0])
        self.sizes = [sz for sz, _ in items]
        self.nodes = [node for _, node in items]

    def count_fitting(self, budget: int) -> int:
        return bisect_right(self.sizes, budget)


class FragmentPool:
    """Immutable snapshot of mined fragments, indexed for sampling."""

    __slots__ = ("exprs", "stmts", "_expr_index", "_stmt_index")

    def __init__(self, exprs: list[tuple[Expr, TypeRef]], stmts: list[Stmt]):
        self.exprs = tuple(exprs)
        self.stmts = tuple(stmts)
        by_type: dict[TypeRef, list[tuple[int, Expr]]] = {}
        for e, t in exprs:
            by_type.setdefault(t, []).append((size_of(e), e))
        self._expr_index = {t: _SizeIndex(v) for t, v in by_type.items()}
        self._stmt_index = _SizeIndex([(size_of(s), s) for s in stmts])

    def __len__(self) -> int:
        return len(self.exprs) + len(self.stmts)

    def is_empty(self) -> bool:
        return not self.exprs and not self.stmts

    def pick_expr(self, wanted: TypeRef, budget: int, conforms,
                  rng: Random) -> Expr | None:
        """Uniform choice among expression fragments whose type conforms
        to ``wanted`` and whose size fits ``budget``; None if there are
        none."""
        groups: list[tuple[int, _SizeIndex]] = []
        total = 0
        for t, index in self._expr_index.items():
            if conforms(t, wanted):
                n = index.count_fitting(budget)
                if n:
                    groups.append((n, index))
                    total += n
        if not total:
            return None
        i = rng.randrange(total)
        for n, index in groups:
            if i < n:
                return index.nodes[i]
            i -= n
        raise AssertionError("uniform index out of range")

    def pick_stmt(self, budget: int, rng: Random) -> Stmt | None:
        n = self._stmt_index.count_fitting(budget)
        if not n:
            return None
        return self._stmt_index.nodes[rng.randrange(n)]


EMPTY_POOL = FragmentPool([], [])


def _trivial_init(e: Expr) -> bool:
    """Initializer boilerplate: a constant or a zero-argument call."""
    cls = e.__class__
    return cls is ConstLit or (cls is Call and not e.args)


def mine(rs: RememberedSet) -> FragmentPool:
    """All complete Expr/Stmt subtrees of remembered programs, dedup'd
    structurally. Local initializers contribute only when nontrivial."""
    exprs: dict[tuple[str, TypeRef], tuple[Expr, TypeRef]] = {}
    stmts: dict[str, Stmt] = {}
    for entry in rs:
        p = entry.program
        roots: list = list(p.body)
        if p.ret_expr is not None:
            roots.append(p.ret_expr)
        for d in p.locals:
            if not _trivial_init(d.init):
                roots.append(d.init)
        for root in roots:
            for e in iter_exprs(root):
                if e.__class__ is Call and e.ret is None:
                    continue  # void calls reuse only as statements
                t = expr_type(e)
                exprs.setdefault((encode_expr(e), t), (e, t))
            if isinstance(root, Stmt):
                for s in iter_stmts(root):
                    stmts.setdefault(encode_stmt(s), s)
    return FragmentPool(list(exprs.values()), list(stmts.values()))


# ----------------------------------------------------------- usefulness

def _parts(n) -> tuple[tuple, list]:
    """(label, children) pairs aligned with size_of's node counting.
    Variable leaves are labeled by type only; counter and iteration
    variable names are likewise ignored."""
    cls = n.__class__
    if cls is ExprStmt:
        n = n.call
        cls = Call
    if cls is VarRef:
        return ("var", n.type), []
    if cls is ConstLit:
        return ("const", n.value), []
    if cls is BinOp:
        return ("op", n.op), [n.lhs, n.rhs]
    if cls is NotOp:
        return ("not",), [n.operand]
    if cls is Call:
        return ("call", n.component), list(n.args)
    if cls is Index:
        return ("index",), [n.coll, n.index]
    if cls is Assign:
        return ("assign",), [n.value]
    if cls is IndexAssign:
        return ("index-assign",), [n.coll, n.index, n.value]
    if cls is If:
        return ("if",), [n.cond, *n.body]
    if cls is ForCounter:
        return ("for",), [n.cond, *n.body]
    if cls is ForEach:
        return ("foreach", n.elem_type), list(n.body)
    if n is ANGELIC:
        return ("angelic",), []
    raise TypeError(f"not a fragment node: {n!r}")


def overlap(a, b) -> int:
    """Size of the largest rooted common subtree, grown downward through
    positionally matched, label-equal children."""
    la, ca = _parts(a)
    lb, cb = _parts(b)
    if la != lb:
        return 0
    n = 1
    for x, y in zip(ca, cb):
        n += overlap(x, y)
    return n


def usefulness(f, final: Program) -> float:
    """Best overlap between fragment ``f`` and any fragment of ``final``,
    as a fraction of ``f``'s size."""
    denom = size_of(f)
    best = 0
    candidates = list(iter_exprs(final)) + list(iter_stmts(final))
    for g in candidates:
        ov = overlap(f, g)
        if ov > best:
            best = ov
            if best == denom:
                break
    return best / denom
