"""Angelic-condition machinery.

Condition holes make control structures take whichever branches a test
needs: execution is driven by a bitstring code path, and a program passes
a test angelically when some path produces the expected outcome.  This
module enumerates candidate paths in a canonical order with pruning,
evaluates tests under the per-test attempt budget M and the suite-level
early-abort fraction sigma, and resolves holes into concrete Boolean
expressions one condition at a time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from random import Random

from .components import TypeUniverse
from .fragments import FragmentPool
from .generator import (
    DeadEnd, GenConfig, ScopeEntry, _Redraw, gen_condition_expr,
)
from .interpreter import (
    ExecLimits, TestCase, evaluate_test, execute, outcome_passes,
)
from .encode import encode_expr
from .lang import (
    ANGELIC, INT, ForCounter, ForEach, If, Program, Stmt, VarRef,
    has_angelic, is_angelic, iter_exprs,
)

DEFAULT_MAX_ATTEMPTS = 55     # paths tried per test before giving up
DEFAULT_SIGMA = 0.75          # abort a suite once >1-sigma of it has failed
CONDITION_SIZE_BUDGET = 12    # size allowance for a synthesized condition


# ------------------------------------------------------------ enumeration

_PRUNED = object()  # sentinel: the walked path has a recorded prefix


class PathEnumerator:
    """Emits code paths in canonical order with prefix pruning.

    Canonical paths never end in F: a run of trailing-F bits is
    indistinguishable from running out of bits, so only F-runs *between*
    Ts matter.  Order is ascending T-count, ties lexicographic with T
    before F.  Callers record each attempt's actual path; any path
    extending a recorded actual would replay the recorded run bit for
    bit, so it is skipped.  Recording the empty path prunes everything:
    execution never consumed a bit, hence never will.

    Recorded paths live in a trie (child nodes under "T"/"F", a "$" key
    marking a recorded endpoint), and the depth-first walk carries a
    trie cursor it advances one bit at a time, so each extension costs
    one dictionary probe instead of a scan over every recorded path.
    Cursors go stale when a new path is recorded mid-walk; a version
    counter triggers a re-walk of the current stem, preserving the rule
    that every stem and tip is vetted against the recordings in force
    the moment it is formed.
    """

    __slots__ = ("recorded", "emitted", "max_attempts", "max_path_length",
                 "_root", "_version")

    def __init__(self, max_path_length: int,
                 max_attempts: int = DEFAULT_MAX_ATTEMPTS):
        self.recorded: list[str] = []
        self.emitted = 0
        self.max_attempts = max_attempts
        self.max_path_length = max_path_length
        self._root: dict = {}
        self._version = 0

    def record(self, actual: str) -> None:
        self.recorded.append(actual)
        self._version += 1
        node = self._root
        for ch in actual:
            if "$" in node:
                return  # already covered by a shorter recording
            node = node.setdefault(ch, {})
        node.clear()  # anything beneath is shadowed
        node["$"] = True

    def _walk(self, base: str, fs: int = 0):
        """Cursor after consuming ``base + 'F'*fs``: a trie node, None
        once off the trie, or _PRUNED on hitting a recorded endpoint."""
        node = self._root
        if "$" in node:
            return _PRUNED
        for ch in base:
            node = node.get(ch)
            if node is None:
                return None
            if "$" in node:
                return _PRUNED
        for _ in range(fs):
            node = node.get("F")
            if node is None:
                return None
            if "$" in node:
                return _PRUNED
        return node

    def _pruned(self, path: str) -> bool:
        return self._walk(path) is _PRUNED

    def paths(self):
        """Lazily yield paths, honoring recordings made between pulls."""
        if self.emitted >= self.max_attempts:
            return
        if self._walk("") is _PRUNED:
            return
        self.emitted += 1
        yield ""
        # A path with t Ts is F^a1 T F^a2 T ... F^at T; for fixed t,
        # lexicographic order on paths is ascending order on run tuples.
        root = self._root
        for t in range(1, self.max_path_length + 1):
            if self.emitted >= self.max_attempts:
                return
            if "$" in root:
                return  # "" was recorded mid-walk; everything is pruned
            yield from self._with_runs("", t, root, self._version)

    def _with_runs(self, base: str, t_left: int, cursor, version: int):
        if cursor is _PRUNED:
            return
        a = 0
        max_a = self.max_path_length - len(base) - t_left
        while a <= max_a:
            if self.emitted >= self.max_attempts:
                return
            if version != self._version:
                version = self._version
                cursor = self._walk(base, a)
                if cursor is _PRUNED:
                    return  # recorded prefix survives any further Fs
            # cursor sits at stem = base + F^a; try tip = stem + T.
            if cursor is None:
                tip_cursor = None
            else:
                child = cursor.get("T")
                tip_cursor = (None if child is None
                              else _PRUNED if "$" in child else child)
            if tip_cursor is not _PRUNED:
                if t_left == 1:
                    self.emitted += 1
                    yield base + "F" * a + "T"
                else:
                    yield from self._with_runs(base + "F" * a + "T",
                                               t_left - 1, tip_cursor,
                                               version)
            # else: the recorded path is tip itself; siblings live on
            a += 1
            if version == self._version and cursor is not None:
                nxt = cursor.get("F")
                if nxt is None:
                    cursor = None
                elif "$" in nxt:
                    return  # next stem is recorded; further Fs stay pruned
                else:
                    cursor = nxt


# ------------------------------------------------------------- evaluation

def angelic_passes_test(p: Program, t: TestCase, components, limits: ExecLimits,
                        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                        float_tol: float = 1e-9,
                        ignored: frozenset[str] = frozenset(),
                        ) -> tuple[bool, str | None, list[str]]:
    """Try attempted paths until one makes ``p`` pass ``t``.

    Returns (passed, witness path or None, recorded actual paths).  The
    witness is the attempted path, which re-executes to the same passing
    outcome because the interpreter is deterministic.
    """
    en = PathEnumerator(limits.max_path_length(), max_attempts)
    for attempted in en.paths():
        out = execute(p, t.fresh_inputs(), components, limits, attempted)
        en.record(out.actual_path)
        if outcome_passes(p, t, out, float_tol, ignored):
            return True, attempted, en.recorded
    return False, None, en.recorded


@dataclass(slots=True)
class AngelicVerdict:
    """Per-test results of one angelic evaluation sweep."""

    per_test: dict[int, tuple[bool, str | None]]

    @property
    def passed(self) -> frozenset[int]:
        return frozenset(i for i, (ok, _) in self.per_test.items() if ok)

    @property
    def passed_fraction(self) -> float:
        if not self.per_test:
            return 0.0
        return len(self.passed) / len(self.per_test)


def get_passed_tests_angelic(p: Program, tests: list[TestCase], components,
                             limits: ExecLimits,
                             sigma: float = DEFAULT_SIGMA,
                             max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                             float_tol: float = 1e-9,
                             ignored: frozenset[str] = frozenset(),
                             ) -> AngelicVerdict:
    """Evaluate every test angelically, aborting a hopeless suite early.

    Once failures exceed (1 - sigma) * len(tests), the remaining tests
    are marked failed without being run.
    """
    allowed = (1.0 - sigma) * len(tests)
    failures = 0
    aborted = False
    per: dict[int, tuple[bool, str | None]] = {}
    for i, t in enumerate(tests):
        if aborted:
            per[i] = (False, None)
            continue
        ok, witness, _ = angelic_passes_test(
            p, t, components, limits, max_attempts, float_tol, ignored)
        per[i] = (ok, witness)
        if not ok:
            failures += 1
            if failures > allowed:
                aborted = True
    return AngelicVerdict(per)


# ------------------------------------------------------------- resolution

@dataclass(frozen=True, slots=True)
class ResolveBudget:
    """Per-condition allowance: wall-clock seconds, or a candidate count
    when the search runs in deterministic budget mode."""

    seconds: float | None = None
    candidates: int | None = None


@dataclass(slots=True)
class ResolveOutcome:
    program: Program | None      # hole-free on success, None on failure
    passed: frozenset[int] = frozenset()
    candidates_tried: int = 0


@dataclass(slots=True)
class _Hole:
    holder: Stmt                 # If or ForCounter whose cond is the hole
    depth: int
    order: int                   # document position among holes
    scope: tuple[ScopeEntry, ...]


def _find_holes(p: Program) -> list[_Hole]:
    """Holes in document order, each with the scope its condition sees."""
    base: list[ScopeEntry] = [(q.name, q.type, True) for q in p.params]
    base += [(d.name, d.type, True) for d in p.locals]
    holes: list[_Hole] = []

    def walk(stmts: list[Stmt], depth: int,
             extras: tuple[ScopeEntry, ...]) -> None:
        for s in stmts:
            cls = s.__class__
            if cls is If:
                if is_angelic(s.cond):
                    holes.append(_Hole(s, depth, len(holes),
                                       tuple(base) + extras))
                walk(s.body, depth + 1, extras)
            elif cls is ForCounter:
                inner = extras + ((s.var, INT, False),)
                if is_angelic(s.cond):
                    holes.append(_Hole(s, depth, len(holes),
                                       tuple(base) + inner))
                walk(s.body, depth + 1, inner)
            elif cls is ForEach:
                walk(s.body, depth + 1,
                     extras + ((s.var, s.elem_type, False),))

    walk(p.body, 0, ())
    return holes


def resolve_angelic(p: Program, passed: frozenset[int], tests: list[TestCase],
                    universe: TypeUniverse, pool: FragmentPool,
                    budget: ResolveBudget, rng: Random,
                    cfg: GenConfig | None = None,
                    limits: ExecLimits = ExecLimits(),
                    sigma: float = DEFAULT_SIGMA,
                    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                    float_tol: float = 1e-9,
                    ignored: frozenset[str] = frozenset()) -> ResolveOutcome:
    """Fill every hole in ``p`` with a concrete Boolean expression.

    Each hole is tried within the per-condition budget, accepting a fill
    only when the program still passes a superset of the tests it passed
    so far.  Holes are taken innermost first; if any hole times out, all
    fills are undone and the reverse order is tried.  Evaluation uses the
    angelic machinery while holes remain and plain execution once the
    program is hole-free, so a success concretely passes every test in
    ``passed``.  Fills mutate ``p`` in place; on failure every condition
    is restored.
    """
    holes = _find_holes(p)
    if not holes:
        return ResolveOutcome(p, passed)
    if cfg is None:
        cfg = GenConfig()
    innermost = sorted(holes, key=lambda h: (-h.depth, h.order))
    tried = 0
    for order in (innermost, innermost[::-1]):
        current = passed
        filled: list[Stmt] = []
        failed = False
        for hole in order:
            accepted = False
            start = time.monotonic()
            spent = 0
            seen: set[str] = set()
            required = sorted(current)
            rest = [i for i in range(len(tests)) if i not in current]
            while True:
                if budget.candidates is not None and spent >= budget.candidates:
                    break
                if (budget.seconds is not None
                        and time.monotonic() - start >= budget.seconds):
                    break
                spent += 1
                tried += 1
                try:
                    cand = gen_condition_expr(universe, pool, list(hole.scope),
                                              CONDITION_SIZE_BUDGET, cfg, rng)
                except (DeadEnd, _Redraw):
                    continue
                # A condition without variables branches the same way on
                # every test, so it can never help; and a repeated
                # expression re-executes to the identical outcome.
                if not any(x.__class__ is VarRef for x in iter_exprs(cand)):
                    continue
                key = encode_expr(cand)
                if key in seen:
                    continue
                seen.add(key)
                hole.holder.cond = cand
                new_passed = _passed_with_fill(
                    p, required, rest, tests, universe.component_map, limits,
                    sigma, max_attempts, float_tol, ignored)
                if new_passed is not None:
                    current = new_passed
                    filled.append(hole.holder)
                    accepted = True
                    break
                hole.holder.cond = ANGELIC
            if not accepted:
                for h in filled:
                    h.cond = ANGELIC
                failed = True
                break
        if not failed:
            return ResolveOutcome(p, current, tried)
    return ResolveOutcome(None, frozenset(), tried)


def _passed_with_fill(p: Program, required: list[int], rest: list[int],
                      tests: list[TestCase], components, limits: ExecLimits,
                      sigma: float, max_attempts: int, float_tol: float,
                      ignored: frozenset[str]) -> frozenset[int] | None:
    """Tests passed by the freshly filled ``p``, or None as soon as a
    previously-passed test is lost (the fill is then rejected anyway)."""
    if has_angelic(p):
        verdict = get_passed_tests_angelic(p, tests, components, limits,
                                           sigma, max_attempts, float_tol,
                                           ignored)
        new_passed = verdict.passed
        if all(i in new_passed for i in required):
            return new_passed
        return None
    passing = []
    for i in required:
        if not evaluate_test(p, tests[i], components, limits, float_tol,
                             ignored):
            return None
        passing.append(i)
    passing += [i for i in rest
                if evaluate_test(p, tests[i], components, limits, float_tol,
                                 ignored)]
    return frozenset(passing)
