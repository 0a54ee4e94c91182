"""The synthesis loop: generate, test, resolve, simplify, remember.

Each iteration generates a random well-typed candidate, measures which
tests it passes, and discards it unless it shows partial success.
Promising candidates with condition holes get their holes resolved to
concrete Boolean expressions; partial successes are simplified and
remembered so their subtrees can seed later candidates; the first
program to pass every test is simplified once more and returned.

Four variants switch the two learning mechanisms independently:

* ``random``    - plain generate-and-test,
* ``fragments`` - reuse subtrees of remembered partial successes,
* ``angelic``   - condition holes only, no reuse,
* ``full``      - both.

Budgets come in two forms: wall-clock seconds, or a candidate count.
Candidate-count runs consult no clock anywhere in the control flow, so
one (task, config, seed) triple always reproduces the same result.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from random import Random

from .angelic import (
    ResolveBudget,
    get_passed_tests_angelic,
    resolve_angelic,
)
from .encode import encode_program
from .fragments import EMPTY_POOL, RememberedSet, mine
from .generator import GenConfig, gen_program
from .interpreter import evaluate_test
from .lang import (
    ForCounter,
    If,
    Program,
    VarRef,
    has_angelic,
    is_angelic,
    iter_exprs,
    iter_stmts,
    size_of,
)
from .simplify import simplify_quick, simplify_slow
from .syntax import pretty_print
from .task import TaskSpec

__all__ = ["SearchConfig", "SearchResult", "SearchStats", "DedupStore",
           "VARIANTS", "should_skip", "synthesize"]

VARIANTS = ("random", "fragments", "angelic", "full")


@dataclass(frozen=True, slots=True)
class SearchConfig:
    variant: str = "full"
    seed: int = 0
    timeout_sec: float | None = None
    budget_candidates: int | None = None
    max_size: int = 40
    sigma: float = 0.75              # required passed fraction to resolve
    max_attempts: int = 55           # path patterns tried per test
    p_angelic: float = 0.5           # candidates generated with holes
    dedup_cap: int = 5_000_000       # encodings recorded per program kind
    dup_angelic_skip: float = 0.75   # skip chance for a repeated holed program
    line_cap: int = 150              # max chars in one printed line
    resolve_cap_seconds: float = 5.0
    resolve_cap_candidates: int = 150_000
    slow_fraction: float = 0.1       # share of prior effort given to slow
    no_slow_simplify: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if (self.timeout_sec is None) == (self.budget_candidates is None):
            raise ValueError("exactly one of timeout_sec and "
                             "budget_candidates must be set")
        for name in ("max_size", "max_attempts", "dedup_cap", "line_cap",
                     "resolve_cap_candidates"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def budget_mode(self) -> bool:
        return self.budget_candidates is not None

    def gen_config(self) -> GenConfig:
        return GenConfig(max_program_size=self.max_size,
                         p_angelic_batch=self.p_angelic)


@dataclass(slots=True)
class SearchStats:
    candidates: int = 0           # programs generated
    programs_evaluated: int = 0   # ran against at least one test
    programs_skipped: int = 0     # static prunes and duplicates
    angelic_generated: int = 0    # candidates generated with holes
    resolutions_tried: int = 0
    resolutions_ok: int = 0
    remembered_max: int = 0       # peak remembered-set size
    fragments_max: int = 0        # peak fragment-pool size
    elapsed_sec: float = 0.0

    @property
    def pps(self) -> float:
        return self.candidates / self.elapsed_sec if self.elapsed_sec else 0.0


@dataclass(slots=True)
class SearchResult:
    status: str                   # "solved" | "timeout"
    solution: Program | None
    stats: SearchStats
    remembered: RememberedSet = field(default_factory=RememberedSet)

    @property
    def solved(self) -> bool:
        return self.status == "solved"


# ---------------------------------------------------------- static skips

class DedupStore:
    """Canonical encodings of evaluated programs, split by kind (with
    holes / without). Each side stops recording at ``cap`` entries but
    keeps answering membership queries."""

    __slots__ = ("concrete", "holed", "cap")

    def __init__(self, cap: int = 5_000_000):
        self.concrete: set[str] = set()
        self.holed: set[str] = set()
        self.cap = cap

    def seen(self, key: str, holed: bool) -> bool:
        """Membership check; records the key (capacity permitting) when
        it is new."""
        store = self.holed if holed else self.concrete
        if key in store:
            return True
        if len(store) < self.cap:
            store.add(key)
        return False


def _has_constant_condition(p: Program) -> bool:
    for top in p.body:
        for s in iter_stmts(top):
            cls = s.__class__
            if cls is not If and cls is not ForCounter:
                continue
            cond = s.cond
            if is_angelic(cond):
                continue
            if not any(e.__class__ is VarRef for e in iter_exprs(cond)):
                return True
    return False


def should_skip(p: Program, store: DedupStore, rng: Random,
                cfg: SearchConfig) -> bool:
    """Static prunes applied before any test runs: concrete structure
    conditions without variables can never branch differently across
    tests; overlong lines mark runaway growth; repeats of an evaluated
    program are pointless (holed repeats get a fresh chance occasionally
    because resolution is randomized)."""
    if _has_constant_condition(p):
        return True
    text = pretty_print(p)
    if any(len(line) > cfg.line_cap for line in text.splitlines()):
        return True
    holed = has_angelic(p)
    if store.seen(encode_program(p), holed):
        if not holed:
            return True
        return rng.random() < cfg.dup_angelic_skip
    return False


# ------------------------------------------------------------ the loop

def synthesize(task: TaskSpec, cfg: SearchConfig,
               progress=None) -> SearchResult:
    """Search for a program passing every test of ``task``. ``progress``
    (optional) is called with the running SearchStats every few thousand
    candidates — for live reporting; it must not mutate the stats."""
    rng = Random(cfg.seed)
    universe = task.universe()
    components = universe.component_map
    limits = task.limits
    tol = task.float_tolerance
    ignored = task.ignored_params
    tests = list(task.tests)
    all_ids = frozenset(range(len(tests)))
    gen_cfg = cfg.gen_config()

    use_pool = cfg.variant in ("fragments", "full")
    use_angelic = cfg.variant in ("angelic", "full")

    remembered = RememberedSet()
    pool = EMPTY_POOL
    store = DedupStore(cfg.dedup_cap)
    stats = SearchStats()

    start = time.monotonic()
    deadline = (start + cfg.timeout_sec
                if cfg.timeout_sec is not None else None)
    # Effort mark of the previous resolution, for proportional budgets.
    mark_candidates = 0
    mark_time = start

    def finish(status: str, solution: Program | None) -> SearchResult:
        stats.elapsed_sec = time.monotonic() - start
        return SearchResult(status, solution, stats, remembered)

    while True:
        if cfg.budget_mode:
            if stats.candidates >= cfg.budget_candidates:
                return finish("timeout", None)
        elif time.monotonic() >= deadline:
            return finish("timeout", None)

        stats.candidates += 1
        if progress is not None and stats.candidates % 4096 == 0:
            stats.elapsed_sec = time.monotonic() - start
            progress(stats)
        holed = use_angelic and rng.random() < cfg.p_angelic
        if holed:
            stats.angelic_generated += 1
        p = gen_program(task.name, list(task.params), task.ret, universe,
                        pool, holed, gen_cfg, rng)

        if should_skip(p, store, rng, cfg):
            stats.programs_skipped += 1
            continue
        stats.programs_evaluated += 1

        if has_angelic(p):
            verdict = get_passed_tests_angelic(
                p, tests, components, limits, cfg.sigma, cfg.max_attempts,
                tol, ignored)
            passed = verdict.passed
            if not passed or verdict.passed_fraction < cfg.sigma:
                continue
            stats.resolutions_tried += 1
            if cfg.budget_mode:
                budget = ResolveBudget(candidates=min(
                    cfg.resolve_cap_candidates,
                    stats.candidates - mark_candidates))
                mark_candidates = stats.candidates
            else:
                now = time.monotonic()
                budget = ResolveBudget(seconds=min(
                    cfg.resolve_cap_seconds, now - mark_time))
                mark_time = now
            outcome = resolve_angelic(
                p, passed, tests, universe, pool, budget, rng, gen_cfg,
                limits, cfg.sigma, cfg.max_attempts, tol, ignored)
            if outcome.program is None:
                continue
            stats.resolutions_ok += 1
            p = outcome.program
            passed = outcome.passed
        elif use_pool:
            passed = frozenset(
                i for i, t in enumerate(tests)
                if evaluate_test(p, t, components, limits, tol, ignored))
            if not passed:
                continue
        else:
            # Nothing consumes partial passers here, so stop at the
            # first failing test.
            if not all(evaluate_test(p, t, components, limits, tol,
                                     ignored) for t in tests):
                continue
            passed = all_ids

        if passed != all_ids and not use_pool:
            continue

        p = simplify_quick(p, [tests[i] for i in sorted(passed)], universe,
                           limits, tol, ignored)
        if use_pool:
            passed = frozenset(
                i for i, t in enumerate(tests)
                if evaluate_test(p, t, components, limits, tol, ignored))
            if remembered.remember(p, passed):
                pool = mine(remembered)
                if len(pool) > stats.fragments_max:
                    stats.fragments_max = len(pool)
            if len(remembered) > stats.remembered_max:
                stats.remembered_max = len(remembered)

        if passed == all_ids:
            if not cfg.no_slow_simplify:
                if cfg.budget_mode:
                    p = simplify_slow(
                        p, tests, universe, pool, rng,
                        budget_candidates=int(stats.candidates
                                              * cfg.slow_fraction),
                        cfg=gen_cfg, limits=limits, float_tol=tol,
                        ignored=ignored)
                else:
                    p = simplify_slow(
                        p, tests, universe, pool, rng,
                        budget_seconds=((time.monotonic() - start)
                                        * cfg.slow_fraction),
                        cfg=gen_cfg, limits=limits, float_tol=tol,
                        ignored=ignored)
            if not all(evaluate_test(p, t, components, limits, tol,
                                     ignored) for t in tests):
                raise AssertionError(
                    "simplification broke a finished solution:\n"
                    + pretty_print(p))
            return finish("solved", p)


def solution_size(result: SearchResult) -> int | None:
    return None if result.solution is None else size_of(result.solution)
