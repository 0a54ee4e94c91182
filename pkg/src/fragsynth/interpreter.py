"""Resource-limited program execution, including angelic code paths.

A code path is a string over ``{'T', 'F'}``. When a program containing
angelic conditions runs with an *attempted* path, the i-th angelic
condition evaluation (in temporal order) takes the i-th bit, or F once
the bits run out. The *actual* path records every bit consumed, so it is
either the attempted path with zero or more Fs appended or — when the
run stops early on an error or limit — a prefix of the attempted path.

All failure modes surface as :class:`ExecOutcome` statuses, never as
host exceptions: runtime errors (null receiver, index out of range,
division by zero) and limit trips (loop iterations, evaluation steps,
value sizes) each terminate the run and truncate the actual path at the
fault point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .components import ComponentSig, EvalError
from .lang import (
    ANGELIC, PER_USE_RT, Assign, BinOp, Call, ConstLit, Expr, ExprStmt,
    ForCounter, ForEach, If, Index, IndexAssign, NotOp, Program, Stmt,
    TypeRef, VarRef, Value,
)
from .runtime import (
    copy_rt, deep_eq_rt, fdiv, fmod_java, java_div, java_mod, value_size_rt,
    wire_to_rt, wrap64,
)

RETURNED = "returned"
RUNTIME_ERROR = "runtime-error"
LIMIT_EXCEEDED = "limit-exceeded"


@dataclass(frozen=True, slots=True)
class ExecLimits:
    max_loop_iterations: int = 1000  # total across all loops in one run
    max_steps: int = 100_000         # AST-node evaluations in one run
    max_value_size: int = 10_000     # elements/chars in any single value

    def max_path_length(self) -> int:
        """Longest attempted code path worth trying under these limits.

        Each loop iteration can consume at most two fresh condition bits
        (its own guard plus one nested guard reached on T), and two more
        bits cover straight-line conditions before the first loop exits.
        """
        return 2 + 2 * self.max_loop_iterations


@dataclass(slots=True)
class ExecOutcome:
    status: str
    return_value: object            # runtime value; None when absent
    mutated_inputs: dict[str, object]  # final values of mutable params
    actual_path: str
    steps: int


class _LimitTrip(Exception):
    pass


_SCALAR_NAMES = ("Int", "Float", "Bool", "Str", "Null")


def is_mutable_type(t: TypeRef) -> bool:
    return t.name not in _SCALAR_NAMES


class _Run:
    """One execution: environment, step/loop budgets, angelic bits."""

    __slots__ = ("components", "limits", "env", "steps", "max_steps",
                 "loop_budget", "bits", "bit_pos")

    def __init__(self, components: Mapping[str, ComponentSig],
                 limits: ExecLimits, attempted: str):
        self.components = components
        self.limits = limits
        self.env: dict[str, object] = {}
        self.steps = 0
        self.max_steps = limits.max_steps
        self.loop_budget = limits.max_loop_iterations
        self.bits = attempted
        self.bit_pos = 0

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise _LimitTrip

    def actual_path(self) -> str:
        """Bits consumed so far: the attempted prefix plus F padding."""
        n = self.bit_pos
        bits = self.bits
        if n <= len(bits):
            return bits[:n]
        return bits + "F" * (n - len(bits))

    def _check_size(self, v: object) -> None:
        cap = self.limits.max_value_size
        if value_size_rt(v, cap) > cap:
            raise EvalError("value too large")

    # -- expressions

    def expr(self, e: Expr) -> object:
        self.steps = steps = self.steps + 1
        if steps > self.max_steps:
            raise _LimitTrip
        cls = e.__class__
        if cls is VarRef:
            return self.env[e.name]
        if cls is ConstLit:
            v = e.rt
            if v is PER_USE_RT:
                return wire_to_rt(e.value)
            return v
        if cls is BinOp:
            op = e.op
            if op == "&&":
                return self.expr(e.lhs) and self.expr(e.rhs)
            if op == "||":
                return self.expr(e.lhs) or self.expr(e.rhs)
            a = self.expr(e.lhs)
            b = self.expr(e.rhs)
            if op == "+":
                if type(a) is int:
                    return wrap64(a + b)
                return a + b
            if op == "<":
                return a < b
            if op == "==":
                return deep_eq_rt(a, b)
            if op == "<=":
                return a <= b
            if op == "-":
                if type(a) is int:
                    return wrap64(a - b)
                return a - b
            if op == "*":
                if type(a) is int:
                    return wrap64(a * b)
                return a * b
            if op == "/":
                if type(a) is int:
                    if b == 0:
                        raise EvalError("division by zero")
                    return java_div(a, b)
                return fdiv(a, b)
            if op == "%":
                if type(a) is int:
                    if b == 0:
                        raise EvalError("division by zero")
                    return java_mod(a, b)
                return fmod_java(a, b)
            raise EvalError(f"unknown operator {op!r}")
        if cls is NotOp:
            return not self.expr(e.operand)
        if cls is Call:
            return self.call(e)
        if cls is Index:
            coll = self.expr(e.coll)
            idx = self.expr(e.index)
            if coll is None:
                raise EvalError("indexing null")
            if idx < 0 or idx >= len(coll):
                raise EvalError(f"index {idx} out of range")
            return coll[idx]
        raise EvalError(f"not an expression: {e!r}")

    def call(self, e: Call) -> object:
        sig = self.components[e.component]
        args = [self.expr(a) for a in e.args]
        out = sig.impl(args)
        if out is not None and type(out) is not bool and type(out) is not int:
            self._check_size(out)
        for i in sig.mutates:
            self._check_size(args[i])
        return out

    def cond(self, c) -> bool:
        if c is ANGELIC:
            self.steps = steps = self.steps + 1
            if steps > self.max_steps:
                raise _LimitTrip
            i = self.bit_pos
            self.bit_pos = i + 1
            return self.bits[i] == "T" if i < len(self.bits) else False
        return self.expr(c)

    # -- statements

    def stmt(self, s: Stmt) -> None:
        self.steps = steps = self.steps + 1
        if steps > self.max_steps:
            raise _LimitTrip
        cls = s.__class__
        if cls is Assign:
            self.env[s.name] = self.expr(s.value)
        elif cls is ExprStmt:
            self.call(s.call)
        elif cls is If:
            if self.cond(s.cond):
                for q in s.body:
                    self.stmt(q)
        elif cls is ForCounter:
            env = self.env
            env[s.var] = 0
            while self.cond(s.cond):
                self.loop_budget -= 1
                if self.loop_budget < 0:
                    raise _LimitTrip
                for q in s.body:
                    self.stmt(q)
                env[s.var] += 1
        elif cls is ForEach:
            coll = self.env[s.iter_name]
            if coll is None:
                raise EvalError("foreach over null")
            env = self.env
            for item in list(coll):
                self.loop_budget -= 1
                if self.loop_budget < 0:
                    raise _LimitTrip
                env[s.var] = item
                for q in s.body:
                    self.stmt(q)
        elif cls is IndexAssign:
            coll = self.expr(s.coll)
            idx = self.expr(s.index)
            val = self.expr(s.value)
            if coll is None:
                raise EvalError("indexing null")
            if idx < 0 or idx >= len(coll):
                raise EvalError(f"index {idx} out of range")
            coll[idx] = val
        else:
            raise EvalError(f"not a statement: {s!r}")


def execute(p: Program, inputs_rt: list[object],
            components: Mapping[str, ComponentSig], limits: ExecLimits,
            attempted: str = "") -> ExecOutcome:
    """Run ``p`` on runtime-value inputs, which the run may mutate.

    Non-angelic programs ignore ``attempted``. Deterministic: the same
    program, inputs, path, and limits always give the same outcome.
    """
    run = _Run(components, limits, attempted)
    env = run.env
    for q, v in zip(p.params, inputs_rt):
        env[q.name] = v
    status = RETURNED
    ret = None
    try:
        for d in p.locals:
            run._tick()
            env[d.name] = run.expr(d.init)
        for s in p.body:
            run.stmt(s)
        if p.ret_expr is not None:
            ret = run.expr(p.ret_expr)
    except EvalError:
        status = RUNTIME_ERROR
    except _LimitTrip:
        status = LIMIT_EXCEEDED
    # References are passed by value: rebinding a parameter inside the
    # function is invisible to the caller, so the post-state of a mutable
    # input is the argument object itself, not the final binding.
    mutated = {q.name: v for q, v in zip(p.params, inputs_rt)
               if is_mutable_type(q.type)}
    return ExecOutcome(status, ret, mutated, run.actual_path(), run.steps)


class TestCase:
    """One input/output example, with expected final values for any
    inputs the target function is allowed to mutate.

    Holds wire values plus precomputed runtime templates so repeated
    evaluation only pays for copying.
    """

    __slots__ = ("inputs", "output", "mutated", "rt_inputs", "rt_output",
                 "rt_mutated")

    def __init__(self, inputs: tuple[Value, ...], output: Value | None,
                 mutated: dict[str, Value] | None = None):
        self.inputs = tuple(inputs)
        self.output = output
        self.mutated = dict(mutated) if mutated else {}
        self.rt_inputs = tuple(wire_to_rt(v) for v in self.inputs)
        self.rt_output = None if output is None else wire_to_rt(output)
        self.rt_mutated = {k: wire_to_rt(v) for k, v in self.mutated.items()}

    def fresh_inputs(self) -> list[object]:
        return [copy_rt(v) for v in self.rt_inputs]


def evaluate_test(p: Program, t: TestCase,
                  components: Mapping[str, ComponentSig], limits: ExecLimits,
                  float_tol: float = 1e-9,
                  ignored: frozenset[str] = frozenset()) -> bool:
    """Pass iff the run returns, the return value matches, and every
    mutable input (except ignored ones) ends with its expected value.

    A mutable input without an explicit expectation must come back
    unchanged.
    """
    out = execute(p, t.fresh_inputs(), components, limits)
    return outcome_passes(p, t, out, float_tol, ignored)


def outcome_passes(p: Program, t: TestCase, out: ExecOutcome,
                   float_tol: float = 1e-9,
                   ignored: frozenset[str] = frozenset()) -> bool:
    if out.status != RETURNED:
        return False
    if p.ret is not None and not deep_eq_rt(out.return_value, t.rt_output,
                                            float_tol):
        return False
    for i, q in enumerate(p.params):
        if q.name in out.mutated_inputs and q.name not in ignored:
            want = t.rt_mutated.get(q.name, t.rt_inputs[i])
            if not deep_eq_rt(out.mutated_inputs[q.name], want, float_tol):
                return False
    return True
