"""Runtime value representation and arithmetic helpers.

The interpreter runs on plain Python natives for speed: Int is int
(wrapped to signed 64 bits), Float is float, Str is str, Bool is bool,
null is None, lists are Python lists, and opaque records are RecordRT
objects. Static typechecking is what keeps Python's bool/int overlap
from ever being observable. Wire Values (lang.py) convert to runtime
values at the search boundary.
"""

from __future__ import annotations

import math

from .lang import (INT64_MAX, INT64_MIN, BoolV, FloatV, IntV, ListV, NullV,
                   RecordV, StrV, Value, floats_close)


class RecordRT:
    """Mutable runtime record: a type name plus named fields."""

    __slots__ = ("type_name", "fields")

    def __init__(self, type_name: str, fields: dict):
        self.type_name = type_name
        self.fields = fields

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{self.type_name}{self.fields!r}"


def wrap64(x: int) -> int:
    """Two's-complement wrap to signed 64 bits."""
    if INT64_MIN <= x <= INT64_MAX:
        return x
    return ((x - INT64_MIN) & ((1 << 64) - 1)) + INT64_MIN


def java_div(a: int, b: int) -> int:
    """Integer division truncating toward zero (Java semantics)."""
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap64(q)


def java_mod(a: int, b: int) -> int:
    """Remainder with the dividend's sign (Java semantics)."""
    return wrap64(a - java_div(a, b) * b)


def fdiv(a: float, b: float) -> float:
    """IEEE float division: zero divisors give inf/nan, not an error."""
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        neg = (math.copysign(1.0, a) < 0.0) != (math.copysign(1.0, b) < 0.0)
        return -math.inf if neg else math.inf
    return a / b


def fmod_java(a: float, b: float) -> float:
    if b == 0.0 or math.isnan(a) or math.isnan(b) or math.isinf(a):
        return math.nan
    if math.isinf(b):
        return a
    return math.fmod(a, b)


def wire_to_rt(v: Value):
    t = v.__class__
    if t is IntV or t is FloatV or t is BoolV or t is StrV:
        return v.v
    if t is NullV:
        return None
    if t is ListV:
        return [wire_to_rt(x) for x in v.items]
    if t is RecordV:
        return RecordRT(v.type.name,
                        {k: wire_to_rt(f) for k, f in v.fields.items()})
    raise TypeError(f"not a value: {v!r}")


def copy_rt(v):
    """Fresh deep copy so candidate programs can mutate inputs freely."""
    t = type(v)
    if t is list:
        return [copy_rt(x) for x in v]
    if t is RecordRT:
        return RecordRT(v.type_name, {k: copy_rt(f) for k, f in v.fields.items()})
    return v


def deep_eq_rt(a, b, float_tol: float = 0.0) -> bool:
    if a is None or b is None:
        return a is None and b is None
    ta = type(a)
    if ta is float:
        return type(b) is float and floats_close(a, b, float_tol)
    if ta is list:
        return (type(b) is list and len(a) == len(b)
                and all(deep_eq_rt(x, y, float_tol) for x, y in zip(a, b)))
    if ta is RecordRT:
        return (type(b) is RecordRT and a.type_name == b.type_name
                and a.fields.keys() == b.fields.keys()
                and all(deep_eq_rt(a.fields[k], b.fields[k], float_tol)
                        for k in a.fields))
    return ta is type(b) and a == b


def value_size_rt(v, cap: int) -> int:
    """Element/char count of a runtime value; stops once past `cap`, which
    also makes the walk terminate on cyclic structures."""
    n = 0
    stack = [v]
    while stack:
        x = stack.pop()
        t = type(x)
        if t is str:
            n += 1 + len(x)
        elif t is list:
            n += 1
            stack.extend(x)
        elif t is RecordRT:
            n += 1
            stack.extend(x.fields.values())
        else:
            n += 1
        if n > cap:
            return n
    return n


def rt_text(v) -> str:
    """Literal-like rendering of a runtime value (CLI output)."""
    if v is None:
        return "null"
    t = type(v)
    if t is bool:
        return "true" if v else "false"
    if t is float:
        return repr(v)
    if t is str:
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if t is list:
        return "[" + ", ".join(rt_text(x) for x in v) + "]"
    if t is RecordRT:
        inner = ", ".join(f"{k}: {rt_text(x)}" for k, x in v.fields.items())
        return f"{v.type_name}{{{inner}}}"
    return str(v)
