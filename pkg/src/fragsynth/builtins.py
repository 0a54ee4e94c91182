"""Builtin component library.

Integer and float math, string operations, list operations instantiated
per scalar element type (Int/Float/Bool/Str), queue-style list access,
linked-list node records, and index swapping. Implementations follow
Java conventions where one exists (truncating division lives in the
operators, substring bounds, indexOf returning -1, startsWith with an
offset); queue poll/peek on an empty list raises instead of returning
null, since an Int-returning component cannot produce null here.

Producers of strings guard their output length so a single call can
never fabricate a value far beyond any plausible size limit.
"""

from __future__ import annotations

import math

from .components import ComponentSig, EvalError, Registry, TypeDecl
from .lang import (BOOL, FALSE, FLOAT, INT, STR, FloatV, IntV, StrV, TypeRef,
                   list_of)
from .runtime import RecordRT, wrap64

NODE = TypeRef("ListNode")

_MAX_PRODUCED = 1_000_000
_TRIM_CHARS = "".join(chr(i) for i in range(33))


def _need(v, what: str):
    if v is None:
        raise EvalError(f"null {what}")
    return v


def _idx(xs: list, i: int) -> int:
    if i < 0 or i >= len(xs):
        raise EvalError(f"index {i} out of bounds for length {len(xs)}")
    return i


def _guard_len(n: int):
    if n > _MAX_PRODUCED:
        raise EvalError("produced string too large")


# ---------------------------------------------------------------- impls

def _abs_int(a):
    return wrap64(abs(a[0]))


def _min_int(a):
    return a[0] if a[0] <= a[1] else a[1]


def _max_int(a):
    return a[0] if a[0] >= a[1] else a[1]


def _to_float(a):
    return float(a[0])


def _box(a):
    return a[0]


def _abs_float(a):
    return abs(a[0])


def _min_float(a):
    x, y = a
    if math.isnan(x) or math.isnan(y):
        return math.nan
    return min(x, y)


def _max_float(a):
    x, y = a
    if math.isnan(x) or math.isnan(y):
        return math.nan
    return max(x, y)


def _floor_float(a):
    x = a[0]
    return x if not math.isfinite(x) else float(math.floor(x))


def _ceil_float(a):
    x = a[0]
    return x if not math.isfinite(x) else float(math.ceil(x))


def _sqrt_float(a):
    x = a[0]
    if math.isnan(x) or x < 0.0:
        return math.nan
    return math.sqrt(x)


def _str_len(a):
    return len(_need(a[0], "string"))


def _char_at(a):
    s = _need(a[0], "string")
    i = a[1]
    if i < 0 or i >= len(s):
        raise EvalError(f"charAt index {i} out of bounds for length {len(s)}")
    return s[i]


def _substring(a):
    s = _need(a[0], "string")
    lo, hi = a[1], a[2]
    if lo < 0 or hi > len(s) or lo > hi:
        raise EvalError(f"substring bounds [{lo}, {hi}) invalid for length {len(s)}")
    return s[lo:hi]


def _substring_from(a):
    s = _need(a[0], "string")
    lo = a[1]
    if lo < 0 or lo > len(s):
        raise EvalError(f"substring start {lo} invalid for length {len(s)}")
    return s[lo:]


def _index_of(a):
    return _need(a[0], "string").find(_need(a[1], "string"))


def _last_index_of(a):
    return _need(a[0], "string").rfind(_need(a[1], "string"))


def _concat(a):
    x, y = _need(a[0], "string"), _need(a[1], "string")
    _guard_len(len(x) + len(y))
    return x + y


def _to_upper(a):
    return _need(a[0], "string").upper()


def _to_lower(a):
    return _need(a[0], "string").lower()


def _contains_str(a):
    return _need(a[1], "string") in _need(a[0], "string")


def _starts_with(a):
    return _need(a[0], "string").startswith(_need(a[1], "string"))


def _starts_with_at(a):
    s, p, off = _need(a[0], "string"), _need(a[1], "string"), a[2]
    if off < 0 or off > len(s):
        return False
    return s[off:off + len(p)] == p


def _ends_with(a):
    return _need(a[0], "string").endswith(_need(a[1], "string"))


def _trim(a):
    return _need(a[0], "string").strip(_TRIM_CHARS)


def _replace_str(a):
    s, old, new = (_need(a[0], "string"), _need(a[1], "string"),
                   _need(a[2], "string"))
    occurrences = len(s) + 1 if not old else s.count(old)
    _guard_len(len(s) + occurrences * (len(new) - len(old)))
    return s.replace(old, new)


def _repeat_str(a):
    s, n = _need(a[0], "string"), a[1]
    if n < 0:
        raise EvalError(f"repeat count {n} is negative")
    _guard_len(len(s) * n)
    return s * n


def _int_to_str(a):
    return str(a[0])


def _list_new(a):
    return []


def _list_add(a):
    _need(a[0], "list").append(a[1])


def _list_add_first(a):
    _need(a[0], "list").insert(0, a[1])


def _list_get(a):
    xs = _need(a[0], "list")
    return xs[_idx(xs, a[1])]


def _list_set(a):
    xs = _need(a[0], "list")
    xs[_idx(xs, a[1])] = a[2]


def _list_size(a):
    return len(_need(a[0], "list"))


def _list_is_empty(a):
    return not _need(a[0], "list")


def _list_remove(a):
    xs = _need(a[0], "list")
    return xs.pop(_idx(xs, a[1]))


def _list_contains(a):
    from .runtime import deep_eq_rt
    xs = _need(a[0], "list")
    return any(deep_eq_rt(x, a[1]) for x in xs)


def _list_poll(a):
    xs = _need(a[0], "list")
    if not xs:
        raise EvalError("poll on empty list")
    return xs.pop(0)


def _list_peek(a):
    xs = _need(a[0], "list")
    if not xs:
        raise EvalError("peek on empty list")
    return xs[0]


def _swap(a):
    xs = _need(a[0], "list")
    i, j = _idx(xs, a[1]), _idx(xs, a[2])
    xs[i], xs[j] = xs[j], xs[i]


def _node_new(a):
    return RecordRT("ListNode", {"value": a[0], "next": a[1]})


def _node_value(a):
    return _need(a[0], "node").fields["value"]


def _node_next(a):
    return _need(a[0], "node").fields["next"]


def _node_set_value(a):
    _need(a[0], "node").fields["value"] = a[1]


def _node_set_next(a):
    _need(a[0], "node").fields["next"] = a[1]


# -------------------------------------------------------------- registry

def _build() -> Registry:
    reg = Registry(components={}, types={})

    reg.declare(TypeDecl(INT, default_const=IntV(0)))
    reg.declare(TypeDecl(FLOAT, default_const=FloatV(0.0)))
    reg.declare(TypeDecl(BOOL, default_const=FALSE))
    reg.declare(TypeDecl(STR, default_const=StrV("")))
    reg.declare(TypeDecl(NODE, assoc=(INT,),
                         field_types=(("value", INT), ("next", NODE))))

    def c(cid, params, ret, impl, mutates=()):
        reg.add(ComponentSig(cid, tuple(params), ret, impl, tuple(mutates)))

    c("absInt", [INT], INT, _abs_int)
    c("minInt", [INT, INT], INT, _min_int)
    c("maxInt", [INT, INT], INT, _max_int)
    c("toFloat", [INT], FLOAT, _to_float)
    c("box", [INT], INT, _box)

    c("absFloat", [FLOAT], FLOAT, _abs_float)
    c("minFloat", [FLOAT, FLOAT], FLOAT, _min_float)
    c("maxFloat", [FLOAT, FLOAT], FLOAT, _max_float)
    c("floorFloat", [FLOAT], FLOAT, _floor_float)
    c("ceilFloat", [FLOAT], FLOAT, _ceil_float)
    c("sqrtFloat", [FLOAT], FLOAT, _sqrt_float)

    c("strLen", [STR], INT, _str_len)
    c("charAt", [STR, INT], STR, _char_at)
    c("substring", [STR, INT, INT], STR, _substring)
    c("substringFrom", [STR, INT], STR, _substring_from)
    c("indexOfStr", [STR, STR], INT, _index_of)
    c("lastIndexOfStr", [STR, STR], INT, _last_index_of)
    c("concat", [STR, STR], STR, _concat)
    c("toUpper", [STR], STR, _to_upper)
    c("toLower", [STR], STR, _to_lower)
    c("containsStr", [STR, STR], BOOL, _contains_str)
    c("startsWith", [STR, STR], BOOL, _starts_with)
    c("startsWithAt", [STR, STR, INT], BOOL, _starts_with_at)
    c("endsWith", [STR, STR], BOOL, _ends_with)
    c("trim", [STR], STR, _trim)
    c("replaceStr", [STR, STR, STR], STR, _replace_str)
    c("repeatStr", [STR, INT], STR, _repeat_str)
    c("intToStr", [INT], STR, _int_to_str)

    for suffix, elem in (("Int", INT), ("Float", FLOAT),
                         ("Bool", BOOL), ("Str", STR)):
        lt = list_of(elem)
        reg.declare(TypeDecl(lt, assoc=(elem,), zero_ctor=f"listNew{suffix}"))
        c(f"listNew{suffix}", [], lt, _list_new)
        c(f"listAdd{suffix}", [lt, elem], None, _list_add, [0])
        c(f"listAddFirst{suffix}", [lt, elem], None, _list_add_first, [0])
        c(f"listGet{suffix}", [lt, INT], elem, _list_get)
        c(f"listSet{suffix}", [lt, INT, elem], None, _list_set, [0])
        c(f"listSize{suffix}", [lt], INT, _list_size)
        c(f"listIsEmpty{suffix}", [lt], BOOL, _list_is_empty)
        c(f"listRemove{suffix}", [lt, INT], elem, _list_remove, [0])
        c(f"listContains{suffix}", [lt, elem], BOOL, _list_contains)
        c(f"listPoll{suffix}", [lt], elem, _list_poll, [0])
        c(f"listPeek{suffix}", [lt], elem, _list_peek)

    c("swapInt", [list_of(INT), INT, INT], None, _swap, [0])
    c("swapFloat", [list_of(FLOAT), INT, INT], None, _swap, [0])

    c("nodeNew", [INT, NODE], NODE, _node_new)
    c("nodeValue", [NODE], INT, _node_value)
    c("nodeNext", [NODE], NODE, _node_next)
    c("nodeSetValue", [NODE, INT], None, _node_set_value, [0])
    c("nodeSetNext", [NODE, NODE], None, _node_set_next, [0])

    return reg


_REGISTRY: Registry | None = None


def builtin_registry() -> Registry:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build()
    return _REGISTRY


def builtin_components() -> dict[str, ComponentSig]:
    return builtin_registry().components
