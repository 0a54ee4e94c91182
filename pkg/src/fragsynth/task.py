"""Task files: the problem statement a search runs against.

A task bundles the target signature, the component selection, the
input/output tests, and execution limits. On disk it is JSON with every
value written as a tagged node (``{"t": "int", "v": 3}``); floats are
decimal strings so files stay bit-stable under round-trips. Loading
validates the whole structure and reports problems by field path
(``tests[2].output: ...``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .builtins import builtin_registry
from .components import Registry, TypeUniverse, build_universe
from .interpreter import ExecLimits, TestCase
from .lang import (
    BOOL,
    FLOAT,
    INT,
    STR,
    BoolV,
    FloatV,
    IntV,
    ListV,
    NullV,
    Param,
    RecordV,
    StrV,
    TypeRef,
    Value,
    is_nullable,
    parse_type,
    type_text,
    value_type,
)

__all__ = ["TaskError", "TaskSpec", "load_task", "task_to_json",
           "decode_value", "encode_value"]


class TaskError(ValueError):
    """A malformed task file; the message starts with the field path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass(slots=True)
class TaskSpec:
    """One synthesis problem: signature, components, tests, limits."""

    name: str
    params: tuple[Param, ...]
    ret: TypeRef | None
    tests: tuple[TestCase, ...]
    component_ids: tuple[str, ...] = ()
    extra_types: tuple[TypeRef, ...] = ()
    extra_constants: tuple[Value, ...] = ()
    limits: ExecLimits = field(default_factory=ExecLimits)
    float_tolerance: float = 1e-9
    ignored_params: frozenset[str] = frozenset()
    solution: str | None = None

    def universe(self, registry: Registry | None = None) -> TypeUniverse:
        return build_universe([p.type for p in self.params], self.ret,
                              list(self.extra_types),
                              registry or builtin_registry(),
                              extra_constants=self.extra_constants,
                              include_ids=self.component_ids)


# ------------------------------------------------------------- values

_SCALAR_TAGS = {"int", "float", "bool", "str"}


def _parse_type_text(text: str, path: str) -> TypeRef:
    if not isinstance(text, str) or not text:
        raise TaskError(path, "expected a type name string")
    # tags and element names are accepted lowercase ("int" for "Int")
    norm = text[0].upper() + text[1:]
    try:
        return parse_type(norm)
    except ValueError as e:
        raise TaskError(path, str(e)) from None


def decode_value(node, path: str) -> Value:
    """A wire value from its tagged-node JSON form."""
    if not isinstance(node, dict) or "t" not in node:
        raise TaskError(path, "expected a tagged value object with 't'")
    tag = node["t"]
    if tag == "null":
        return NullV()
    if tag not in _SCALAR_TAGS and tag not in ("list", "record"):
        raise TaskError(path, f"unknown value tag {tag!r}")
    if "v" not in node and tag != "record":
        raise TaskError(path, f"tag {tag!r} needs a 'v' payload")
    if tag == "int":
        v = node["v"]
        if isinstance(v, bool) or not isinstance(v, int):
            raise TaskError(path, "int payload must be an integer")
        return IntV(v)
    if tag == "float":
        v = node["v"]
        if isinstance(v, str):
            try:
                return FloatV(float(v))
            except ValueError:
                raise TaskError(path, f"bad float string {v!r}") from None
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return FloatV(float(v))
        raise TaskError(path, "float payload must be a decimal string "
                              "or number")
    if tag == "bool":
        if not isinstance(node["v"], bool):
            raise TaskError(path, "bool payload must be true/false")
        return BoolV(node["v"])
    if tag == "str":
        if not isinstance(node["v"], str):
            raise TaskError(path, "str payload must be a string")
        return StrV(node["v"])
    if tag == "list":
        if "elem" not in node:
            raise TaskError(path, "list value needs an 'elem' type")
        elem = _parse_type_text(node["elem"], f"{path}.elem")
        items = node["v"]
        if not isinstance(items, list):
            raise TaskError(path, "list payload must be an array")
        out = []
        for i, item in enumerate(items):
            ipath = f"{path}.v[{i}]"
            if isinstance(item, dict) and "t" in item:
                val = decode_value(item, ipath)
            else:
                val = decode_value({"t": _scalar_tag(elem, ipath),
                                    "v": item}, ipath)
            if value_type(val) != elem:
                raise TaskError(ipath, f"element is not {type_text(elem)}")
            out.append(val)
        return ListV(elem, tuple(out))
    # record
    if "type" not in node or "fields" not in node:
        raise TaskError(path, "record value needs 'type' and 'fields'")
    rt = _parse_type_text(node["type"], f"{path}.type")
    fields_node = node["fields"]
    if not isinstance(fields_node, dict):
        raise TaskError(path, "record 'fields' must be an object")
    fields = {k: decode_value(v, f"{path}.fields.{k}")
              for k, v in fields_node.items()}
    return RecordV(rt, fields)


def _scalar_tag(t: TypeRef, path: str) -> str:
    for tag, ref in (("int", INT), ("float", FLOAT), ("bool", BOOL),
                     ("str", STR)):
        if t == ref:
            return tag
    raise TaskError(path, f"bare list elements need a scalar type, "
                          f"not {type_text(t)}")


def encode_value(v: Value):
    """The tagged-node JSON form of a wire value (floats as decimal
    strings, scalar list elements bare)."""
    cls = v.__class__
    if cls is NullV:
        return {"t": "null"}
    if cls is IntV:
        return {"t": "int", "v": v.v}
    if cls is FloatV:
        return {"t": "float", "v": repr(v.v)}
    if cls is BoolV:
        return {"t": "bool", "v": v.v}
    if cls is StrV:
        return {"t": "str", "v": v.v}
    if cls is ListV:
        if v.elem == FLOAT:
            items = [repr(item.v) for item in v.items]
        elif v.elem in (INT, BOOL, STR):
            items = [item.v for item in v.items]
        else:
            items = [encode_value(item) for item in v.items]
        return {"t": "list", "elem": type_text(v.elem), "v": items}
    return {"t": "record", "type": type_text(v.type),
            "fields": {k: encode_value(fv)
                       for k, fv in sorted(v.fields.items())}}


# ------------------------------------------------------------ loading

def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise TaskError(path, f"missing required field {key!r}")
    return obj[key]


def _str_field(obj, key, path) -> str:
    v = _need(obj, key, path)
    if not isinstance(v, str) or not v:
        raise TaskError(f"{path}.{key}", "expected a nonempty string")
    return v


def _conforms(value: Value, want: TypeRef) -> bool:
    have = value_type(value)
    if have == want:
        return True
    return have == TypeRef("Null") and is_nullable(want)


def load_task(path: str) -> TaskSpec:
    """Parse and validate one task file."""
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise TaskError("(file)", f"not valid JSON: {e}") from None
    return task_from_json(doc)


def task_from_json(doc) -> TaskSpec:
    if not isinstance(doc, dict):
        raise TaskError("(root)", "task file must be a JSON object")
    name = _str_field(doc, "name", "(root)")

    sig = _need(doc, "signature", "(root)")
    if not isinstance(sig, dict):
        raise TaskError("signature", "expected an object")
    raw_params = _need(sig, "params", "signature")
    if not isinstance(raw_params, list):
        raise TaskError("signature.params", "expected an array")
    params: list[Param] = []
    for i, rp in enumerate(raw_params):
        ppath = f"signature.params[{i}]"
        if not isinstance(rp, dict):
            raise TaskError(ppath, "expected an object")
        pname = _str_field(rp, "name", ppath)
        ptype = _parse_type_text(_need(rp, "type", ppath), f"{ppath}.type")
        if any(q.name == pname for q in params):
            raise TaskError(ppath, f"duplicate parameter {pname!r}")
        params.append(Param(pname, ptype))
    raw_ret = sig.get("return")
    ret = (None if raw_ret is None
           else _parse_type_text(raw_ret, "signature.return"))

    comp_ids: tuple[str, ...] = ()
    extra_types: tuple[TypeRef, ...] = ()
    comps = doc.get("components")
    if comps is not None:
        if not isinstance(comps, dict):
            raise TaskError("components", "expected an object")
        ids = comps.get("ids", [])
        if not isinstance(ids, list):
            raise TaskError("components.ids", "expected an array")
        comp_ids = tuple(str(x) for x in ids)
        raw_extra = comps.get("extraTypes", [])
        if not isinstance(raw_extra, list):
            raise TaskError("components.extraTypes", "expected an array")
        extra_types = tuple(
            _parse_type_text(t, f"components.extraTypes[{i}]")
            for i, t in enumerate(raw_extra))

    consts = doc.get("constants", [])
    if not isinstance(consts, list):
        raise TaskError("constants", "expected an array")
    extra_constants = tuple(decode_value(c, f"constants[{i}]")
                            for i, c in enumerate(consts))

    raw_tests = _need(doc, "tests", "(root)")
    if not isinstance(raw_tests, list) or not raw_tests:
        raise TaskError("tests", "expected a nonempty array")

    limits = ExecLimits()
    float_tolerance = 1e-9
    ignored: frozenset[str] = frozenset()
    cfg = doc.get("config")
    if cfg is not None:
        if not isinstance(cfg, dict):
            raise TaskError("config", "expected an object")
        kw = {}
        for json_key, attr in (("maxLoopIterations", "max_loop_iterations"),
                               ("maxSteps", "max_steps"),
                               ("maxValueSize", "max_value_size")):
            if json_key in cfg:
                v = cfg[json_key]
                if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                    raise TaskError(f"config.{json_key}",
                                    "expected a positive integer")
                kw[attr] = v
        if kw:
            limits = ExecLimits(**{**{
                "max_loop_iterations": limits.max_loop_iterations,
                "max_steps": limits.max_steps,
                "max_value_size": limits.max_value_size}, **kw})
        if "floatTolerance" in cfg:
            v = cfg["floatTolerance"]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
                raise TaskError("config.floatTolerance",
                                "expected a nonnegative number")
            float_tolerance = float(v)
        if "ignoredParams" in cfg:
            v = cfg["ignoredParams"]
            if (not isinstance(v, list)
                    or not all(isinstance(x, str) for x in v)):
                raise TaskError("config.ignoredParams",
                                "expected an array of parameter names")
            ignored = frozenset(v)
            unknown = ignored - {p.name for p in params}
            if unknown:
                raise TaskError("config.ignoredParams",
                                f"unknown parameter {sorted(unknown)[0]!r}")

    tests: list[TestCase] = []
    by_name = {p.name: p.type for p in params}
    for i, rt in enumerate(raw_tests):
        tpath = f"tests[{i}]"
        if not isinstance(rt, dict):
            raise TaskError(tpath, "expected an object")
        raw_inputs = _need(rt, "inputs", tpath)
        if not isinstance(raw_inputs, list):
            raise TaskError(f"{tpath}.inputs", "expected an array")
        if len(raw_inputs) != len(params):
            raise TaskError(f"{tpath}.inputs",
                            f"expected {len(params)} values, "
                            f"got {len(raw_inputs)}")
        inputs = []
        for j, rv in enumerate(raw_inputs):
            val = decode_value(rv, f"{tpath}.inputs[{j}]")
            want = params[j].type
            if not _conforms(val, want):
                raise TaskError(
                    f"{tpath}.inputs[{j}]",
                    f"value of type {type_text(value_type(val))} does not "
                    f"fit parameter {params[j].name!r}: {type_text(want)}")
            inputs.append(val)
        output = None
        if rt.get("output") is not None:
            if ret is None:
                raise TaskError(f"{tpath}.output",
                                "the function returns nothing")
            output = decode_value(rt["output"], f"{tpath}.output")
            if not _conforms(output, ret):
                raise TaskError(
                    f"{tpath}.output",
                    f"value of type {type_text(value_type(output))} does "
                    f"not fit return type {type_text(ret)}")
        elif ret is not None:
            raise TaskError(f"{tpath}.output", "missing expected output")
        mutated = None
        if rt.get("mutated") is not None:
            raw_mut = rt["mutated"]
            if not isinstance(raw_mut, dict):
                raise TaskError(f"{tpath}.mutated", "expected an object")
            mutated = {}
            for pname, rv in raw_mut.items():
                mpath = f"{tpath}.mutated.{pname}"
                if pname not in by_name:
                    raise TaskError(mpath, f"unknown parameter {pname!r}")
                val = decode_value(rv, mpath)
                if not _conforms(val, by_name[pname]):
                    raise TaskError(
                        mpath,
                        f"value of type {type_text(value_type(val))} does "
                        f"not fit parameter type "
                        f"{type_text(by_name[pname])}")
                mutated[pname] = val
        tests.append(TestCase(tuple(inputs), output, mutated))

    solution = doc.get("solution")
    if solution is not None and not isinstance(solution, str):
        raise TaskError("solution", "expected program text")

    spec = TaskSpec(name=name, params=tuple(params), ret=ret,
                    tests=tuple(tests), component_ids=comp_ids,
                    extra_types=extra_types,
                    extra_constants=extra_constants, limits=limits,
                    float_tolerance=float_tolerance,
                    ignored_params=ignored, solution=solution)
    try:
        spec.universe()
    except ValueError as e:
        raise TaskError("components", str(e)) from None
    return spec


# ------------------------------------------------------------ saving

def task_to_json(spec: TaskSpec) -> dict:
    """The JSON form of a task; load_task(task_to_json(s)) == s."""
    doc: dict = {
        "name": spec.name,
        "signature": {
            "params": [{"name": p.name, "type": type_text(p.type)}
                       for p in spec.params],
            "return": None if spec.ret is None else type_text(spec.ret),
        },
    }
    if spec.component_ids or spec.extra_types:
        comps: dict = {}
        if spec.component_ids:
            comps["ids"] = list(spec.component_ids)
        if spec.extra_types:
            comps["extraTypes"] = [type_text(t) for t in spec.extra_types]
        doc["components"] = comps
    if spec.extra_constants:
        doc["constants"] = [encode_value(v) for v in spec.extra_constants]
    doc["tests"] = []
    for t in spec.tests:
        node: dict = {"inputs": [encode_value(v) for v in t.inputs]}
        if t.output is not None:
            node["output"] = encode_value(t.output)
        if t.mutated:
            node["mutated"] = {k: encode_value(v)
                               for k, v in sorted(t.mutated.items())}
        doc["tests"].append(node)
    cfg = {}
    default = ExecLimits()
    if spec.limits.max_loop_iterations != default.max_loop_iterations:
        cfg["maxLoopIterations"] = spec.limits.max_loop_iterations
    if spec.limits.max_steps != default.max_steps:
        cfg["maxSteps"] = spec.limits.max_steps
    if spec.limits.max_value_size != default.max_value_size:
        cfg["maxValueSize"] = spec.limits.max_value_size
    if spec.float_tolerance != 1e-9:
        cfg["floatTolerance"] = spec.float_tolerance
    if spec.ignored_params:
        cfg["ignoredParams"] = sorted(spec.ignored_params)
    if cfg:
        doc["config"] = cfg
    if spec.solution is not None:
        doc["solution"] = spec.solution
    return doc
