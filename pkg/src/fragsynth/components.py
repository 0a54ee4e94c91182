"""Component registry and per-task type universes.

Instance methods, constructors, and field reads are all modeled as plain
components: an id, parameter types (receiver first where applicable), an
optional return type, and a host implementation over runtime values.
Implementations may mutate the arguments listed in `mutates`; everything
else must be pure. Implementations signal runtime failures (bad index,
null receiver, ...) by raising EvalError, and their per-call work must
stay linear in total argument size.

A TypeUniverse is the per-task closure: signature types plus requested
extras, closed over declared supertypes and nested/parameter types, with
Bool and Int always present. It carries exactly the registry components
whose parameter and return types all lie inside the closure, plus the
grammar constants and any task-specific ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .lang import (
    BOOL, FALSE, FLOAT, INT, NULL, STR, TRUE, FloatV, IntV, StrV, TypeRef,
    Value, is_list_type, is_nullable, type_text, value_type,
)


class EvalError(Exception):
    """Runtime failure inside a candidate program (bad index, null
    receiver, division by zero, ...). Not a bug: candidates crash."""


@dataclass(frozen=True, slots=True)
class ComponentSig:
    id: str
    params: tuple[TypeRef, ...]
    ret: TypeRef | None
    impl: Callable = field(compare=False)
    mutates: tuple[int, ...] = ()

    @property
    def pure(self) -> bool:
        return not self.mutates


@dataclass(frozen=True, slots=True)
class TypeDecl:
    """Registry metadata for one known type."""

    type: TypeRef
    assoc: tuple[TypeRef, ...] = ()  # nested/parameter types
    supers: tuple[TypeRef, ...] = ()
    zero_ctor: str | None = None  # component id of a no-arg constructor
    default_const: Value | None = None  # literal default for local inits
    field_types: tuple[tuple[str, TypeRef], ...] = ()  # record fields


@dataclass(slots=True)
class Registry:
    components: dict[str, ComponentSig]
    types: dict[TypeRef, TypeDecl]

    def add(self, sig: ComponentSig) -> None:
        if sig.id in self.components:
            raise ValueError(f"duplicate component id {sig.id!r}")
        self.components[sig.id] = sig

    def declare(self, decl: TypeDecl) -> None:
        self.types[decl.type] = decl


GRAMMAR_CONSTANTS: tuple[Value, ...] = (
    IntV(-1), IntV(0), IntV(1), IntV(2),
    FloatV(0.0), FloatV(1.0), FloatV(2.0),
    TRUE, FALSE, NULL, StrV(""),
)


class TypeUniverse:
    """Types, components, and constants available to one search."""

    def __init__(self, types: frozenset[TypeRef],
                 components: tuple[ComponentSig, ...],
                 constants: tuple[Value, ...],
                 registry: Registry,
                 super_closure: frozenset[tuple[TypeRef, TypeRef]]):
        self.types = types
        self.components = components
        self.component_map = {c.id: c for c in components}
        self.constants = constants
        self.registry = registry
        self._super_closure = super_closure
        self._returning: dict[TypeRef, tuple[ComponentSig, ...]] = {}
        self._consts_of: dict[TypeRef, tuple[Value, ...]] = {}
        # Deterministic iteration order regardless of hash seeding.
        self.types_ordered = tuple(sorted(types, key=type_text))
        self.list_types = tuple(t for t in self.types_ordered
                                if is_list_type(t))

    def conforms(self, sub: TypeRef, sup: TypeRef) -> bool:
        """Declared-subtype conformance; null conforms to reference types."""
        if sub == sup:
            return True
        if sub.name == "Null":
            return is_nullable(sup)
        return (sub, sup) in self._super_closure

    def components_returning(self, t: TypeRef) -> tuple[ComponentSig, ...]:
        got = self._returning.get(t)
        if got is None:
            got = tuple(c for c in self.components
                        if c.ret is not None and self.conforms(c.ret, t))
            self._returning[t] = got
        return got

    def constants_of(self, t: TypeRef) -> tuple[Value, ...]:
        got = self._consts_of.get(t)
        if got is None:
            got = tuple(v for v in self.constants
                        if self.conforms(value_type(v), t))
            self._consts_of[t] = got
        return got

    def decl_of(self, t: TypeRef) -> TypeDecl | None:
        return self.registry.types.get(t)


def _closure_over_supers(types: dict[TypeRef, TypeDecl]):
    """Transitive (sub, super) pairs from declared supertypes."""
    direct: dict[TypeRef, set[TypeRef]] = {}
    for t, decl in types.items():
        direct[t] = set(decl.supers)
    pairs: set[tuple[TypeRef, TypeRef]] = set()
    for t in direct:
        seen: set[TypeRef] = set()
        stack = list(direct.get(t, ()))
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            pairs.add((t, s))
            stack.extend(direct.get(s, ()))
    return frozenset(pairs)


def build_universe(param_types: list[TypeRef],
                   ret_type: TypeRef | None,
                   extra_types: list[TypeRef],
                   registry: Registry,
                   extra_constants: tuple[Value, ...] = (),
                   include_ids: tuple[str, ...] = ()) -> TypeUniverse:
    """Close the signature types (+extras, +forced components' types) and
    select the components whose types all fall inside the closure."""
    seed: list[TypeRef] = list(param_types) + list(extra_types) + [INT, BOOL]
    if ret_type is not None:
        seed.append(ret_type)
    for cid in include_ids:
        sig = registry.components.get(cid)
        if sig is None:
            raise ValueError(f"unknown component id {cid!r}")
        seed.extend(sig.params)
        if sig.ret is not None:
            seed.append(sig.ret)

    closed: set[TypeRef] = set()
    work = list(seed)
    while work:
        t = work.pop()
        if t in closed:
            continue
        decl = registry.types.get(t)
        if decl is None:
            raise ValueError(f"unknown type {type_text(t)!r}")
        closed.add(t)
        work.extend(decl.assoc)
        work.extend(decl.supers)

    members = frozenset(closed)
    comps = tuple(
        c for c in registry.components.values()
        if all(p in members for p in c.params)
        and (c.ret is None or c.ret in members)
    )
    constants = GRAMMAR_CONSTANTS + tuple(extra_constants)
    return TypeUniverse(members, comps, constants, registry,
                        _closure_over_supers(registry.types))
