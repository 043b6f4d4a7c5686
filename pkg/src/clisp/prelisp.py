"""Macro expansion over the JSON program form.

Macro expressions are ``["unquote", X]`` and ``["unquote-splicing", X]``
nodes: a string operand names a value to substitute, a list operand names a
callable to invoke with the remaining elements as arguments.  Expansion is a
single depth-first, left-to-right pass; substituted results are not scanned
again, and call arguments are handed over unevaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

from .sexpr import Json

UNQUOTE = "unquote"
UNQUOTE_SPLICING = "unquote-splicing"


class MacroError(Exception):
    """Base class for expansion failures."""


class UnresolvedMacroError(MacroError):
    """A macro name with no definition behind the resolver."""


class MalformedMacroError(MacroError):
    """An unquote node whose shape is not one of the recognized forms."""


class SpliceError(MacroError):
    """unquote-splicing misuse: no surrounding list, or a non-list result."""


class MacroResolver(Protocol):
    def resolve_variable(self, name: str) -> Json: ...

    def resolve_call(self, name: str, args: list[Json]) -> Json: ...


@dataclass(frozen=True)
class MacroExpr:
    """One macro expression as expansion would encounter it."""

    kind: str  # "variable" | "call" | "splice-variable" | "splice-call"
    name: str
    args: tuple = ()
    site: object = None

    @property
    def splicing(self) -> bool:
        return self.kind.startswith("splice-")


def _as_macro(node: Json) -> MacroExpr | None:
    """Classify ``node`` as a macro expression, or return None."""
    if not isinstance(node, list) or not node:
        return None
    head = node[0]
    if not isinstance(head, str) or head not in (UNQUOTE, UNQUOTE_SPLICING):
        return None
    splicing = head == UNQUOTE_SPLICING
    if len(node) != 2:
        raise MalformedMacroError(f"{head} takes exactly one operand, got {len(node) - 1}")
    operand = node[1]
    if isinstance(operand, str):
        return MacroExpr("splice-variable" if splicing else "variable", operand)
    if isinstance(operand, list):
        if not operand or not isinstance(operand[0], str):
            raise MalformedMacroError(f"{head} call form must begin with a macro name")
        return MacroExpr("splice-call" if splicing else "call", operand[0], tuple(operand[1:]))
    raise MalformedMacroError(
        f"{head} operand must be a name or a call form, got {type(operand).__name__}"
    )


def _resolve(macro: MacroExpr, resolver: MacroResolver) -> Json:
    if macro.kind.endswith("variable"):
        return resolver.resolve_variable(macro.name)
    return resolver.resolve_call(macro.name, list(macro.args))


def expand(program: Json, resolver: MacroResolver) -> Json:
    """Expand every macro expression in ``program`` through ``resolver``.

    A splice result must be a list; its elements replace the macro node in
    the surrounding list.  A splice with no surrounding list is an error.
    """
    macro = _as_macro(program)
    if macro is not None:
        if macro.splicing:
            raise SpliceError(f"{UNQUOTE_SPLICING} of {macro.name!r} has no surrounding list to splice into")
        return _resolve(macro, resolver)
    if isinstance(program, list):
        out: list[Json] = []
        for child in program:
            child_macro = _as_macro(child)
            if child_macro is None:
                out.append(expand(child, resolver))
            elif child_macro.splicing:
                result = _resolve(child_macro, resolver)
                if not isinstance(result, list):
                    raise SpliceError(
                        f"{UNQUOTE_SPLICING} of {child_macro.name!r} produced "
                        f"{type(result).__name__}, expected a list"
                    )
                out.extend(result)
            else:
                out.append(_resolve(child_macro, resolver))
        return out
    return program


def scan_macros(program: Json) -> list[MacroExpr]:
    """List the macro expressions expand would evaluate, in evaluation order."""
    found: list[MacroExpr] = []

    def walk(node: Json):
        macro = _as_macro(node)
        if macro is not None:
            found.append(macro)
            return
        if isinstance(node, list):
            for child in node:
                walk(child)

    walk(program)
    return found


class MappingResolver:
    """In-process resolver over plain mappings of values and callables.

    ``fallback`` lets resolvers stack: names this one does not know are
    passed on instead of failing.
    """

    def __init__(
        self,
        variables: dict[str, Json] | None = None,
        callables: dict[str, Callable[..., Json]] | None = None,
        fallback: MacroResolver | None = None,
    ):
        self.variables = dict(variables or {})
        self.callables = dict(callables or {})
        self.fallback = fallback

    @classmethod
    def from_namespace(cls, namespace: dict, fallback: MacroResolver | None = None) -> "MappingResolver":
        """Split a module-style namespace into values and callables."""
        variables, callables = {}, {}
        for name, obj in namespace.items():
            if name.startswith("_"):
                continue
            if callable(obj):
                callables[name] = obj
            else:
                variables[name] = obj
        return cls(variables, callables, fallback)

    def resolve_variable(self, name: str) -> Json:
        if name in self.variables:
            return self.variables[name]
        if self.fallback is not None:
            return self.fallback.resolve_variable(name)
        raise UnresolvedMacroError(f"unresolved macro: {name}")

    def resolve_call(self, name: str, args: list[Json]) -> Json:
        if name in self.callables:
            return self.callables[name](*args)
        if self.fallback is not None:
            return self.fallback.resolve_call(name, args)
        raise UnresolvedMacroError(f"unresolved macro: {name}")
