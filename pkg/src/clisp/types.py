"""The C-Lisp type lattice and its surface forms.

Types are structural except structs, which compare by name; struct layouts
live on the module that defines them.  There are no implicit conversions
anywhere in the language, with one deliberate exception: ``(ptr void)`` is
interchangeable with any other pointer in value positions, which is what
makes opaque library handles usable at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .sexpr import SExpr, SList, Symbol


@dataclass(frozen=True)
class Void:
    pass


@dataclass(frozen=True)
class Int8:
    pass


@dataclass(frozen=True)
class Int:
    pass


@dataclass(frozen=True)
class Int64:
    pass


@dataclass(frozen=True)
class Float32:
    pass


@dataclass(frozen=True)
class Float64:
    pass


@dataclass(frozen=True)
class Ptr:
    pointee: "CLispType"


@dataclass(frozen=True)
class Struct:
    name: str


CLispType = Union[Void, Int8, Int, Int64, Float32, Float64, Ptr, Struct]

VOID = Void()
INT8 = Int8()
INT = Int()
INT64 = Int64()
FLOAT32 = Float32()
FLOAT64 = Float64()

_NAMED = {
    "void": VOID,
    "int8": INT8,
    "int": INT,
    "int64": INT64,
    "float32": FLOAT32,
    "float64": FLOAT64,
}

_INT_WIDTH = {Int8: 8, Int: 32, Int64: 64}


def is_integer(t: CLispType) -> bool:
    return type(t) in _INT_WIDTH


def is_float(t: CLispType) -> bool:
    return isinstance(t, (Float32, Float64))


def int_width(t: CLispType) -> int:
    return _INT_WIDTH[type(t)]


def format_type(t: CLispType) -> str:
    """Surface-syntax rendering, e.g. ``(ptr int64)``."""
    if isinstance(t, Ptr):
        return f"(ptr {format_type(t.pointee)})"
    if isinstance(t, Struct):
        return t.name
    for name, known in _NAMED.items():
        if known == t:
            return name
    raise TypeError(f"not a C-Lisp type: {t!r}")


def type_from_form(form: SExpr) -> CLispType:
    """Parse a type form: a builtin name, a struct name, or ``(ptr T)``."""
    if isinstance(form, Symbol):
        if form.text in _NAMED:
            return _NAMED[form.text]
        return Struct(form.text)
    if isinstance(form, SList):
        if len(form) == 2 and form[0] == Symbol("ptr"):
            return Ptr(type_from_form(form[1]))
        raise ValueError(f"invalid type form: {form!r}")
    raise ValueError("a type must be a name or (ptr T)")


def type_to_form(t: CLispType) -> SExpr:
    """Inverse of type_from_form."""
    if isinstance(t, Ptr):
        return SList((Symbol("ptr"), type_to_form(t.pointee)))
    return Symbol(format_type(t))


def compatible(a: CLispType, b: CLispType) -> bool:
    """Equality, except (ptr void) matches any pointer.

    Used wherever a value meets an expected type (arguments, set, store,
    ret); arithmetic stays strictly monomorphic.
    """
    if a == b:
        return True
    if isinstance(a, Ptr) and isinstance(b, Ptr):
        return a.pointee == VOID or b.pointee == VOID
    return False
