"""S-expression trees, reader, printer, and the JSON interchange form.

Every stage of the toolchain talks in these trees: ``.cl`` source files hold
the textual rendering, and the macro layer exchanges the JSON form (arrays,
strings and numbers only).  Trees are immutable; all functions here are pure.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# The marker used to encode string atoms in JSON, where plain JSON strings
# already mean symbols.  A list may not start with this symbol.
STRING_MARKER = "string"

_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_FLOAT_RE = re.compile(
    r"[+-]?(?:[0-9]+\.[0-9]*(?:[eE][+-]?[0-9]+)?"
    r"|\.[0-9]+(?:[eE][+-]?[0-9]+)?"
    r"|[0-9]+[eE][+-]?[0-9]+)\Z"
)

_SYMBOL_BREAKERS = '()";'


class ParseError(Exception):
    """Reader failure, carrying the source position it happened at."""

    def __init__(self, message: str, pos: "SourcePosition | None" = None):
        self.message = message
        self.pos = pos
        super().__init__(f"{pos}: {message}" if pos else message)


class JsonError(ValueError):
    """A JSON value that does not encode a valid S-expression."""


@dataclass(frozen=True)
class SourcePosition:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _valid_symbol_text(text: str) -> str | None:
    """Return None if ``text`` can be a symbol, else the reason it cannot."""
    if not text:
        return "symbol text is empty"
    for c in text:
        if c.isspace() or c in _SYMBOL_BREAKERS:
            return f"symbol may not contain {c!r}"
    if text[0] == ",":
        return "symbol may not start with ','"
    if _INT_RE.match(text) or _FLOAT_RE.match(text):
        return f"{text!r} reads as a number, not a symbol"
    return None


@dataclass(frozen=True)
class Symbol:
    text: str
    pos: "SourcePosition | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        reason = _valid_symbol_text(self.text)
        if reason is not None:
            raise ValueError(reason)


@dataclass(frozen=True)
class Integer:
    value: int
    pos: "SourcePosition | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (INT64_MIN <= self.value <= INT64_MAX):
            raise ValueError(f"integer {self.value} out of signed 64-bit range")


@dataclass(frozen=True)
class Float:
    value: float
    pos: "SourcePosition | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("float atoms must be finite")


@dataclass(frozen=True)
class String:
    value: str
    pos: "SourcePosition | None" = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    pos: "SourcePosition | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.items and self.items[0] == Symbol(STRING_MARKER):
            raise ValueError(f"the symbol {STRING_MARKER!r} is reserved and may not head a list")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]


SExpr = Union[Symbol, Integer, Float, String, SList]

# JSON interchange values: arrays, strings and numbers only.
Json = Union[str, int, float, list]


def _classify_token(tok: str, pos: SourcePosition) -> SExpr:
    if _INT_RE.match(tok):
        value = int(tok)
        if not (INT64_MIN <= value <= INT64_MAX):
            raise ParseError(f"integer literal {tok} out of signed 64-bit range", pos)
        return Integer(value, pos)
    if _FLOAT_RE.match(tok):
        value = float(tok)
        if not math.isfinite(value):
            raise ParseError(f"float literal {tok} out of range", pos)
        return Float(value, pos)
    try:
        return Symbol(tok, pos)
    except ValueError as exc:
        raise ParseError(str(exc), pos) from None


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def position(self) -> SourcePosition:
        return SourcePosition(self.line, self.col)

    def peek(self) -> str | None:
        if self.i >= len(self.text):
            return None
        return self.text[self.i]

    def take(self) -> str:
        c = self.text[self.i]
        self.i += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def skip_trivia(self):
        while True:
            c = self.peek()
            if c is None:
                return
            if c.isspace():
                self.take()
            elif c == ";":
                while self.peek() not in (None, "\n"):
                    self.take()
            else:
                return

    def read_form(self) -> SExpr:
        pos = self.position()
        c = self.peek()
        assert c is not None
        if c == "(":
            return self._read_list(pos)
        if c == ")":
            raise ParseError("unexpected ')'", pos)
        if c == '"':
            return self._read_string(pos)
        if c == ",":
            return self._read_unquote(pos)
        return self._read_atom(pos)

    def _read_list(self, open_pos: SourcePosition) -> SList:
        self.take()
        items: list[SExpr] = []
        while True:
            self.skip_trivia()
            c = self.peek()
            if c is None:
                raise ParseError("unbalanced parentheses: '(' was never closed", open_pos)
            if c == ")":
                self.take()
                try:
                    return SList(tuple(items), open_pos)
                except ValueError as exc:
                    raise ParseError(str(exc), open_pos) from None
            items.append(self.read_form())

    def _read_string(self, pos: SourcePosition) -> String:
        self.take()
        chars: list[str] = []
        while True:
            c = self.peek()
            if c is None:
                raise ParseError("unterminated string literal", pos)
            self.take()
            if c == '"':
                return String("".join(chars), pos)
            if c == "\\":
                e = self.peek()
                if e not in ('"', "\\"):
                    raise ParseError(f"invalid escape '\\{e if e is not None else ''}' in string", pos)
                chars.append(self.take())
            else:
                chars.append(c)

    def _read_unquote(self, pos: SourcePosition) -> SList:
        self.take()
        name = "unquote"
        if self.peek() == "@":
            self.take()
            name = "unquote-splicing"
        self.skip_trivia()
        c = self.peek()
        if c is None or c == ")":
            raise ParseError(f"expected an expression after ',{'@' if name.endswith('splicing') else ''}'", pos)
        operand = self.read_form()
        return SList((Symbol(name, pos), operand), pos)

    def _read_atom(self, pos: SourcePosition) -> SExpr:
        chars: list[str] = []
        while True:
            c = self.peek()
            if c is None or c.isspace() or c in _SYMBOL_BREAKERS:
                break
            chars.append(self.take())
        return _classify_token("".join(chars), pos)


def parse_sexprs(text: str) -> list[SExpr]:
    """Read every top-level form in ``text``, in order.

    ``;`` comments run to end of line; ``,X`` reads as ``(unquote X)`` and
    ``,@X`` as ``(unquote-splicing X)``.  Raises ParseError with a position
    on unbalanced parentheses, a stray ``)`` or an unterminated string.
    """
    reader = _Reader(text)
    forms: list[SExpr] = []
    while True:
        reader.skip_trivia()
        if reader.peek() is None:
            return forms
        forms.append(reader.read_form())


def print_sexpr(expr: SExpr) -> str:
    """Canonical one-line rendering; re-parses to an equal tree."""
    if isinstance(expr, Symbol):
        return expr.text
    if isinstance(expr, Integer):
        return str(expr.value)
    if isinstance(expr, Float):
        return repr(expr.value)
    if isinstance(expr, String):
        escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(expr, SList):
        return "(" + " ".join(print_sexpr(item) for item in expr.items) + ")"
    raise TypeError(f"not an S-expression: {expr!r}")


def to_json(expr: SExpr) -> Json:
    """Convert a tree to the JSON interchange form.

    Symbols become JSON strings, numbers stay numbers, and a string atom
    becomes the two-element array ["string", text] since bare JSON strings
    are taken by symbols.
    """
    if isinstance(expr, Symbol):
        return expr.text
    if isinstance(expr, Integer):
        return expr.value
    if isinstance(expr, Float):
        return expr.value
    if isinstance(expr, String):
        return [STRING_MARKER, expr.value]
    if isinstance(expr, SList):
        return [to_json(item) for item in expr.items]
    raise TypeError(f"not an S-expression: {expr!r}")


def from_json(value: Json) -> SExpr:
    """Inverse of to_json.  Rejects JSON objects, null and booleans."""
    if isinstance(value, bool):
        raise JsonError("JSON booleans do not encode S-expressions")
    if isinstance(value, str):
        reason = _valid_symbol_text(value)
        if reason is not None:
            raise JsonError(f"JSON string {value!r} is not a valid symbol: {reason}")
        return Symbol(value)
    if isinstance(value, int):
        if not (INT64_MIN <= value <= INT64_MAX):
            raise JsonError(f"integer {value} out of signed 64-bit range")
        return Integer(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise JsonError("non-finite numbers do not encode S-expressions")
        return Float(value)
    if isinstance(value, list):
        if value and value[0] == STRING_MARKER:
            if len(value) == 2 and isinstance(value[1], str):
                return String(value[1])
            raise JsonError(f'malformed ["{STRING_MARKER}", ...] atom: {value!r}')
        return SList(tuple(from_json(item) for item in value))
    raise JsonError(f"JSON {type(value).__name__} does not encode an S-expression")


def check_json_program(value: Json) -> None:
    """Reject any node outside the interchange subset (arrays/strings/numbers)."""
    if isinstance(value, bool) or value is None or isinstance(value, dict):
        raise JsonError(f"JSON {type(value).__name__} is not part of the interchange form")
    if isinstance(value, list):
        for item in value:
            check_json_program(item)
    elif not isinstance(value, (str, int, float)):
        raise JsonError(f"JSON {type(value).__name__} is not part of the interchange form")


def loads_program(text: str) -> list[Json]:
    """Parse an interchange file: one top-level JSON array of forms."""
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonError(f"invalid JSON: {exc}") from None
    if not isinstance(value, list) or isinstance(value, bool):
        raise JsonError("expected one top-level JSON array of forms")
    check_json_program(value)
    return value


def dumps_program(forms: list[Json]) -> str:
    """Stable rendering of an interchange file: one form per line."""
    if not forms:
        return "[]\n"
    lines = ",\n".join(json.dumps(form) for form in forms)
    return "[\n" + lines + "\n]\n"
