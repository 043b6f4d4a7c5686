"""C-Lisp front end: S-expression forms to a typed module.

The language models C semantics over LLVM-shaped opcodes with no implicit
action: every widening, narrowing and int/float move is written out, and the
checker rejects anything else.  Type checking collects every violation it
can find rather than stopping at the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .sexpr import Float as FloatAtom
from .sexpr import Integer as IntegerAtom
from .sexpr import SExpr, SList, SourcePosition, String as StringAtom, Symbol
from .types import (
    CLispType,
    FLOAT64,
    INT,
    INT8,
    Ptr,
    Struct,
    VOID,
    compatible,
    format_type,
    int_width,
    is_float,
    is_integer,
    type_from_form,
)

INT_ARITH_OPS = ("add", "sub", "mul", "sdiv")
FLOAT_ARITH_OPS = ("fadd", "fsub", "fmul", "fdiv")
COMPARE_OPS = ("eq", "ne", "slt", "sgt", "sle", "sge")
CAST_OPS = ("sext", "trunc", "sitofp", "fptosi")

_MACRO_HEADS = ("unquote", "unquote-splicing")


class FormError(Exception):
    """A form that does not fit the C-Lisp grammar."""

    def __init__(self, message: str, pos: SourcePosition | None = None):
        self.message = message
        self.pos = pos
        super().__init__(f"{pos}: {message}" if pos else message)


@dataclass
class TypeIssue:
    pos: SourcePosition | None
    message: str
    expected: CLispType | None = None
    actual: CLispType | None = None

    def __str__(self) -> str:
        where = str(self.pos) if self.pos else "?"
        return f"{where}: {self.message}"


class TypeCheckError(Exception):
    """Raised when a module has type errors; carries the full ordered list."""

    def __init__(self, issues: list[TypeIssue]):
        self.issues = issues
        summary = "; ".join(str(i) for i in issues[:3])
        extra = f" (+{len(issues) - 3} more)" if len(issues) > 3 else ""
        super().__init__(f"{len(issues)} type error(s): {summary}{extra}")


# Poison type: produced when a subexpression already failed, silently
# accepted everywhere so one mistake is reported once.
@dataclass(frozen=True)
class _ErrorType:
    pass


_ERROR = _ErrorType()


# --- AST ---------------------------------------------------------------


@dataclass
class IntLit:
    value: int
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class FloatLit:
    value: float
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class StrLit:
    value: str
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class VarRef:
    name: str
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class Load:
    ptr: "Expr"
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class Cast:
    op: str  # sext | trunc | sitofp | fptosi
    value: "Expr"
    target: CLispType = VOID
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class CallExpr:
    name: str
    args: list["Expr"] = field(default_factory=list)
    pos: SourcePosition | None = None
    ty: CLispType | None = None


@dataclass
class PtrTo:
    name: str
    pos: SourcePosition | None = None
    ty: CLispType | None = None


Expr = Union[IntLit, FloatLit, StrLit, VarRef, BinOp, Load, Cast, CallExpr, PtrTo]


@dataclass
class Declare:
    name: str
    ty: CLispType
    pos: SourcePosition | None = None


@dataclass
class SetStmt:
    name: str
    value: Expr
    pos: SourcePosition | None = None


@dataclass
class StoreStmt:
    ptr: Expr
    value: Expr
    pos: SourcePosition | None = None


@dataclass
class CallStmt:
    call: CallExpr
    pos: SourcePosition | None = None


@dataclass
class RetStmt:
    value: Expr | None = None
    pos: SourcePosition | None = None


@dataclass
class IfStmt:
    cond: Expr
    then: list["Stmt"] = field(default_factory=list)
    orelse: list["Stmt"] | None = None
    pos: SourcePosition | None = None


@dataclass
class WhileStmt:
    cond: Expr
    body: list["Stmt"] = field(default_factory=list)
    pos: SourcePosition | None = None


@dataclass
class BlockStmt:
    body: list["Stmt"] = field(default_factory=list)
    pos: SourcePosition | None = None


Stmt = Union[Declare, SetStmt, StoreStmt, CallStmt, RetStmt, IfStmt, WhileStmt, BlockStmt]


@dataclass
class FunctionSig:
    """External-function signature; also derived from definitions for call checking."""

    name: str
    params: list[tuple[str, CLispType]]
    ret: CLispType
    variadic: bool = False


@dataclass
class FunctionDef:
    name: str
    ret: CLispType
    params: list[tuple[str, CLispType]]
    body: list[Stmt]
    pos: SourcePosition | None = None

    def sig(self) -> FunctionSig:
        return FunctionSig(self.name, list(self.params), self.ret)


@dataclass
class StructDef:
    name: str
    fields: list[tuple[str, CLispType]]
    pos: SourcePosition | None = None


@dataclass
class Module:
    structs: list[StructDef] = field(default_factory=list)
    externals: list[FunctionSig] = field(default_factory=list)
    functions: list[FunctionDef] = field(default_factory=list)


# A typed module is the same object once typecheck() has annotated every
# expression; the alias keeps signatures honest about what stage they want.
TypedModule = Module


# --- Parsing -----------------------------------------------------------


def _expect_symbol(form: SExpr, what: str) -> Symbol:
    if not isinstance(form, Symbol):
        raise FormError(f"{what} must be a symbol", getattr(form, "pos", None))
    return form


def _expect_list(form: SExpr, what: str) -> SList:
    if not isinstance(form, SList):
        raise FormError(f"{what} must be a list", getattr(form, "pos", None))
    return form


def _check_not_macro(form: SExpr):
    if isinstance(form, SList) and form.items and isinstance(form[0], Symbol):
        if form[0].text in _MACRO_HEADS:
            raise FormError(
                f"unexpanded macro expression ({form[0].text} ...); run expansion first",
                form.pos,
            )


def _parse_type(form: SExpr) -> CLispType:
    try:
        return type_from_form(form)
    except ValueError as exc:
        raise FormError(str(exc), getattr(form, "pos", None)) from None


def _parse_param_list(form: SExpr, what: str) -> list[tuple[str, CLispType]]:
    params = []
    for p in _expect_list(form, what):
        pl = _expect_list(p, f"{what} entry")
        if len(pl) != 2:
            raise FormError(f"{what} entry must be (name type)", pl.pos)
        params.append((_expect_symbol(pl[0], "parameter name").text, _parse_type(pl[1])))
    return params


def parse_expr(form: SExpr) -> Expr:
    if isinstance(form, IntegerAtom):
        return IntLit(form.value, form.pos)
    if isinstance(form, FloatAtom):
        return FloatLit(form.value, form.pos)
    if isinstance(form, StringAtom):
        return StrLit(form.value, form.pos)
    if isinstance(form, Symbol):
        return VarRef(form.text, form.pos)
    _check_not_macro(form)
    lst = _expect_list(form, "expression")
    if not lst.items:
        raise FormError("empty list is not an expression", lst.pos)
    head = _expect_symbol(lst[0], "expression opcode")
    op = head.text
    args = lst.items[1:]
    if op in INT_ARITH_OPS + FLOAT_ARITH_OPS + COMPARE_OPS:
        if len(args) != 2:
            raise FormError(f"{op} takes 2 operands, got {len(args)}", lst.pos)
        return BinOp(op, parse_expr(args[0]), parse_expr(args[1]), lst.pos)
    if op == "load":
        if len(args) != 1:
            raise FormError("load takes 1 operand", lst.pos)
        return Load(parse_expr(args[0]), lst.pos)
    if op in CAST_OPS:
        if len(args) != 2:
            raise FormError(f"{op} takes a value and a target type", lst.pos)
        return Cast(op, parse_expr(args[0]), _parse_type(args[1]), lst.pos)
    if op == "call":
        if not args:
            raise FormError("call needs a function name", lst.pos)
        name = _expect_symbol(args[0], "called function name")
        return CallExpr(name.text, [parse_expr(a) for a in args[1:]], lst.pos)
    if op == "ptr-to":
        if len(args) != 1:
            raise FormError("ptr-to takes a variable name", lst.pos)
        return PtrTo(_expect_symbol(args[0], "ptr-to operand").text, lst.pos)
    raise FormError(f"unknown expression opcode '{op}'", lst.pos)


def parse_stmt(form: SExpr) -> Stmt:
    _check_not_macro(form)
    lst = _expect_list(form, "statement")
    if not lst.items:
        raise FormError("empty list is not a statement", lst.pos)
    head = _expect_symbol(lst[0], "statement head")
    op = head.text
    args = lst.items[1:]
    if op == "declare":
        if len(args) != 2:
            raise FormError("declare takes a name and a type", lst.pos)
        return Declare(_expect_symbol(args[0], "declared name").text, _parse_type(args[1]), lst.pos)
    if op == "set":
        if len(args) != 2:
            raise FormError("set takes a name and a value", lst.pos)
        return SetStmt(_expect_symbol(args[0], "set target").text, parse_expr(args[1]), lst.pos)
    if op == "store":
        if len(args) != 2:
            raise FormError("store takes a pointer and a value", lst.pos)
        return StoreStmt(parse_expr(args[0]), parse_expr(args[1]), lst.pos)
    if op == "call":
        call = parse_expr(lst)
        assert isinstance(call, CallExpr)
        return CallStmt(call, lst.pos)
    if op == "ret":
        if len(args) > 1:
            raise FormError("ret takes at most one value", lst.pos)
        return RetStmt(parse_expr(args[0]) if args else None, lst.pos)
    if op == "if":
        if len(args) not in (2, 3):
            raise FormError("if takes a condition, a then-statement and an optional else-statement", lst.pos)
        orelse = [parse_stmt(args[2])] if len(args) == 3 else None
        return IfStmt(parse_expr(args[0]), [parse_stmt(args[1])], orelse, lst.pos)
    if op == "while":
        if not args:
            raise FormError("while takes a condition", lst.pos)
        return WhileStmt(parse_expr(args[0]), [parse_stmt(s) for s in args[1:]], lst.pos)
    if op == "block":
        return BlockStmt([parse_stmt(s) for s in args], lst.pos)
    if op in _MACRO_HEADS:
        raise FormError(f"unexpanded macro expression ({op} ...); run expansion first", lst.pos)
    raise FormError(f"unknown statement head '{op}'", lst.pos)


def _parse_define(form: SList) -> FunctionDef:
    if len(form) < 2:
        raise FormError("define needs a header list", form.pos)
    header = _expect_list(form[1], "define header")
    if not header.items:
        raise FormError("define header must start with (name return-type)", header.pos)
    name_ret = _expect_list(header[0], "function name and return type")
    if len(name_ret) != 2:
        raise FormError("function header must be (name return-type)", name_ret.pos)
    name = _expect_symbol(name_ret[0], "function name")
    ret = _parse_type(name_ret[1])
    params = []
    for p in header.items[1:]:
        pl = _expect_list(p, "parameter")
        if len(pl) != 2:
            raise FormError("parameter must be (name type)", pl.pos)
        params.append((_expect_symbol(pl[0], "parameter name").text, _parse_type(pl[1])))
    body = [parse_stmt(s) for s in form.items[2:]]
    return FunctionDef(name.text, ret, params, body, form.pos)


def _parse_declare_fn(form: SList) -> FunctionSig:
    if len(form) != 4:
        raise FormError("declare-fn takes a name, a parameter list and a return type", form.pos)
    name = _expect_symbol(form[1], "external function name")
    params = _parse_param_list(form[2], "parameter list")
    ret = _parse_type(form[3])
    return FunctionSig(name.text, params, ret)


def _parse_struct(form: SList) -> StructDef:
    if len(form) < 2:
        raise FormError("struct needs a name", form.pos)
    name = _expect_symbol(form[1], "struct name")
    fields = []
    for f in form.items[2:]:
        fl = _expect_list(f, "struct field")
        if len(fl) != 2:
            raise FormError("struct field must be (name type)", fl.pos)
        fields.append((_expect_symbol(fl[0], "field name").text, _parse_type(fl[1])))
    return StructDef(name.text, fields, form.pos)


def parse_module(forms: Sequence[SExpr]) -> Module:
    """Parse fully expanded top-level forms into an untyped module."""
    module = Module()
    for form in forms:
        _check_not_macro(form)
        lst = _expect_list(form, "top-level form")
        if not lst.items:
            raise FormError("empty top-level form", lst.pos)
        head = _expect_symbol(lst[0], "top-level head")
        if head.text == "define":
            module.functions.append(_parse_define(lst))
        elif head.text == "declare-fn":
            module.externals.append(_parse_declare_fn(lst))
        elif head.text == "struct":
            module.structs.append(_parse_struct(lst))
        else:
            raise FormError(f"unknown top-level head '{head.text}'", lst.pos)
    return module


# --- Type checking -----------------------------------------------------


class _Checker:
    def __init__(self, module: Module):
        self.module = module
        self.issues: list[TypeIssue] = []
        self.structs: dict[str, StructDef] = {}
        self.sigs: dict[str, FunctionSig] = {}
        self.scopes: list[dict[str, CLispType]] = []
        self.current: Optional[FunctionDef] = None

    def issue(self, pos, message, expected=None, actual=None):
        self.issues.append(TypeIssue(pos, message, expected, actual))
        return _ERROR

    # -- module-level tables

    def collect(self):
        for struct in self.module.structs:
            if struct.name in self.structs:
                self.issue(struct.pos, f"duplicate struct '{struct.name}'")
                continue
            self.structs[struct.name] = struct
        for struct in self.module.structs:
            for fname, fty in struct.fields:
                self.check_field_type(struct, fname, fty)
        for sig in self.module.externals:
            if sig.name in self.sigs:
                self.issue(None, f"duplicate function '{sig.name}'")
                continue
            self.sigs[sig.name] = sig
            for pname, pty in sig.params:
                self.validate_type(pty, None, f"parameter '{pname}' of '{sig.name}'")
            self.validate_type(sig.ret, None, f"return type of '{sig.name}'", allow_void=True)
        for fn in self.module.functions:
            if fn.name in self.sigs:
                self.issue(fn.pos, f"duplicate function '{fn.name}'")
                continue
            self.sigs[fn.name] = fn.sig()

    def check_field_type(self, struct: StructDef, fname: str, fty: CLispType):
        # Direct struct fields must name an already-defined struct so sizes
        # stay finite; self-reference is fine behind a pointer.
        if isinstance(fty, Struct):
            defined_before = False
            for s in self.module.structs:
                if s is struct:
                    break
                if s.name == fty.name:
                    defined_before = True
                    break
            if not defined_before:
                self.issue(
                    struct.pos,
                    f"field '{fname}' of struct '{struct.name}' needs struct "
                    f"'{fty.name}' to be defined first",
                )
        elif isinstance(fty, Ptr):
            self.validate_type(fty, struct.pos, f"field '{fname}' of struct '{struct.name}'")
        elif fty == VOID:
            self.issue(struct.pos, f"field '{fname}' of struct '{struct.name}' cannot be void")

    def validate_type(self, ty: CLispType, pos, what: str, allow_void: bool = False):
        if isinstance(ty, Struct) and ty.name not in self.structs:
            self.issue(pos, f"unknown struct type '{ty.name}' in {what}")
        elif isinstance(ty, Ptr):
            if ty.pointee != VOID:
                self.validate_type(ty.pointee, pos, what)
        elif ty == VOID and not allow_void:
            self.issue(pos, f"{what} cannot be void")

    # -- scopes

    def lookup(self, name: str) -> CLispType | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    # -- expressions

    def type_of(self, expr: Expr) -> CLispType:
        ty = self._infer(expr)
        expr.ty = ty if not isinstance(ty, _ErrorType) else None
        return ty

    def _infer(self, expr: Expr) -> CLispType:
        if isinstance(expr, IntLit):
            return INT
        if isinstance(expr, FloatLit):
            return FLOAT64
        if isinstance(expr, StrLit):
            return Ptr(INT8)
        if isinstance(expr, VarRef):
            ty = self.lookup(expr.name)
            if ty is None:
                return self.issue(expr.pos, f"undeclared variable '{expr.name}'")
            return ty
        if isinstance(expr, BinOp):
            return self._infer_binop(expr)
        if isinstance(expr, Load):
            pt = self.type_of(expr.ptr)
            if isinstance(pt, _ErrorType):
                return _ERROR
            if not isinstance(pt, Ptr):
                return self.issue(expr.pos, f"load needs a pointer, got {format_type(pt)}", actual=pt)
            if pt.pointee == VOID:
                return self.issue(expr.pos, "cannot load through (ptr void)")
            return pt.pointee
        if isinstance(expr, Cast):
            return self._infer_cast(expr)
        if isinstance(expr, CallExpr):
            return self._infer_call(expr)
        if isinstance(expr, PtrTo):
            ty = self.lookup(expr.name)
            if ty is None:
                return self.issue(expr.pos, f"ptr-to of undeclared variable '{expr.name}'")
            return Ptr(ty)
        raise AssertionError(f"unhandled expression {expr!r}")

    def _infer_binop(self, expr: BinOp) -> CLispType:
        lt = self.type_of(expr.lhs)
        rt = self.type_of(expr.rhs)
        if isinstance(lt, _ErrorType) or isinstance(rt, _ErrorType):
            return _ERROR
        if expr.op in FLOAT_ARITH_OPS:
            if not is_float(lt):
                return self.issue(expr.pos, f"{expr.op} operates on floats, got {format_type(lt)}", actual=lt)
            if lt != rt:
                return self.issue(
                    expr.pos,
                    f"{expr.op} operands must have the same type: "
                    f"expected {format_type(lt)}, actual {format_type(rt)}",
                    expected=lt,
                    actual=rt,
                )
            return lt
        # Integer arithmetic and comparisons.
        if not is_integer(lt):
            return self.issue(expr.pos, f"{expr.op} operates on integers, got {format_type(lt)}", actual=lt)
        if lt != rt:
            return self.issue(
                expr.pos,
                f"{expr.op} operands must have the same type: "
                f"expected {format_type(lt)}, actual {format_type(rt)}",
                expected=lt,
                actual=rt,
            )
        return INT8 if expr.op in COMPARE_OPS else lt

    def _infer_cast(self, expr: Cast) -> CLispType:
        vt = self.type_of(expr.value)
        target = expr.target
        self.validate_type(target, expr.pos, f"{expr.op} target")
        if isinstance(vt, _ErrorType):
            return _ERROR
        if expr.op in ("sext", "trunc"):
            if not is_integer(vt) or not is_integer(target):
                return self.issue(
                    expr.pos,
                    f"{expr.op} converts between integer types, got "
                    f"{format_type(vt)} to {format_type(target)}",
                    expected=target,
                    actual=vt,
                )
            if expr.op == "sext" and int_width(target) <= int_width(vt):
                return self.issue(
                    expr.pos,
                    f"sext must widen: {format_type(vt)} to {format_type(target)}",
                    expected=target,
                    actual=vt,
                )
            if expr.op == "trunc" and int_width(target) >= int_width(vt):
                return self.issue(
                    expr.pos,
                    f"trunc must narrow: {format_type(vt)} to {format_type(target)}",
                    expected=target,
                    actual=vt,
                )
            return target
        if expr.op == "sitofp":
            if not is_integer(vt) or not is_float(target):
                return self.issue(
                    expr.pos,
                    f"sitofp converts integer to float, got {format_type(vt)} to {format_type(target)}",
                    expected=target,
                    actual=vt,
                )
            return target
        # fptosi
        if not is_float(vt) or not is_integer(target):
            return self.issue(
                expr.pos,
                f"fptosi converts float to integer, got {format_type(vt)} to {format_type(target)}",
                expected=target,
                actual=vt,
            )
        return target

    def _infer_call(self, expr: CallExpr) -> CLispType:
        sig = self.sigs.get(expr.name)
        if sig is None:
            return self.issue(expr.pos, f"call to unknown function '{expr.name}'")
        if len(expr.args) != len(sig.params):
            self.issue(
                expr.pos,
                f"'{expr.name}' takes {len(sig.params)} argument(s), got {len(expr.args)}",
            )
            for arg in expr.args:
                self.type_of(arg)
            return sig.ret
        for arg, (pname, pty) in zip(expr.args, sig.params):
            at = self.type_of(arg)
            if isinstance(at, _ErrorType):
                continue
            if not compatible(at, pty):
                self.issue(
                    arg.pos if arg.pos else expr.pos,
                    f"argument '{pname}' of '{expr.name}': expected "
                    f"{format_type(pty)}, actual {format_type(at)}",
                    expected=pty,
                    actual=at,
                )
        return sig.ret

    # -- statements

    def check_stmt(self, stmt: Stmt):
        if isinstance(stmt, Declare):
            if stmt.ty == VOID:
                self.issue(stmt.pos, f"cannot declare '{stmt.name}' with type void")
            else:
                self.validate_type(stmt.ty, stmt.pos, f"declaration of '{stmt.name}'")
            if self.lookup(stmt.name) is not None:
                self.issue(stmt.pos, f"'{stmt.name}' is already declared; shadowing is not allowed")
                return
            self.scopes[-1][stmt.name] = stmt.ty
        elif isinstance(stmt, SetStmt):
            vt = self.type_of(stmt.value)
            decl = self.lookup(stmt.name)
            if decl is None:
                self.issue(stmt.pos, f"set of undeclared variable '{stmt.name}'")
                return
            if not isinstance(vt, _ErrorType) and not compatible(vt, decl):
                self.issue(
                    stmt.pos,
                    f"set '{stmt.name}': expected {format_type(decl)}, actual {format_type(vt)}",
                    expected=decl,
                    actual=vt,
                )
        elif isinstance(stmt, StoreStmt):
            pt = self.type_of(stmt.ptr)
            vt = self.type_of(stmt.value)
            if isinstance(pt, _ErrorType):
                return
            if not isinstance(pt, Ptr):
                self.issue(stmt.pos, f"store needs a pointer, got {format_type(pt)}", actual=pt)
                return
            if pt.pointee == VOID:
                self.issue(stmt.pos, "cannot store through (ptr void)")
                return
            if not isinstance(vt, _ErrorType) and not compatible(vt, pt.pointee):
                self.issue(
                    stmt.pos,
                    f"store: expected {format_type(pt.pointee)}, actual {format_type(vt)}",
                    expected=pt.pointee,
                    actual=vt,
                )
        elif isinstance(stmt, CallStmt):
            self._infer_call(stmt.call)
            stmt.call.ty = self.sigs[stmt.call.name].ret if stmt.call.name in self.sigs else None
        elif isinstance(stmt, RetStmt):
            assert self.current is not None
            want = self.current.ret
            if want == VOID:
                if stmt.value is not None:
                    self.type_of(stmt.value)
                    self.issue(stmt.pos, f"void function '{self.current.name}' cannot return a value")
            else:
                if stmt.value is None:
                    self.issue(
                        stmt.pos,
                        f"'{self.current.name}' must return {format_type(want)}",
                        expected=want,
                    )
                    return
                vt = self.type_of(stmt.value)
                if not isinstance(vt, _ErrorType) and not compatible(vt, want):
                    self.issue(
                        stmt.pos,
                        f"ret: expected {format_type(want)}, actual {format_type(vt)}",
                        expected=want,
                        actual=vt,
                    )
        elif isinstance(stmt, IfStmt):
            self._check_cond(stmt.cond, "if")
            self._check_block(stmt.then)
            if stmt.orelse is not None:
                self._check_block(stmt.orelse)
        elif isinstance(stmt, WhileStmt):
            self._check_cond(stmt.cond, "while")
            self._check_block(stmt.body)
        elif isinstance(stmt, BlockStmt):
            self._check_block(stmt.body)
        else:
            raise AssertionError(f"unhandled statement {stmt!r}")

    def _check_cond(self, cond: Expr, what: str):
        ct = self.type_of(cond)
        if not isinstance(ct, _ErrorType) and ct != INT8:
            self.issue(
                cond.pos,
                f"{what} condition must be int8, got {format_type(ct)}",
                expected=INT8,
                actual=ct,
            )

    def _check_block(self, stmts: list[Stmt]):
        self.scopes.append({})
        for s in stmts:
            self.check_stmt(s)
        self.scopes.pop()

    def check_function(self, fn: FunctionDef):
        self.current = fn
        self.validate_type(fn.ret, fn.pos, f"return type of '{fn.name}'", allow_void=True)
        scope: dict[str, CLispType] = {}
        for pname, pty in fn.params:
            if pty == VOID:
                self.issue(fn.pos, f"parameter '{pname}' of '{fn.name}' cannot be void")
            else:
                self.validate_type(pty, fn.pos, f"parameter '{pname}' of '{fn.name}'")
            if pname in scope:
                self.issue(fn.pos, f"duplicate parameter '{pname}' in '{fn.name}'")
            scope[pname] = pty
        self.scopes = [scope]
        for stmt in fn.body:
            self.check_stmt(stmt)
        self.scopes = []
        self.current = None

    def run(self) -> Module:
        self.collect()
        for fn in self.module.functions:
            self.check_function(fn)
        if self.issues:
            raise TypeCheckError(self.issues)
        return self.module


def typecheck(module: Module) -> TypedModule:
    """Annotate every expression with its type; raise TypeCheckError listing
    every violation otherwise."""
    return _Checker(module).run()
