"""Textual LLVM IR generation from a typechecked module.

Lowering is deliberately naive: every variable is a stack slot in the entry
block, every reference is a load, and cleanups are left to the external
toolchain's optimizer.  Pointers are emitted opaque (``ptr``); pointee types
exist only in the C-Lisp type system.  Output is deterministic text.
"""

from __future__ import annotations

import struct as _struct
from dataclasses import dataclass, field

from .frontend import (
    BinOp,
    BlockStmt,
    CallExpr,
    CallStmt,
    Cast,
    COMPARE_OPS,
    Declare,
    FloatLit,
    FunctionDef,
    IfStmt,
    IntLit,
    Load,
    Module,
    PtrTo,
    RetStmt,
    SetStmt,
    StoreStmt,
    StrLit,
    TypedModule,
    VarRef,
    WhileStmt,
)
from .types import CLispType, INT, Ptr, Struct, VOID

_SCALARS = {
    "void": "void",
    "int8": "i8",
    "int": "i32",
    "int64": "i64",
    "float32": "float",
    "float64": "double",
}

_CAST_INSTR = {"sext": "sext", "trunc": "trunc", "sitofp": "sitofp", "fptosi": "fptosi"}


class EmitError(Exception):
    pass


@dataclass
class IRModuleText:
    text: str
    symbols: list[str] = field(default_factory=list)


def llvm_type(t: CLispType) -> str:
    if isinstance(t, Ptr):
        return "ptr"
    if isinstance(t, Struct):
        return f"%{t.name}"
    from .types import format_type

    return _SCALARS[format_type(t)]


def _float_literal(value: float) -> str:
    # Hex form of the IEEE-754 double bits; always exact for the IR parser.
    bits = _struct.unpack("<Q", _struct.pack("<d", value))[0]
    return f"0x{bits:016X}"


def _escape_bytes(data: bytes) -> str:
    out = []
    for b in data:
        c = chr(b)
        if 0x20 <= b <= 0x7E and c not in ('"', "\\"):
            out.append(c)
        else:
            out.append(f"\\{b:02X}")
    return "".join(out)


class _ModuleEmitter:
    def __init__(self, module: TypedModule):
        self.module = module
        self.strings: dict[str, str] = {}  # text -> global name, first-use order
        self.used_externals: set[str] = set()
        self.defined = {fn.name for fn in module.functions}

    def string_global(self, text: str) -> str:
        if text not in self.strings:
            self.strings[text] = f"@.str.{len(self.strings)}"
        return self.strings[text]

    def emit(self) -> IRModuleText:
        fn_texts = [_FunctionEmitter(self, fn).emit() for fn in self.module.functions]
        sections: list[str] = []
        struct_lines = [
            f"%{s.name} = type {{ {', '.join(llvm_type(t) for _, t in s.fields)} }}"
            if s.fields
            else f"%{s.name} = type {{}}"
            for s in self.module.structs
        ]
        if struct_lines:
            sections.append("\n".join(struct_lines))
        string_lines = []
        for text, name in self.strings.items():
            data = text.encode("utf-8") + b"\x00"
            string_lines.append(
                f"{name} = private unnamed_addr constant [{len(data)} x i8] "
                f'c"{_escape_bytes(data)}"'
            )
        if string_lines:
            sections.append("\n".join(string_lines))
        symbols = []
        declare_lines = []
        for sig in self.module.externals:
            if sig.name not in self.used_externals:
                continue
            params = ", ".join(llvm_type(t) for _, t in sig.params)
            declare_lines.append(f"declare {llvm_type(sig.ret)} @{sig.name}({params})")
            symbols.append(sig.name)
        if declare_lines:
            sections.append("\n".join(declare_lines))
        sections.extend(fn_texts)
        symbols.extend(fn.name for fn in self.module.functions)
        return IRModuleText("\n\n".join(sections) + "\n", symbols)


class _FunctionEmitter:
    def __init__(self, mod: _ModuleEmitter, fn: FunctionDef):
        self.mod = mod
        self.fn = fn
        self.alloca_lines: list[str] = []
        self.prologue: list[str] = []
        self.lines: list[str] = []
        self.scopes: list[dict[str, tuple[str, CLispType]]] = []
        self.slot_names: set[str] = set()
        self.reg_count = 0
        self.label_count = 0
        self.terminated = False

    def fail(self, message: str):
        raise EmitError(f"internal error in function '{self.fn.name}': {message}")

    def fresh_reg(self) -> str:
        reg = f"%t{self.reg_count}"
        self.reg_count += 1
        return reg

    def fresh_construct(self) -> int:
        self.label_count += 1
        return self.label_count

    def new_slot(self, name: str, ty: CLispType) -> str:
        base = f"{name}.addr"
        slot = base
        n = 1
        while slot in self.slot_names:
            n += 1
            slot = f"{base}.{n}"
        self.slot_names.add(slot)
        self.alloca_lines.append(f"  %{slot} = alloca {llvm_type(ty)}")
        self.scopes[-1][name] = (f"%{slot}", ty)
        return f"%{slot}"

    def slot_of(self, name: str) -> tuple[str, CLispType]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        self.fail(f"no stack slot for '{name}'")
        raise AssertionError  # unreachable

    def line(self, text: str):
        self.lines.append(f"  {text}")

    def place_label(self, label: str):
        self.lines.append(f"{label}:")
        self.terminated = False

    def ensure_live_block(self):
        # Code after a terminator goes into a fresh (unreachable) block so
        # the function stays well formed.
        if self.terminated:
            self.place_label(f"dead.{self.fresh_construct()}")

    # -- expressions: return the operand text; types come from annotations

    def ty_of(self, expr) -> CLispType:
        if expr.ty is None:
            self.fail(f"expression without a type annotation: {expr!r}")
        return expr.ty

    def emit_expr(self, expr) -> str:
        if isinstance(expr, IntLit):
            return str(expr.value)
        if isinstance(expr, FloatLit):
            return _float_literal(expr.value)
        if isinstance(expr, StrLit):
            return self.mod.string_global(expr.value)
        if isinstance(expr, VarRef):
            slot, ty = self.slot_of(expr.name)
            reg = self.fresh_reg()
            self.line(f"{reg} = load {llvm_type(ty)}, ptr {slot}")
            return reg
        if isinstance(expr, BinOp):
            lhs = self.emit_expr(expr.lhs)
            rhs = self.emit_expr(expr.rhs)
            opty = llvm_type(self.ty_of(expr.lhs))
            if expr.op in COMPARE_OPS:
                cmp_reg = self.fresh_reg()
                self.line(f"{cmp_reg} = icmp {expr.op} {opty} {lhs}, {rhs}")
                reg = self.fresh_reg()
                self.line(f"{reg} = zext i1 {cmp_reg} to i8")
                return reg
            reg = self.fresh_reg()
            self.line(f"{reg} = {expr.op} {opty} {lhs}, {rhs}")
            return reg
        if isinstance(expr, Load):
            ptr = self.emit_expr(expr.ptr)
            reg = self.fresh_reg()
            self.line(f"{reg} = load {llvm_type(self.ty_of(expr))}, ptr {ptr}")
            return reg
        if isinstance(expr, Cast):
            value = self.emit_expr(expr.value)
            reg = self.fresh_reg()
            from_ty = llvm_type(self.ty_of(expr.value))
            to_ty = llvm_type(expr.target)
            self.line(f"{reg} = {_CAST_INSTR[expr.op]} {from_ty} {value} to {to_ty}")
            return reg
        if isinstance(expr, CallExpr):
            return self.emit_call(expr)
        if isinstance(expr, PtrTo):
            slot, _ = self.slot_of(expr.name)
            return slot
        self.fail(f"unhandled expression {expr!r}")
        raise AssertionError

    def emit_call(self, call: CallExpr) -> str:
        args = []
        for arg in call.args:
            operand = self.emit_expr(arg)
            args.append(f"{llvm_type(self.ty_of(arg))} {operand}")
        if call.name not in self.mod.defined:
            self.mod.used_externals.add(call.name)
        ret = self.ty_of(call)
        if ret == VOID:
            self.line(f"call void @{call.name}({', '.join(args)})")
            return ""
        reg = self.fresh_reg()
        self.line(f"{reg} = call {llvm_type(ret)} @{call.name}({', '.join(args)})")
        return reg

    # -- statements

    def emit_stmt(self, stmt):
        self.ensure_live_block()
        if isinstance(stmt, Declare):
            self.new_slot(stmt.name, stmt.ty)
        elif isinstance(stmt, SetStmt):
            value = self.emit_expr(stmt.value)
            slot, ty = self.slot_of(stmt.name)
            self.line(f"store {llvm_type(ty)} {value}, ptr {slot}")
        elif isinstance(stmt, StoreStmt):
            ptr = self.emit_expr(stmt.ptr)
            value = self.emit_expr(stmt.value)
            self.line(f"store {llvm_type(self.ty_of(stmt.value))} {value}, ptr {ptr}")
        elif isinstance(stmt, CallStmt):
            self.emit_call(stmt.call)
        elif isinstance(stmt, RetStmt):
            if stmt.value is None:
                self.line("ret void")
            else:
                value = self.emit_expr(stmt.value)
                self.line(f"ret {llvm_type(self.ty_of(stmt.value))} {value}")
            self.terminated = True
        elif isinstance(stmt, IfStmt):
            self.emit_if(stmt)
        elif isinstance(stmt, WhileStmt):
            self.emit_while(stmt)
        elif isinstance(stmt, BlockStmt):
            self.scopes.append({})
            for s in stmt.body:
                self.emit_stmt(s)
            self.scopes.pop()
        else:
            self.fail(f"unhandled statement {stmt!r}")

    def emit_condition(self, cond) -> str:
        operand = self.emit_expr(cond)
        reg = self.fresh_reg()
        self.line(f"{reg} = icmp ne i8 {operand}, 0")
        return reg

    def emit_if(self, stmt: IfStmt):
        n = self.fresh_construct()
        then_label = f"if.then.{n}"
        else_label = f"if.else.{n}" if stmt.orelse is not None else None
        end_label = f"if.end.{n}"
        cond = self.emit_condition(stmt.cond)
        self.line(f"br i1 {cond}, label %{then_label}, label %{else_label or end_label}")
        self.place_label(then_label)
        self.scopes.append({})
        for s in stmt.then:
            self.emit_stmt(s)
        self.scopes.pop()
        if not self.terminated:
            self.line(f"br label %{end_label}")
        if stmt.orelse is not None:
            self.place_label(else_label)
            self.scopes.append({})
            for s in stmt.orelse:
                self.emit_stmt(s)
            self.scopes.pop()
            if not self.terminated:
                self.line(f"br label %{end_label}")
        self.place_label(end_label)

    def emit_while(self, stmt: WhileStmt):
        n = self.fresh_construct()
        cond_label = f"while.cond.{n}"
        body_label = f"while.body.{n}"
        end_label = f"while.end.{n}"
        self.line(f"br label %{cond_label}")
        self.place_label(cond_label)
        cond = self.emit_condition(stmt.cond)
        self.line(f"br i1 {cond}, label %{body_label}, label %{end_label}")
        self.place_label(body_label)
        self.scopes.append({})
        for s in stmt.body:
            self.emit_stmt(s)
        self.scopes.pop()
        if not self.terminated:
            self.line(f"br label %{cond_label}")
        self.place_label(end_label)

    def emit(self) -> str:
        fn = self.fn
        params = ", ".join(f"{llvm_type(ty)} %{name}" for name, ty in fn.params)
        header = f"define {llvm_type(fn.ret)} @{fn.name}({params}) {{"
        self.scopes = [{}]
        for name, ty in fn.params:
            slot = self.new_slot(name, ty)
            self.prologue.append(f"  store {llvm_type(ty)} %{name}, ptr {slot}")
        for stmt in fn.body:
            self.emit_stmt(stmt)
        if not self.terminated:
            if fn.ret == VOID:
                self.line("ret void")
            else:
                # Falling off the end of a value-returning function.
                self.line("unreachable")
        body = "\n".join(["entry:"] + self.alloca_lines + self.prologue + self.lines)
        return f"{header}\n{body}\n}}"


def emit(module: TypedModule) -> IRModuleText:
    """Lower a typechecked module to textual LLVM IR."""
    return _ModuleEmitter(module).emit()


def emit_entry_shim(main_fn: str, module: Module) -> IRModuleText:
    """A ``main`` wrapper calling ``main_fn``, which must be () -> int."""
    target = next((fn for fn in module.functions if fn.name == main_fn), None)
    if target is None:
        raise EmitError(f"no such function '{main_fn}'")
    if target.params:
        raise EmitError(f"entry function '{main_fn}' must take no parameters")
    if target.ret != INT:
        raise EmitError(f"entry function '{main_fn}' must return int")
    text = (
        "define i32 @main() {\n"
        "entry:\n"
        f"  %ret = call i32 @{main_fn}()\n"
        "  ret i32 %ret\n"
        "}\n"
    )
    return IRModuleText(text, ["main"])
