"""C-Lisp compiler toolchain.

Three layers: S-expression trees with a JSON interchange form, the Prelisp
macro expander, and the C-Lisp language lowered to textual LLVM IR, plus a
binding generator that turns C headers into declare-fn forms.
"""

from .sexpr import (
    Float,
    Integer,
    Json,
    JsonError,
    ParseError,
    SExpr,
    SList,
    SourcePosition,
    String,
    Symbol,
    from_json,
    parse_sexprs,
    print_sexpr,
    to_json,
)
from .prelisp import (
    MacroError,
    MacroExpr,
    MacroResolver,
    MappingResolver,
    SpliceError,
    UnresolvedMacroError,
    expand,
    scan_macros,
)
from .frontend import (
    FormError,
    FunctionDef,
    FunctionSig,
    Module,
    StructDef,
    TypeCheckError,
    TypedModule,
    TypeIssue,
    parse_module,
    typecheck,
)
from .emitter import EmitError, IRModuleText, emit, emit_entry_shim
from .bindgen import Binding, BindingSession, BindRequest, BindgenError, ProbeArtifacts
from .toolchain import Toolchain, ToolchainError

__version__ = "0.1.0"

__all__ = [
    "Binding",
    "BindingSession",
    "BindRequest",
    "BindgenError",
    "EmitError",
    "Float",
    "FormError",
    "FunctionDef",
    "FunctionSig",
    "Integer",
    "IRModuleText",
    "Json",
    "JsonError",
    "MacroError",
    "MacroExpr",
    "MacroResolver",
    "MappingResolver",
    "Module",
    "ParseError",
    "ProbeArtifacts",
    "SExpr",
    "SList",
    "SourcePosition",
    "SpliceError",
    "String",
    "StructDef",
    "Symbol",
    "Toolchain",
    "ToolchainError",
    "TypeCheckError",
    "TypedModule",
    "TypeIssue",
    "UnresolvedMacroError",
    "emit",
    "emit_entry_shim",
    "expand",
    "from_json",
    "parse_module",
    "parse_sexprs",
    "print_sexpr",
    "scan_macros",
    "to_json",
    "typecheck",
]
