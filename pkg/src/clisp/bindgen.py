"""C header binding generation through an external C frontend.

Rather than parse C, we generate a tiny probe program that uses the
requested names, run the configured C frontend over it twice (once for
LLVM IR, once for its JSON AST dump), and scrape both artifacts: the IR is
authoritative for types, the AST contributes typedef aliases and parameter
names.  The result is a set of ``declare-fn``/``struct`` forms ready to be
spliced into a program, which is exactly what the ``include`` macro does.
"""

from __future__ import annotations

import json
import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .frontend import FunctionSig, StructDef
from .prelisp import MacroError, UnresolvedMacroError
from .sexpr import Json, to_json
from .types import (
    CLispType,
    FLOAT32,
    FLOAT64,
    INT,
    INT64,
    INT8,
    Ptr,
    Struct,
    VOID,
    type_to_form,
)

ENV_CC = "CLISP_CC"


class BindgenError(Exception):
    """Pipeline failure; ``stage`` names the step that produced it."""

    def __init__(self, message: str, stage: str = "bindgen"):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class FrontendNotFoundError(BindgenError):
    def __init__(self, cc: str):
        super().__init__(
            f"C frontend '{cc}' not found; pass --cc or set ${ENV_CC}", stage="config"
        )


@dataclass
class BindRequest:
    headers: list[str]
    functions: list[str] = field(default_factory=list)
    structs: list[str] = field(default_factory=list)
    typedefs: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.headers:
            raise BindgenError("at least one header is required", stage="request")


@dataclass
class ProbeArtifacts:
    ir_text: str
    ast_json: str


@dataclass
class Binding:
    signatures: list[FunctionSig]
    struct_defs: list[StructDef]
    aliases: dict[str, CLispType]


def _dedupe(names) -> list[str]:
    return list(dict.fromkeys(names))


def generate_probe(request: BindRequest) -> str:
    """C source that forces the frontend to materialize every requested name."""
    lines = [f'#include "{h}"' for h in _dedupe(request.headers)]
    lines.append("")
    lines.append("void _clisp_probe(void) {")
    for i, fn in enumerate(_dedupe(request.functions)):
        lines.append(f"    void * volatile fn_addr_{i} = (void *)&{fn};")
        lines.append(f"    (void)fn_addr_{i};")
    for i, st in enumerate(_dedupe(request.structs)):
        lines.append(f"    struct {st} struct_var_{i};")
        lines.append(f"    (void)struct_var_{i};")
    for i, td in enumerate(_dedupe(request.typedefs)):
        lines.append(f"    {td} typedef_var_{i};")
        lines.append(f"    (void)typedef_var_{i};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def resolve_cc(flag_value: str | None = None) -> str:
    cc = flag_value or os.environ.get(ENV_CC) or "clang"
    if shutil.which(cc) is None:
        raise FrontendNotFoundError(cc)
    return cc


def run_frontend(
    probe_source: str,
    include_paths: list[str] | tuple = (),
    cc: str | None = None,
) -> ProbeArtifacts:
    """Run the C frontend twice over the probe: IR emission and AST dump.

    The scratch directory is removed on success and kept (and named in the
    error) when the frontend rejects the probe.
    """
    cc = resolve_cc(cc)
    scratch = Path(tempfile.mkdtemp(prefix="clisp-bindgen-"))
    probe_c = scratch / "probe.c"
    probe_ll = scratch / "probe.ll"
    probe_c.write_text(probe_source)
    inc = [arg for p in include_paths for arg in ("-I", str(p))]

    ir_cmd = [cc, "-S", "-emit-llvm", "-O0", *inc, "-o", str(probe_ll), str(probe_c)]
    proc = subprocess.run(ir_cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise BindgenError(
            f"C frontend failed; probe kept at {scratch}\n{proc.stderr}", stage="frontend"
        )
    ast_cmd = [cc, "-Xclang", "-ast-dump=json", "-fsyntax-only", *inc, str(probe_c)]
    proc = subprocess.run(ast_cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise BindgenError(
            f"C frontend AST dump failed; probe kept at {scratch}\n{proc.stderr}",
            stage="frontend",
        )
    artifacts = ProbeArtifacts(probe_ll.read_text(), proc.stdout)
    shutil.rmtree(scratch, ignore_errors=True)
    return artifacts


# --- IR scraping ---------------------------------------------------------

_SCALAR_IR = {
    "void": VOID,
    "i8": INT8,
    "i32": INT,
    "i64": INT64,
    "float": FLOAT32,
    "double": FLOAT64,
}

_FN_LINE_RE = re.compile(r"^\s*(declare|define)\s+(.*)$")
_FN_NAME_RE = re.compile(r'@"?([A-Za-z0-9_.$]+)"?\s*\(')
_STRUCT_LINE_RE = re.compile(r"^%(?:struct\.)?([A-Za-z0-9_.$]+)\s*=\s*type\s+(.*)$")


def _ir_value_type(token: str, where: str) -> CLispType:
    """Map one IR type token to a C-Lisp type; pointers collapse to (ptr void)."""
    if token == "ptr" or token.endswith("*"):
        return Ptr(VOID)
    if token in _SCALAR_IR:
        return _SCALAR_IR[token]
    raise BindgenError(f"unmappable IR type '{token}' in {where}", stage="ir")


def _struct_field_type(token: str, where: str) -> CLispType:
    if token.endswith("*") or token == "ptr":
        return Ptr(VOID)
    if token in _SCALAR_IR and token != "void":
        return _SCALAR_IR[token]
    m = re.fullmatch(r"%(?:struct\.)?([A-Za-z0-9_.$]+)", token)
    if m:
        return Struct(m.group(1))
    raise BindgenError(f"unmappable IR type '{token}' in {where}", stage="ir")


def _split_top_level(text: str) -> list[str]:
    parts, depth, current = [], 0, []
    for c in text:
        if c in "([{<":
            depth += 1
        elif c in ")]}>":
            depth -= 1
        if c == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(c)
    tail = "".join(current).strip()
    if tail:
        parts.append(tail)
    return parts


_IR_ATTR_WORDS = {
    "dso_local", "dso_preemptable", "hidden", "protected", "default",
    "internal", "private", "external", "weak", "linkonce", "linkonce_odr",
    "weak_odr", "common", "appending", "extern_weak", "available_externally",
    "noundef", "signext", "zeroext", "inreg", "noalias", "nonnull",
    "nocapture", "readonly", "writeonly", "returned", "immarg",
}


def _parse_fn_line(rest: str, name: str) -> FunctionSig:
    nm = _FN_NAME_RE.search(rest)
    assert nm is not None
    where = f"function '{name}'"
    # Return type: the first token before @name that is not linkage or
    # attribute noise; it has to map, or the line is out of scope.
    ret = None
    for token in rest[: nm.start()].split():
        if token in _IR_ATTR_WORDS or token.endswith("cc"):
            continue
        ret = _ir_value_type(token, where)
        break
    if ret is None:
        raise BindgenError(f"could not read a return type for {where}", stage="ir")
    # Parameter list: the balanced parenthesized segment after the name.
    start = rest.index("(", nm.start())
    depth, end = 0, None
    for i in range(start, len(rest)):
        if rest[i] == "(":
            depth += 1
        elif rest[i] == ")":
            depth -= 1
            if depth == 0:
                end = i
                break
    if end is None:
        raise BindgenError(f"unbalanced parameter list for {where}", stage="ir")
    params: list[tuple[str, CLispType]] = []
    for i, part in enumerate(_split_top_level(rest[start + 1 : end])):
        if not part:
            continue
        if part == "...":
            raise BindgenError(f"{where} is variadic, which is out of scope", stage="ir")
        if "byval" in part.split():
            raise BindgenError(f"{where} passes a struct by value, which is out of scope", stage="ir")
        type_token = part.split()[0]
        if type_token.startswith("[") or type_token.startswith("<"):
            raise BindgenError(f"unmappable IR type '{type_token}' in {where}", stage="ir")
        params.append((f"arg{i}", _ir_value_type(type_token, where)))
    return FunctionSig(name, params, ret)


def parse_ir_signatures(ir_text: str, request: BindRequest) -> tuple[list[FunctionSig], list[StructDef]]:
    """Scrape requested function signatures and struct layouts out of IR text."""
    wanted_fns = _dedupe(request.functions)
    wanted_structs = _dedupe(request.structs)
    sig_by_name: dict[str, FunctionSig] = {}
    struct_by_name: dict[str, StructDef] = {}
    for line in ir_text.splitlines():
        fn_match = _FN_LINE_RE.match(line)
        if fn_match:
            nm = _FN_NAME_RE.search(fn_match.group(2))
            if nm and nm.group(1) in wanted_fns and nm.group(1) not in sig_by_name:
                sig_by_name[nm.group(1)] = _parse_fn_line(fn_match.group(2), nm.group(1))
            continue
        st_match = _STRUCT_LINE_RE.match(line)
        if st_match and st_match.group(1) in wanted_structs:
            name, body = st_match.group(1), st_match.group(2).strip()
            if body == "opaque":
                raise BindgenError(f"struct '{name}' has no definition in the probe IR", stage="ir")
            if body.startswith("<"):
                raise BindgenError(f"struct '{name}' is packed, which is out of scope", stage="ir")
            inner = body.strip("{}").strip()
            fields = [
                (f"field{i}", _struct_field_type(tok, f"struct '{name}'"))
                for i, tok in enumerate(_split_top_level(inner))
                if tok
            ]
            struct_by_name[name] = StructDef(name, fields)
    missing = [n for n in wanted_fns if n not in sig_by_name]
    missing += [n for n in wanted_structs if n not in struct_by_name]
    if missing:
        raise BindgenError(f"missing from probe IR: {', '.join(missing)}", stage="ir")
    return (
        [sig_by_name[n] for n in wanted_fns],
        [struct_by_name[n] for n in wanted_structs],
    )


# --- AST scraping --------------------------------------------------------

_C_BASE_TYPES = {
    "void": VOID,
    "char": INT8,
    "signed char": INT8,
    "unsigned char": INT8,
    "int": INT,
    "signed int": INT,
    "unsigned int": INT,
    "signed": INT,
    "unsigned": INT,
    "long": INT64,
    "long int": INT64,
    "unsigned long": INT64,
    "unsigned long int": INT64,
    "long long": INT64,
    "long long int": INT64,
    "unsigned long long": INT64,
    "unsigned long long int": INT64,
    "float": FLOAT32,
    "double": FLOAT64,
}


def _walk_ast(node, typedefs: dict[str, str], fn_params: dict[str, list[str | None]], wanted_fns):
    if not isinstance(node, dict):
        return
    kind = node.get("kind")
    if kind == "TypedefDecl" and "name" in node:
        ty = node.get("type", {})
        typedefs[node["name"]] = ty.get("desugaredQualType") or ty.get("qualType", "")
    elif kind == "FunctionDecl" and node.get("name") in wanted_fns:
        names = [
            child.get("name")
            for child in node.get("inner", [])
            if isinstance(child, dict) and child.get("kind") == "ParmVarDecl"
        ]
        # Redeclarations are common; prefer the one that actually names things.
        if node["name"] not in fn_params or any(names):
            fn_params[node["name"]] = names
    for child in node.get("inner", []):
        _walk_ast(child, typedefs, fn_params, wanted_fns)


def _parse_c_type(text: str, known_structs: set[str], what: str) -> CLispType:
    text = text.strip()
    if text.endswith("]"):
        raise BindgenError(f"{what} is an array type ('{text}'), which is out of scope", stage="ast")
    if "(" in text:
        raise BindgenError(f"{what} is a function type ('{text}'), which is out of scope", stage="ast")
    stars = 0
    while text.endswith("*"):
        stars += 1
        text = text[:-1].rstrip()
    words = [w for w in text.split() if w not in ("const", "volatile", "restrict")]
    base = " ".join(words)
    result: CLispType
    if base in _C_BASE_TYPES:
        result = _C_BASE_TYPES[base]
    elif words and words[0] == "enum":
        result = INT
    elif words and words[0] == "struct" and len(words) == 2:
        tag = words[1]
        if tag in known_structs:
            result = Struct(tag)
        elif stars > 0:
            # Opaque handle: pointer to a struct we know nothing about.
            return _wrap_ptr(Ptr(VOID), stars - 1)
        else:
            raise BindgenError(f"{what} names struct '{tag}' with no extracted layout", stage="ast")
    else:
        raise BindgenError(f"{what} has unsupported C type '{base}'", stage="ast")
    if result == VOID and stars == 0:
        raise BindgenError(f"{what} resolves to plain void", stage="ast")
    return _wrap_ptr(result, stars)


def _wrap_ptr(t: CLispType, stars: int) -> CLispType:
    for _ in range(stars):
        t = Ptr(t)
    return t


def parse_ast_metadata(
    ast_json: str,
    request: BindRequest,
    known_structs: set[str] | None = None,
) -> tuple[dict[str, CLispType], dict[str, list[str | None]]]:
    """Extract requested typedef aliases and function parameter names."""
    try:
        root = json.loads(ast_json)
    except json.JSONDecodeError as exc:
        raise BindgenError(f"frontend AST dump is not valid JSON: {exc}", stage="ast") from None
    typedef_texts: dict[str, str] = {}
    fn_params: dict[str, list[str | None]] = {}
    _walk_ast(root, typedef_texts, fn_params, set(request.functions))
    known = known_structs or set()
    aliases: dict[str, CLispType] = {}
    missing = []
    for name in _dedupe(request.typedefs):
        if name not in typedef_texts:
            missing.append(name)
            continue
        # Chase alias-to-alias chains the dump did not desugar for us.
        text, seen = typedef_texts[name], {name}
        while text in typedef_texts and text not in seen:
            seen.add(text)
            text = typedef_texts[text]
        aliases[name] = _parse_c_type(text, known, f"typedef '{name}'")
    if missing:
        raise BindgenError(f"missing typedefs in the AST dump: {', '.join(missing)}", stage="ast")
    return aliases, fn_params


# --- Composition ---------------------------------------------------------


def _absolutize_headers(headers) -> list[str]:
    out = []
    for h in headers:
        out.append(os.path.abspath(h) if os.path.exists(h) else h)
    return out


def bind(request: BindRequest, cc: str | None = None, include_paths=()) -> Binding:
    """Full pipeline: probe, frontend, IR scrape, AST scrape, merge."""
    request = BindRequest(
        _absolutize_headers(request.headers),
        list(request.functions),
        list(request.structs),
        list(request.typedefs),
    )
    probe = generate_probe(request)
    artifacts = run_frontend(probe, include_paths, cc)
    signatures, struct_defs = parse_ir_signatures(artifacts.ir_text, request)
    aliases, fn_params = parse_ast_metadata(
        artifacts.ast_json, request, {s.name for s in struct_defs}
    )
    for sig in signatures:
        names = fn_params.get(sig.name, [])
        if len(names) == len(sig.params):
            sig.params = [
                (ast_name or default_name, ty)
                for (default_name, ty), ast_name in zip(sig.params, names)
            ]
    return Binding(signatures, struct_defs, aliases)


def _type_json(t: CLispType) -> Json:
    return to_json(type_to_form(t))


def binding_to_forms(binding: Binding) -> list[Json]:
    """Render a binding as spliceable top-level forms (structs first)."""
    forms: list[Json] = []
    for s in binding.struct_defs:
        forms.append(["struct", s.name] + [[fname, _type_json(fty)] for fname, fty in s.fields])
    for sig in binding.signatures:
        forms.append(
            [
                "declare-fn",
                sig.name,
                [[pname, _type_json(pty)] for pname, pty in sig.params],
                _type_json(sig.ret),
            ]
        )
    return forms


class BindingSession:
    """The ``include`` macro plus the registry of typedef aliases it fills.

    Implements the macro resolver contract: calls named ``include`` run the
    pipeline, and variable lookups serve previously registered aliases, so
    ``(declare m ,CUmodule)`` works after the include that defined CUmodule.
    """

    def __init__(self, cc: str | None = None, include_paths=()):
        self.cc = cc
        self.include_paths = list(include_paths)
        self.aliases: dict[str, CLispType] = {}

    def include(self, headers, functions=(), structs=(), typedefs=()) -> list[Json]:
        request = BindRequest(list(headers), list(functions), list(structs), list(typedefs))
        binding = bind(request, cc=self.cc, include_paths=self.include_paths)
        self.aliases.update(binding.aliases)
        return binding_to_forms(binding)

    def alias_form(self, name: str) -> Json | None:
        if name in self.aliases:
            return _type_json(self.aliases[name])
        return None

    # MacroResolver contract

    def resolve_variable(self, name: str) -> Json:
        form = self.alias_form(name)
        if form is None:
            raise UnresolvedMacroError(f"unresolved macro: {name}")
        return form

    def resolve_call(self, name: str, args: list[Json]) -> Json:
        if name != "include":
            raise UnresolvedMacroError(f"unresolved macro: {name}")
        if len(args) != 4:
            raise MacroError(f"include takes (headers functions structs typedefs), got {len(args)} arguments")
        for arg in args:
            if not isinstance(arg, list) or not all(isinstance(x, str) for x in arg):
                raise MacroError("include arguments must be lists of names")
        return self.include(*args)
