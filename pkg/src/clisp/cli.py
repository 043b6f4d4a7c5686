"""Batch command-line surface wiring the stages together.

Commands: s2json, json2s, expand, compile, run, bindgen.  Exit codes are a
contract: 0 success, 1 usage, 2 parse error, 3 macro resolution failure,
4 type error, 5 external tool failure (run also propagates the program's
own exit status).
"""

from __future__ import annotations

import argparse
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

from . import bindgen as bindgen_mod
from . import sexpr
from .emitter import EmitError, emit, emit_entry_shim
from .frontend import FormError, TypeCheckError, parse_module, typecheck
from .hostproto import HostError, SubprocessResolver
from .prelisp import MacroError, UnresolvedMacroError, expand, scan_macros
from .toolchain import Toolchain, ToolchainError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_MACRO = 3
EXIT_TYPE = 4
EXIT_TOOL = 5
EXIT_INTERNAL = 70

ENV_MACRO_HOST = "CLISP_MACRO_HOST"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the exit-code contract wants 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_output(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_sexpr_forms(path: str) -> list[sexpr.SExpr]:
    """Read a program in either surface: .cl text or the JSON interchange.

    Text input keeps its source positions; JSON input has none to keep.
    """
    text = _read_input(path)
    if _looks_like_json(path, text):
        return [sexpr.from_json(f) for f in sexpr.loads_program(text)]
    return sexpr.parse_sexprs(text)


def _looks_like_json(path: str, text: str) -> bool:
    if path.endswith(".json"):
        return True
    if path.endswith(".cl"):
        return False
    head = text.lstrip()
    return head.startswith("[")


def _forms_to_sexpr_text(forms: list[sexpr.Json]) -> str:
    return "".join(sexpr.print_sexpr(sexpr.from_json(f)) + "\n" for f in forms)


def _host_command(args) -> list[str]:
    raw = args.host_cmd or os.environ.get(ENV_MACRO_HOST) or "macro-host"
    return shlex.split(raw)


def cmd_s2json(args) -> int:
    forms = sexpr.parse_sexprs(_read_input(args.input))
    _write_output(args.output, sexpr.dumps_program([sexpr.to_json(f) for f in forms]))
    return EXIT_OK


def cmd_json2s(args) -> int:
    forms = sexpr.loads_program(_read_input(args.input))
    _write_output(args.output, _forms_to_sexpr_text(forms))
    return EXIT_OK


def cmd_expand(args) -> int:
    text = _read_input(args.input)
    json_mode = _looks_like_json(args.input, text)
    if json_mode:
        program = sexpr.loads_program(text)
    else:
        program = [sexpr.to_json(f) for f in sexpr.parse_sexprs(text)]
    if args.dry_run:
        for macro in scan_macros(program):
            suffix = f" ({len(macro.args)} args)" if macro.kind.endswith("call") else ""
            print(f"{macro.kind} {macro.name}{suffix}")
        return EXIT_OK
    command = _host_command(args) + [args.macros]
    with SubprocessResolver(command) as resolver:
        expanded = expand(program, resolver)
    if json_mode:
        _write_output(args.output, sexpr.dumps_program(expanded))
    else:
        _write_output(args.output, _forms_to_sexpr_text(expanded))
    return EXIT_OK


def _compile_to_ir(args) -> str:
    module = parse_module(_load_sexpr_forms(args.input))
    typed = typecheck(module)
    ir = emit(typed)
    text = ir.text
    if args.entry:
        text += "\n" + emit_entry_shim(args.entry, typed).text
    return text


def cmd_compile(args) -> int:
    _write_output(args.output, _compile_to_ir(args))
    return EXIT_OK


def cmd_run(args) -> int:
    ir_text = _compile_to_ir(args)
    toolchain = Toolchain.resolve(args.toolchain)
    with tempfile.TemporaryDirectory(prefix="clisp-run-") as tmp:
        ll_path = Path(tmp) / "program.ll"
        ll_path.write_text(ir_text)
        ok, diagnostics = toolchain.verify_ll(ll_path)
        if not ok:
            kept = Path.cwd() / (Path(args.input).stem + ".broken.ll")
            kept.write_text(ir_text)
            print(f"internal error: emitted IR failed verification; kept at {kept}", file=sys.stderr)
            print(diagnostics, file=sys.stderr)
            return EXIT_INTERNAL
        obj_path = Path(tmp) / "program.o"
        toolchain.compile_ll(ll_path, obj_path)
        exe_path = Path(tmp) / "program"
        toolchain.link([obj_path, *args.link], exe_path)
        proc = subprocess.run([str(exe_path)])
        return proc.returncode


def cmd_bindgen(args) -> int:
    session = bindgen_mod.BindingSession(cc=args.cc, include_paths=args.include_path)
    forms = session.include(args.header, args.function, args.struct, args.typedef)
    if args.json:
        import json as _json

        payload = {
            "forms": forms,
            "aliases": {name: session.alias_form(name) for name in session.aliases},
        }
        _write_output(args.output, _json.dumps(payload) + "\n")
    else:
        _write_output(args.output, _forms_to_sexpr_text(forms))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clc", description="C-Lisp compiler toolchain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("s2json", help="convert .cl source to the JSON interchange form")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_s2json)

    p = sub.add_parser("json2s", help="convert the JSON interchange form back to .cl text")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_json2s)

    p = sub.add_parser("expand", help="run macro expansion through a macro host")
    p.add_argument("input")
    p.add_argument("--macros", help="macro module path handed to the host", default=None)
    p.add_argument("--host-cmd", default=None, help=f"host command (default: ${ENV_MACRO_HOST} or 'macro-host')")
    p.add_argument("--dry-run", action="store_true", help="list macro expressions without resolving")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_expand)

    p = sub.add_parser("compile", help="type-check and emit textual LLVM IR")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--entry", default=None, help="append a main() shim calling this () -> int function")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="compile, link and execute")
    p.add_argument("input")
    p.add_argument("--entry", required=True)
    p.add_argument("--link", action="append", default=[], help="extra C or object files to link in")
    p.add_argument("--toolchain", default=None)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bindgen", help="generate declare-fn/struct forms from C headers")
    p.add_argument("--header", action="append", default=[], required=True)
    p.add_argument("--function", action="append", default=[])
    p.add_argument("--struct", action="append", default=[])
    p.add_argument("--typedef", action="append", default=[])
    p.add_argument("--cc", default=None)
    p.add_argument("-I", "--include-path", action="append", default=[])
    p.add_argument("--json", action="store_true", help="emit {forms, aliases} as JSON")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_bindgen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.fn is cmd_expand and not args.dry_run and not args.macros:
        print("error: expand requires --macros (or --dry-run)", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except (sexpr.ParseError, sexpr.JsonError, FormError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TypeCheckError as exc:
        for issue in exc.issues:
            print(str(issue), file=sys.stderr)
        return EXIT_TYPE
    except UnresolvedMacroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MACRO
    except MacroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MACRO
    except (HostError, ToolchainError, bindgen_mod.BindgenError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOOL
    except EmitError as exc:
        # Reachable only through bad --entry values on typechecked input.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
