"""IR emission: lowering shape, oracle comparison, verifier cleanliness."""

import re
import subprocess

import pytest

from clisp.emitter import EmitError, emit, emit_entry_shim
from clisp.frontend import parse_module, typecheck
from clisp.sexpr import parse_sexprs
from conftest import compile_corpus_ir, corpus_dir, corpus_names

MULADD = (corpus_dir("muladd") / "prog.cl").read_text()


def emit_source(source: str):
    return emit(typecheck(parse_module(parse_sexprs(source))))


def function_body(ir_text: str, name: str) -> list[str]:
    lines = []
    inside = False
    for line in ir_text.splitlines():
        if line.startswith(f"define") and f"@{name}(" in line:
            inside = True
            continue
        if inside:
            if line.startswith("}"):
                break
            lines.append(line.strip())
    assert lines, f"no function @{name} in IR"
    return lines


_INSTR_FLAGS = {
    "nsw", "nuw", "exact", "inbounds", "volatile", "fast",
    "nnan", "ninf", "nsz", "arcp", "afn", "reassoc", "contract",
}


def instruction_kinds(ir_text: str, name: str) -> list[tuple[str, str]]:
    """(mnemonic, leading type token) pairs for each instruction in a function."""
    kinds = []
    for line in function_body(ir_text, name):
        if not line or line.endswith(":"):
            continue
        if line.startswith("%"):
            rest = line.split("=", 1)[1].strip()
        else:
            rest = line
        parts = [p for p in rest.split() if p not in _INSTR_FLAGS]
        op = parts[0]
        ty = parts[1].rstrip(",") if len(parts) > 1 else ""
        kinds.append((op, ty))
    return kinds


def subsequence(kinds, interesting):
    return [k for k in kinds if k in interesting]


# Frozen from the oracle: the reference C compiler at -O0 lowers the twin of
# muladd with this relative order of the arithmetic-and-memory kinds.
MULADD_ORACLE_KINDS = [
    ("mul", "i32"),
    ("load", "i64"),
    ("sext", "i32"),
    ("add", "i64"),
    ("store", "i64"),
]


class TestMuladd:
    def test_kind_order_matches_frozen_oracle(self):
        ir = emit_source(MULADD)
        got = subsequence(instruction_kinds(ir.text, "muladd"), set(MULADD_ORACLE_KINDS))
        assert got == MULADD_ORACLE_KINDS

    def test_kind_order_matches_live_oracle(self, toolchain, tmp_path):
        twin = corpus_dir("muladd") / "twin.c"
        out = tmp_path / "twin.ll"
        proc = subprocess.run(
            [toolchain.cc, "-S", "-emit-llvm", "-O0", "-o", str(out), str(twin)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        oracle = subsequence(
            instruction_kinds(out.read_text(), "muladd"), set(MULADD_ORACLE_KINDS)
        )
        mine = subsequence(
            instruction_kinds(emit_source(MULADD).text, "muladd"), set(MULADD_ORACLE_KINDS)
        )
        assert mine == oracle


class TestLoweringShape:
    def test_empty_void_function(self):
        ir = emit_source("(define ((f void)) (ret))")
        assert "define void @f() {" in ir.text
        assert function_body(ir.text, "f")[-1] == "ret void"

    def test_referenced_external_declared_once(self):
        ir = emit_source(
            "(declare-fn getchar () int)"
            "(define ((f int)) (ret (call getchar)))"
            "(define ((g int)) (ret (call getchar)))"
        )
        assert ir.text.count("declare i32 @getchar()") == 1
        assert "getchar" in ir.symbols

    def test_unreferenced_external_omitted(self):
        ir = emit_source("(declare-fn getchar () int) (define ((f void)) (ret))")
        assert "declare" not in ir.text
        assert "getchar" not in ir.symbols

    def test_string_literal_constant(self):
        ir = emit_source('(declare-fn puts ((s (ptr int8))) int) (define ((f void)) (call puts "hi"))')
        assert '@.str.0 = private unnamed_addr constant [3 x i8] c"hi\\00"' in ir.text
        assert "call i32 @puts(ptr @.str.0)" in ir.text

    def test_string_literals_deduplicated(self):
        ir = emit_source(
            '(declare-fn puts ((s (ptr int8))) int)'
            '(define ((f void)) (call puts "x") (call puts "x"))'
        )
        assert ir.text.count("@.str.0 =") == 1

    def test_comparison_zext_to_i8(self):
        ir = emit_source("(define ((f int8) (a int) (b int)) (ret (slt a b)))")
        body = "\n".join(function_body(ir.text, "f"))
        assert re.search(r"icmp slt i32 .*\n.*zext i1 .* to i8", body)

    def test_if_structure(self):
        ir = emit_source("(define ((f void) (c int8)) (if c (ret) (ret)))")
        body = "\n".join(function_body(ir.text, "f"))
        assert "icmp ne i8" in body
        assert re.search(r"br i1 %\w+, label %if\.then\.\d+, label %if\.else\.\d+", body)

    def test_while_structure(self):
        ir = emit_source(
            "(define ((f void) (n int))"
            "  (while (sgt n 0) (set n (sub n 1))))"
        )
        body = "\n".join(function_body(ir.text, "f"))
        assert body.count("while.cond.1:") == 1
        assert "br label %while.cond.1" in body
        assert "while.end.1:" in body

    def test_struct_type_line(self):
        ir = emit_source("(struct Point (x int) (y int64)) (define ((f void)) (declare p Point) (ret))")
        assert "%Point = type { i32, i64 }" in ir.text
        assert "alloca %Point" in ir.text

    def test_ptr_to_uses_slot(self):
        ir = emit_source(
            "(declare-fn touch ((p (ptr int))) void)"
            "(define ((f void)) (declare x int) (call touch (ptr-to x)))"
        )
        assert "call void @touch(ptr %x.addr)" in ir.text

    def test_float_literal_is_hex_exact(self):
        ir = emit_source("(define ((f float64)) (ret (fadd 1.5 0.0)))")
        assert "fadd double 0x3FF8000000000000, 0x0000000000000000" in ir.text

    def test_code_after_ret_goes_to_dead_block(self):
        ir = emit_source("(define ((f int)) (ret 1) (ret 2))")
        body = "\n".join(function_body(ir.text, "f"))
        assert "dead.1:" in body

    def test_nonvoid_fallthrough_is_unreachable(self):
        ir = emit_source("(define ((f int)) (declare x int))")
        assert function_body(ir.text, "f")[-1] == "unreachable"

    def test_determinism(self):
        source = (corpus_dir("sum_squares") / "prog.cl").read_text()
        first = emit(typecheck(parse_module(parse_sexprs(source)))).text
        second = emit(typecheck(parse_module(parse_sexprs(source)))).text
        assert first == second


class TestEntryShim:
    def module(self, source="(define ((run int)) (ret 0))"):
        return typecheck(parse_module(parse_sexprs(source)))

    def test_shim(self):
        shim = emit_entry_shim("run", self.module())
        assert "define i32 @main()" in shim.text
        assert "call i32 @run()" in shim.text
        assert shim.symbols == ["main"]

    def test_missing_function(self):
        with pytest.raises(EmitError, match="no such function"):
            emit_entry_shim("ghost", self.module())

    def test_void_entry(self):
        with pytest.raises(EmitError, match="must return int"):
            emit_entry_shim("run", self.module("(define ((run void)) (ret))"))

    def test_entry_with_params(self):
        with pytest.raises(EmitError, match="no parameters"):
            emit_entry_shim("run", self.module("(define ((run int) (n int)) (ret n))"))


class TestSSADiscipline:
    @pytest.mark.parametrize("name", corpus_names())
    def test_registers_defined_once(self, name):
        ir_text = compile_corpus_ir(name)
        inside = False
        current: set[str] = set()
        for line in ir_text.splitlines():
            if line.startswith("define"):
                inside, current = True, set()
                continue
            if line.startswith("}"):
                inside = False
                continue
            match = re.match(r"\s*(%[\w.$-]+)\s*=", line)
            if inside and match:
                reg = match.group(1)
                assert reg not in current, f"{reg} defined twice in {name}"
                current.add(reg)


class TestVerifierAndEquivalence:
    @pytest.mark.parametrize("name", corpus_names())
    def test_verifier_clean(self, name, toolchain, tmp_path):
        ll = tmp_path / f"{name}.ll"
        ll.write_text(compile_corpus_ir(name))
        ok, diagnostics = toolchain.verify_ll(ll)
        assert ok, f"verifier diagnostics for {name}:\n{diagnostics}"

    @pytest.mark.parametrize("name", corpus_names())
    def test_matches_c_twin(self, name, corpus_builder):
        from conftest import run_exe

        pair = corpus_builder(name)
        ours = run_exe(pair.clisp_exe, pair.stdin_file)
        twin = run_exe(pair.c_exe, pair.stdin_file)
        assert ours.stdout == twin.stdout
        assert ours.returncode == twin.returncode
