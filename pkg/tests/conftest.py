"""Shared fixtures: toolchain access, corpus discovery, build helpers."""

from __future__ import annotations

import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent / "golden"))

from clisp.emitter import emit, emit_entry_shim
from clisp.frontend import parse_module, typecheck
from clisp.sexpr import parse_sexprs
from clisp.toolchain import Toolchain, ToolchainError

TESTS_DIR = Path(__file__).parent
CORPUS_DIR = TESTS_DIR / "corpus"
HEADERS_DIR = TESTS_DIR / "fixtures" / "headers"
GOLDEN_DIR = TESTS_DIR / "golden"
TOY_HOST = TESTS_DIR / "fixtures" / "toy_host.py"

NO_TOOLCHAIN = "toolchain-skipped: no C compiler driver found (set CLISP_TOOLCHAIN)"
NO_FRONTEND = "bindgen-skipped: no C frontend found (set CLISP_CC)"


def corpus_names() -> list[str]:
    return sorted(p.name for p in CORPUS_DIR.iterdir() if (p / "prog.cl").exists())


def corpus_dir(name: str) -> Path:
    return CORPUS_DIR / name


def compile_corpus_ir(name: str) -> str:
    """Emit IR for a corpus program, with a main shim when it has no C driver."""
    program = corpus_dir(name)
    forms = parse_sexprs((program / "prog.cl").read_text())
    module = typecheck(parse_module(forms))
    text = emit(module).text
    if not (program / "driver.c").exists():
        text += "\n" + emit_entry_shim("run", module).text
    return text


@pytest.fixture(scope="session")
def toolchain() -> Toolchain:
    try:
        return Toolchain.resolve()
    except ToolchainError:
        pytest.skip(NO_TOOLCHAIN)


@dataclass
class BuiltPair:
    clisp_exe: Path
    c_exe: Path
    stdin_file: Path | None


@pytest.fixture(scope="session")
def corpus_builder(toolchain, tmp_path_factory):
    """Build each corpus program once per session: ours and the C twin."""
    root = tmp_path_factory.mktemp("corpus-build")
    cache: dict[str, BuiltPair] = {}

    def build(name: str) -> BuiltPair:
        if name in cache:
            return cache[name]
        program = corpus_dir(name)
        workdir = root / name
        workdir.mkdir()
        ll_path = workdir / "prog.ll"
        ll_path.write_text(compile_corpus_ir(name))
        obj_path = workdir / "prog.o"
        toolchain.compile_ll(ll_path, obj_path)
        shared = [p for p in (program / "driver.c", program / "support.c") if p.exists()]
        clisp_exe = workdir / "prog_clisp"
        toolchain.link([obj_path, *shared], clisp_exe)
        c_exe = workdir / "prog_c"
        toolchain.link([program / "twin.c", *shared], c_exe)
        stdin_file = program / "stdin.txt"
        pair = BuiltPair(clisp_exe, c_exe, stdin_file if stdin_file.exists() else None)
        cache[name] = pair
        return pair

    return build


def run_exe(exe: Path, stdin_file: Path | None = None) -> subprocess.CompletedProcess:
    stdin = open(stdin_file, "rb") if stdin_file else subprocess.DEVNULL
    try:
        return subprocess.run([str(exe)], stdin=stdin, capture_output=True)
    finally:
        if stdin_file:
            stdin.close()


@pytest.fixture(scope="session")
def c_frontend() -> str:
    from clisp.bindgen import FrontendNotFoundError, resolve_cc

    try:
        return resolve_cc()
    except FrontendNotFoundError:
        pytest.skip(NO_FRONTEND)


def run_cli(*args, stdin_text: str | None = None) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "clisp.cli", *map(str, args)],
        capture_output=True,
        text=True,
        input=stdin_text,
        cwd=Path(__file__).parent.parent,
    )


def require_exe(name: str, reason: str):
    if shutil.which(name) is None:
        pytest.skip(reason)
