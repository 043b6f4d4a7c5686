"""Locating and driving the external LLVM-capable C compiler.

The toolchain is any clang-style driver that accepts ``.ll`` input.  Older
drivers (LLVM 14) need ``-mllvm -opaque-pointers`` before they accept the
opaque ``ptr`` type we emit; the probe below detects that once per instance.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

ENV_TOOLCHAIN = "CLISP_TOOLCHAIN"

_PROBE_IR = "define void @probe(ptr %p) {\nentry:\n  ret void\n}\n"


class ToolchainError(Exception):
    pass


@dataclass
class Toolchain:
    cc: str
    _opaque_args: list[str] | None = field(default=None, repr=False)

    @classmethod
    def resolve(cls, flag_value: str | None = None) -> "Toolchain":
        cc = flag_value or os.environ.get(ENV_TOOLCHAIN) or "clang"
        if shutil.which(cc) is None:
            raise ToolchainError(
                f"toolchain '{cc}' not found; pass --toolchain or set ${ENV_TOOLCHAIN}"
            )
        return cls(cc)

    def _run(self, args: list[str]) -> subprocess.CompletedProcess:
        try:
            return subprocess.run(args, capture_output=True, text=True)
        except FileNotFoundError:
            raise ToolchainError(
                f"toolchain '{self.cc}' not found; pass --toolchain or set ${ENV_TOOLCHAIN}"
            ) from None

    def ll_args(self) -> list[str]:
        """Extra driver flags needed for opaque-pointer ``.ll`` input."""
        if self._opaque_args is None:
            with tempfile.TemporaryDirectory(prefix="clisp-probe-") as tmp:
                probe = Path(tmp) / "probe.ll"
                probe.write_text(_PROBE_IR)
                out = Path(tmp) / "probe.o"
                base = [self.cc, "-c", str(probe), "-o", str(out)]
                if self._run(base).returncode == 0:
                    self._opaque_args = []
                else:
                    flagged = base[:1] + ["-mllvm", "-opaque-pointers"] + base[1:]
                    if self._run(flagged).returncode == 0:
                        self._opaque_args = ["-mllvm", "-opaque-pointers"]
                    else:
                        raise ToolchainError(
                            f"toolchain '{self.cc}' cannot compile opaque-pointer IR"
                        )
        return list(self._opaque_args)

    def verify_ll(self, ll_path: str | Path) -> tuple[bool, str]:
        """Parse and verify a module by compiling it to a throwaway object.

        Returns (ok, diagnostics); ok requires a clean exit and no
        diagnostics on stderr.
        """
        with tempfile.TemporaryDirectory(prefix="clisp-verify-") as tmp:
            out = Path(tmp) / "verify.o"
            args = (
                [self.cc]
                + self.ll_args()
                + ["-Wno-override-module", "-c", str(ll_path), "-o", str(out)]
            )
            proc = self._run(args)
        diagnostics = proc.stderr.strip()
        return proc.returncode == 0 and not diagnostics, diagnostics

    def compile_ll(self, ll_path: str | Path, obj_path: str | Path):
        args = (
            [self.cc]
            + self.ll_args()
            + ["-Wno-override-module", "-c", str(ll_path), "-o", str(obj_path)]
        )
        proc = self._run(args)
        if proc.returncode != 0:
            raise ToolchainError(f"compiling {ll_path} failed:\n{proc.stderr}")

    def link(self, inputs: list[str | Path], exe_path: str | Path):
        proc = self._run([self.cc] + [str(p) for p in inputs] + ["-o", str(exe_path)])
        if proc.returncode != 0:
            raise ToolchainError(f"linking failed:\n{proc.stderr}")

    def compile_c(self, c_path: str | Path, obj_path: str | Path, extra: list[str] | None = None):
        proc = self._run([self.cc, "-c", str(c_path), "-o", str(obj_path)] + (extra or []))
        if proc.returncode != 0:
            raise ToolchainError(f"compiling {c_path} failed:\n{proc.stderr}")
