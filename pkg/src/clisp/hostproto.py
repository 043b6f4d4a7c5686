"""Client side of the macro-host protocol.

A macro host is any program that reads one JSON request per line on stdin
and writes one JSON response per line on stdout:

    {"id": 1, "kind": "variable", "name": "EOF"}
    {"id": 2, "kind": "call", "name": "incr", "args": ["var", 45]}

    {"id": 1, "ok": true, "value": ["trunc", -1, "int8"]}
    {"id": 2, "ok": false, "error": "unresolved macro: incr"}

Protocol or process failures raise HostError; a clean ok:false response
raises the matching macro error so exit codes can tell the two apart.
"""

from __future__ import annotations

import json
import subprocess

from .prelisp import MacroError, UnresolvedMacroError
from .sexpr import Json


class HostError(Exception):
    """The host process failed: could not spawn, died, or talked garbage."""


class SubprocessResolver:
    """Macro resolver backed by a host subprocess; one session per expansion."""

    def __init__(self, command: list[str]):
        self.command = list(command)
        self._next_id = 0
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise HostError(f"could not start macro host {self.command!r}: {exc}") from None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        if self.proc.stdin and not self.proc.stdin.closed:
            self.proc.stdin.close()
        self.proc.wait()

    def _request(self, payload: dict) -> Json:
        assert self.proc.stdin and self.proc.stdout
        try:
            self.proc.stdin.write(json.dumps(payload) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise HostError(f"macro host {self.command!r} is gone (broken pipe)") from None
        line = self.proc.stdout.readline()
        if not line:
            raise HostError(f"macro host {self.command!r} closed its output mid-session")
        try:
            response = json.loads(line)
        except json.JSONDecodeError:
            raise HostError(f"macro host sent a non-JSON line: {line!r}") from None
        if not isinstance(response, dict) or response.get("id") != payload["id"]:
            raise HostError(f"macro host response does not match request id {payload['id']}: {line!r}")
        if response.get("ok"):
            if "value" not in response:
                raise HostError(f"ok response without a value: {line!r}")
            return response["value"]
        error = str(response.get("error", "unknown macro host error"))
        if error.startswith("unresolved macro:"):
            raise UnresolvedMacroError(error)
        raise MacroError(error)

    def resolve_variable(self, name: str) -> Json:
        self._next_id += 1
        return self._request({"id": self._next_id, "kind": "variable", "name": name})

    def resolve_call(self, name: str, args: list[Json]) -> Json:
        self._next_id += 1
        return self._request({"id": self._next_id, "kind": "call", "name": name, "args": args})
