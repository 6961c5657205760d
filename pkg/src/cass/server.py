"""
Line protocol over TCP.

Requests are single lines of space-separated tokens::

    GetAnalysis
    AnalyzeModule <analysis> <module> [plain|xml|json]
    AnalyzeEntity <analysis> <module> <entity> [plain|xml|json]
    StopServer

Every response starts with ``ok <n>`` followed by ``n`` payload lines, or
is the single line ``error <message>``.  Clients are served one at a time.
"""

from __future__ import annotations

import logging
import socket
import socketserver
from typing import Callable

from cass.errors import CassError
from cass.framework import UnknownAnalysis
from cass.output import OutputFormat, render

log = logging.getLogger(__name__)


class RequestError(Exception):
    """Malformed request line."""


def _fmt(tokens: list[str], index: int) -> OutputFormat:
    if len(tokens) <= index:
        return OutputFormat.PLAIN
    try:
        return OutputFormat.parse(tokens[index])
    except ValueError as exc:
        raise RequestError(str(exc)) from None


def _arity(tokens: list[str], lo: int, hi: int) -> None:
    if not lo <= len(tokens) - 1 <= hi:
        want = str(lo) if lo == hi else f"{lo} to {hi}"
        raise RequestError(f"{tokens[0]} expects {want} arguments, got {len(tokens) - 1}")


def handle(line: str, engine) -> tuple[list[str], bool]:
    """Execute one request line; returns the response lines and whether to stop."""
    tokens = line.split()
    try:
        if not tokens:
            raise RequestError("empty request")
        cmd = tokens[0]
        if cmd == "GetAnalysis":
            _arity(tokens, 0, 0)
            return ok(engine.registry.names()), False
        if cmd == "StopServer":
            _arity(tokens, 0, 0)
            return ok([]), True
        if cmd == "AnalyzeModule":
            _arity(tokens, 2, 3)
            fmt = _fmt(tokens, 3)
            return ok(module_payload(engine, tokens[1], tokens[2], fmt)), False
        if cmd == "AnalyzeEntity":
            _arity(tokens, 3, 4)
            fmt = _fmt(tokens, 4)
            return ok(module_payload(engine, tokens[1], tokens[2], fmt, tokens[3])), False
        raise RequestError("unknown command")
    except RequestError as exc:
        return error(f"parse: {exc}"), False
    except UnknownAnalysis as exc:
        return error(f"unknown analysis: {exc.name}"), False
    except CassError as exc:
        return error(f"analysis: {exc}"), False
    except Exception as exc:  # keep the connection alive on analysis bugs
        log.exception("request %r failed", line)
        return error(f"internal: {type(exc).__name__}: {exc}"), False


def module_payload(engine, analysis_name: str, module: str, fmt: OutputFormat, entity: str | None = None) -> list[str]:
    """Result lines for a whole module, or for one (unqualified) entity in it."""
    analysis = engine.analysis(analysis_name)
    results = engine.local_results(analysis, module)
    if entity is not None:
        results = [(q, v) for q, v in results if q.name == entity]
        if not results:
            raise CassError(f"module {module} has no entity {entity!r} for analysis {analysis.name}")
    return render(analysis, module, results, fmt)


def ok(lines: list[str]) -> list[str]:
    return [f"ok {len(lines)}", *lines]


def error(message: str) -> list[str]:
    return ["error " + " ".join(message.split())]


class _Handler(socketserver.StreamRequestHandler):
    server: AnalysisServer

    def handle(self) -> None:
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").rstrip("\r\n")
            log.debug("request: %s", line)
            lines, stop = handle(line, self.server.engine)
            self.wfile.write("".join(s + "\n" for s in lines).encode("utf-8"))
            self.wfile.flush()
            if stop:
                self.server.stopping = True
                return


class AnalysisServer(socketserver.TCPServer):
    allow_reuse_address = True

    def __init__(self, engine, host: str = "127.0.0.1", port: int = 0) -> None:
        super().__init__((host, port), _Handler)
        self.engine = engine
        self.stopping = False

    @property
    def port(self) -> int:
        return self.server_address[1]

    def serve(self, ready: Callable[[int], None] | None = None) -> None:
        """Serve clients one after another until a StopServer request arrives."""
        if ready is not None:
            ready(self.port)
        try:
            while not self.stopping:
                self.handle_request()
        finally:
            self.server_close()


def serve(port: int, engine, host: str = "127.0.0.1", ready: Callable[[int], None] | None = None) -> None:
    AnalysisServer(engine, host, port).serve(ready)


def request(port: int, lines: list[str], host: str = "127.0.0.1", timeout: float = 30.0) -> list[str]:
    """Minimal client: send request lines, return every response line."""
    out: list[str] = []
    with socket.create_connection((host, port), timeout=timeout) as sock:
        fh = sock.makefile("rwb")
        for line in lines:
            fh.write((line + "\n").encode("utf-8"))
            fh.flush()
            head = fh.readline().decode("utf-8").rstrip("\n")
            out.append(head)
            if head.startswith("ok "):
                for _ in range(int(head.split()[1])):
                    out.append(fh.readline().decode("utf-8").rstrip("\n"))
    return out
