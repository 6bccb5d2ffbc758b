"""Session client for an external SMT solver speaking SMT-LIB 2.6.

The ground decision backend runs as a child process connected over standard
input/output.  A :class:`SolverSession` owns one child, keeps the stream in
lockstep by enabling ``:print-success`` (every command gets exactly one
response), and exposes the small command surface the proof engines need:

* declarations — algebraic datatypes with constructors/selectors/testers,
  constants, and uninterpreted functions;
* monotone ``assert`` (formulas only ever accumulate; no ``push``/``pop``);
* ``check-sat-assuming`` over a set of assumption literals, answered as
  :class:`Sat` (with a model), :class:`Unsat` (with an unsat core drawn from
  the assumptions via ``get-unsat-assumptions``), or :class:`Unknown`;
* model value lookup, with ``get-value`` re-query as the fallback when a
  binding is missing.

Solver choice: an explicit command wins, then the ``MINI_IMANDRA_SOLVER``
environment variable, then ``z3 -in`` when z3 is on PATH, and finally the
bundled backend run as ``python -m mini_imandra.smtlite``.  Any conforming
SMT-LIB 2.6 solver works.

A session is linear: one query in flight, confined to one owner.  Distinct
sessions are independent and may run in parallel.
"""

from __future__ import annotations

import codecs
import os
import selectors
import shlex
import shutil
import subprocess
import sys
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .sexp import Reader, SexpError, to_text

__all__ = [
    "ConstDecl",
    "DatatypeDecl",
    "FunDecl",
    "MissingBinding",
    "Model",
    "Sat",
    "SolverConfig",
    "SolverProtocolError",
    "SolverSession",
    "SolverStartError",
    "Unknown",
    "Unsat",
    "get_value_of_model",
    "resolve_command",
    "start",
]

ENV_VAR = "MINI_IMANDRA_SOLVER"

# generous wall-clock cap for administrative responses (handshake, assert
# confirmations, model printing); conforming solvers answer these instantly
_AUX_TIMEOUT_S = 60.0
_HANDSHAKE_TIMEOUT_S = 30.0


class SolverStartError(Exception):
    """The solver process could not be started or failed the handshake."""


class SolverProtocolError(Exception):
    """The solver broke the wire protocol, or reported an error."""


class MissingBinding(KeyError):
    """A model has no binding for the requested constant."""


class _ReadTimeout(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration and command resolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """How to run the solver: its command line and per-query time limit."""

    command: Sequence[str] | str | None = None
    timeout_ms: int | None = None


def resolve_command(explicit: Sequence[str] | str | None = None) -> list[str]:
    """Pick the solver command line.

    Priority: explicit argument, then the ``MINI_IMANDRA_SOLVER`` environment
    variable (shell-style quoting), then ``z3 -in`` if z3 is on PATH, then
    the bundled backend as a subprocess.
    """
    if explicit:
        if isinstance(explicit, str):
            return shlex.split(explicit)
        return [str(part) for part in explicit]
    env = os.environ.get(ENV_VAR)
    if env and env.strip():
        return shlex.split(env)
    if shutil.which("z3"):
        return ["z3", "-in"]
    return [sys.executable, "-m", "mini_imandra.smtlite"]


# ---------------------------------------------------------------------------
# declarations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatatypeDecl:
    """An arity-0 algebraic datatype.

    ``constructors`` is a list of ``(name, [(selector, sort), ...])`` pairs;
    testers come for free as ``(_ is C)``.
    """

    name: str
    constructors: Sequence[tuple[str, Sequence[tuple[str, object]]]]


@dataclass(frozen=True)
class ConstDecl:
    name: str
    sort: object


@dataclass(frozen=True)
class FunDecl:
    """An uninterpreted function (a not-yet-expanded recursive function)."""

    name: str
    arg_sorts: Sequence[object]
    ret_sort: object


# ---------------------------------------------------------------------------
# verdicts and models
# ---------------------------------------------------------------------------


class Model:
    """Ground values for declared constants, keyed by name.

    Values are plain data: ``int``, ``bool``, a constructor name for nullary
    constructors, or ``[ctor, value, ...]`` lists for constructor trees.
    """

    def __init__(self, bindings: dict | None = None):
        self.bindings: dict = dict(bindings or {})

    def value(self, name: str):
        try:
            return self.bindings[name]
        except KeyError:
            raise MissingBinding(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.bindings

    def __repr__(self):
        inner = ", ".join(f"{k}={to_text(v)}" for k, v in sorted(self.bindings.items()))
        return f"Model({inner})"


def get_value_of_model(model: Model, name: str):
    """Look up a constant in a model; raises :class:`MissingBinding` when the
    solver omitted it (recover with :meth:`SolverSession.value`)."""
    return model.value(name)


@dataclass(frozen=True)
class Sat:
    model: Model


@dataclass(frozen=True)
class Unsat:
    """``core`` holds the subset of the passed assumption literals (the
    caller's own objects) that the solver reported; empty means the asserted
    formulas alone are unsatisfiable."""

    core: tuple = ()


@dataclass(frozen=True)
class Unknown:
    reason: str = "solver-said-unknown"


# ---------------------------------------------------------------------------
# the session
# ---------------------------------------------------------------------------


def _norm_value(v):
    """Normalize a solver-printed value term to plain data."""
    if isinstance(v, list):
        if len(v) == 2 and v[0] == "-" and isinstance(v[1], int):
            return -v[1]
        if len(v) == 3 and v[0] == "as":  # sort ascription around a value
            return _norm_value(v[1])
        return [_norm_value(x) for x in v]
    if v == "true":
        return True
    if v == "false":
        return False
    return v


def _check_literal(lit):
    if isinstance(lit, str) and lit not in ("true", "false"):
        return lit
    if (
        isinstance(lit, list)
        and len(lit) == 2
        and lit[0] == "not"
        and isinstance(lit[1], str)
    ):
        return lit
    raise ValueError(f"not an assumption literal: {lit!r}")


class SolverSession:
    """One child solver process and the conversation with it.

    The session is linear — one query in flight at a time — and assertion is
    monotone: formulas only accumulate.  All emitted command texts are kept
    in :attr:`log` for diagnostics.
    """

    def __init__(self, config: SolverConfig | None = None):
        self.config = config or SolverConfig()
        self.command = resolve_command(self.config.command)
        self.log: list[str] = []
        self.sorts: set[str] = set()
        self.consts: dict[str, object] = {}
        self.funs: dict[str, tuple] = {}
        self._asserted: set[str] = set()
        self._inbox: deque = deque()
        self._reader = Reader()
        self._decoder = codecs.getincrementaldecoder("utf-8")(errors="replace")
        self._closed = False
        self._proc = None
        self._sel = None
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                bufsize=0,
            )
        except OSError as e:
            self._closed = True
            raise SolverStartError(
                f"cannot start solver {self.command!r}: {e}"
            ) from None
        self._sel = selectors.DefaultSelector()
        self._sel.register(self._proc.stdout, selectors.EVENT_READ)
        try:
            for opt in (":print-success", ":produce-models", ":produce-unsat-assumptions"):
                self._send(f"(set-option {opt} true)")
                self._expect_success(_HANDSHAKE_TIMEOUT_S)
            self._send("(set-logic ALL)")
            self._expect_success(_HANDSHAKE_TIMEOUT_S)
        except (SolverProtocolError, _ReadTimeout) as e:
            self._abort()
            msg = "handshake timed out" if isinstance(e, _ReadTimeout) else str(e)
            raise SolverStartError(
                f"solver {self.command!r} failed the handshake: {msg}"
            ) from None

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        """Shut the child down; safe to call more than once."""
        if self._proc is None:
            self._closed = True
            return
        if not self._closed:
            try:
                self._proc.stdin.write(b"(exit)\n")
                self._proc.stdin.flush()
            except OSError:
                pass
        self._closed = True
        try:
            self._proc.wait(timeout=0.5)
        except subprocess.TimeoutExpired:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=0.5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._release_pipes()

    def _abort(self) -> None:
        """Hard stop after a protocol failure; the session is unusable."""
        self._closed = True
        if self._proc is not None and self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()
        self._release_pipes()

    def _release_pipes(self) -> None:
        if self._sel is not None:
            try:
                self._sel.unregister(self._proc.stdout)
            except (KeyError, ValueError):
                pass
            self._sel.close()
            self._sel = None
        for pipe in (self._proc.stdin, self._proc.stdout):
            try:
                pipe.close()
            except OSError:
                pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    # -- wire primitives ----------------------------------------------------

    def _send(self, text: str) -> None:
        if self._closed:
            raise SolverProtocolError("session closed")
        self.log.append(text)
        try:
            self._proc.stdin.write((text + "\n").encode())
            self._proc.stdin.flush()
        except OSError:
            self._abort()
            raise SolverProtocolError("solver process closed its input") from None

    def _read_form(self, timeout_s: float | None):
        if self._inbox:
            return self._inbox.popleft()
        if self._closed:
            raise SolverProtocolError("session closed")
        end = None if timeout_s is None else time.monotonic() + timeout_s
        while True:
            remaining = None
            if end is not None:
                remaining = end - time.monotonic()
                if remaining <= 0:
                    raise _ReadTimeout()
            if not self._sel.select(remaining):
                continue
            chunk = os.read(self._proc.stdout.fileno(), 65536)
            if chunk == b"":
                self._abort()
                raise SolverProtocolError("solver process closed its output")
            try:
                self._reader.feed(self._decoder.decode(chunk))
            except SexpError as e:
                self._abort()
                raise SolverProtocolError(f"unparsable solver output: {e}") from None
            self._inbox.extend(self._reader.take())
            if self._inbox:
                return self._inbox.popleft()

    def _expect_success(self, timeout_s: float | None = _AUX_TIMEOUT_S) -> None:
        resp = self._read_form(timeout_s)
        if resp == "success":
            return
        if isinstance(resp, list) and resp and resp[0] == "error":
            # the solver rejected the command but the stream is still aligned
            detail = resp[1] if len(resp) > 1 else ""
            raise SolverProtocolError(str(detail))
        self._abort()
        raise SolverProtocolError(f"expected success, got {to_text(resp)}")

    # -- declarations --------------------------------------------------------

    def declare(self, decls) -> None:
        """Declare one datatype/constant/function, or an iterable of them."""
        if isinstance(decls, (DatatypeDecl, ConstDecl, FunDecl)):
            decls = [decls]
        for d in decls:
            if isinstance(d, DatatypeDecl):
                self.declare_datatype(d.name, d.constructors)
            elif isinstance(d, ConstDecl):
                self.declare_const(d.name, d.sort)
            elif isinstance(d, FunDecl):
                self.declare_fun(d.name, d.arg_sorts, d.ret_sort)
            else:
                raise TypeError(f"not a declaration: {d!r}")

    def declare_datatype(self, name: str, constructors) -> None:
        ctors = []
        for cname, sels in constructors:
            ctors.append([cname] + [[sel, srt] for sel, srt in sels])
        cmd = ["declare-datatypes", [[name, 0]], [ctors]]
        self._send(to_text(cmd))
        self._expect_success()
        self.sorts.add(name)

    def declare_const(self, name: str, sort) -> None:
        self._send(to_text(["declare-const", name, sort]))
        self._expect_success()
        self.consts[name] = sort

    def declare_fun(self, name: str, arg_sorts, ret_sort) -> None:
        self._send(to_text(["declare-fun", name, list(arg_sorts), ret_sort]))
        self._expect_success()
        self.funs[name] = (tuple(arg_sorts), ret_sort)

    # -- asserting and checking ----------------------------------------------

    def assert_formula(self, formula) -> None:
        """Assert a ground formula (monotone; duplicates are skipped)."""
        text = to_text(formula)
        if text in self._asserted:
            return
        self._send(f"(assert {text})")
        self._expect_success()
        self._asserted.add(text)

    def check_sat_assuming(self, formulas=(), assumptions=()):
        """Assert ``formulas``, then check satisfiability under the
        ``assumptions`` literals (a name or ``(not name)`` each).

        Returns :class:`Sat` with a model, :class:`Unsat` with a core drawn
        from ``assumptions`` (empty core: the formulas alone are
        unsatisfiable), or :class:`Unknown`.
        """
        if self._closed:
            raise SolverProtocolError("session closed")
        for f in formulas:
            self.assert_formula(f)
        lits = [_check_literal(l) for l in assumptions]
        by_text = {to_text(l): l for l in lits}
        if self.config.timeout_ms is not None:
            self._set_timeout(self.config.timeout_ms)
        self._send("(check-sat-assuming (" + " ".join(map(to_text, lits)) + "))")
        try:
            ans = self._read_form(self._check_deadline_s())
        except _ReadTimeout:
            self._abort()
            return Unknown("timeout")
        if ans == "sat":
            return Sat(self._get_model())
        if ans == "unsat":
            return Unsat(self._get_core(by_text))
        if ans == "unknown":
            return Unknown("solver-said-unknown")
        self._abort()
        if isinstance(ans, list) and ans and ans[0] == "error":
            detail = ans[1] if len(ans) > 1 else ""
            raise SolverProtocolError(str(detail))
        raise SolverProtocolError(f"unexpected check answer {to_text(ans)}")

    def _check_deadline_s(self) -> float | None:
        if self.config.timeout_ms is None:
            return None
        # the in-solver limit should fire first; this is the kill backstop
        return self.config.timeout_ms / 1000.0 * 2 + 2.0

    def _set_timeout(self, ms: int) -> None:
        self._send(f"(set-option :timeout {ms})")
        resp = self._read_form(_AUX_TIMEOUT_S)
        ok = (
            resp in ("success", "unsupported")
            or (isinstance(resp, list) and resp and resp[0] == "error")
        )
        if not ok:
            self._abort()
            raise SolverProtocolError(f"expected success, got {to_text(resp)}")

    # -- query results ---------------------------------------------------------

    def _get_model(self) -> Model:
        self._send("(get-model)")
        resp = self._read_form(_AUX_TIMEOUT_S)
        if not isinstance(resp, list):
            self._abort()
            raise SolverProtocolError(f"unexpected model {to_text(resp)}")
        entries = resp[1:] if resp and resp[0] == "model" else resp
        bindings = {}
        for e in entries:
            if (
                isinstance(e, list)
                and len(e) == 5
                and e[0] == "define-fun"
                and e[2] == []
            ):
                bindings[e[1]] = _norm_value(e[4])
        return Model(bindings)

    def _get_core(self, by_text: dict) -> tuple:
        self._send("(get-unsat-assumptions)")
        resp = self._read_form(_AUX_TIMEOUT_S)
        if not isinstance(resp, list):
            self._abort()
            raise SolverProtocolError(f"unexpected unsat core {to_text(resp)}")
        core = []
        for lit in resp:
            text = to_text(lit)
            if text not in by_text:
                self._abort()
                raise SolverProtocolError(
                    f"core literal {text} is not among the assumptions"
                )
            core.append(by_text[text])
        return tuple(core)

    def get_value(self, terms) -> dict:
        """Ask the solver for current-model values of the given terms."""
        self._send("(get-value (" + " ".join(map(to_text, terms)) + "))")
        resp = self._read_form(_AUX_TIMEOUT_S)
        if isinstance(resp, list) and resp and resp[0] == "error":
            detail = resp[1] if len(resp) > 1 else ""
            raise SolverProtocolError(str(detail))
        if not isinstance(resp, list):
            self._abort()
            raise SolverProtocolError(f"unexpected values {to_text(resp)}")
        out = {}
        for pair in resp:
            if isinstance(pair, list) and len(pair) == 2:
                out[to_text(pair[0])] = _norm_value(pair[1])
        return out

    def value(self, model: Model, name: str):
        """Model lookup with ``get-value`` re-query as the fallback."""
        try:
            return model.value(name)
        except MissingBinding:
            v = self.get_value([name])[name]
            model.bindings[name] = v
            return v


def start(config: SolverConfig | None = None) -> SolverSession:
    """Start a solver session (spawn, handshake, options, logic)."""
    return SolverSession(config)
