"""S-expression reading and printing for the SMT-LIB wire format.

Values are plain Python data: symbols are `str`, numerals are `int`,
string literals are `Str` (a `str` subclass, printed quoted), and lists are
`list`.  The incremental `Reader` supports stream parsing where input
arrives in arbitrary chunks (as on a child process pipe).
"""

from __future__ import annotations

Sexp = object  # int | str | Str | list


class Str(str):
    """A double-quoted SMT-LIB string literal."""

    __slots__ = ()


class SexpError(ValueError):
    pass


_DELIMS = "()"
_WS = " \t\r\n"


class Reader:
    """Incremental S-expression reader.

    feed() text as it arrives; take() returns every complete top-level
    expression parsed so far.  Partial expressions are kept until their
    closing parenthesis shows up.
    """

    def __init__(self):
        self._buf = ""
        self._out: list = []

    def feed(self, text: str) -> None:
        self._buf += text
        self._scan()

    def take(self) -> list:
        out, self._out = self._out, []
        return out

    def pending(self) -> bool:
        return bool(self._buf.strip())

    def _scan(self) -> None:
        while True:
            expr, rest = _read_one(self._buf)
            if expr is _INCOMPLETE:
                return
            self._buf = rest
            self._out.append(expr)


_INCOMPLETE = object()


def _read_one(text: str):
    """Parse one expression; returns (_INCOMPLETE, text) if more input is
    needed, else (expr, remaining-text)."""
    i = _skip_ws(text, 0)
    if i >= len(text):
        return _INCOMPLETE, text
    expr, j = _parse(text, i)
    if expr is _INCOMPLETE:
        return _INCOMPLETE, text
    return expr, text[j:]


def _skip_ws(s: str, i: int) -> int:
    n = len(s)
    while i < n:
        c = s[i]
        if c in _WS:
            i += 1
        elif c == ";":  # comment to end of line
            j = s.find("\n", i)
            if j < 0:
                return n
            i = j + 1
        else:
            break
    return i


def _parse(s: str, i: int):
    c = s[i]
    if c == "(":
        items = []
        i += 1
        while True:
            i = _skip_ws(s, i)
            if i >= len(s):
                return _INCOMPLETE, i
            if s[i] == ")":
                return items, i + 1
            item, i = _parse(s, i)
            if item is _INCOMPLETE:
                return _INCOMPLETE, i
            items.append(item)
    if c == ")":
        raise SexpError("unbalanced ')'")
    if c == '"':
        j = i + 1
        parts = []
        while True:
            if j >= len(s):
                return _INCOMPLETE, j
            if s[j] == '"':
                if j + 1 < len(s) and s[j + 1] == '"':  # escaped quote
                    parts.append('"')
                    j += 2
                    continue
                if j + 1 >= len(s):
                    # could still be the first half of an escaped quote
                    return _INCOMPLETE, j
                return Str("".join(parts)), j + 1
            parts.append(s[j])
            j += 1
    if c == "|":  # quoted symbol
        j = s.find("|", i + 1)
        if j < 0:
            return _INCOMPLETE, i
        return s[i + 1 : j], j + 1
    # atom
    j = i
    n = len(s)
    while j < n and s[j] not in _WS and s[j] not in _DELIMS and s[j] != ";":
        j += 1
    if j == n:
        # the atom might continue in the next chunk
        return _INCOMPLETE, j
    tok = s[i:j]
    return _atom(tok), j


def _atom(tok: str):
    if tok.isdigit() or (tok[0] == "-" and tok[1:].isdigit()):
        return int(tok)
    return tok


def parse_all(text: str) -> list:
    """Parse a complete script; raises SexpError on trailing garbage."""
    out = []
    # a trailing sentinel lets atoms at end-of-string complete
    buf = text + "\n"
    while True:
        expr, buf = _read_one(buf)
        if expr is _INCOMPLETE:
            if buf.strip():
                raise SexpError(f"incomplete expression: {buf[:60]!r}")
            return out
        out.append(expr)


def to_text(e: Sexp) -> str:
    if isinstance(e, bool):
        return "true" if e else "false"
    if isinstance(e, int):
        return str(e) if e >= 0 else f"(- {-e})"
    if isinstance(e, Str):
        return '"' + e.replace('"', '""') + '"'
    if isinstance(e, str):
        return e
    if isinstance(e, list):
        return "(" + " ".join(to_text(x) for x in e) + ")"
    raise SexpError(f"not an s-expression: {e!r}")
