"""Function templates: the static call structure of a definition.

A template entry is a triple (callee, argument terms, path) where the path
is the conjunction of branch conditions in force at the call site.  Calls
inside a condition or scrutinee carry the path of the condition itself;
calls in a branch additionally carry that branch's condition.  Short-circuit
operators are compiled to nested ifs first so paths are exact, and match
branches contribute head-constructor tests plus selector substitutions, the
same shape the SMT encoding uses.  ``let`` bindings are inlined.

Entries mention only the host's formal parameters; identical
(callee, args, path) occurrences collapse to one entry.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    App,
    BinOp,
    BoolLit,
    Construct,
    Expr,
    FunDecl,
    If,
    IntLit,
    Lambda,
    Let,
    Match,
    Not,
    Pattern,
    PBoolLit,
    PConstruct,
    PIntLit,
    PTuple,
    PVar,
    PWildcard,
    Selector,
    Tester,
    Tuple,
    Var,
    fresh_name,
    free_vars,
    pretty_expr,
    subst,
)

_PRIMS = {"+", "-", "*", "=", "<", "<=", ">", ">=", "&&", "||"}


@dataclass(frozen=True)
class TemplateEntry:
    callee: str
    args: tuple[Expr, ...]
    path: tuple[Expr, ...]  # conjunction

    def key(self) -> tuple:
        return (
            self.callee,
            tuple(pretty_expr(a) for a in self.args),
            tuple(sorted(pretty_expr(p) for p in self.path)),
        )

    def __str__(self) -> str:
        args = ", ".join(pretty_expr(a) for a in self.args)
        path = " && ".join(pretty_expr(p) for p in self.path) if self.path else "true"
        return f"({self.callee}, ({args}), {path})"


@dataclass
class Template:
    host: str
    params: list[str]
    entries: list[TemplateEntry]

    def keys(self) -> set[tuple]:
        return {e.key() for e in self.entries}

    def __str__(self) -> str:
        if not self.entries:
            return f"template({self.host}) = {{}}"
        body = "\n  ".join(str(e) for e in self.entries)
        return f"template({self.host}) = {{\n  {body}\n}}"


# ---------------------------------------------------------------------------
# boolean normalization shared with termination-call collection
# ---------------------------------------------------------------------------


def normalize_shortcuts(e: Expr) -> Expr:
    """Compile `&&`/`||` (and sugar-produced implications) into nested ifs so
    every call site sits under an explicit branch condition."""
    match e:
        case BinOp("&&", a, b):
            return If(normalize_shortcuts(a), normalize_shortcuts(b), BoolLit(False))
        case BinOp("||", a, b):
            return If(normalize_shortcuts(a), BoolLit(True), normalize_shortcuts(b))
        case BinOp(op, a, b):
            return BinOp(op, normalize_shortcuts(a), normalize_shortcuts(b))
        case Not(a):
            return Not(normalize_shortcuts(a))
        case If(c, t, f):
            return If(normalize_shortcuts(c), normalize_shortcuts(t), normalize_shortcuts(f))
        case App(fn, args):
            return App(normalize_shortcuts(fn), [normalize_shortcuts(a) for a in args])
        case Lambda(params, body, ptys):
            return Lambda(params, normalize_shortcuts(body), ptys)
        case Let(name, bound, body):
            return Let(name, normalize_shortcuts(bound), normalize_shortcuts(body))
        case Match(scrut, branches):
            return Match(
                normalize_shortcuts(scrut),
                [(p, normalize_shortcuts(b)) for p, b in branches],
            )
        case Construct(name, args):
            return Construct(name, [normalize_shortcuts(a) for a in args])
        case Tuple(elems):
            return Tuple([normalize_shortcuts(x) for x in elems])
        case Tester(c, a):
            return Tester(c, normalize_shortcuts(a))
        case Selector(c, i, a):
            return Selector(c, i, normalize_shortcuts(a))
        case _:
            return e


def negate(e: Expr) -> Expr:
    """Negation with comparison flipping, so guards read the way they are
    written in termination arguments (¬(m <= 0) becomes m > 0)."""
    match e:
        case BoolLit(v):
            return BoolLit(not v)
        case Not(a):
            return a
        case BinOp("<=", a, b):
            return BinOp(">", a, b)
        case BinOp("<", a, b):
            return BinOp(">=", a, b)
        case BinOp(">=", a, b):
            return BinOp("<", a, b)
        case BinOp(">", a, b):
            return BinOp("<=", a, b)
        case _:
            return Not(e)


def _unnormalize(e: Expr) -> Expr:
    """Fold shortcut-encoding ifs back into `&&`/`||` for readable paths."""
    match e:
        case If(a, b, BoolLit(False)):
            return BinOp("&&", _unnormalize(a), _unnormalize(b))
        case If(a, BoolLit(True), b):
            return BinOp("||", _unnormalize(a), _unnormalize(b))
        case _:
            return e


def _conjuncts(e: Expr) -> list[Expr]:
    """A branch condition as a flat list of conjuncts."""
    match e:
        case If(a, b, BoolLit(False)):
            return _conjuncts(a) + _conjuncts(b)
        case _:
            return [_unnormalize(e)]


def pattern_constraints(
    pat: Pattern, scrut: Expr
) -> tuple[list[Expr], dict[str, Expr]]:
    """Head tests and literal equations implied by `scrut` matching `pat`,
    plus the substitution mapping pattern variables to selector chains."""
    conjs: list[Expr] = []
    sub: dict[str, Expr] = {}

    def go(p: Pattern, t: Expr):
        match p:
            case PVar(name):
                sub[name] = t
            case PWildcard():
                pass
            case PIntLit(n):
                conjs.append(BinOp("=", t, IntLit(n)))
            case PBoolLit(b):
                conjs.append(t if b else negate(t))
            case PConstruct(cname, args):
                conjs.append(Tester(cname, t))
                for i, a in enumerate(args):
                    go(a, Selector(cname, i, t))
            case PTuple(elems):
                for i, x in enumerate(elems):
                    go(x, Selector(f"Tuple{len(elems)}", i, t))

    go(pat, scrut)
    return conjs, sub


def pattern_as_term(pat: Pattern, avoid: set[str]) -> tuple[Expr, list[str]]:
    """Render a pattern as a constructor term, inventing names for
    wildcards; returns the term and all variables it binds."""
    names: list[str] = []

    def go(p: Pattern) -> Expr:
        match p:
            case PVar(name):
                names.append(name)
                return Var(name)
            case PWildcard():
                nm = fresh_name("w", avoid | set(names))
                names.append(nm)
                return Var(nm)
            case PIntLit(n):
                return IntLit(n)
            case PBoolLit(b):
                return BoolLit(b)
            case PConstruct(cname, args):
                return Construct(cname, [go(a) for a in args])
            case PTuple(elems):
                return Tuple([go(x) for x in elems])
        raise TypeError(f"not a pattern: {p!r}")

    return go(pat), names


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def template_of(f: FunDecl) -> Template:
    """Enumerate all function calls in f's body with their governing
    paths."""
    params = list(f.params)
    body = f.body
    while isinstance(body, Lambda):
        params += body.params
        body = body.body
    body = normalize_shortcuts(body)

    entries: list[TemplateEntry] = []
    seen: set[tuple] = set()

    def emit(callee: str, args: list[Expr], path: list[Expr]):
        e = TemplateEntry(callee, tuple(args), tuple(path))
        k = e.key()
        if k not in seen:
            seen.add(k)
            entries.append(e)

    def walk(e: Expr, path: list[Expr], bound: set[str]):
        match e:
            case App(Var(g), args) if g not in bound and g not in _PRIMS:
                emit(g, list(args), path)
                for a in args:
                    walk(a, path, bound)
            case App(fn, args):
                walk(fn, path, bound)
                for a in args:
                    walk(a, path, bound)
            case If(c, t, f_):
                walk(c, path, bound)
                walk(t, path + _conjuncts(c), bound)
                walk(f_, path + [negate(_unnormalize(c))], bound)
            case Let(name, b1, b2):
                walk(b1, path, bound)
                walk(subst(b2, {name: b1}), path, bound)
            case Match(scrut, branches):
                walk(scrut, path, bound)
                for p, b in branches:
                    conjs, sub = pattern_constraints(p, scrut)
                    walk(subst(b, sub), path + conjs, bound)
            case Lambda(ps, b):
                walk(b, path, bound | set(ps))
            case Construct(_, args) | Tuple(args):
                for a in args:
                    walk(a, path, bound)
            case BinOp(_, a, b):
                walk(a, path, bound)
                walk(b, path, bound)
            case Not(a) | Tester(_, a) | Selector(_, _, a):
                walk(a, path, bound)
            case _:
                pass

    walk(body, [], set())
    return Template(f.name, params, entries)


def instantiate(tpl: Template, actuals: list[Expr]) -> list[tuple[Expr, list[Expr]]]:
    """Substitute actuals for the host's formals: a list of
    (call term, path conjuncts) pairs."""
    assert len(actuals) == len(tpl.params), f"arity mismatch for {tpl.host}"
    mapping = dict(zip(tpl.params, actuals))
    out = []
    for e in tpl.entries:
        call = App(Var(e.callee), [subst(a, mapping) for a in e.args])
        path = [subst(p, mapping) for p in e.path]
        out.append((call, path))
    return out
