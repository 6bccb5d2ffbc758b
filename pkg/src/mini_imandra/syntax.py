"""Surface syntax of the modelling language: lexer, parser, pretty printer.

The grammar is ML-flavoured but deliberately small: algebraic datatypes,
pure expressions, top-level (possibly recursive) function definitions with
termination annotations, theorems, and the ``verify``/``instance``
directives.  Qualified names such as ``List.length`` or ``Ordinal.of_int``
are single identifiers, not a module system.  ``==>`` and ``<>`` are sugar
(implication and disequality) and are desugared during parsing; ``[a; b]``
and ``x :: tl`` build the ``Cons``/``Nil`` constructors of the built-in
list type.

Control expressions (``fun``, ``function``, ``if``, ``match``, ``let in``)
extend as far right as possible; the pretty printer parenthesises them in
any sub-expression position, so printing always round-trips.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

# ---------------------------------------------------------------------------
# errors and source positions
# ---------------------------------------------------------------------------


class ParseError(Exception):
    def __init__(self, msg: str, text: str = "", pos: int = 0, expected: str | None = None):
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.expected = expected
        detail = f"{self.line}:{self.col}: {msg}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


Loc = tuple[int, int]  # [start, end) offsets into the source text


def _loc_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Expr:
    loc: Optional[Loc]


@dataclass
class IntLit(Expr):
    value: int
    loc: Optional[Loc] = _loc_field()


@dataclass
class BoolLit(Expr):
    value: bool
    loc: Optional[Loc] = _loc_field()


@dataclass
class Var(Expr):
    name: str
    loc: Optional[Loc] = _loc_field()


@dataclass
class App(Expr):
    fn: Expr
    args: list[Expr]
    loc: Optional[Loc] = _loc_field()


@dataclass
class Lambda(Expr):
    params: list[str]
    body: Expr
    param_tys: Optional[list[Optional["SurfaceTy"]]] = None
    loc: Optional[Loc] = _loc_field()


@dataclass
class Let(Expr):
    name: str
    bound: Expr
    body: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class If(Expr):
    cond: Expr
    then: Expr
    els: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class Match(Expr):
    scrutinee: Expr
    branches: list[tuple["Pattern", Expr]]
    loc: Optional[Loc] = _loc_field()


@dataclass
class Construct(Expr):
    name: str
    args: list[Expr]
    loc: Optional[Loc] = _loc_field()


@dataclass
class Tuple(Expr):
    elems: list[Expr]
    loc: Optional[Loc] = _loc_field()


BINOPS = ("+", "-", "*", "=", "<", "<=", ">", ">=", "&&", "||")


@dataclass
class BinOp(Expr):
    op: str  # one of BINOPS
    lhs: Expr
    rhs: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class Not(Expr):
    arg: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class Tester(Expr):
    """Internal node: does `arg` have head constructor `cname`?  Produced by
    template extraction and match compilation, never by the parser."""

    cname: str
    arg: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class Selector(Expr):
    """Internal node: field `index` of `arg`, assuming head `cname`."""

    cname: str
    index: int
    arg: Expr
    loc: Optional[Loc] = _loc_field()


class Pattern:
    loc: Optional[Loc]


@dataclass
class PVar(Pattern):
    name: str
    loc: Optional[Loc] = _loc_field()


@dataclass
class PWildcard(Pattern):
    loc: Optional[Loc] = _loc_field()


@dataclass
class PConstruct(Pattern):
    name: str
    args: list[Pattern]
    loc: Optional[Loc] = _loc_field()


@dataclass
class PTuple(Pattern):
    elems: list[Pattern]
    loc: Optional[Loc] = _loc_field()


@dataclass
class PIntLit(Pattern):
    value: int
    loc: Optional[Loc] = _loc_field()


@dataclass
class PBoolLit(Pattern):
    value: bool
    loc: Optional[Loc] = _loc_field()


# surface type expressions --------------------------------------------------


class SurfaceTy:
    pass


@dataclass
class STVar(SurfaceTy):
    name: str  # without the leading quote


@dataclass
class STCon(SurfaceTy):
    name: str
    args: list[SurfaceTy]


@dataclass
class STTuple(SurfaceTy):
    elems: list[SurfaceTy]


@dataclass
class STArrow(SurfaceTy):
    dom: SurfaceTy
    cod: SurfaceTy


# annotations and declarations ----------------------------------------------


class Annotation:
    pass


@dataclass
class Adm(Annotation):
    vars: list[str]


@dataclass
class Measure(Annotation):
    expr: Expr


@dataclass
class Auto(Annotation):
    pass


@dataclass
class Rewrite(Annotation):
    pass


class Decl:
    loc: Optional[Loc]


@dataclass
class TypeDecl(Decl):
    name: str
    params: list[str]  # type variable names, without quotes
    constructors: list[tuple[str, list[SurfaceTy]]]
    loc: Optional[Loc] = _loc_field()


@dataclass
class FunDecl(Decl):
    name: str
    params: list[str]
    body: Expr
    annotations: list[Annotation] = field(default_factory=list)
    is_rec: bool = False
    group: list[str] = field(default_factory=list)  # names in this rec group
    loc: Optional[Loc] = _loc_field()


@dataclass
class TheoremDecl(Decl):
    name: str
    params: list[tuple[str, Optional[SurfaceTy]]]
    body: Expr
    annotations: list[Annotation] = field(default_factory=list)
    loc: Optional[Loc] = _loc_field()


@dataclass
class Directive(Decl):
    kind: str  # "verify" | "instance"
    goal: Expr
    bound: Optional[int] = None
    loc: Optional[Loc] = _loc_field()


@dataclass
class SourceModule:
    decls: list[Decl]


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

KEYWORDS = {
    "type", "let", "rec", "and", "in", "fun", "function", "match", "with",
    "if", "then", "else", "of", "theorem", "verify", "instance", "upto",
    "true", "false", "not",
}

# longest first for maximal munch
_PUNCT = [
    "==>", "[@@", "::", ";;", "->", "<=", ">=", "<>", "&&", "||",
    "(", ")", "[", "]", ";", ",", "|", "=", "<", ">", "+", "-", "*", ":",
]

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHAR = _IDENT_START | set("0123456789'")


@dataclass
class Token:
    kind: str  # INT | LIDENT | UIDENT | TYVAR | KW | PUNCT | EOF
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("(*", i):
            depth, j = 1, i + 2
            while j < n and depth:
                if text.startswith("(*", j):
                    depth, j = depth + 1, j + 2
                elif text.startswith("*)", j):
                    depth, j = depth - 1, j + 2
                else:
                    j += 1
            if depth:
                raise ParseError("unterminated comment", text, i)
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], i))
            i = j
            continue
        if c == "'":
            j = i + 1
            while j < n and text[j] in _IDENT_CHAR:
                j += 1
            if j == i + 1:
                raise ParseError("stray quote", text, i)
            toks.append(Token("TYVAR", text[i + 1 : j], i))
            i = j
            continue
        if c in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_CHAR:
                j += 1
            word = text[i:j]
            # qualified name: Upper.lower is one identifier (List.length, CX.l)
            if (
                word[0].isupper()
                and j < n
                and text[j] == "."
                and j + 1 < n
                and (text[j + 1].islower() or text[j + 1] == "_")
            ):
                k = j + 1
                while k < n and text[k] in _IDENT_CHAR:
                    k += 1
                toks.append(Token("LIDENT", text[i:k], i))
                i = k
                continue
            if word in KEYWORDS:
                toks.append(Token("KW", word, i))
            elif word[0].isupper():
                toks.append(Token("UIDENT", word, i))
            else:
                toks.append(Token("LIDENT", word, i))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("PUNCT", p, i))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", text, i)
    toks.append(Token("EOF", "", n))
    return toks


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_CMP_OPS = ("=", "<>", "<", "<=", ">", ">=")
_CONTROL_KWS = ("fun", "function", "if", "match", "let")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self._fresh = 0

    # --- token plumbing ---

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, text: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.text == text and t.kind in ("PUNCT", "KW")

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.peek()
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", self.text, t.pos, expected=repr(text))
        return self.next()

    def lident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t.kind != "LIDENT":
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", self.text, t.pos, expected=what)
        return self.next().text

    def err(self, msg: str, expected: str | None = None) -> ParseError:
        t = self.peek()
        return ParseError(msg, self.text, t.pos, expected=expected)

    def fresh_param(self) -> str:
        self._fresh += 1
        return f"_fn{self._fresh}"

    # --- module / declarations ---

    def parse_module(self) -> SourceModule:
        decls = []
        while True:
            while self.eat(";;"):
                pass
            if self.peek().kind == "EOF":
                return SourceModule(decls)
            decls.extend(self.parse_decl())

    def parse_decl(self) -> list[Decl]:
        t = self.peek()
        if self.at("type"):
            return [self.parse_type_decl()]
        if self.at("let"):
            return self.parse_let_decl()
        if self.at("theorem"):
            return [self.parse_theorem()]
        if self.at("verify") or self.at("instance"):
            return [self.parse_directive()]
        raise ParseError(
            f"unexpected {t.text or 'end of input'!r}",
            self.text, t.pos, expected="a declaration or directive",
        )

    def parse_type_decl(self) -> TypeDecl:
        start = self.expect("type").pos
        params: list[str] = []
        if self.peek().kind == "TYVAR":
            params.append(self.next().text)
        elif self.at("(") and self.peek(1).kind == "TYVAR":
            self.next()
            params.append(self.next().text)
            while self.eat(","):
                t = self.peek()
                if t.kind != "TYVAR":
                    raise self.err("bad type parameter", expected="a type variable")
                params.append(self.next().text)
            self.expect(")")
        name = self.lident("type name")
        self.expect("=")
        self.eat("|")
        ctors = [self.parse_ctor()]
        while self.eat("|"):
            ctors.append(self.parse_ctor())
        seen = set()
        for cname, _ in ctors:
            if cname in seen:
                raise ParseError(f"duplicate constructor {cname}", self.text, start)
            seen.add(cname)
        return TypeDecl(name, params, ctors, loc=(start, self.peek().pos))

    def parse_ctor(self) -> tuple[str, list[SurfaceTy]]:
        t = self.peek()
        if t.kind != "UIDENT":
            raise self.err("bad constructor", expected="a capitalised constructor name")
        name = self.next().text
        fields: list[SurfaceTy] = []
        if self.eat("of"):
            fields.append(self.parse_ty_app())
            while self.eat("*"):
                fields.append(self.parse_ty_app())
        return name, fields

    def parse_let_decl(self) -> list[Decl]:
        start = self.expect("let").pos
        is_rec = bool(self.eat("rec"))
        bindings = [self.parse_binding()]
        while self.eat("and"):
            if len(bindings) >= 2:
                raise self.err("mutual groups are limited to pairs")
            bindings.append(self.parse_binding())
        group = [name for name, _, _, _ in bindings] if len(bindings) > 1 else []
        out = []
        for name, params, body, annots in bindings:
            out.append(
                FunDecl(name, params, body, annots, is_rec=is_rec,
                        group=group or [name], loc=(start, self.peek().pos))
            )
        return out

    def parse_binding(self) -> tuple[str, list[str], Expr, list[Annotation]]:
        name = self.lident("function name")
        params: list[str] = []
        while self.peek().kind == "LIDENT":
            p = self.next().text
            params.append(f"_p{len(params)}" if p == "_" else p)
        if len(set(params)) != len(params):
            raise self.err(f"duplicate parameter in definition of {name}")
        self.expect("=")
        body = self.parse_expr()
        annots = self.parse_annotations()
        if sum(isinstance(a, (Adm, Measure)) for a in annots) > 1:
            raise self.err(f"{name}: at most one of [@@adm]/[@@measure]")
        return name, params, body, annots

    def parse_theorem(self) -> TheoremDecl:
        start = self.expect("theorem").pos
        name = self.lident("theorem name")
        params: list[tuple[str, Optional[SurfaceTy]]] = []
        while True:
            t = self.peek()
            if t.kind == "LIDENT":
                params.append((self.next().text, None))
            elif self.at("(") and self.peek(1).kind == "LIDENT" and self.peek(2).text == ":":
                self.next()
                pname = self.next().text
                self.next()  # ':'
                params.append((pname, self.parse_ty()))
                self.expect(")")
            else:
                break
        if self.eat(":"):
            self.parse_ty()  # optional result annotation; theorems are bool
        self.expect("=")
        body = self.parse_expr()
        annots = self.parse_annotations()
        return TheoremDecl(name, params, body, annots, loc=(start, self.peek().pos))

    def parse_directive(self) -> Directive:
        t = self.next()
        kind = t.text
        bound = None
        if kind == "verify" and self.eat("upto"):
            bt = self.peek()
            if bt.kind != "INT":
                raise self.err("bad bound", expected="an integer after 'upto'")
            bound = int(self.next().text)
        goal = self.parse_expr()
        return Directive(kind, goal, bound, loc=(t.pos, self.peek().pos))

    def parse_annotations(self) -> list[Annotation]:
        annots: list[Annotation] = []
        while self.at("[@@"):
            self.next()
            which = self.lident("annotation name")
            if which == "adm":
                names = [self.lident("variable")]
                while self.eat(","):
                    names.append(self.lident("variable"))
                annots.append(Adm(names))
            elif which == "measure":
                annots.append(Measure(self.parse_expr()))
            elif which == "auto":
                annots.append(Auto())
            elif which == "rewrite":
                annots.append(Rewrite())
            else:
                raise self.err(f"unknown annotation {which!r}")
            self.expect("]")
        return annots

    # --- types ---

    def parse_ty(self) -> SurfaceTy:
        dom = self.parse_ty_prod()
        if self.eat("->"):
            return STArrow(dom, self.parse_ty())
        return dom

    def parse_ty_prod(self) -> SurfaceTy:
        elems = [self.parse_ty_app()]
        while self.eat("*"):
            elems.append(self.parse_ty_app())
        return elems[0] if len(elems) == 1 else STTuple(elems)

    def parse_ty_app(self) -> SurfaceTy:
        ty = self.parse_ty_atom()
        while self.peek().kind == "LIDENT":
            ty = STCon(self.next().text, [ty] if not isinstance(ty, _TyArgs) else ty.args)
        if isinstance(ty, _TyArgs):
            raise self.err("type argument list must be applied to a type name")
        return ty

    def parse_ty_atom(self) -> SurfaceTy:
        t = self.peek()
        if t.kind == "TYVAR":
            return STVar(self.next().text)
        if t.kind == "LIDENT":
            return STCon(self.next().text, [])
        if self.eat("("):
            first = self.parse_ty()
            if self.eat(","):
                args = [first, self.parse_ty()]
                while self.eat(","):
                    args.append(self.parse_ty())
                self.expect(")")
                return _TyArgs(args)
            self.expect(")")
            return first
        raise self.err("bad type", expected="a type")

    # --- expressions ---

    def parse_expr(self) -> Expr:
        if self.peek().text in _CONTROL_KWS and self.peek().kind == "KW":
            return self.parse_control()
        start = self.peek().pos
        first = self.parse_imp()
        if not self.at(","):
            return first
        elems = [first]
        while self.eat(","):
            if self.peek().text in _CONTROL_KWS and self.peek().kind == "KW":
                elems.append(self.parse_control())
                break
            elems.append(self.parse_imp())
        return Tuple(elems, loc=(start, self.peek().pos))

    def parse_control(self) -> Expr:
        t = self.peek()
        start = t.pos
        if self.eat("fun"):
            params, tys = self.parse_fun_params()
            self.expect("->")
            body = self.parse_expr()
            return Lambda(params, body, tys, loc=(start, self.peek().pos))
        if self.eat("function"):
            branches = self.parse_branches()
            p = self.fresh_param()
            return Lambda([p], Match(Var(p), branches), loc=(start, self.peek().pos))
        if self.eat("if"):
            cond = self.parse_expr()
            self.expect("then")
            then = self.parse_expr()
            self.expect("else")
            els = self.parse_expr()
            return If(cond, then, els, loc=(start, self.peek().pos))
        if self.eat("match"):
            scrut = self.parse_expr()
            self.expect("with")
            return Match(scrut, self.parse_branches(), loc=(start, self.peek().pos))
        if self.eat("let"):
            if self.at("rec"):
                raise self.err("local definitions cannot be recursive")
            name = self.lident("binding name")
            self.expect("=")
            bound = self.parse_expr()
            self.expect("in")
            body = self.parse_expr()
            return Let(name, bound, body, loc=(start, self.peek().pos))
        raise self.err("bad expression")

    def parse_fun_params(self) -> tuple[list[str], Optional[list[Optional[SurfaceTy]]]]:
        params: list[str] = []
        tys: list[Optional[SurfaceTy]] = []
        while True:
            t = self.peek()
            if t.kind == "LIDENT":
                p = self.next().text
                params.append(f"_p{len(params)}" if p == "_" else p)
                tys.append(None)
            elif self.at("(") and self.peek(1).kind == "LIDENT" and self.peek(2).text == ":":
                self.next()
                params.append(self.next().text)
                self.next()  # ':'
                tys.append(self.parse_ty())
                self.expect(")")
            else:
                break
        if not params:
            raise self.err("bad parameter list", expected="at least one parameter")
        if len(set(params)) != len(params):
            raise self.err("duplicate parameter")
        return params, (tys if any(t is not None for t in tys) else None)

    def parse_branches(self) -> list[tuple[Pattern, Expr]]:
        self.eat("|")
        branches = [self.parse_branch()]
        while self.eat("|"):
            branches.append(self.parse_branch())
        return branches

    def parse_branch(self) -> tuple[Pattern, Expr]:
        pat = self.parse_pattern()
        names = pattern_vars(pat)
        if len(set(names)) != len(names):
            raise self.err("pattern binds a variable twice")
        self.expect("->")
        return pat, self.parse_expr()

    def parse_imp(self) -> Expr:
        lhs = self.parse_or()
        if self.eat("==>"):
            rhs = self.parse_imp()
            return BinOp("||", Not(lhs, loc=lhs.loc), rhs, loc=_join(lhs, rhs))
        return lhs

    def parse_or(self) -> Expr:
        lhs = self.parse_and()
        if self.eat("||"):
            rhs = self.parse_or()
            return BinOp("||", lhs, rhs, loc=_join(lhs, rhs))
        return lhs

    def parse_and(self) -> Expr:
        lhs = self.parse_cmp()
        if self.eat("&&"):
            rhs = self.parse_and()
            return BinOp("&&", lhs, rhs, loc=_join(lhs, rhs))
        return lhs

    def parse_cmp(self) -> Expr:
        lhs = self.parse_cons()
        while self.peek().kind == "PUNCT" and self.peek().text in _CMP_OPS:
            op = self.next().text
            rhs = self.parse_cons()
            if op == "<>":
                lhs = Not(BinOp("=", lhs, rhs, loc=_join(lhs, rhs)), loc=_join(lhs, rhs))
            else:
                lhs = BinOp(op, lhs, rhs, loc=_join(lhs, rhs))
        return lhs

    def parse_cons(self) -> Expr:
        head = self.parse_add()
        if self.eat("::"):
            tail = self.parse_cons()
            return Construct("Cons", [head, tail], loc=_join(head, tail))
        return head

    def parse_add(self) -> Expr:
        lhs = self.parse_mul()
        while self.peek().kind == "PUNCT" and self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.parse_mul()
            lhs = BinOp(op, lhs, rhs, loc=_join(lhs, rhs))
        return lhs

    def parse_mul(self) -> Expr:
        lhs = self.parse_unary()
        while self.at("*"):
            self.next()
            rhs = self.parse_unary()
            lhs = BinOp("*", lhs, rhs, loc=_join(lhs, rhs))
        return lhs

    def parse_unary(self) -> Expr:
        t = self.peek()
        if self.at("-"):
            self.next()
            arg = self.parse_unary()
            if isinstance(arg, IntLit):
                return IntLit(-arg.value, loc=(t.pos, self.peek().pos))
            return BinOp("-", IntLit(0), arg, loc=(t.pos, self.peek().pos))
        return self.parse_app()

    def parse_app(self) -> Expr:
        t = self.peek()
        if self.at("not"):
            self.next()
            return Not(self.parse_app(), loc=(t.pos, self.peek().pos))
        if t.kind == "UIDENT":
            self.next()
            args: list[Expr] = []
            if self._at_atom():
                arg = self.parse_atom()
                args = list(arg.elems) if isinstance(arg, Tuple) else [arg]
            return Construct(t.text, args, loc=(t.pos, self.peek().pos))
        fn = self.parse_atom()
        args = []
        while self._at_atom():
            args.append(self.parse_atom())
        if not args:
            return fn
        return App(fn, args, loc=(t.pos, self.peek().pos))

    def _at_atom(self) -> bool:
        t = self.peek()
        if t.kind in ("INT", "LIDENT", "UIDENT"):
            return True
        if t.kind == "KW" and t.text in ("true", "false"):
            return True
        return t.kind == "PUNCT" and t.text in ("(", "[")

    def parse_atom(self) -> Expr:
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return IntLit(int(t.text), loc=(t.pos, t.pos + len(t.text)))
        if t.kind == "KW" and t.text in ("true", "false"):
            self.next()
            return BoolLit(t.text == "true", loc=(t.pos, t.pos + len(t.text)))
        if t.kind == "LIDENT":
            self.next()
            return Var(t.text, loc=(t.pos, t.pos + len(t.text)))
        if t.kind == "UIDENT":
            self.next()
            return Construct(t.text, [], loc=(t.pos, t.pos + len(t.text)))
        if self.eat("["):
            if self.eat("]"):
                return Construct("Nil", [], loc=(t.pos, self.peek().pos))
            elems = [self.parse_expr_no_tuple()]
            while self.eat(";"):
                elems.append(self.parse_expr_no_tuple())
            self.expect("]")
            out: Expr = Construct("Nil", [], loc=(t.pos, self.peek().pos))
            for e in reversed(elems):
                out = Construct("Cons", [e, out], loc=(t.pos, self.peek().pos))
            return out
        if self.eat("("):
            # operator section (+) etc.
            nt = self.peek()
            if nt.kind == "PUNCT" and nt.text in BINOPS and self.peek(1).text == ")":
                self.next()
                self.next()
                return Var(nt.text, loc=(t.pos, self.peek().pos))
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise self.err(f"unexpected {t.text or 'end of input'!r}", expected="an expression")

    def parse_expr_no_tuple(self) -> Expr:
        # list-literal elements: ';' separates, ',' still builds tuples
        if self.peek().text in _CONTROL_KWS and self.peek().kind == "KW":
            return self.parse_control()
        first = self.parse_imp()
        if not self.at(","):
            return first
        elems = [first]
        while self.eat(","):
            elems.append(self.parse_imp())
        return Tuple(elems)

    # --- patterns ---

    def parse_pattern(self) -> Pattern:
        first = self.parse_pat_cons()
        if not self.at(","):
            return first
        elems = [first]
        while self.eat(","):
            elems.append(self.parse_pat_cons())
        return PTuple(elems)

    def parse_pat_cons(self) -> Pattern:
        head = self.parse_pat_atom()
        if self.eat("::"):
            return PConstruct("Cons", [head, self.parse_pat_cons()])
        return head

    def parse_pat_atom(self) -> Pattern:
        t = self.peek()
        if t.kind == "LIDENT":
            self.next()
            if t.text == "_":
                return PWildcard(loc=(t.pos, t.pos + 1))
            return PVar(t.text, loc=(t.pos, t.pos + len(t.text)))
        if t.kind == "INT":
            self.next()
            return PIntLit(int(t.text))
        if self.at("-") and self.peek(1).kind == "INT":
            self.next()
            return PIntLit(-int(self.next().text))
        if t.kind == "KW" and t.text in ("true", "false"):
            self.next()
            return PBoolLit(t.text == "true")
        if t.kind == "UIDENT":
            self.next()
            args: list[Pattern] = []
            nt = self.peek()
            if nt.kind in ("LIDENT", "UIDENT", "INT") or nt.text in ("(", "[", "true", "false"):
                sub = self.parse_pat_arg()
                args = list(sub.elems) if isinstance(sub, PTuple) else [sub]
            return PConstruct(t.text, args)
        if self.eat("["):
            if self.eat("]"):
                return PConstruct("Nil", [])
            elems = [self.parse_pattern()]
            while self.eat(";"):
                elems.append(self.parse_pattern())
            self.expect("]")
            out: Pattern = PConstruct("Nil", [])
            for p in reversed(elems):
                out = PConstruct("Cons", [p, out])
            return out
        if self.eat("("):
            inner = self.parse_pattern()
            self.expect(")")
            return inner
        raise self.err(f"unexpected {t.text or 'end of input'!r}", expected="a pattern")

    def parse_pat_arg(self) -> Pattern:
        t = self.peek()
        if self.eat("("):
            inner = self.parse_pattern()
            self.expect(")")
            return inner
        if t.kind == "LIDENT":
            self.next()
            return PWildcard() if t.text == "_" else PVar(t.text)
        if t.kind == "INT":
            self.next()
            return PIntLit(int(t.text))
        if t.kind == "KW" and t.text in ("true", "false"):
            self.next()
            return PBoolLit(t.text == "true")
        if t.kind == "UIDENT":
            self.next()
            return PConstruct(t.text, [])
        if self.eat("["):
            if self.eat("]"):
                return PConstruct("Nil", [])
            elems = [self.parse_pattern()]
            while self.eat(";"):
                elems.append(self.parse_pattern())
            self.expect("]")
            out: Pattern = PConstruct("Nil", [])
            for p in reversed(elems):
                out = PConstruct("Cons", [p, out])
            return out
        raise self.err("bad constructor argument", expected="a pattern")


class _TyArgs(SurfaceTy):
    """Parser-internal: a parenthesised comma list awaiting a type name."""

    def __init__(self, args: list[SurfaceTy]):
        self.args = args


def _join(a: Expr, b: Expr) -> Optional[Loc]:
    if a.loc and b.loc:
        return (a.loc[0], b.loc[1])
    return a.loc or b.loc


# underscore is lexed as an identifier character sequence; patch the lexer
# view of a lone "_" to behave as LIDENT "_" (wildcard in binding positions)


def parse_module(text: str) -> SourceModule:
    """Parse a whole source file.  Raises ParseError (never crashes) on bad
    input."""
    return _Parser(text).parse_module()


def parse_expr(text: str) -> Expr:
    """Parse a single expression, requiring all input to be consumed."""
    p = _Parser(text)
    while p.eat(";;"):
        pass
    e = p.parse_expr()
    while p.eat(";;"):
        pass
    if p.peek().kind != "EOF":
        t = p.peek()
        raise ParseError(f"trailing input {t.text!r}", text, t.pos)
    return e


# ---------------------------------------------------------------------------
# pretty printer
# ---------------------------------------------------------------------------

_PREC = {"||": 2, "&&": 3, "=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 6, "-": 6, "*": 7}
_RIGHT_ASSOC = {"||", "&&"}
_P_TUPLE, _P_CONS, _P_APP, _P_ATOM = 1, 5, 9, 10


def pretty_expr(e: Expr, prec: int = 0) -> str:
    s, p = _pp(e)
    return f"({s})" if p < prec else s


def _pp(e: Expr) -> tuple[str, int]:
    match e:
        case IntLit(v):
            return (str(v), _P_ATOM) if v >= 0 else (f"({v})", _P_ATOM)
        case BoolLit(v):
            return ("true" if v else "false", _P_ATOM)
        case Var(name):
            if name in BINOPS:
                return (f"({name})", _P_ATOM)
            return (name, _P_ATOM)
        case Not(BinOp("=", a, b)):
            return (f"{pretty_expr(a, _P_CONS)} <> {pretty_expr(b, _P_CONS)}", 4)
        case Not(arg):
            return (f"not {pretty_expr(arg, _P_ATOM)}", _P_APP)
        case BinOp(op, a, b):
            p = _PREC[op]
            if op in _RIGHT_ASSOC:
                return (f"{pretty_expr(a, p + 1)} {op} {pretty_expr(b, p)}", p)
            return (f"{pretty_expr(a, p)} {op} {pretty_expr(b, p + 1)}", p)
        case App(fn, args):
            parts = [pretty_expr(fn, _P_ATOM)] + [pretty_expr(a, _P_ATOM) for a in args]
            return (" ".join(parts), _P_APP)
        case Construct("Nil", []):
            return ("[]", _P_ATOM)
        case Construct("Cons", [h, t]):
            return (f"{pretty_expr(h, _P_CONS + 1)} :: {pretty_expr(t, _P_CONS)}", _P_CONS)
        case Construct(name, []):
            return (name, _P_ATOM)
        case Construct(name, [a]):
            return (f"{name} {pretty_expr(a, _P_ATOM)}", _P_APP)
        case Construct(name, args):
            inner = ", ".join(pretty_expr(a, _P_TUPLE + 1) for a in args)
            return (f"{name} ({inner})", _P_APP)
        case Tuple(elems):
            inner = ", ".join(pretty_expr(x, _P_TUPLE + 1) for x in elems)
            return (f"({inner})", _P_ATOM)
        case Lambda(params, body, ptys):
            ps = _param_strs(params, ptys)
            return (f"fun {' '.join(ps)} -> {pretty_expr(body)}", 0)
        case Let(name, bound, body):
            return (f"let {name} = {pretty_expr(bound, _P_TUPLE)} in {pretty_expr(body)}", 0)
        case If(c, t, f):
            return (
                f"if {pretty_expr(c, _P_TUPLE)} then {pretty_expr(t, _P_TUPLE)} else {pretty_expr(f, _P_TUPLE)}",
                0,
            )
        case Match(scrut, branches):
            arms = " | ".join(
                f"{pretty_pattern(p)} -> {pretty_expr(b, _P_TUPLE)}" for p, b in branches
            )
            return (f"match {pretty_expr(scrut, _P_TUPLE)} with {arms}", 0)
        case Tester(cname, arg):
            return (f"is_{cname} {pretty_expr(arg, _P_ATOM)}", _P_APP)
        case Selector(cname, index, arg):
            return (f"sel_{cname}_{index} {pretty_expr(arg, _P_ATOM)}", _P_APP)
    raise TypeError(f"not an expression: {e!r}")


def _param_strs(params: list[str], ptys) -> list[str]:
    out = []
    for i, p in enumerate(params):
        ty = ptys[i] if ptys else None
        out.append(f"({p} : {pretty_ty(ty)})" if ty is not None else p)
    return out


def pretty_pattern(p: Pattern, nested: bool = False) -> str:
    match p:
        case PVar(name):
            return name
        case PWildcard():
            return "_"
        case PIntLit(v):
            return str(v) if v >= 0 else f"({v})"
        case PBoolLit(v):
            return "true" if v else "false"
        case PConstruct("Nil", []):
            return "[]"
        case PConstruct("Cons", [h, t]):
            s = f"{pretty_pattern(h, nested=True)} :: {pretty_pattern(t)}"
            return f"({s})" if nested else s
        case PConstruct(name, []):
            return name
        case PConstruct(name, [a]):
            return f"{name} ({pretty_pattern(a)})"
        case PConstruct(name, args):
            return f"{name} ({', '.join(pretty_pattern(a) for a in args)})"
        case PTuple(elems):
            return f"({', '.join(pretty_pattern(x, nested=True) for x in elems)})"
    raise TypeError(f"not a pattern: {p!r}")


def pretty_ty(t: SurfaceTy) -> str:
    match t:
        case STVar(name):
            return f"'{name}"
        case STCon(name, []):
            return name
        case STCon(name, [arg]):
            return f"{_ty_atom(arg)} {name}"
        case STCon(name, args):
            return f"({', '.join(pretty_ty(a) for a in args)}) {name}"
        case STTuple(elems):
            return " * ".join(_ty_atom(x) for x in elems)
        case STArrow(d, c):
            return f"{_ty_atom(d)} -> {pretty_ty(c)}"
    raise TypeError(f"not a type: {t!r}")


def _ty_atom(t: SurfaceTy) -> str:
    s = pretty_ty(t)
    return f"({s})" if isinstance(t, (STTuple, STArrow)) else s


def _pretty_annot(a: Annotation) -> str:
    match a:
        case Adm(vars):
            return f"[@@adm {','.join(vars)}]"
        case Measure(e):
            return f"[@@measure {pretty_expr(e)}]"
        case Auto():
            return "[@@auto]"
        case Rewrite():
            return "[@@rewrite]"
    raise TypeError(f"not an annotation: {a!r}")


def pretty(d: Decl) -> str:
    """Render a declaration back to surface text; reparsing yields an
    alpha-equivalent declaration."""
    match d:
        case TypeDecl(name, params, ctors):
            if not params:
                head = f"type {name}"
            elif len(params) == 1:
                head = f"type '{params[0]} {name}"
            else:
                head = f"type ({', '.join(chr(39) + p for p in params)}) {name}"
            alts = " | ".join(
                cn + (f" of {' * '.join(_ty_atom(f) for f in fs)}" if fs else "")
                for cn, fs in ctors
            )
            return f"{head} = {alts}"
        case FunDecl(name, params, body, annots, is_rec):
            kw = "let rec" if is_rec else "let"
            suffix = "".join(" " + _pretty_annot(a) for a in annots)
            # 'function' sugar: single param immediately matched and unused
            if len(params) == 1 and isinstance(body, Match):
                scrut = body.scrutinee
                if (
                    isinstance(scrut, Var)
                    and scrut.name == params[0]
                    and all(params[0] not in free_vars(b) - set(pattern_vars(p))
                            for p, b in body.branches)
                ):
                    arms = " | ".join(
                        f"{pretty_pattern(p)} -> {pretty_expr(b, _P_TUPLE)}"
                        for p, b in body.branches
                    )
                    return f"{kw} {name} = function {arms}{suffix}"
            head = " ".join([name] + params) if params else name
            return f"{kw} {head} = {pretty_expr(body)}{suffix}"
        case TheoremDecl(name, params, body, annots):
            ps = "".join(
                f" ({pn} : {pretty_ty(pt)})" if pt is not None else f" {pn}"
                for pn, pt in params
            )
            suffix = "".join(" " + _pretty_annot(a) for a in annots)
            return f"theorem {name}{ps} = {pretty_expr(body)}{suffix}"
        case Directive(kind, goal, bound):
            upto = f"upto {bound} " if bound is not None else ""
            return f"{kind} {upto}{pretty_expr(goal, _P_ATOM)}"
    raise TypeError(f"not a declaration: {d!r}")


def pretty_module(m: SourceModule) -> str:
    return "\n".join(pretty(d) for d in m.decls)


# ---------------------------------------------------------------------------
# structural helpers
# ---------------------------------------------------------------------------


def pattern_vars(p: Pattern) -> list[str]:
    match p:
        case PVar(name):
            return [name]
        case PConstruct(_, args):
            return [v for a in args for v in pattern_vars(a)]
        case PTuple(elems):
            return [v for x in elems for v in pattern_vars(x)]
        case _:
            return []


def free_vars(e: Expr) -> set[str]:
    match e:
        case IntLit() | BoolLit():
            return set()
        case Var(name):
            return {name}
        case App(fn, args):
            return free_vars(fn).union(*(free_vars(a) for a in args)) if args else free_vars(fn)
        case Lambda(params, body):
            return free_vars(body) - set(params)
        case Let(name, bound, body):
            return free_vars(bound) | (free_vars(body) - {name})
        case If(c, t, f):
            return free_vars(c) | free_vars(t) | free_vars(f)
        case Match(scrut, branches):
            out = free_vars(scrut)
            for p, b in branches:
                out |= free_vars(b) - set(pattern_vars(p))
            return out
        case Construct(_, args) | Tuple(args):
            out: set[str] = set()
            for a in args:
                out |= free_vars(a)
            return out
        case BinOp(_, a, b):
            return free_vars(a) | free_vars(b)
        case Not(a) | Tester(_, a) | Selector(_, _, a):
            return free_vars(a)
    raise TypeError(f"not an expression: {e!r}")


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}'{i}" in avoid:
        i += 1
    return f"{base}'{i}"


def subst(e: Expr, sub: dict[str, Expr]) -> Expr:
    """Capture-avoiding substitution of free variables."""
    if not sub:
        return e
    match e:
        case IntLit() | BoolLit():
            return e
        case Var(name):
            return sub.get(name, e)
        case App(fn, args):
            return App(subst(fn, sub), [subst(a, sub) for a in args], loc=e.loc)
        case Lambda(params, body, ptys):
            sub2 = {k: v for k, v in sub.items() if k not in params}
            if not sub2:
                return e
            params2, body2 = _avoid_capture(params, body, sub2)
            return Lambda(params2, subst(body2, sub2), ptys, loc=e.loc)
        case Let(name, bound, body):
            bound2 = subst(bound, sub)
            sub2 = {k: v for k, v in sub.items() if k != name}
            if not sub2:
                return Let(name, bound2, body, loc=e.loc)
            names2, body2 = _avoid_capture([name], body, sub2)
            return Let(names2[0], bound2, subst(body2, sub2), loc=e.loc)
        case If(c, t, f):
            return If(subst(c, sub), subst(t, sub), subst(f, sub), loc=e.loc)
        case Match(scrut, branches):
            out = []
            for p, b in branches:
                bound = set(pattern_vars(p))
                sub2 = {k: v for k, v in sub.items() if k not in bound}
                if sub2:
                    p, b = _avoid_pattern_capture(p, b, sub2)
                    b = subst(b, sub2)
                out.append((p, b))
            return Match(subst(scrut, sub), out, loc=e.loc)
        case Construct(name, args):
            return Construct(name, [subst(a, sub) for a in args], loc=e.loc)
        case Tuple(elems):
            return Tuple([subst(x, sub) for x in elems], loc=e.loc)
        case BinOp(op, a, b):
            return BinOp(op, subst(a, sub), subst(b, sub), loc=e.loc)
        case Not(a):
            return Not(subst(a, sub), loc=e.loc)
        case Tester(cname, a):
            return Tester(cname, subst(a, sub), loc=e.loc)
        case Selector(cname, i, a):
            return Selector(cname, i, subst(a, sub), loc=e.loc)
    raise TypeError(f"not an expression: {e!r}")


def _replacement_fvs(sub: dict[str, Expr]) -> set[str]:
    out: set[str] = set()
    for v in sub.values():
        out |= free_vars(v)
    return out


def _avoid_capture(params: list[str], body: Expr, sub: dict[str, Expr]) -> tuple[list[str], Expr]:
    clash = _replacement_fvs(sub)
    if not any(p in clash for p in params):
        return params, body
    avoid = clash | free_vars(body) | set(params) | set(sub)
    ren: dict[str, Expr] = {}
    out = []
    for p in params:
        if p in clash:
            np = fresh_name(p, avoid)
            avoid.add(np)
            ren[p] = Var(np)
            out.append(np)
        else:
            out.append(p)
    return out, subst(body, ren)


def _avoid_pattern_capture(p: Pattern, body: Expr, sub: dict[str, Expr]) -> tuple[Pattern, Expr]:
    clash = _replacement_fvs(sub)
    pvars = pattern_vars(p)
    if not any(v in clash for v in pvars):
        return p, body
    avoid = clash | free_vars(body) | set(pvars) | set(sub)
    ren: dict[str, Expr] = {}
    pat_ren: dict[str, str] = {}
    for v in pvars:
        if v in clash:
            nv = fresh_name(v, avoid)
            avoid.add(nv)
            ren[v] = Var(nv)
            pat_ren[v] = nv
    return _rename_pattern(p, pat_ren), subst(body, ren)


def _rename_pattern(p: Pattern, ren: dict[str, str]) -> Pattern:
    match p:
        case PVar(name):
            return PVar(ren.get(name, name))
        case PConstruct(name, args):
            return PConstruct(name, [_rename_pattern(a, ren) for a in args])
        case PTuple(elems):
            return PTuple([_rename_pattern(x, ren) for x in elems])
        case _:
            return p


def expr_size(e: Expr) -> int:
    """Node count; the term-size measure used across the prover."""
    match e:
        case IntLit() | BoolLit() | Var():
            return 1
        case App(fn, args):
            return 1 + expr_size(fn) + sum(expr_size(a) for a in args)
        case Lambda(_, body):
            return 1 + expr_size(body)
        case Let(_, bound, body):
            return 1 + expr_size(bound) + expr_size(body)
        case If(c, t, f):
            return 1 + expr_size(c) + expr_size(t) + expr_size(f)
        case Match(scrut, branches):
            return 1 + expr_size(scrut) + sum(1 + expr_size(b) for _, b in branches)
        case Construct(_, args) | Tuple(args):
            return 1 + sum(expr_size(a) for a in args)
        case BinOp(_, a, b):
            return 1 + expr_size(a) + expr_size(b)
        case Not(a) | Tester(_, a) | Selector(_, _, a):
            return 1 + expr_size(a)
    raise TypeError(f"not an expression: {e!r}")


def subexprs(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of e and its subexpressions."""
    yield e
    match e:
        case App(fn, args):
            yield from subexprs(fn)
            for a in args:
                yield from subexprs(a)
        case Lambda(_, body) | Not(body) | Tester(_, body) | Selector(_, _, body):
            yield from subexprs(body)
        case Let(_, bound, body):
            yield from subexprs(bound)
            yield from subexprs(body)
        case If(c, t, f):
            yield from subexprs(c)
            yield from subexprs(t)
            yield from subexprs(f)
        case Match(scrut, branches):
            yield from subexprs(scrut)
            for _, b in branches:
                yield from subexprs(b)
        case Construct(_, args) | Tuple(args):
            for a in args:
                yield from subexprs(a)
        case BinOp(_, a, b):
            yield from subexprs(a)
            yield from subexprs(b)


# alpha equivalence ----------------------------------------------------------


def alpha_equal(a: Expr, b: Expr, env_a: dict[str, int] | None = None,
                env_b: dict[str, int] | None = None, depth: int = 0) -> bool:
    env_a = env_a or {}
    env_b = env_b or {}
    match a, b:
        case IntLit(x), IntLit(y):
            return x == y
        case BoolLit(x), BoolLit(y):
            return x == y
        case Var(x), Var(y):
            ia, ib = env_a.get(x), env_b.get(y)
            if ia is None and ib is None:
                return x == y
            return ia == ib
        case App(f1, a1), App(f2, a2):
            return (
                len(a1) == len(a2)
                and alpha_equal(f1, f2, env_a, env_b, depth)
                and all(alpha_equal(x, y, env_a, env_b, depth) for x, y in zip(a1, a2))
            )
        case Lambda(p1, b1), Lambda(p2, b2):
            if len(p1) != len(p2):
                return False
            ea, eb = dict(env_a), dict(env_b)
            for i, (x, y) in enumerate(zip(p1, p2)):
                ea[x] = eb[y] = depth + i
            return alpha_equal(b1, b2, ea, eb, depth + len(p1))
        case Let(n1, v1, b1), Let(n2, v2, b2):
            if not alpha_equal(v1, v2, env_a, env_b, depth):
                return False
            ea, eb = dict(env_a), dict(env_b)
            ea[n1] = eb[n2] = depth
            return alpha_equal(b1, b2, ea, eb, depth + 1)
        case If(c1, t1, f1), If(c2, t2, f2):
            return (
                alpha_equal(c1, c2, env_a, env_b, depth)
                and alpha_equal(t1, t2, env_a, env_b, depth)
                and alpha_equal(f1, f2, env_a, env_b, depth)
            )
        case Match(s1, br1), Match(s2, br2):
            if len(br1) != len(br2) or not alpha_equal(s1, s2, env_a, env_b, depth):
                return False
            for (p1, b1), (p2, b2) in zip(br1, br2):
                ok, ea, eb, d2 = _alpha_pattern(p1, p2, dict(env_a), dict(env_b), depth)
                if not ok or not alpha_equal(b1, b2, ea, eb, d2):
                    return False
            return True
        case Construct(n1, a1), Construct(n2, a2):
            return (
                n1 == n2
                and len(a1) == len(a2)
                and all(alpha_equal(x, y, env_a, env_b, depth) for x, y in zip(a1, a2))
            )
        case Tuple(e1), Tuple(e2):
            return len(e1) == len(e2) and all(
                alpha_equal(x, y, env_a, env_b, depth) for x, y in zip(e1, e2)
            )
        case BinOp(o1, l1, r1), BinOp(o2, l2, r2):
            return (
                o1 == o2
                and alpha_equal(l1, l2, env_a, env_b, depth)
                and alpha_equal(r1, r2, env_a, env_b, depth)
            )
        case Not(x), Not(y):
            return alpha_equal(x, y, env_a, env_b, depth)
        case Tester(c1, x), Tester(c2, y):
            return c1 == c2 and alpha_equal(x, y, env_a, env_b, depth)
        case Selector(c1, i1, x), Selector(c2, i2, y):
            return c1 == c2 and i1 == i2 and alpha_equal(x, y, env_a, env_b, depth)
    return False


def _alpha_pattern(p1: Pattern, p2: Pattern, ea: dict, eb: dict, depth: int):
    match p1, p2:
        case PVar(x), PVar(y):
            ea[x] = eb[y] = depth
            return True, ea, eb, depth + 1
        case PWildcard(), PWildcard():
            return True, ea, eb, depth
        case PIntLit(x), PIntLit(y):
            return (x == y), ea, eb, depth
        case PBoolLit(x), PBoolLit(y):
            return (x == y), ea, eb, depth
        case PConstruct(n1, a1), PConstruct(n2, a2):
            if n1 != n2 or len(a1) != len(a2):
                return False, ea, eb, depth
            for x, y in zip(a1, a2):
                ok, ea, eb, depth = _alpha_pattern(x, y, ea, eb, depth)
                if not ok:
                    return False, ea, eb, depth
            return True, ea, eb, depth
        case PTuple(a1), PTuple(a2):
            if len(a1) != len(a2):
                return False, ea, eb, depth
            for x, y in zip(a1, a2):
                ok, ea, eb, depth = _alpha_pattern(x, y, ea, eb, depth)
                if not ok:
                    return False, ea, eb, depth
            return True, ea, eb, depth
    return False, ea, eb, depth


def decl_fun_expr(d: FunDecl) -> Expr:
    """A FunDecl's meaning as one lambda (params folded in, nested lambdas
    flattened) — the normal form used when comparing definitions."""
    body = d.body
    params = list(d.params)
    while isinstance(body, Lambda):
        params += body.params
        body = body.body
    return Lambda(params, body) if params else body


def decl_alpha_equal(a: Decl, b: Decl) -> bool:
    """Declaration equivalence up to bound-variable names and the
    params-vs-lambda split (``let f x = e`` vs ``let f = fun x -> e``)."""
    match a, b:
        case TypeDecl(), TypeDecl():
            return (
                a.name == b.name
                and a.params == b.params
                and a.constructors == b.constructors
            )
        case FunDecl(), FunDecl():
            return (
                a.name == b.name
                and a.is_rec == b.is_rec
                and alpha_equal(decl_fun_expr(a), decl_fun_expr(b))
            )
        case TheoremDecl(), TheoremDecl():
            la = Lambda([p for p, _ in a.params], a.body)
            lb = Lambda([p for p, _ in b.params], b.body)
            return a.name == b.name and alpha_equal(la, lb)
        case Directive(), Directive():
            return a.kind == b.kind and a.bound == b.bound and alpha_equal(a.goal, b.goal)
    return False
