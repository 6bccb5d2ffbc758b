"""Parser / pretty-printer tests: pinned corpus shapes, the round-trip
property on randomly generated declarations, parser totality, and the
structural helpers (free variables, substitution, alpha equivalence)."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mini_imandra.syntax import (
    Adm,
    App,
    Auto,
    BinOp,
    BoolLit,
    Construct,
    Decl,
    Directive,
    Expr,
    FunDecl,
    If,
    IntLit,
    Lambda,
    Let,
    Match,
    Measure,
    Not,
    ParseError,
    Pattern,
    PBoolLit,
    PConstruct,
    PIntLit,
    PTuple,
    PVar,
    PWildcard,
    Rewrite,
    STCon,
    STVar,
    TheoremDecl,
    Tuple,
    TypeDecl,
    Var,
    alpha_equal,
    decl_alpha_equal,
    free_vars,
    parse_expr,
    parse_module,
    pretty,
    pretty_expr,
    subexprs,
    subst,
)

ACK_SRC = """
let rec ack m n =
  if m <= 0 then n + 1
  else if n <= 0 then ack (m-1) 1
  else ack (m-1) (ack m (n-1))
[@@adm m,n]
"""

LEFT_PAD_SRC = """
let rec left_pad c n xs =
  if List.length xs >= n then xs
  else left_pad c n (c :: xs)
[@@measure Ordinal.of_int (n - List.length xs)]
"""

SAME_LEN_SRC = """
theorem same_len (l : int list) =
  List.length (List.map (fun x -> x + 1) l) = List.length l
[@@auto]
"""


def test_parse_ack():
    m = parse_module(ACK_SRC)
    assert len(m.decls) == 1
    d = m.decls[0]
    assert isinstance(d, FunDecl)
    assert d.name == "ack" and d.is_rec and d.params == ["m", "n"]
    assert d.annotations == [Adm(["m", "n"])]
    assert isinstance(d.body, If)
    # inner call: ack (m-1) (ack m (n-1))
    inner = d.body.els.els
    assert inner == App(
        Var("ack"),
        [BinOp("-", Var("m"), IntLit(1)),
         App(Var("ack"), [Var("m"), BinOp("-", Var("n"), IntLit(1))])],
    )


def test_parse_left_pad():
    d = parse_module(LEFT_PAD_SRC).decls[0]
    assert isinstance(d, FunDecl)
    assert d.params == ["c", "n", "xs"]
    (ann,) = d.annotations
    assert isinstance(ann, Measure)
    assert ann.expr == App(
        Var("Ordinal.of_int"),
        [BinOp("-", Var("n"), App(Var("List.length"), [Var("xs")]))],
    )


def test_parse_theorem():
    d = parse_module(SAME_LEN_SRC).decls[0]
    assert isinstance(d, TheoremDecl)
    assert d.name == "same_len"
    assert d.params == [("l", STCon("list", [STCon("int", [])]))]
    assert d.annotations == [Auto()]
    lam = d.body.lhs.args[0].args[0]
    assert lam == Lambda(["x"], BinOp("+", Var("x"), IntLit(1)))


def test_parse_empty():
    assert parse_module("").decls == []
    assert parse_module("  (* just a comment (* nested *) *)  ").decls == []


def test_parse_directives():
    m = parse_module("verify (0 = 0);; verify upto 5 (fun x -> x = x);; instance (fun l -> l = [])")
    v0, v5, inst = m.decls
    assert v0 == Directive("verify", BinOp("=", IntLit(0), IntLit(0)), None)
    assert v5.kind == "verify" and v5.bound == 5
    assert inst.kind == "instance" and inst.bound is None
    assert inst.goal == Lambda(["l"], BinOp("=", Var("l"), Construct("Nil", [])))


def test_parse_type_decl():
    d = parse_module("type 'a list2 = Nil2 | Cons2 of 'a * 'a list2").decls[0]
    assert d == TypeDecl(
        "list2",
        ["a"],
        [("Nil2", []), ("Cons2", [STVar("a"), STCon("list2", [STVar("a")])])],
    )
    two = parse_module("type ('a, 'b) pair = MkPair of 'a * 'b").decls[0]
    assert two.params == ["a", "b"]


def test_parse_match_and_sugar():
    src = "let rec length l = match l with | [] -> 0 | _ :: tl -> 1 + length tl"
    d = parse_module(src).decls[0]
    assert isinstance(d.body, Match)
    assert d.body.branches[0][0] == PConstruct("Nil", [])
    assert d.body.branches[1][0] == PConstruct("Cons", [PWildcard(), PVar("tl")])

    fn = parse_module("let rec length2 = function | [] -> 0 | _ :: tl -> 1 + length2 tl").decls[0]
    assert decl_alpha_equal(d, FunDecl("length", fn.params, fn.body, is_rec=True)) is False  # names differ
    # ... but the meaning matches modulo the name:
    fn_renamed = FunDecl("length", fn.params,
                         subst(fn.body, {"length2": Var("length")}), is_rec=True)
    assert decl_alpha_equal(d, fn_renamed)


def test_desugarings():
    assert parse_expr("a ==> b") == BinOp("||", Not(Var("a")), Var("b"))
    assert parse_expr("a <> b") == Not(BinOp("=", Var("a"), Var("b")))
    assert parse_expr("[1; 2]") == Construct(
        "Cons", [IntLit(1), Construct("Cons", [IntLit(2), Construct("Nil", [])])]
    )
    assert parse_expr("-x") == BinOp("-", IntLit(0), Var("x"))
    assert parse_expr("-3") == IntLit(-3)
    assert parse_expr("(+)") == Var("+")
    assert parse_expr("f (+) 0 l") == App(Var("f"), [Var("+"), IntLit(0), Var("l")])


def test_precedence():
    assert parse_expr("1 + 2 * 3") == BinOp("+", IntLit(1), BinOp("*", IntLit(2), IntLit(3)))
    assert parse_expr("a || b && c") == BinOp("||", Var("a"), BinOp("&&", Var("b"), Var("c")))
    assert parse_expr("x :: y :: []") == Construct(
        "Cons", [Var("x"), Construct("Cons", [Var("y"), Construct("Nil", [])])]
    )
    assert parse_expr("1 + 2 = 3") == BinOp("=", BinOp("+", IntLit(1), IntLit(2)), IntLit(3))
    assert parse_expr("a ==> b ==> c") == parse_expr("a ==> (b ==> c)")
    assert parse_expr("f x + g y") == BinOp(
        "+", App(Var("f"), [Var("x")]), App(Var("g"), [Var("y")])
    )


def test_mutual_pair():
    m = parse_module(
        "let rec even n = if n <= 0 then true else odd (n - 1) "
        "and odd n = if n <= 0 then false else even (n - 1)"
    )
    assert [d.name for d in m.decls] == ["even", "odd"]
    assert all(d.group == ["even", "odd"] for d in m.decls)
    with pytest.raises(ParseError):
        parse_module("let rec a x = x and b x = x and c x = x")


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as ei:
        parse_module("let f x = (x +")
    assert ei.value.line >= 1 and ei.value.col >= 1
    with pytest.raises(ParseError):
        parse_module("type t =")
    with pytest.raises(ParseError):
        parse_module("let f x x = x")  # duplicate params
    with pytest.raises(ParseError):
        parse_module("(* unterminated")


def test_arbitrary_precision_ints():
    big = 10**40
    assert parse_expr(str(big)) == IntLit(big)


# ---------------------------------------------------------------------------
# round trip
# ---------------------------------------------------------------------------


def _roundtrip(d: Decl):
    text = pretty(d)
    m = parse_module(text)
    assert len(m.decls) == 1, text
    assert decl_alpha_equal(m.decls[0], d), f"round-trip failed:\n{text}"


def test_roundtrip_corpus():
    for src in (ACK_SRC, LEFT_PAD_SRC, SAME_LEN_SRC):
        for d in parse_module(src).decls:
            _roundtrip(d)
    _roundtrip(Directive("verify", BinOp("=", IntLit(0), IntLit(0)), None))
    lowered = """
type int_list = Nil_int | Cons_int of int * int_list
let rec length_int = function | Nil_int -> 0 | Cons_int (_, tl) -> 1 + length_int tl
let map_lambda0 x = x + 1
let rec map1 = function | Nil_int -> Nil_int | Cons_int (x, tl) -> Cons_int (map_lambda0 x, map1 tl)
theorem same_len (l : int_list) = length_int (map1 l) = length_int l
"""
    for d in parse_module(lowered).decls:
        _roundtrip(d)


class _Gen:
    """Random well-formed AST generator for the round-trip property."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.counter = 0

    def name(self, prefix: str = "v") -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def expr(self, depth: int, env: list[str]) -> Expr:
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            leaf = r.randrange(4)
            if leaf == 0:
                return IntLit(r.randrange(-50, 50))
            if leaf == 1:
                return BoolLit(r.random() < 0.5)
            if leaf == 2 and env:
                return Var(r.choice(env))
            return Construct("Nil", [])
        kind = r.randrange(10)
        if kind == 0:
            op = r.choice(("+", "-", "*", "=", "<", "<=", ">", ">=", "&&", "||"))
            return BinOp(op, self.expr(depth - 1, env), self.expr(depth - 1, env))
        if kind == 1:
            return Not(self.expr(depth - 1, env))
        if kind == 2:
            return If(self.expr(depth - 1, env), self.expr(depth - 1, env), self.expr(depth - 1, env))
        if kind == 3:
            n = self.name("f")
            return App(Var(n), [self.expr(depth - 1, env) for _ in range(r.randrange(1, 3))])
        if kind == 4:
            p = self.name("x")
            return Lambda([p], self.expr(depth - 1, env + [p]))
        if kind == 5:
            n = self.name("b")
            return Let(n, self.expr(depth - 1, env), self.expr(depth - 1, env + [n]))
        if kind == 6:
            return Tuple([self.expr(depth - 1, env) for _ in range(2)])
        if kind == 7:
            h = self.expr(depth - 1, env)
            return Construct("Cons", [h, Construct("Nil", [])])
        if kind == 8:
            pat, bound = self.pattern(depth - 1)
            branches = [(pat, self.expr(depth - 1, env + bound)), (PWildcard(), self.expr(depth - 1, env))]
            return Match(self.expr(depth - 1, env), branches)
        return Construct("Pair", [self.expr(depth - 1, env), self.expr(depth - 1, env)])

    def pattern(self, depth: int) -> tuple[Pattern, list[str]]:
        r = self.rng
        k = r.randrange(6)
        if k == 0:
            n = self.name("p")
            return PVar(n), [n]
        if k == 1:
            return PWildcard(), []
        if k == 2:
            return PIntLit(r.randrange(-9, 9)), []
        if k == 3:
            return PBoolLit(r.random() < 0.5), []
        if k == 4 and depth > 0:
            h, hb = self.pattern(depth - 1)
            t, tb = self.pattern(depth - 1)
            if set(hb) & set(tb):
                return PWildcard(), []
            return PConstruct("Cons", [h, t]), hb + tb
        if k == 5 and depth > 0:
            a, ab = self.pattern(depth - 1)
            b, bb = self.pattern(depth - 1)
            if set(ab) & set(bb):
                return PWildcard(), []
            return PTuple([a, b]), ab + bb
        return PConstruct("Nil", []), []

    def decl(self) -> Decl:
        r = self.rng
        k = r.randrange(4)
        if k == 0:
            params = [self.name("a") for _ in range(r.randrange(0, 3))]
            return FunDecl(
                self.name("fn"), params,
                self.expr(3, list(params)), [], is_rec=r.random() < 0.5,
            )
        if k == 1:
            p = self.name("th_x")
            return TheoremDecl(self.name("thm"), [(p, None)], self.expr(3, [p]), [])
        if k == 2:
            return Directive(
                r.choice(("verify", "instance")),
                Lambda(["x"], self.expr(3, ["x"])),
                r.choice((None, 5)),
            )
        cname = "C" + self.name("t")
        return TypeDecl(
            self.name("ty"), ["a"],
            [("N" + cname, []), (cname, [STVar("a"), STCon("int", [])])],
        )


def test_roundtrip_random_decls():
    g = _Gen(seed=7)
    for _ in range(300):
        d = g.decl()
        if isinstance(d, Directive) and d.kind == "instance":
            d = Directive(d.kind, d.goal, None)  # instance takes no bound
        _roundtrip(d)


# ---------------------------------------------------------------------------
# totality and spans
# ---------------------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=60))
def test_parser_totality(text):
    try:
        parse_module(text)
    except ParseError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="ltrecfunmachwidothenls()[]|->=<>+-*;,:@ \n'_x1", max_size=80))
def test_parser_totality_tokenish(text):
    try:
        parse_module(text)
    except ParseError:
        pass


def test_spans_lie_within_input():
    for src in (ACK_SRC, LEFT_PAD_SRC, SAME_LEN_SRC):
        m = parse_module(src)
        for d in m.decls:
            assert d.loc is not None
            s, e = d.loc
            assert 0 <= s <= e <= len(src)
            body = d.body
            for sub in subexprs(body):
                if sub.loc is not None:
                    s, e = sub.loc
                    assert 0 <= s <= e <= len(src)


# ---------------------------------------------------------------------------
# structural helpers
# ---------------------------------------------------------------------------


def test_free_vars():
    e = parse_expr("fun x -> x + y")
    assert free_vars(e) == {"y"}
    m = parse_expr("match l with | [] -> a | h :: t -> h + go t")
    assert free_vars(m) == {"l", "a", "go"}
    assert free_vars(parse_expr("let x = y in x + x")) == {"y"}


def test_subst_capture_avoidance():
    # substituting y := x under a binder for x must rename the binder
    e = parse_expr("fun x -> x + y")
    out = subst(e, {"y": Var("x")})
    assert isinstance(out, Lambda)
    assert out.params[0] != "x"
    assert alpha_equal(out, Lambda(["z"], BinOp("+", Var("z"), Var("x"))))

    m = parse_expr("match l with | x :: t -> x + y | [] -> y")
    out = subst(m, {"y": Var("x")})
    got = out.branches[0][1]
    # the pattern variable was renamed away from x
    assert Var("x") in [got.lhs, got.rhs] or free_vars(got) >= {"x"}
    assert alpha_equal(
        out,
        parse_expr("match l with | z :: t -> z + x | [] -> x"),
    )


def test_alpha_equal():
    assert alpha_equal(parse_expr("fun x -> x"), parse_expr("fun y -> y"))
    assert not alpha_equal(parse_expr("fun x -> x"), parse_expr("fun y -> x"))
    assert alpha_equal(
        parse_expr("let a = 1 in a + b"), parse_expr("let c = 1 in c + b")
    )
    assert not alpha_equal(
        parse_expr("let a = 1 in a + b"), parse_expr("let c = 1 in c + c")
    )
    assert alpha_equal(
        parse_expr("match l with | h :: t -> h | [] -> 0"),
        parse_expr("match l with | x :: y -> x | [] -> 0"),
    )


def test_pretty_expr_shapes():
    assert pretty_expr(parse_expr("1 + 2 * 3")) == "1 + 2 * 3"
    assert pretty_expr(parse_expr("(1 + 2) * 3")) == "(1 + 2) * 3"
    assert pretty_expr(parse_expr("x :: y :: []")) == "x :: y :: []"
    assert pretty_expr(parse_expr("a <> b")) == "a <> b"
    assert pretty_expr(IntLit(-5)) == "(-5)"
