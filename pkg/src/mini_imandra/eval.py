"""Big-step call-by-value evaluator, model reflection, and counterexample
confirmation.

Admitted definitions are total, so the fuel budget (decremented once per
function call) exists only to turn an admission bug into a clean error
instead of a hang.  Values are first-order — closures appear transiently
when higher-order prelude functions run, but never in counterexamples,
since lowering eliminates functional values before any model is built.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from . import ordinal
from .syntax import (
    App,
    BinOp,
    BoolLit,
    Construct,
    Expr,
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
    pretty_expr,
)

# deep IML recursion (admitted functions on sizeable inputs) nests Python
# frames; raise the cap once, conservatively
if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructV:
    name: str
    args: tuple["Value", ...]


@dataclass(frozen=True)
class TupleV:
    items: tuple["Value", ...]


@dataclass(frozen=True)
class OrdinalV:
    value: ordinal.Ordinal


@dataclass(eq=False)
class ClosureV:
    params: tuple[str, ...]
    body: Expr
    env: dict


@dataclass(eq=False)
class PrimV:
    op: str
    args: tuple = ()


Value = Union[int, bool, ConstructV, TupleV, OrdinalV, ClosureV, PrimV]

DEFAULT_FUEL = 10_000_000
MAX_CALL_DEPTH = 1_200


class EvalError(Exception):
    def __init__(self, kind: str, msg: str):
        self.kind = kind  # FuelExhausted | MatchFailure | Unknown | BadValue
        super().__init__(f"{kind}: {msg}")


@dataclass
class Fuel:
    remaining: int = DEFAULT_FUEL
    # CPython 3.10 burns a native stack frame per interpreter frame, and the
    # native stack dies before RecursionError fires at this evaluator's frame
    # weight — so call nesting must be bounded here, not by sys.recursionlimit.
    depth: int = 0
    max_depth: int = MAX_CALL_DEPTH

    def tick(self):
        self.remaining -= 1
        if self.remaining < 0:
            raise EvalError("FuelExhausted", "call budget exhausted (admission bug?)")

    def enter(self):
        self.tick()
        self.depth += 1
        if self.depth > self.max_depth:
            raise EvalError("FuelExhausted", "call depth exhausted")

    def leave(self):
        self.depth -= 1


FunTable = Mapping[str, tuple[list[str], Expr]]  # name -> (params, body)

_PRIM_OPS = ("+", "-", "*", "=", "<", "<=", ">", ">=", "&&", "||")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval_expr(e: Expr, env: dict[str, Value], funs: FunTable, fuel: Fuel | None = None) -> Value:
    fuel = fuel if fuel is not None else Fuel()
    return _eval(e, env, funs, fuel)


def eval_call(fname: str, args: list[Value], funs: FunTable, fuel: Fuel | None = None) -> Value:
    fuel = fuel if fuel is not None else Fuel()
    params, body = funs[fname]
    if len(params) != len(args):
        raise EvalError("BadValue", f"{fname} expects {len(params)} arguments")
    fuel.enter()
    try:
        return _eval(body, dict(zip(params, args)), funs, fuel)
    finally:
        fuel.leave()


def _eval(e: Expr, env: dict[str, Value], funs: FunTable, fuel: Fuel) -> Value:
    match e:
        case IntLit(v):
            return v
        case BoolLit(v):
            return v
        case Var(name):
            if name in env:
                return env[name]
            if name in funs:
                params, body = funs[name]
                if not params:
                    fuel.enter()
                    try:
                        return _eval(body, {}, funs, fuel)
                    finally:
                        fuel.leave()
                return ClosureV(tuple(params), body, {})
            if name in _PRIM_OPS:
                return PrimV(name)
            raise EvalError("Unknown", f"unbound name {name!r}")
        case App(fn, args):
            v = _eval(fn, env, funs, fuel)
            vargs = [_eval(a, env, funs, fuel) for a in args]
            return _apply(v, vargs, funs, fuel)
        case Lambda(params, body):
            return ClosureV(tuple(params), body, dict(env))
        case Let(name, bound, body):
            v = _eval(bound, env, funs, fuel)
            inner = dict(env)
            inner[name] = v
            return _eval(body, inner, funs, fuel)
        case If(c, t, f):
            cond = _eval(c, env, funs, fuel)
            _want_bool(cond, c)
            return _eval(t if cond else f, env, funs, fuel)
        case Match(scrut, branches):
            v = _eval(scrut, env, funs, fuel)
            for pat, body in branches:
                bound = match_pattern(pat, v)
                if bound is not None:
                    inner = dict(env)
                    inner.update(bound)
                    return _eval(body, inner, funs, fuel)
            raise EvalError("MatchFailure", f"no branch matches {pretty_value(v)}")
        case Construct(name, args):
            return ConstructV(name, tuple(_eval(a, env, funs, fuel) for a in args))
        case Tuple(elems):
            return TupleV(tuple(_eval(x, env, funs, fuel) for x in elems))
        case BinOp("&&", a, b):
            va = _eval(a, env, funs, fuel)
            _want_bool(va, a)
            return _eval(b, env, funs, fuel) if va else False
        case BinOp("||", a, b):
            va = _eval(a, env, funs, fuel)
            _want_bool(va, a)
            return True if va else _eval(b, env, funs, fuel)
        case BinOp(op, a, b):
            return _binop(op, _eval(a, env, funs, fuel), _eval(b, env, funs, fuel))
        case Not(a):
            va = _eval(a, env, funs, fuel)
            _want_bool(va, a)
            return not va
        case Tester(cname, a):
            v = _eval(a, env, funs, fuel)
            if not isinstance(v, ConstructV):
                raise EvalError("BadValue", f"tester is_{cname} on {pretty_value(v)}")
            return v.name == cname
        case Selector(cname, index, a):
            v = _eval(a, env, funs, fuel)
            if not isinstance(v, ConstructV) or v.name != cname:
                raise EvalError(
                    "BadValue", f"selector sel_{cname}_{index} on {pretty_value(v)}"
                )
            return v.args[index]
    raise EvalError("Unknown", f"cannot evaluate {e!r}")


def _apply(v: Value, args: list[Value], funs: FunTable, fuel: Fuel) -> Value:
    while args:
        if isinstance(v, ClosureV):
            n = len(v.params)
            if len(args) < n:
                env = dict(v.env)
                env.update(zip(v.params, args))
                return ClosureV(v.params[len(args):], v.body, env)
            env = dict(v.env)
            env.update(zip(v.params, args[:n]))
            args = args[n:]
            fuel.enter()
            try:
                v = _eval(v.body, env, funs, fuel)
            finally:
                fuel.leave()
        elif isinstance(v, PrimV):
            have = v.args + tuple(args)
            if len(have) < 2:
                return PrimV(v.op, have)
            if len(have) > 2:
                raise EvalError("BadValue", f"operator {v.op} applied to {len(have)} arguments")
            return _binop(v.op, have[0], have[1])
        else:
            raise EvalError("BadValue", f"not a function: {pretty_value(v)}")
    return v


def _want_bool(v: Value, at: Expr) -> None:
    if not isinstance(v, bool):
        raise EvalError("BadValue", f"expected bool at {pretty_expr(at)}, got {pretty_value(v)}")


def _binop(op: str, a: Value, b: Value) -> Value:
    if op in ("+", "-", "*"):
        if not (isinstance(a, int) and not isinstance(a, bool)
                and isinstance(b, int) and not isinstance(b, bool)):
            raise EvalError("BadValue", f"arithmetic on non-integers ({op})")
        return a + b if op == "+" else a - b if op == "-" else a * b
    if op in ("<", "<=", ">", ">="):
        if not (isinstance(a, int) and isinstance(b, int)):
            raise EvalError("BadValue", f"comparison on non-integers ({op})")
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    if op == "=":
        return values_equal(a, b)
    if op in ("&&", "||"):  # reached via sections; both already evaluated
        if not (isinstance(a, bool) and isinstance(b, bool)):
            raise EvalError("BadValue", f"boolean operator {op} on non-bools")
        return (a and b) if op == "&&" else (a or b)
    raise EvalError("Unknown", f"operator {op!r}")


def values_equal(a: Value, b: Value) -> bool:
    if isinstance(a, (ClosureV, PrimV)) or isinstance(b, (ClosureV, PrimV)):
        raise EvalError("BadValue", "equality on functional values")
    return a == b


def match_pattern(p: Pattern, v: Value) -> Optional[dict[str, Value]]:
    match p:
        case PVar(name):
            return {name: v}
        case PWildcard():
            return {}
        case PIntLit(n):
            return {} if isinstance(v, int) and not isinstance(v, bool) and v == n else None
        case PBoolLit(b):
            return {} if isinstance(v, bool) and v == b else None
        case PConstruct(name, args):
            if not isinstance(v, ConstructV) or v.name != name or len(v.args) != len(args):
                return None
            out: dict[str, Value] = {}
            for sub, sv in zip(args, v.args):
                m = match_pattern(sub, sv)
                if m is None:
                    return None
                out.update(m)
            return out
        case PTuple(elems):
            if not isinstance(v, TupleV) or len(v.items) != len(elems):
                return None
            out = {}
            for sub, sv in zip(elems, v.items):
                m = match_pattern(sub, sv)
                if m is None:
                    return None
                out.update(m)
            return out
    return None


# ---------------------------------------------------------------------------
# value <-> expression and printing
# ---------------------------------------------------------------------------


def value_to_expr(v: Value) -> Expr:
    match v:
        case bool(b):
            return BoolLit(b)
        case int(n):
            return IntLit(n)
        case ConstructV(name, args):
            return Construct(name, [value_to_expr(a) for a in args])
        case TupleV(items):
            return Tuple([value_to_expr(x) for x in items])
        case OrdinalV(o):
            return _ordinal_to_expr(o)
    raise EvalError("BadValue", f"not a first-order value: {v!r}")


def expr_to_value(e: Expr) -> Value:
    """Inverse of value_to_expr on literal expressions."""
    match e:
        case IntLit(n):
            return n
        case BoolLit(b):
            return b
        case Construct(name, args):
            return ConstructV(name, tuple(expr_to_value(a) for a in args))
        case Tuple(elems):
            return TupleV(tuple(expr_to_value(x) for x in elems))
    raise EvalError("BadValue", f"not a literal: {pretty_expr(e)}")


def is_literal(e: Expr) -> bool:
    match e:
        case IntLit() | BoolLit():
            return True
        case Construct(_, args) | Tuple(args):
            return all(is_literal(a) for a in args)
    return False


def pretty_value(v: Value) -> str:
    """Surface rendering; proper lists print as [a; b]."""
    match v:
        case bool(b):
            return "true" if b else "false"
        case int(n):
            return str(n) if n >= 0 else f"({n})"
        case ConstructV():
            items = _as_list(v)
            if items is not None:
                return "[" + "; ".join(pretty_value(x) for x in items) + "]"
            if not v.args:
                return v.name
            return f"{v.name} ({', '.join(pretty_value(a) for a in v.args)})"
        case TupleV(items):
            return f"({', '.join(pretty_value(x) for x in items)})"
        case OrdinalV(o):
            return ordinal.pretty(o)
        case ClosureV():
            return "<fun>"
        case PrimV():
            return f"<op {v.op}>"
    return repr(v)


def _as_list(v: Value) -> Optional[list[Value]]:
    items = []
    while isinstance(v, ConstructV) and v.name == "Cons" and len(v.args) == 2:
        items.append(v.args[0])
        v = v.args[1]
    if isinstance(v, ConstructV) and v.name == "Nil" and not v.args:
        return items
    return None


# ordinal ADT bridge: the prelude represents ordinals as the datatype
#   type ordinal = Fin of int | OrdCons of ordinal * int * ordinal
# these converters let tests cross-check the datatype arithmetic against
# the native implementation in the ordinal module.


def ordinal_of_value(v: Value) -> ordinal.Ordinal:
    match v:
        case ConstructV("Fin", (n,)) if isinstance(n, int):
            return ordinal.Fin(n)
        case ConstructV("OrdCons", (e, c, r)) if isinstance(c, int):
            return ordinal.Cons(ordinal_of_value(e), c, ordinal_of_value(r))
    raise EvalError("BadValue", f"not an ordinal value: {pretty_value(v)}")


def value_of_ordinal(o: ordinal.Ordinal) -> Value:
    match o:
        case ordinal.Fin(n):
            return ConstructV("Fin", (n,))
        case ordinal.Cons(e, c, r):
            return ConstructV("OrdCons", (value_of_ordinal(e), c, value_of_ordinal(r)))
    raise EvalError("BadValue", f"not an ordinal: {o!r}")


def _ordinal_to_expr(o: ordinal.Ordinal) -> Expr:
    return value_to_expr(value_of_ordinal(o))


# ---------------------------------------------------------------------------
# counterexamples
# ---------------------------------------------------------------------------


@dataclass
class Counterexample:
    bindings: dict[str, Value]
    confirmed: bool = False
    diagnostic: Optional[str] = None

    def pretty(self) -> str:
        return "\n".join(
            f"CX: {name} = {pretty_value(v)}" for name, v in self.bindings.items()
        )


class ReflectError(Exception):
    pass


def reflect(model: dict[str, object], manifest) -> dict[str, Value]:
    """Map solver model terms back through the lowering manifest to source
    values.  Model terms arrive as int | bool | (ctor_name, [terms]).

    ``manifest`` needs two attributes: ``ctor_source`` (mangled constructor
    name -> source constructor name) and ``tuple_ctors`` (constructor names
    that encode tuples)."""

    def go(t) -> Value:
        if isinstance(t, bool) or (isinstance(t, int) and not isinstance(t, bool)):
            return t
        if isinstance(t, tuple) and len(t) == 2 and isinstance(t[0], str):
            name, args = t
            vals = tuple(go(a) for a in args)
            if name in manifest.tuple_ctors:
                return TupleV(vals)
            if name in manifest.ctor_source:
                return ConstructV(manifest.ctor_source[name], vals)
            raise ReflectError(f"model constructor {name!r} not in the lowering manifest")
        raise ReflectError(f"unreflectable model term {t!r}")

    return {name: go(t) for name, t in model.items()}


def check_cx(goal: Expr, cx: Counterexample, funs: FunTable, polarity: str,
             fuel: Fuel | None = None) -> bool:
    """Evaluate the goal under the counterexample bindings.  For ``verify``
    the CX must make the goal false; for ``instance`` it must make the
    predicate true.  Evaluation errors leave the CX unconfirmed with a
    diagnostic (a stale or unsound model)."""
    assert polarity in ("verify", "instance")
    body, env = goal, dict(cx.bindings)
    if isinstance(goal, Lambda):
        body = goal.body
        missing = [p for p in goal.params if p not in cx.bindings]
        if missing:
            cx.confirmed = False
            cx.diagnostic = f"bindings missing for {missing}"
            return False
    try:
        result = eval_expr(body, env, funs, fuel)
    except EvalError as e:
        cx.confirmed = False
        cx.diagnostic = f"evaluation failed: {e}"
        return False
    if not isinstance(result, bool):
        cx.confirmed = False
        cx.diagnostic = "goal did not evaluate to a boolean"
        return False
    cx.confirmed = (result is False) if polarity == "verify" else (result is True)
    if not cx.confirmed:
        cx.diagnostic = "model does not falsify the goal" if polarity == "verify" else \
            "model does not satisfy the predicate"
    return cx.confirmed
