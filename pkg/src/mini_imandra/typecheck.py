"""Rank-1 polymorphic type inference plus the admissibility criteria that
gate definitions before they enter the logic.

Inference is classic Hindley-Milner with mutable unification variables;
top-level definitions generalise to schemes, local ``let`` stays
monomorphic.  Theorems and goal predicates must come out at ``bool``.
Matches must be exhaustive (a definition with an uncovered case is not a
total function, so it cannot be admitted); coverage is checked with the
usual pattern-matrix usefulness algorithm.

Admissibility:
  * types — first-order (no arrows in constructor fields), well-founded
    (some non-recursive constructor), uniformly recursive (self-references
    apply the type's own parameters verbatim);
  * functions — inside a recursive clique, functional arguments of calls to
    clique members must be identical across call sites and must be bare
    names (a parameter of the calling function or a top-level function), so
    specialisation terminates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Optional

from .syntax import (
    Adm,
    App,
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
    Pattern,
    PBoolLit,
    PConstruct,
    PIntLit,
    PTuple,
    PVar,
    PWildcard,
    STArrow,
    STCon,
    STTuple,
    STVar,
    Selector,
    SourceModule,
    SurfaceTy,
    Tester,
    TheoremDecl,
    Tuple,
    TypeDecl,
    Var,
    pattern_vars,
    pretty_expr,
)

# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

_tvar_ids = itertools.count()


class Type:
    pass


@dataclass(eq=False)
class TVar(Type):
    link: Optional[Type] = None
    id: int = dc_field(default_factory=lambda: next(_tvar_ids))


@dataclass(eq=False)
class TCon(Type):
    name: str  # "int", "bool", or a datatype name
    args: list[Type] = dc_field(default_factory=list)


@dataclass(eq=False)
class TTuple(Type):
    elems: list[Type] = dc_field(default_factory=list)


@dataclass(eq=False)
class TArrow(Type):
    dom: Type
    cod: Type


T_INT = TCon("int")
T_BOOL = TCon("bool")


def prune(t: Type) -> Type:
    while isinstance(t, TVar) and t.link is not None:
        t = t.link
    return t


def arrows(doms: list[Type], cod: Type) -> Type:
    for d in reversed(doms):
        cod = TArrow(d, cod)
    return cod


def strip_arrows(t: Type) -> tuple[list[Type], Type]:
    doms = []
    t = prune(t)
    while isinstance(t, TArrow):
        doms.append(t.dom)
        t = prune(t.cod)
    return doms, t


def occurs(v: TVar, t: Type) -> bool:
    t = prune(t)
    if t is v:
        return True
    match t:
        case TCon(_, args):
            return any(occurs(v, a) for a in args)
        case TTuple(elems):
            return any(occurs(v, x) for x in elems)
        case TArrow(d, c):
            return occurs(v, d) or occurs(v, c)
    return False


class UnifyMismatch(Exception):
    pass


def unify(a: Type, b: Type) -> None:
    a, b = prune(a), prune(b)
    if a is b:
        return
    if isinstance(a, TVar):
        if occurs(a, b):
            raise UnifyMismatch(f"infinite type: {type_to_str(b)}")
        a.link = b
        return
    if isinstance(b, TVar):
        unify(b, a)
        return
    match a, b:
        case TCon(n1, a1), TCon(n2, a2):
            if n1 != n2 or len(a1) != len(a2):
                raise UnifyMismatch(f"{type_to_str(a)} vs {type_to_str(b)}")
            for x, y in zip(a1, a2):
                unify(x, y)
        case TTuple(e1), TTuple(e2):
            if len(e1) != len(e2):
                raise UnifyMismatch(f"{type_to_str(a)} vs {type_to_str(b)}")
            for x, y in zip(e1, e2):
                unify(x, y)
        case TArrow(d1, c1), TArrow(d2, c2):
            unify(d1, d2)
            unify(c1, c2)
        case _:
            raise UnifyMismatch(f"{type_to_str(a)} vs {type_to_str(b)}")


def free_tvars(t: Type) -> list[TVar]:
    out: list[TVar] = []

    def go(t: Type):
        t = prune(t)
        match t:
            case TVar():
                if t not in out:
                    out.append(t)
            case TCon(_, args):
                for a in args:
                    go(a)
            case TTuple(elems):
                for x in elems:
                    go(x)
            case TArrow(d, c):
                go(d)
                go(c)

    go(t)
    return out


def has_arrow(t: Type) -> bool:
    t = prune(t)
    match t:
        case TArrow():
            return True
        case TCon(_, args):
            return any(has_arrow(a) for a in args)
        case TTuple(elems):
            return any(has_arrow(x) for x in elems)
    return False


def default_unbound_to_int(t: Type) -> None:
    """Bind every remaining free type variable to int (the canonical
    inhabited ground sort) — used when a goal stays polymorphic."""
    for v in free_tvars(t):
        v.link = T_INT


def type_to_str(t: Type, names: dict[int, str] | None = None) -> str:
    names = names if names is not None else {}

    def name_of(v: TVar) -> str:
        if v.id not in names:
            names[v.id] = "'" + "abcdefghijklmnopqrstuvwxyz"[len(names) % 26]
        return names[v.id]

    def go(t: Type, atom: bool) -> str:
        t = prune(t)
        match t:
            case TVar():
                return name_of(t)
            case TCon(name, []):
                return name
            case TCon(name, [a]):
                return f"{go(a, True)} {name}"
            case TCon(name, args):
                return f"({', '.join(go(a, False) for a in args)}) {name}"
            case TTuple(elems):
                s = " * ".join(go(x, True) for x in elems)
                return f"({s})" if atom else s
            case TArrow(d, c):
                s = f"{go(d, True)} -> {go(c, False)}"
                return f"({s})" if atom else s
        raise TypeError(f"not a type: {t!r}")

    return go(t, False)


@dataclass
class Scheme:
    qvars: list[TVar]
    body: Type

    def instantiate(self) -> Type:
        mapping = {v.id: TVar() for v in self.qvars}

        def go(t: Type) -> Type:
            t = prune(t)
            match t:
                case TVar():
                    return mapping.get(t.id, t)
                case TCon(name, args):
                    return TCon(name, [go(a) for a in args])
                case TTuple(elems):
                    return TTuple([go(x) for x in elems])
                case TArrow(d, c):
                    return TArrow(go(d), go(c))
            raise TypeError(f"not a type: {t!r}")

        return go(self.body)

    def __str__(self) -> str:
        return type_to_str(self.body)


def generalize(t: Type) -> Scheme:
    return Scheme(free_tvars(t), t)


def mono(t: Type) -> Scheme:
    return Scheme([], t)


# ---------------------------------------------------------------------------
# environment
# ---------------------------------------------------------------------------


@dataclass
class TypeInfo:
    name: str
    params: list[str]
    ctors: list[tuple[str, list[SurfaceTy]]]


@dataclass
class TypeEnv:
    types: dict[str, TypeInfo]
    values: dict[str, Scheme]
    ctor_owner: dict[str, str]

    def copy(self) -> "TypeEnv":
        return TypeEnv(dict(self.types), dict(self.values), dict(self.ctor_owner))

    def add_type(self, info: TypeInfo) -> None:
        self.types[info.name] = info
        for cname, _ in info.ctors:
            self.ctor_owner[cname] = info.name

    def ctor_sig(self, cname: str) -> tuple[list[Type], Type, TypeInfo]:
        """Instantiate a constructor: (field types, result type) at fresh
        type variables."""
        info = self.types[self.ctor_owner[cname]]
        fresh = {p: TVar() for p in info.params}
        fields = next(fs for cn, fs in info.ctors if cn == cname)
        field_tys = [surface_to_type(f, fresh, self) for f in fields]
        result = TCon(info.name, [fresh[p] for p in info.params])
        return field_tys, result, info


_INT_OP = Scheme([], arrows([T_INT, T_INT], T_INT))
_CMP_OP = Scheme([], arrows([T_INT, T_INT], T_BOOL))
_BOOL_OP = Scheme([], arrows([T_BOOL, T_BOOL], T_BOOL))


def _eq_scheme() -> Scheme:
    a = TVar()
    return Scheme([a], arrows([a, a], T_BOOL))


def builtin_env() -> TypeEnv:
    env = TypeEnv(types={}, values={}, ctor_owner={})
    env.add_type(TypeInfo("int", [], []))
    env.add_type(TypeInfo("bool", [], []))
    env.add_type(
        TypeInfo("list", ["a"], [("Nil", []), ("Cons", [STVar("a"), STCon("list", [STVar("a")])])])
    )
    for op in ("+", "-", "*"):
        env.values[op] = _INT_OP
    for op in ("<", "<=", ">", ">="):
        env.values[op] = _CMP_OP
    for op in ("&&", "||"):
        env.values[op] = _BOOL_OP
    env.values["="] = _eq_scheme()
    return env


def surface_to_type(st: SurfaceTy, scope: dict[str, Type], env: TypeEnv) -> Type:
    match st:
        case STVar(name):
            if name not in scope:
                scope[name] = TVar()
            return scope[name]
        case STCon(name, args):
            if name not in env.types:
                raise TypeCheckError(f"unknown type {name!r}")
            info = env.types[name]
            if len(args) != len(info.params):
                raise TypeCheckError(
                    f"type {name} expects {len(info.params)} argument(s), got {len(args)}"
                )
            return TCon(name, [surface_to_type(a, scope, env) for a in args])
        case STTuple(elems):
            return TTuple([surface_to_type(x, scope, env) for x in elems])
        case STArrow(d, c):
            return TArrow(surface_to_type(d, scope, env), surface_to_type(c, scope, env))
    raise TypeError(f"not a surface type: {st!r}")


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------


class TypeCheckError(Exception):
    def __init__(self, msg: str, loc=None):
        self.loc = loc
        super().__init__(msg)


class AdmissibilityError(Exception):
    """kind ∈ {NotWellFounded, HigherOrderData, NonUniformRecursion,
    NonSpecializable, Redefinition}"""

    def __init__(self, kind: str, name: str, explanation: str):
        self.kind = kind
        self.name = name
        self.explanation = explanation
        super().__init__(f"{kind}: {name}: {explanation}")


# ---------------------------------------------------------------------------
# inference
# ---------------------------------------------------------------------------


@dataclass
class TypedModule:
    module: SourceModule  # constructor arities normalised
    schemes: dict[str, Scheme]
    expr_types: dict[int, Type]  # id(expr node) -> monotype
    pat_types: dict[int, Type]
    env: TypeEnv  # environment after all declarations

    def type_of(self, e: Expr) -> Type:
        return prune(self.expr_types[id(e)])


def infer(m: SourceModule, env: TypeEnv) -> TypedModule:
    """Infer types for every declaration in order, extending a copy of env.
    Raises TypeCheckError on ill-typed input."""
    inf = _Inferencer(env.copy())
    decls = []
    i = 0
    while i < len(m.decls):
        d = m.decls[i]
        if isinstance(d, FunDecl) and len(d.group) == 2 and i + 1 < len(m.decls):
            partner = m.decls[i + 1]
            assert isinstance(partner, FunDecl) and partner.group == d.group
            decls.extend(inf.infer_fun_group([d, partner]))
            i += 2
            continue
        decls.append(inf.infer_decl(d))
        i += 1
    return TypedModule(SourceModule(decls), inf.schemes, inf.expr_types, inf.pat_types, inf.env)


class _Inferencer:
    def __init__(self, env: TypeEnv):
        self.env = env
        self.schemes: dict[str, Scheme] = {}
        self.expr_types: dict[int, Type] = {}
        self.pat_types: dict[int, Type] = {}

    def infer_decl(self, d: Decl) -> Decl:
        match d:
            case TypeDecl():
                self.register_type(d)
                return d
            case FunDecl():
                return self.infer_fun_group([d])[0]
            case TheoremDecl():
                return self.infer_theorem(d)
            case Directive():
                return self.infer_directive(d)
        raise TypeError(f"not a declaration: {d!r}")

    def register_type(self, d: TypeDecl) -> None:
        if d.name in self.env.types:
            raise AdmissibilityError("Redefinition", d.name, "type already declared")
        # make the name visible to its own constructor fields
        self.env.add_type(TypeInfo(d.name, d.params, d.constructors))
        scope: dict[str, Type] = {p: TVar() for p in d.params}
        for cname, fields in d.constructors:
            for f in fields:
                try:
                    surface_to_type(f, scope, self.env)
                except TypeCheckError as e:
                    raise TypeCheckError(f"in type {d.name}, constructor {cname}: {e}", d.loc)

    def infer_fun_group(self, ds: list[FunDecl]) -> list[Decl]:
        own: dict[str, TVar] = {}
        local = dict(self.env.values)
        for d in ds:
            if d.is_rec:
                own[d.name] = TVar()
                local[d.name] = mono(own[d.name])
        out = []
        fun_tys = []
        for d in ds:
            body = _normalize_ctors(d.body, self.env)
            ptys: list[Type] = [TVar() for _ in d.params]
            scope = dict(local)
            for p, t in zip(d.params, ptys):
                scope[p] = mono(t)
            try:
                tb = self.type_expr(body, scope)
            except UnifyMismatch as e:
                raise TypeCheckError(f"in {d.name}: {e}", d.loc)
            fty = arrows(ptys, tb)
            if d.is_rec:
                try:
                    unify(own[d.name], fty)
                except UnifyMismatch as e:
                    raise TypeCheckError(f"in {d.name}: recursive use disagrees: {e}", d.loc)
            out.append(FunDecl(d.name, d.params, body, d.annotations, d.is_rec, d.group, loc=d.loc))
            fun_tys.append(fty)
        for d, fty in zip(ds, fun_tys):
            sc = generalize(fty)
            self.schemes[d.name] = sc
            self.env.values[d.name] = sc
        return out

    def infer_theorem(self, d: TheoremDecl) -> Decl:
        body = _normalize_ctors(d.body, self.env)
        scope = dict(self.env.values)
        tyscope: dict[str, Type] = {}
        ptys = []
        for pname, pty in d.params:
            t = surface_to_type(pty, tyscope, self.env) if pty is not None else TVar()
            scope[pname] = mono(t)
            ptys.append(t)
        try:
            tb = self.type_expr(body, scope)
            unify(tb, T_BOOL)
        except UnifyMismatch as e:
            raise TypeCheckError(f"theorem {d.name}: body must be bool ({e})", d.loc)
        self.schemes[d.name] = generalize(arrows(ptys, T_BOOL))
        out = TheoremDecl(d.name, d.params, body, d.annotations, loc=d.loc)
        return out

    def infer_directive(self, d: Directive) -> Decl:
        goal = _normalize_ctors(d.goal, self.env)
        scope = dict(self.env.values)
        try:
            t = self.type_expr(goal, scope)
            _, result = strip_arrows(t)
            unify(result, T_BOOL)
        except UnifyMismatch as e:
            raise TypeCheckError(f"{d.kind} goal must be boolean-valued: {e}", d.loc)
        return Directive(d.kind, goal, d.bound, loc=d.loc)

    # --- expressions ---

    def type_expr(self, e: Expr, scope: dict[str, Scheme]) -> Type:
        t = self._type_expr(e, scope)
        self.expr_types[id(e)] = t
        return t

    def _type_expr(self, e: Expr, scope: dict[str, Scheme]) -> Type:
        match e:
            case IntLit():
                return T_INT
            case BoolLit():
                return T_BOOL
            case Var(name):
                if name not in scope:
                    raise TypeCheckError(f"unknown identifier {name!r}", e.loc)
                return scope[name].instantiate()
            case App(fn, args):
                tf = self.type_expr(fn, scope)
                for a in args:
                    ta = self.type_expr(a, scope)
                    res = TVar()
                    try:
                        unify(tf, TArrow(ta, res))
                    except UnifyMismatch as err:
                        raise TypeCheckError(f"bad application {pretty_expr(e)}: {err}", e.loc)
                    tf = res
                return tf
            case Lambda(params, body, ptys):
                tyscope: dict[str, Type] = {}
                tps = [
                    surface_to_type(ptys[i], tyscope, self.env)
                    if ptys and ptys[i] is not None
                    else TVar()
                    for i in range(len(params))
                ]
                inner = dict(scope)
                for p, t in zip(params, tps):
                    inner[p] = mono(t)
                tb = self.type_expr(body, inner)
                return arrows(tps, tb)
            case Let(name, bound, body):
                tb = self.type_expr(bound, scope)
                inner = dict(scope)
                inner[name] = mono(tb)
                return self.type_expr(body, inner)
            case If(c, t, f):
                unify(self.type_expr(c, scope), T_BOOL)
                tt = self.type_expr(t, scope)
                unify(tt, self.type_expr(f, scope))
                return tt
            case Match(scrut, branches):
                ts = self.type_expr(scrut, scope)
                result = TVar()
                for pat, body in branches:
                    inner = dict(scope)
                    self.type_pattern(pat, ts, inner)
                    unify(result, self.type_expr(body, inner))
                self.check_exhaustive(e, ts)
                return result
            case Construct(name, args):
                if name not in self.env.ctor_owner:
                    raise TypeCheckError(f"unknown constructor {name!r}", e.loc)
                field_tys, result, _ = self.env.ctor_sig(name)
                if len(args) != len(field_tys):
                    raise TypeCheckError(
                        f"constructor {name} expects {len(field_tys)} argument(s), got {len(args)}",
                        e.loc,
                    )
                for a, ft in zip(args, field_tys):
                    unify(self.type_expr(a, scope), ft)
                return result
            case Tuple(elems):
                return TTuple([self.type_expr(x, scope) for x in elems])
            case BinOp(op, a, b):
                ta, tb = self.type_expr(a, scope), self.type_expr(b, scope)
                if op in ("+", "-", "*"):
                    unify(ta, T_INT)
                    unify(tb, T_INT)
                    return T_INT
                if op in ("<", "<=", ">", ">="):
                    unify(ta, T_INT)
                    unify(tb, T_INT)
                    return T_BOOL
                if op in ("&&", "||"):
                    unify(ta, T_BOOL)
                    unify(tb, T_BOOL)
                    return T_BOOL
                unify(ta, tb)  # "="
                return T_BOOL
            case Not(a):
                unify(self.type_expr(a, scope), T_BOOL)
                return T_BOOL
            case Tester(cname, a):
                _, result, _ = self.env.ctor_sig(cname)
                unify(self.type_expr(a, scope), result)
                return T_BOOL
            case Selector(cname, index, a):
                field_tys, result, _ = self.env.ctor_sig(cname)
                unify(self.type_expr(a, scope), result)
                return field_tys[index]
        raise TypeError(f"not an expression: {e!r}")

    def type_pattern(self, p: Pattern, t: Type, scope: dict[str, Scheme]) -> None:
        self.pat_types[id(p)] = t
        match p:
            case PVar(name):
                scope[name] = mono(t)
            case PWildcard():
                pass
            case PIntLit():
                unify(t, T_INT)
            case PBoolLit():
                unify(t, T_BOOL)
            case PConstruct(name, args):
                if name not in self.env.ctor_owner:
                    raise TypeCheckError(f"unknown constructor {name!r} in pattern", p.loc)
                field_tys, result, _ = self.env.ctor_sig(name)
                if len(args) != len(field_tys):
                    raise TypeCheckError(
                        f"pattern {name} expects {len(field_tys)} argument(s), got {len(args)}",
                        p.loc,
                    )
                unify(t, result)
                for a, ft in zip(args, field_tys):
                    self.type_pattern(a, ft, scope)
            case PTuple(elems):
                tys = [TVar() for _ in elems]
                unify(t, TTuple(tys))
                for x, xt in zip(elems, tys):
                    self.type_pattern(x, xt, scope)

    # --- exhaustiveness (pattern-matrix usefulness) ---

    def check_exhaustive(self, m: Match, scrut_ty: Type) -> None:
        matrix = [[p] for p, _ in m.branches]
        if self._useful(matrix, [scrut_ty]):
            raise TypeCheckError(
                f"non-exhaustive match: {pretty_expr(m)[:60]}...", m.loc
            )

    def _useful(self, matrix: list[list[Pattern]], tys: list[Type]) -> bool:
        """Would an all-wildcard row still match something the matrix
        misses?"""
        if not tys:
            return not matrix
        t0 = prune(tys[0])
        heads = [row[0] for row in matrix]
        ctor_heads = {p.name for p in heads if isinstance(p, PConstruct)}
        if isinstance(t0, TCon) and t0.name in self.env.types and self.env.types[t0.name].ctors:
            info = self.env.types[t0.name]
            all_ctors = [cn for cn, _ in info.ctors]
            complete = set(all_ctors) <= ctor_heads
            if complete:
                for cn in all_ctors:
                    field_tys, result, _ = self.env.ctor_sig(cn)
                    unify(result, t0)
                    if self._useful(
                        self._specialize(matrix, cn, len(field_tys)),
                        field_tys + tys[1:],
                    ):
                        return True
                return False
            return self._useful(self._default(matrix), tys[1:])
        if isinstance(t0, TCon) and t0.name == "bool":
            bools = {p.value for p in heads if isinstance(p, PBoolLit)}
            if bools == {True, False}:
                return any(
                    self._useful(self._specialize_lit(matrix, PBoolLit, v), tys[1:])
                    for v in (True, False)
                )
            return self._useful(self._default(matrix), tys[1:])
        if isinstance(t0, TTuple):
            n = len(t0.elems)
            rows = []
            for row in matrix:
                h = row[0]
                if isinstance(h, PTuple):
                    rows.append(list(h.elems) + row[1:])
                elif isinstance(h, (PVar, PWildcard)):
                    rows.append([PWildcard()] * n + row[1:])
            return self._useful(rows, list(t0.elems) + tys[1:])
        # ints and anything else: literals never form a complete signature
        return self._useful(self._default(matrix), tys[1:])

    @staticmethod
    def _specialize(matrix: list[list[Pattern]], cname: str, arity: int) -> list[list[Pattern]]:
        out = []
        for row in matrix:
            h = row[0]
            if isinstance(h, PConstruct) and h.name == cname:
                out.append(list(h.args) + row[1:])
            elif isinstance(h, (PVar, PWildcard)):
                out.append([PWildcard()] * arity + row[1:])
        return out

    @staticmethod
    def _specialize_lit(matrix, cls, value) -> list[list[Pattern]]:
        out = []
        for row in matrix:
            h = row[0]
            if isinstance(h, cls) and h.value == value:
                out.append(row[1:])
            elif isinstance(h, (PVar, PWildcard)):
                out.append(row[1:])
        return out

    @staticmethod
    def _default(matrix: list[list[Pattern]]) -> list[list[Pattern]]:
        return [row[1:] for row in matrix if isinstance(row[0], (PVar, PWildcard))]


def _normalize_ctors(e: Expr, env: TypeEnv):
    """Reconcile parser arity with declarations: a constructor declared with
    one tuple field but applied to several arguments gets them re-wrapped
    into a tuple (and dually in patterns)."""

    def fix_expr(e: Expr) -> Expr:
        match e:
            case Construct(name, args) if name in env.ctor_owner:
                args = [fix_expr(a) for a in args]
                info = env.types[env.ctor_owner[name]]
                fields = next(fs for cn, fs in info.ctors if cn == name)
                if len(fields) == 1 and len(args) > 1 and isinstance(fields[0], STTuple):
                    return Construct(name, [Tuple(args)], loc=e.loc)
                return Construct(name, args, loc=e.loc)
            case Construct(name, args):
                return Construct(name, [fix_expr(a) for a in args], loc=e.loc)
            case IntLit() | BoolLit() | Var():
                return e
            case App(fn, args):
                return App(fix_expr(fn), [fix_expr(a) for a in args], loc=e.loc)
            case Lambda(params, body, ptys):
                return Lambda(params, fix_expr(body), ptys, loc=e.loc)
            case Let(name, bound, body):
                return Let(name, fix_expr(bound), fix_expr(body), loc=e.loc)
            case If(c, t, f):
                return If(fix_expr(c), fix_expr(t), fix_expr(f), loc=e.loc)
            case Match(scrut, branches):
                return Match(
                    fix_expr(scrut), [(fix_pat(p), fix_expr(b)) for p, b in branches], loc=e.loc
                )
            case Tuple(elems):
                return Tuple([fix_expr(x) for x in elems], loc=e.loc)
            case BinOp(op, a, b):
                return BinOp(op, fix_expr(a), fix_expr(b), loc=e.loc)
            case Not(a):
                return Not(fix_expr(a), loc=e.loc)
            case Tester(cname, a):
                return Tester(cname, fix_expr(a), loc=e.loc)
            case Selector(cname, i, a):
                return Selector(cname, i, fix_expr(a), loc=e.loc)
        raise TypeError(f"not an expression: {e!r}")

    def fix_pat(p: Pattern) -> Pattern:
        match p:
            case PConstruct(name, args) if name in env.ctor_owner:
                args = [fix_pat(a) for a in args]
                info = env.types[env.ctor_owner[name]]
                fields = next(fs for cn, fs in info.ctors if cn == name)
                if len(fields) == 1 and len(args) > 1 and isinstance(fields[0], STTuple):
                    return PConstruct(name, [PTuple(args)])
                return PConstruct(name, args)
            case PConstruct(name, args):
                return PConstruct(name, [fix_pat(a) for a in args])
            case PTuple(elems):
                return PTuple([fix_pat(x) for x in elems])
            case _:
                return p

    return fix_expr(e)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


def check_type_admissible(t: TypeDecl) -> None:
    """First-order, well-founded, uniformly recursive — or raise."""

    def contains_arrow(st: SurfaceTy) -> bool:
        match st:
            case STArrow():
                return True
            case STCon(_, args):
                return any(contains_arrow(a) for a in args)
            case STTuple(elems):
                return any(contains_arrow(x) for x in elems)
            case _:
                return False

    def self_refs(st: SurfaceTy) -> list[STCon]:
        match st:
            case STCon(name, args):
                here = [st] if name == t.name else []
                return here + [r for a in args for r in self_refs(a)]
            case STTuple(elems):
                return [r for x in elems for r in self_refs(x)]
            case STArrow(d, c):
                return self_refs(d) + self_refs(c)
            case _:
                return []

    uniform_args = [STVar(p) for p in t.params]
    some_base = False
    for cname, fields in t.constructors:
        refs: list[STCon] = []
        for f in fields:
            if contains_arrow(f):
                raise AdmissibilityError(
                    "HigherOrderData", t.name,
                    f"constructor {cname} has a function-typed field",
                )
            refs.extend(self_refs(f))
        if not refs:
            some_base = True
        for r in refs:
            if r.args != uniform_args:
                raise AdmissibilityError(
                    "NonUniformRecursion", t.name,
                    f"constructor {cname} applies {t.name} at different type arguments",
                )
    if not some_base:
        raise AdmissibilityError(
            "NotWellFounded", t.name, "every constructor is recursive"
        )


def check_fun_admissible(f: FunDecl, clique: list[FunDecl], typed: TypedModule) -> None:
    """Specializability: calls to clique members must pass, at functional
    argument positions, bare names — a parameter of the caller or a
    top-level function — identical across all call sites."""
    names = {d.name for d in clique}
    seen: dict[tuple[str, int], tuple[Expr, str]] = {}
    for member in clique:
        all_params = set(member.params)
        body = member.body
        while isinstance(body, Lambda):
            all_params |= set(body.params)
            body = body.body
        for site, bound in _calls_with_bound(member.body, set(member.params)):
            fn = site.fn
            if not isinstance(fn, Var) or fn.name not in names or fn.name in bound - set(member.params):
                continue
            for i, arg in enumerate(site.args):
                ty = typed.expr_types.get(id(arg))
                if ty is None or not has_arrow(ty):
                    continue
                site_str = f"{member.name}: {pretty_expr(site)}"
                if not (isinstance(arg, Var) and (arg.name in all_params or arg.name in typed.env.values)):
                    raise AdmissibilityError(
                        "NonSpecializable", fn.name,
                        f"functional argument {pretty_expr(arg)!r} at {site_str} "
                        "is not a bare parameter or top-level function",
                    )
                key = (fn.name, i)
                if key in seen and seen[key][0] != arg:
                    raise AdmissibilityError(
                        "NonSpecializable", fn.name,
                        f"conflicting functional arguments: {seen[key][1]} vs {site_str}",
                    )
                seen.setdefault(key, (arg, site_str))


def _calls_with_bound(e: Expr, bound: set[str]):
    """Yield (App node, bound variable set at that node), respecting
    shadowing."""
    match e:
        case App(fn, args):
            yield e, bound
            yield from _calls_with_bound(fn, bound)
            for a in args:
                yield from _calls_with_bound(a, bound)
        case Lambda(params, body):
            yield from _calls_with_bound(body, bound | set(params))
        case Let(name, b1, b2):
            yield from _calls_with_bound(b1, bound)
            yield from _calls_with_bound(b2, bound | {name})
        case If(c, t, f):
            yield from _calls_with_bound(c, bound)
            yield from _calls_with_bound(t, bound)
            yield from _calls_with_bound(f, bound)
        case Match(scrut, branches):
            yield from _calls_with_bound(scrut, bound)
            for p, b in branches:
                yield from _calls_with_bound(b, bound | set(pattern_vars(p)))
        case Construct(_, args) | Tuple(args):
            for a in args:
                yield from _calls_with_bound(a, bound)
        case BinOp(_, a, b):
            yield from _calls_with_bound(a, bound)
            yield from _calls_with_bound(b, bound)
        case Not(a) | Tester(_, a) | Selector(_, _, a):
            yield from _calls_with_bound(a, bound)
