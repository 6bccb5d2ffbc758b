"""Lowering pipeline: from polymorphic, higher-order definitions to a
ground, monomorphic, first-order program.

Three passes, each of which re-typechecks its output so later passes can
rely on per-node types:

1. ``lambda_lift``   — anonymous functions become top-level definitions
                       (their captured variables turn into leading
                       parameters); operator sections in argument position
                       are eta-expanded first.
2. ``specialize``    — every call to a function with functional parameters
                       is redirected to a first-order copy in which those
                       parameters are replaced by the concrete functions
                       the caller supplies; partially applied arguments
                       contribute their captured prefix as fresh leading
                       value parameters of the copy.  The higher-order
                       originals are dropped.
3. ``monomorphize``  — starting from one goal, every reachable definition
                       is copied at the ground types the goal demands,
                       polymorphic type instances become fresh monomorphic
                       datatypes, tuples become single-constructor
                       datatypes, and leftover type variables default to
                       int.

``lower_goal`` runs all three over a definition world and returns a
:class:`GroundProgram` — the exact input a ground solver backend needs,
plus the manifest for mapping model values back to source terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .defn import AdmLex, Explicit, MeasureSpec, Structural, World, decl_params_body
from .syntax import (
    Adm,
    Annotation,
    App,
    Auto,
    BINOPS,
    BinOp,
    BoolLit,
    Construct,
    Decl,
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
    Rewrite,
    Selector,
    SourceModule,
    STCon,
    Tester,
    TheoremDecl,
    Tuple,
    TypeDecl,
    Var,
    fresh_name,
    pattern_vars,
    pretty,
    pretty_module,
)
from .template import Template, template_of
from .typecheck import (
    Scheme,
    TArrow,
    TCon,
    TTuple,
    TVar,
    Type,
    TypedModule,
    TypeEnv,
    UnifyMismatch,
    default_unbound_to_int,
    infer,
    prune,
    strip_arrows,
    unify,
)


class LoweringError(Exception):
    def __init__(self, kind: str, msg: str):
        self.kind = kind  # Unsupported | NonSpecializable | Internal
        super().__init__(f"{kind}: {msg}")


# ---------------------------------------------------------------------------
# expression utilities
# ---------------------------------------------------------------------------


def _last_seg(name: str) -> str:
    return name.rsplit(".", 1)[-1]


def _clone(e: Expr) -> Expr:
    """Structural copy with all-new nodes (no sharing, unlike deepcopy)."""
    match e:
        case IntLit(v):
            return IntLit(v, loc=e.loc)
        case BoolLit(v):
            return BoolLit(v, loc=e.loc)
        case Var(n):
            return Var(n, loc=e.loc)
        case App(fn, args):
            return App(_clone(fn), [_clone(a) for a in args], loc=e.loc)
        case Lambda(params, body, ptys):
            return Lambda(list(params), _clone(body), ptys, loc=e.loc)
        case Let(n, b1, b2):
            return Let(n, _clone(b1), _clone(b2), loc=e.loc)
        case If(c, t, f):
            return If(_clone(c), _clone(t), _clone(f), loc=e.loc)
        case Match(scrut, branches):
            return Match(
                _clone(scrut), [(_clone_pat(p), _clone(b)) for p, b in branches], loc=e.loc
            )
        case Construct(n, args):
            return Construct(n, [_clone(a) for a in args], loc=e.loc)
        case Tuple(elems):
            return Tuple([_clone(x) for x in elems], loc=e.loc)
        case BinOp(op, a, b):
            return BinOp(op, _clone(a), _clone(b), loc=e.loc)
        case Not(a):
            return Not(_clone(a), loc=e.loc)
        case Tester(cn, a):
            return Tester(cn, _clone(a), loc=e.loc)
        case Selector(cn, i, a):
            return Selector(cn, i, _clone(a), loc=e.loc)
    raise TypeError(f"not an expression: {e!r}")


def _clone_pat(p: Pattern) -> Pattern:
    match p:
        case PVar(n):
            return PVar(n)
        case PWildcard():
            return PWildcard()
        case PConstruct(n, args):
            return PConstruct(n, [_clone_pat(a) for a in args])
        case PTuple(elems):
            return PTuple([_clone_pat(x) for x in elems])
        case PIntLit(v):
            return PIntLit(v)
        case PBoolLit(v):
            return PBoolLit(v)
    raise TypeError(f"not a pattern: {p!r}")


def _clone_annots(annots: list[Annotation]) -> list[Annotation]:
    out: list[Annotation] = []
    for a in annots:
        match a:
            case Adm(vars):
                out.append(Adm(list(vars)))
            case Measure(expr):
                out.append(Measure(_clone(expr)))
            case Auto():
                out.append(Auto())
            case Rewrite():
                out.append(Rewrite())
            case other:
                out.append(other)
    return out


def _clone_decl(d: FunDecl) -> FunDecl:
    return FunDecl(
        d.name,
        list(d.params),
        _clone(d.body),
        _clone_annots(d.annotations),
        is_rec=d.is_rec,
        group=list(d.group),
        loc=d.loc,
    )


def _ordered_frees(e: Expr, bound: set[str]) -> list[str]:
    """Free variables in first-occurrence (source) order."""
    out: list[str] = []
    seen: set[str] = set()

    def go(e: Expr, bound: set[str]) -> None:
        match e:
            case IntLit() | BoolLit():
                pass
            case Var(n):
                if n not in bound and n not in seen:
                    seen.add(n)
                    out.append(n)
            case App(fn, args):
                go(fn, bound)
                for a in args:
                    go(a, bound)
            case Lambda(params, body):
                go(body, bound | set(params))
            case Let(n, b1, b2):
                go(b1, bound)
                go(b2, bound | {n})
            case If(c, t, f):
                go(c, bound)
                go(t, bound)
                go(f, bound)
            case Match(scrut, branches):
                go(scrut, bound)
                for p, b in branches:
                    go(b, bound | set(pattern_vars(p)))
            case Construct(_, args) | Tuple(args):
                for a in args:
                    go(a, bound)
            case BinOp(_, a, b):
                go(a, bound)
                go(b, bound)
            case Not(a) | Tester(_, a) | Selector(_, _, a):
                go(a, bound)
            case other:
                raise TypeError(f"not an expression: {other!r}")

    go(e, set(bound))
    return out


def _used_names(e: Expr) -> set[str]:
    """Every name occurring in the expression, free or binding."""
    out: set[str] = set()

    def go(e: Expr) -> None:
        match e:
            case IntLit() | BoolLit():
                pass
            case Var(n):
                out.add(n)
            case App(fn, args):
                go(fn)
                for a in args:
                    go(a)
            case Lambda(params, body):
                out.update(params)
                go(body)
            case Let(n, b1, b2):
                out.add(n)
                go(b1)
                go(b2)
            case If(c, t, f):
                go(c)
                go(t)
                go(f)
            case Match(scrut, branches):
                go(scrut)
                for p, b in branches:
                    out.update(pattern_vars(p))
                    go(b)
            case Construct(_, args) | Tuple(args):
                for a in args:
                    go(a)
            case BinOp(_, a, b):
                go(a)
                go(b)
            case Not(a) | Tester(_, a) | Selector(_, _, a):
                go(a)

    go(e)
    return out


def _flatten_app(fn: Expr, args: list[Expr]) -> tuple[Expr, list[Expr]]:
    while isinstance(fn, App):
        args = list(fn.args) + args
        fn = fn.fn
    return fn, args


def _callees(e: Expr) -> set[str]:
    out: set[str] = set()

    def go(e: Expr, bound: set[str]) -> None:
        match e:
            case App(Var(g), args) if g not in bound:
                out.add(g)
                for a in args:
                    go(a, bound)
            case App(fn, args):
                go(fn, bound)
                for a in args:
                    go(a, bound)
            case Var(n):
                if n not in bound:
                    out.add(n)
            case Lambda(params, body):
                go(body, bound | set(params))
            case Let(n, b1, b2):
                go(b1, bound)
                go(b2, bound | {n})
            case If(c, t, f):
                go(c, bound)
                go(t, bound)
                go(f, bound)
            case Match(scrut, branches):
                go(scrut, bound)
                for p, b in branches:
                    go(b, bound | set(pattern_vars(p)))
            case Construct(_, args) | Tuple(args):
                for a in args:
                    go(a, bound)
            case BinOp(_, a, b):
                go(a, bound)
                go(b, bound)
            case Not(a) | Tester(_, a) | Selector(_, _, a):
                go(a, bound)
            case _:
                pass

    go(e, set())
    return out


# ---------------------------------------------------------------------------
# the pass carrier
# ---------------------------------------------------------------------------


@dataclass
class Lowering:
    """A typed module threaded through the passes, together with the
    termination measures of its functions and the source-world name each
    current function descends from."""

    tm: TypedModule
    measures: dict[str, MeasureSpec] = dc_field(default_factory=dict)
    origin: dict[str, str] = dc_field(default_factory=dict)

    @property
    def module(self) -> SourceModule:
        return self.tm.module


def _as_lowering(x) -> Lowering:
    if isinstance(x, Lowering):
        return x
    if isinstance(x, TypedModule):
        names = [d.name for d in x.module.decls if isinstance(d, FunDecl)]
        return Lowering(x, measures={}, origin={n: n for n in names})
    raise TypeError(f"expected a typed module or a lowering, got {x!r}")


def _reinfer(decls: list[Decl], env: TypeEnv) -> TypedModule:
    """Re-typecheck a rewritten module.  The environment already knows any
    types the module itself declares, so those are unregistered first."""
    env2 = env.copy()
    for d in decls:
        if isinstance(d, TypeDecl) and d.name in env2.types:
            del env2.types[d.name]
            for cn, _ in d.constructors:
                env2.ctor_owner.pop(cn, None)
    return infer(SourceModule(decls), env2)


def _all_known_names(tm: TypedModule) -> set[str]:
    used = set(tm.env.values) | set(tm.env.types) | set(tm.env.ctor_owner)
    for d in tm.module.decls:
        if isinstance(d, (FunDecl, TheoremDecl)):
            used.add(d.name)
        elif isinstance(d, TypeDecl):
            used.add(d.name)
            used.update(cn for cn, _ in d.constructors)
    return used


# ---------------------------------------------------------------------------
# pass 1: lambda lifting
# ---------------------------------------------------------------------------


def lambda_lift(x) -> Lowering:
    """Hoist every anonymous function to a top-level definition whose
    leading parameters are the variables it captured; replace each with a
    reference to (or partial application of) the new name.  Operator
    sections in argument position are eta-expanded and lifted the same
    way, and local bindings of functional values are inlined."""
    low = _as_lowering(x)
    tm = low.tm
    used = _all_known_names(tm)
    counters: dict[str, int] = {}
    out_decls: list[Decl] = []
    pending: list[FunDecl] = []
    origin = dict(low.origin)

    def lifted_name(base: str) -> str:
        k = counters.get(base, 0)
        while f"{base}_lambda{k}" in used:
            k += 1
        counters[base] = k + 1
        name = f"{base}_lambda{k}"
        used.add(name)
        return name

    def is_functional(node: Expr) -> bool:
        t = tm.expr_types.get(id(node))
        return t is not None and isinstance(prune(t), TArrow)

    def lift(lam: Lambda, scope: set[str], hint: str) -> Expr:
        body = go(lam.body, scope | set(lam.params), hint)
        caps = [
            v
            for v in _ordered_frees(body, set(lam.params))
            if v in scope
        ]
        name = lifted_name(hint)
        decl = FunDecl(name, caps + list(lam.params), body, [], is_rec=False, group=[name])
        pending.append(decl)
        origin[name] = name
        if caps:
            return App(Var(name), [Var(c) for c in caps])
        return Var(name)

    def eta_operator(op: str, hint: str) -> Expr:
        lam = Lambda(["a", "b"], BinOp(op, Var("a"), Var("b")))
        return lift(lam, set(), hint)

    def go(e: Expr, scope: set[str], hint: str) -> Expr:
        match e:
            case IntLit() | BoolLit() | Var():
                return e
            case Lambda():
                return lift(e, scope, hint)
            case App(fn, args):
                fn, args = _flatten_app(fn, args)
                head_base = _last_seg(fn.name) if isinstance(fn, Var) else hint
                new_args = []
                for a in args:
                    if isinstance(a, Lambda):
                        new_args.append(lift(a, scope, head_base))
                    elif isinstance(a, Var) and a.name in BINOPS and a.name not in scope:
                        new_args.append(eta_operator(a.name, head_base))
                    else:
                        new_args.append(go(a, scope, hint))
                fn2 = go(fn, scope, hint)
                if isinstance(fn2, App):  # a lifted lambda in head position
                    return App(fn2.fn, list(fn2.args) + new_args, loc=e.loc)
                return App(fn2, new_args, loc=e.loc)
            case Let(n, b1, b2):
                bound2 = go(b1, scope, hint)
                body2 = go(b2, scope | {n}, hint)
                if is_functional(b1):
                    # a local name for a function: inline it (each use gets
                    # its own copy of the nodes)
                    return _subst_fresh(body2, {n: bound2})
                return Let(n, bound2, body2, loc=e.loc)
            case If(c, t, f):
                return If(go(c, scope, hint), go(t, scope, hint), go(f, scope, hint), loc=e.loc)
            case Match(scrut, branches):
                return Match(
                    go(scrut, scope, hint),
                    [(p, go(b, scope | set(pattern_vars(p)), hint)) for p, b in branches],
                    loc=e.loc,
                )
            case Construct(n, args):
                return Construct(n, [go(a, scope, hint) for a in args], loc=e.loc)
            case Tuple(elems):
                return Tuple([go(x, scope, hint) for x in elems], loc=e.loc)
            case BinOp(op, a, b):
                return BinOp(op, go(a, scope, hint), go(b, scope, hint), loc=e.loc)
            case Not(a):
                return Not(go(a, scope, hint), loc=e.loc)
            case Tester(cn, a):
                return Tester(cn, go(a, scope, hint), loc=e.loc)
            case Selector(cn, i, a):
                return Selector(cn, i, go(a, scope, hint), loc=e.loc)
        raise TypeError(f"not an expression: {e!r}")

    def lifted_fun(d: FunDecl) -> FunDecl:
        params, body = decl_params_body(d)
        body2 = go(body, set(params), _last_seg(d.name))
        return FunDecl(
            d.name, params, body2, d.annotations,
            is_rec=d.is_rec, group=list(d.group) or [d.name], loc=d.loc,
        )

    decls = tm.module.decls
    i = 0
    while i < len(decls):
        d = decls[i]
        match d:
            case TypeDecl():
                out_decls.append(d)
            case FunDecl() if len(d.group) == 2 and i + 1 < len(decls):
                # mutual pair: lifted lambdas go before, members stay adjacent
                pair = [lifted_fun(d), lifted_fun(decls[i + 1])]
                out_decls.extend(pending)
                pending.clear()
                out_decls.extend(pair)
                i += 2
                continue
            case FunDecl():
                nd = lifted_fun(d)
                out_decls.extend(pending)
                pending.clear()
                out_decls.append(nd)
            case TheoremDecl():
                body2 = go(d.body, {p for p, _ in d.params}, _last_seg(d.name))
                out_decls.extend(pending)
                pending.clear()
                out_decls.append(TheoremDecl(d.name, d.params, body2, d.annotations, loc=d.loc))
            case other:
                raise LoweringError("Unsupported", f"cannot lower declaration {other!r}")
        i += 1

    tm2 = _reinfer(out_decls, tm.env)
    return Lowering(tm2, measures=dict(low.measures), origin=origin)


def _subst_fresh(e: Expr, sub: dict[str, Expr]) -> Expr:
    """Substitution that flattens applications of substituted names and
    inserts a fresh copy of the replacement at every occurrence."""
    if not sub:
        return e

    def repl_fvs() -> set[str]:
        out: set[str] = set()
        for v in sub.values():
            out |= _used_names(v)
        return out

    clash = repl_fvs()

    def go(e: Expr, sub: dict[str, Expr]) -> Expr:
        match e:
            case IntLit() | BoolLit():
                return e
            case Var(n):
                return _clone(sub[n]) if n in sub else e
            case App(fn, args):
                fn, args = _flatten_app(fn, args)
                args2 = [go(a, sub) for a in args]
                if isinstance(fn, Var) and fn.name in sub:
                    target = _clone(sub[fn.name])
                    if isinstance(target, App):
                        return App(target.fn, list(target.args) + args2, loc=e.loc)
                    return App(target, args2, loc=e.loc)
                return App(go(fn, sub), args2, loc=e.loc)
            case Lambda(params, body, ptys):
                sub2 = {k: v for k, v in sub.items() if k not in params}
                params2, body2 = _rename_binders(list(params), body, sub2, clash)
                return Lambda(params2, go(body2, sub2), ptys, loc=e.loc)
            case Let(n, b1, b2):
                b1n = go(b1, sub)
                sub2 = {k: v for k, v in sub.items() if k != n}
                names2, body2 = _rename_binders([n], b2, sub2, clash)
                return Let(names2[0], b1n, go(body2, sub2), loc=e.loc)
            case If(c, t, f):
                return If(go(c, sub), go(t, sub), go(f, sub), loc=e.loc)
            case Match(scrut, branches):
                out = []
                for p, b in branches:
                    pvars = set(pattern_vars(p))
                    sub2 = {k: v for k, v in sub.items() if k not in pvars}
                    if sub2 and pvars & clash:
                        ren = {
                            v: fresh_name(v, clash | _used_names(b) | pvars)
                            for v in pvars & clash
                        }
                        p = _rename_pat(p, ren)
                        b = _subst_fresh(b, {k: Var(v) for k, v in ren.items()})
                    out.append((p, go(b, sub2)))
                return Match(go(scrut, sub), out, loc=e.loc)
            case Construct(n, args):
                return Construct(n, [go(a, sub) for a in args], loc=e.loc)
            case Tuple(elems):
                return Tuple([go(x, sub) for x in elems], loc=e.loc)
            case BinOp(op, a, b):
                return BinOp(op, go(a, sub), go(b, sub), loc=e.loc)
            case Not(a):
                return Not(go(a, sub), loc=e.loc)
            case Tester(cn, a):
                return Tester(cn, go(a, sub), loc=e.loc)
            case Selector(cn, i, a):
                return Selector(cn, i, go(a, sub), loc=e.loc)
        raise TypeError(f"not an expression: {e!r}")

    return go(e, sub)


def _rename_binders(
    names: list[str], body: Expr, sub: dict[str, Expr], clash: set[str]
) -> tuple[list[str], Expr]:
    if not sub or not any(n in clash for n in names):
        return names, body
    avoid = clash | _used_names(body) | set(names) | set(sub)
    ren: dict[str, Expr] = {}
    out = []
    for n in names:
        if n in clash:
            nn = fresh_name(n, avoid)
            avoid.add(nn)
            ren[n] = Var(nn)
            out.append(nn)
        else:
            out.append(n)
    return out, _subst_fresh(body, ren)


def _rename_pat(p: Pattern, ren: dict[str, str]) -> Pattern:
    match p:
        case PVar(n):
            return PVar(ren.get(n, n))
        case PConstruct(n, args):
            return PConstruct(n, [_rename_pat(a, ren) for a in args])
        case PTuple(elems):
            return PTuple([_rename_pat(x, ren) for x in elems])
        case _:
            return p


# ---------------------------------------------------------------------------
# pass 2: specialization of higher-order functions
# ---------------------------------------------------------------------------


def specialize(x) -> Lowering:
    """Replace every call to a function with functional parameters by a
    call to a first-order copy.  Each distinct bundle — the callee plus,
    per functional position, the supplied function's name and how many
    arguments it was partially applied to — gets exactly one copy named
    ``<base><k>`` (k counting from 1); the captured prefixes become fresh
    leading parameters.  Higher-order originals are dropped."""
    low = _as_lowering(x)
    tm = low.tm
    fn_decls = {d.name: d for d in tm.module.decls if isinstance(d, FunDecl)}
    schemes = {n: tm.schemes[n] for n in fn_decls}

    def fpositions(g: str) -> list[int]:
        doms, _ = strip_arrows(schemes[g].body)
        return [i for i, t in enumerate(doms) if isinstance(prune(t), TArrow)]

    ho = {g for g in fn_decls if fpositions(g)}

    used = _all_known_names(tm)
    counters: dict[str, int] = {}
    copies: dict[tuple, str] = {}
    copy_of: dict[str, str] = {}  # copy name -> original name
    pending: list[FunDecl] = []
    measures = dict(low.measures)
    origin = dict(low.origin)

    def copy_name(g: str) -> str:
        base = _last_seg(g)
        k = counters.get(base, 1)
        while f"{base}{k}" in used:
            k += 1
        counters[base] = k + 1
        name = f"{base}{k}"
        used.add(name)
        return name

    def decompose(arg: Expr) -> tuple[str, list[Expr]]:
        """A functional argument after lifting is a name or a partial
        application of one."""
        match arg:
            case Var(h):
                return h, []
            case App(fn, args):
                fn, args = _flatten_app(fn, args)
                if isinstance(fn, Var):
                    return fn.name, list(args)
        raise LoweringError(
            "NonSpecializable", "functional argument is not a named function"
        )

    def transport_measure(g: str, cname: str, cap_count: int, fps: list[int], nparams: int):
        spec = measures.get(g)
        if spec is None:
            return
        nonf = [i for i in range(nparams) if i not in fps]
        match spec:
            case Structural(i):
                if i in nonf:
                    measures[cname] = Structural(cap_count + nonf.index(i))
            case AdmLex():
                measures[cname] = spec
            case Explicit():
                measures[cname] = Explicit(_clone(spec.expr))

    def make_copy(g: str, specs: tuple[tuple[str, int], ...]) -> str:
        key = (g, specs)
        if key in copies:
            return copies[key]
        orig = fn_decls[g]
        fps = fpositions(g)
        body0 = _clone(orig.body)
        avoid = (
            set(used)
            | _used_names(body0)
            | set(orig.params)
            | {h for h, _ in specs}
        )
        mapping: dict[str, Expr] = {}
        cap_params: list[str] = []
        for pos, (h, ncaps) in zip(fps, specs):
            fparam = orig.params[pos]
            cnames = []
            for i in range(ncaps):
                base = (
                    fn_decls[h].params[i]
                    if h in fn_decls and i < len(fn_decls[h].params)
                    else f"c{i}"
                )
                cn = fresh_name(base, avoid)
                avoid.add(cn)
                cnames.append(cn)
            cap_params.extend(cnames)
            if cnames:
                mapping[fparam] = App(Var(h), [Var(c) for c in cnames])
            else:
                mapping[fparam] = Var(h)
        new_params = cap_params + [p for i, p in enumerate(orig.params) if i not in fps]
        name = copy_name(g)
        copies[key] = name
        copy_of[name] = g
        origin[name] = origin.get(g, g)
        transport_measure(g, name, len(cap_params), fps, len(orig.params))
        body1 = _subst_fresh(body0, mapping)
        body2 = rw(body1)
        annots = [
            a
            for a in _clone_annots(orig.annotations)
            if not isinstance(a, (Adm, Measure))
            or (isinstance(a, Adm) and all(v in new_params for v in a.vars))
        ]
        decl = FunDecl(name, new_params, body2, annots, is_rec=orig.is_rec, group=[name])
        pending.append(decl)
        return name

    def rw(e: Expr) -> Expr:
        match e:
            case IntLit() | BoolLit():
                return e
            case Var(n):
                if n in ho:
                    raise LoweringError(
                        "NonSpecializable",
                        f"{n} is used as a value but has functional parameters",
                    )
                return e
            case App(fn, args):
                fn, args = _flatten_app(fn, args)
                if isinstance(fn, Var) and fn.name in ho:
                    g = fn.name
                    arity = len(fn_decls[g].params)
                    if len(args) != arity:
                        raise LoweringError(
                            "NonSpecializable",
                            f"partial application of {g} outside an argument position",
                        )
                    fps = fpositions(g)
                    specs = []
                    cap_args: list[Expr] = []
                    for pos in fps:
                        h, caps = decompose(args[pos])
                        specs.append((h, len(caps)))
                        cap_args.extend(rw(c) for c in caps)
                    cname = make_copy(g, tuple(specs))
                    rest = [rw(args[i]) for i in range(arity) if i not in fps]
                    return App(Var(cname), cap_args + rest, loc=e.loc)
                return App(rw(fn), [rw(a) for a in args], loc=e.loc)
            case Lambda():
                raise LoweringError("Internal", "lambda survived lifting")
            case Let(n, b1, b2):
                return Let(n, rw(b1), rw(b2), loc=e.loc)
            case If(c, t, f):
                return If(rw(c), rw(t), rw(f), loc=e.loc)
            case Match(scrut, branches):
                return Match(rw(scrut), [(p, rw(b)) for p, b in branches], loc=e.loc)
            case Construct(n, args):
                return Construct(n, [rw(a) for a in args], loc=e.loc)
            case Tuple(elems):
                return Tuple([rw(x) for x in elems], loc=e.loc)
            case BinOp(op, a, b):
                return BinOp(op, rw(a), rw(b), loc=e.loc)
            case Not(a):
                return Not(rw(a), loc=e.loc)
            case Tester(cn, a):
                return Tester(cn, rw(a), loc=e.loc)
            case Selector(cn, i, a):
                return Selector(cn, i, rw(a), loc=e.loc)
        raise TypeError(f"not an expression: {e!r}")

    out_decls: list[Decl] = []
    repair_pool: set[str] = set()  # kept members of pairs whose partner dropped
    decls = tm.module.decls
    i = 0
    while i < len(decls):
        d = decls[i]
        match d:
            case TypeDecl():
                out_decls.append(d)
            case FunDecl() if d.name in ho:
                i += 1
                continue  # dropped; copies stand in for it
            case FunDecl() if (
                len(d.group) == 2
                and d.group[0] == d.name
                and d.group[1] not in ho
                and i + 1 < len(decls)
            ):
                partner = decls[i + 1]
                pair = []
                for member in (d, partner):
                    pair.append(
                        FunDecl(
                            member.name, member.params, rw(member.body),
                            member.annotations, is_rec=member.is_rec,
                            group=list(member.group), loc=member.loc,
                        )
                    )
                out_decls.extend(pending)
                pending.clear()
                out_decls.extend(pair)
                i += 2
                continue
            case FunDecl():
                body2 = rw(d.body)
                out_decls.extend(pending)
                pending.clear()
                group = list(d.group) or [d.name]
                if len(group) == 2:  # the partner had functional params
                    group = [d.name]
                    repair_pool.add(d.name)
                out_decls.append(
                    FunDecl(
                        d.name, d.params, body2, d.annotations,
                        is_rec=d.is_rec, group=group, loc=d.loc,
                    )
                )
            case TheoremDecl():
                body2 = rw(d.body)
                out_decls.extend(pending)
                pending.clear()
                out_decls.append(TheoremDecl(d.name, d.params, body2, d.annotations, loc=d.loc))
            case other:
                raise LoweringError("Unsupported", f"cannot lower declaration {other!r}")
        i += 1

    for dropped in ho:
        measures.pop(dropped, None)
        origin.pop(dropped, None)
    types = [d for d in out_decls if isinstance(d, TypeDecl)]
    funs = [d for d in out_decls if isinstance(d, FunDecl)]
    thms = [d for d in out_decls if isinstance(d, TheoremDecl)]
    _pair_mutual(funs, set(copy_of) | repair_pool)
    funs = _toposort_funs(funs)
    tm2 = _reinfer(types + funs + thms, tm.env)
    return Lowering(tm2, measures=measures, origin=origin)


def _pair_mutual(funs: list[FunDecl], pool: set[str]) -> None:
    """Set group fields (and is_rec) on pool members that turned out
    mutually recursive."""
    idx = {d.name: i for i, d in enumerate(funs)}
    calls = {
        d.name: _callees(d.body) & pool for d in funs if d.name in pool
    }
    paired: set[str] = set()
    for a, cs in calls.items():
        for b in sorted(cs, key=idx.get):
            if (
                b != a
                and b in calls
                and a in calls[b]
                and a not in paired
                and b not in paired
            ):
                first, second = (a, b) if idx[a] < idx[b] else (b, a)
                grp = [first, second]
                for d in funs:
                    if d.name in grp:
                        d.group = list(grp)
                        d.is_rec = True
                paired.update(grp)


def _toposort_funs(funs: list[FunDecl]) -> list[FunDecl]:
    """Stable dependency order: callees before callers, mutual pairs
    adjacent, original order preserved wherever it is already valid."""
    by_name = {d.name: d for d in funs}
    index = {d.name: i for i, d in enumerate(funs)}
    nodes: list[tuple[str, ...]] = []
    seen: set[str] = set()
    for d in funs:
        if d.name in seen:
            continue
        grp = d.group if len(d.group) == 2 and all(g in by_name for g in d.group) else [d.name]
        nodes.append(tuple(grp))
        seen.update(grp)
    node_id = {n: i for i, node in enumerate(nodes) for n in node}
    deps: list[set[int]] = []
    for i, node in enumerate(nodes):
        ds = set()
        for member in node:
            ds.update(
                node_id[c] for c in _callees(by_name[member].body) if c in node_id
            )
        ds.discard(i)
        deps.append(ds)
    out: list[FunDecl] = []
    done: set[int] = set()
    remaining = list(range(len(nodes)))
    while remaining:
        ready = [i for i in remaining if deps[i] <= done]
        if not ready:
            raise LoweringError("Internal", "cyclic dependencies between definitions")
        nxt = min(ready, key=lambda i: min(index[n] for n in nodes[i]))
        done.add(nxt)
        remaining.remove(nxt)
        out.extend(by_name[n] for n in nodes[nxt])
    return out


# ---------------------------------------------------------------------------
# pass 3: monomorphization
# ---------------------------------------------------------------------------


@dataclass
class GroundType:
    name: str
    ctors: list[tuple[str, list[str]]]  # (constructor, field sorts)


@dataclass
class Manifest:
    """Maps from lowered names back to source names, for reflecting solver
    models into source values."""

    fun_source: dict[str, str] = dc_field(default_factory=dict)
    type_source: dict[str, str] = dc_field(default_factory=dict)
    ctor_source: dict[str, str] = dc_field(default_factory=dict)
    tuple_ctors: set[str] = dc_field(default_factory=set)


@dataclass
class GroundProgram:
    types: list[GroundType]
    funs: list[FunDecl]
    goal: Expr
    goal_vars: list[tuple[str, str]]  # (name, sort)
    fun_sorts: dict[str, tuple[list[str], str]]
    templates: dict[str, Template]
    measures: dict[str, MeasureSpec]
    manifest: Manifest
    goal_name: str = "goal"

    def fun_table(self) -> dict[str, tuple[list[str], Expr]]:
        return {d.name: (d.params, d.body) for d in self.funs}

    def to_module(self) -> SourceModule:
        tdecls: list[Decl] = [
            TypeDecl(t.name, [], [(cn, [STCon(f, []) for f in fs]) for cn, fs in t.ctors])
            for t in self.types
        ]
        return SourceModule(tdecls + [_clone_decl(d) for d in self.funs])

    def pretty(self) -> str:
        parts = [pretty_module(self.to_module())] if (self.types or self.funs) else []
        params = [(n, STCon(s, [])) for n, s in self.goal_vars]
        parts.append(pretty(TheoremDecl(self.goal_name, params, self.goal, [])))
        return "\n".join(parts)


_TYPE_LIKE = (TCon, TTuple, TVar)


class _Mono:
    def __init__(self, low: Lowering):
        self.low = low
        self.tm = low.tm
        self.env = low.tm.env
        self.fn_decls = {d.name: d for d in low.tm.module.decls if isinstance(d, FunDecl)}
        self.schemes = {n: low.tm.schemes[n] for n in self.fn_decls}
        self.used = _all_known_names(low.tm)
        self.types_out: list[GroundType] = []
        self.type_keys: dict[tuple, str] = {}
        self.ctor_map: dict[tuple, str] = {}  # (type key, source ctor) -> name
        self.tuple_ctor: dict[str, str] = {}  # tuple sort -> its constructor
        self.funs_out: list[FunDecl] = []
        self.fun_keys: dict[tuple, str] = {}
        self.fun_sorts: dict[str, tuple[list[str], str]] = {}
        self.manifest = Manifest()
        self.measures: dict[str, MeasureSpec] = {}

    # --- name allocation ---

    def alloc(self, proposed: str) -> str:
        if proposed not in self.used:
            self.used.add(proposed)
            return proposed
        k = 1
        while f"{proposed}{k}" in self.used:
            k += 1
        name = f"{proposed}{k}"
        self.used.add(name)
        return name

    # --- sorts and type instances ---

    def sort_of(self, t: Type) -> str:
        t = prune(t)
        default_unbound_to_int(t)
        t = prune(t)
        match t:
            case TCon("int", []):
                return "int"
            case TCon("bool", []):
                return "bool"
            case TCon(_, _) | TTuple(_):
                return self.ensure_type(t)
            case TArrow(_, _):
                raise LoweringError(
                    "Unsupported", "a functional value survived specialization"
                )
        raise LoweringError("Internal", f"cannot lower type {t!r}")

    def _type_key(self, t: Type) -> tuple:
        t = prune(t)
        match t:
            case TCon(name, args):
                return ("con", name, tuple(self._type_key(a) for a in args))
            case TTuple(elems):
                return ("tup", tuple(self._type_key(x) for x in elems))
        raise LoweringError("Internal", f"no key for type {t!r}")

    def ensure_type(self, t: Type) -> str:
        t = prune(t)
        key = self._type_key(t)
        if key in self.type_keys:
            return self.type_keys[key]
        match t:
            case TTuple(elems):
                frags = [self.sort_of(x) for x in elems]
                name = self.alloc(f"tup{len(elems)}_" + "_".join(frags))
                self.type_keys[key] = name
                cname = self.alloc(name[0].upper() + name[1:])
                self.manifest.type_source[name] = " * ".join(frags)
                self.manifest.tuple_ctors.add(cname)
                self.tuple_ctor[name] = cname
                self.types_out.append(GroundType(name, [(cname, list(frags))]))
                return name
            case TCon(tname, targs):
                info = self.env.types.get(tname)
                if info is None:
                    raise LoweringError("Internal", f"unknown type {tname!r}")
                if not targs:
                    name = tname  # already monomorphic: keep it
                    self.type_keys[key] = name
                    suffix = ""
                else:
                    frags = [self.sort_of(a) for a in targs]
                    name = self.alloc("_".join(frags) + "_" + _last_seg(tname))
                    self.type_keys[key] = name
                    suffix = "_" + "_".join(frags)
                self.manifest.type_source[name] = tname
                scope = dict(zip(info.params, [prune(a) for a in targs]))
                ctors: list[tuple[str, list[str]]] = []
                for cn, fields in info.ctors:
                    mcn = self.alloc(cn + suffix) if suffix else cn
                    self.ctor_map[(key, cn)] = mcn
                    self.manifest.ctor_source[mcn] = cn
                    fsorts = [
                        self.sort_of(_surface_instance(f, scope, self.env)) for f in fields
                    ]
                    ctors.append((mcn, fsorts))
                self.types_out.append(GroundType(name, ctors))
                return name
        raise LoweringError("Internal", f"cannot declare type {t!r}")

    def ctor_at(self, cname: str, owner_ty: Type) -> str:
        owner_ty = prune(owner_ty)
        default_unbound_to_int(owner_ty)
        owner_ty = prune(owner_ty)
        if not (isinstance(owner_ty, TCon) and owner_ty.args):
            # monomorphic owner: name survives, but the type must exist
            self.sort_of(owner_ty)
            self.manifest.ctor_source.setdefault(cname, cname)
            return cname
        self.sort_of(owner_ty)
        return self.ctor_map[(self._type_key(owner_ty), cname)]

    # --- functions ---

    def fun_req(self, g: str, site_ty: Type) -> str:
        sc = self.schemes[g]
        if sc.qvars:
            mapping = {v.id: TVar() for v in sc.qvars}
            inst = _instantiate_with(sc.body, mapping)
            try:
                unify(inst, site_ty)
            except UnifyMismatch as err:
                raise LoweringError("Internal", f"instance of {g} does not fit: {err}")
            frags = tuple(self.sort_of(prune(mapping[v.id])) for v in sc.qvars)
        else:
            frags = ()
        key = (g, frags)
        if key in self.fun_keys:
            return self.fun_keys[key]
        if frags:
            name = self.alloc(f"{_last_seg(g)}_" + "_".join(frags))
        else:
            name = g
            self.used.add(name)
        self.fun_keys[key] = name

        group = [n for n in self.fn_decls[g].group if n in self.fn_decls]
        members = group if len(group) == 2 else [g]
        clones = [_clone_decl(self.fn_decls[m]) for m in members]
        ctm = infer(SourceModule(clones), self.env)
        cdecls = {d.name: d for d in ctm.module.decls if isinstance(d, FunDecl)}
        try:
            unify(ctm.schemes[g].body, site_ty)
        except UnifyMismatch as err:
            raise LoweringError("Internal", f"cannot pin {g}: {err}")
        names: dict[str, str] = {g: name}
        for m in members:
            if m == g:
                continue
            names[m] = self._register_member(m, ctm)
        for m in members:
            self._emit_copy(m, names[m], cdecls[m], ctm)
        return name

    def _register_member(self, m: str, ctm: TypedModule) -> str:
        """Allocate the mangled name of a mutual partner pinned by the same
        joint inference."""
        csc = ctm.schemes[m]
        # translate to the partner's own registry key via its module scheme
        sc = self.schemes[m]
        if sc.qvars:
            mapping = {v.id: TVar() for v in sc.qvars}
            inst = _instantiate_with(sc.body, mapping)
            unify(inst, csc.body)
            frags = tuple(self.sort_of(prune(mapping[v.id])) for v in sc.qvars)
            key = (m, frags)
            if key in self.fun_keys:
                return self.fun_keys[key]
            name = self.alloc(f"{_last_seg(m)}_" + "_".join(frags)) if frags else m
        else:
            key = (m, ())
            if key in self.fun_keys:
                return self.fun_keys[key]
            name = m
            self.used.add(name)
        self.fun_keys[key] = name
        return name

    def _emit_copy(self, g: str, name: str, cd: FunDecl, ctm: TypedModule) -> None:
        body = self.walk(cd.body, ctm)
        doms, ret = strip_arrows(ctm.schemes[g].body)
        arg_sorts = [self.sort_of(d) for d in doms]
        annots = [
            a
            for a in _clone_annots(cd.annotations)
            if not isinstance(a, Measure) or name == g
        ]
        self.funs_out.append(
            FunDecl(name, list(cd.params), body, annots, is_rec=cd.is_rec, group=[name])
        )
        self.fun_sorts[name] = (arg_sorts, self.sort_of(ret))
        self.manifest.fun_source[name] = self.low.origin.get(g, g)
        spec = self.low.measures.get(g)
        if spec is not None:
            match spec:
                case Structural() | AdmLex():
                    self.measures[name] = spec
                case Explicit():
                    self.measures[name] = Explicit(_clone(spec.expr))

    # --- expression walk ---

    def walk(self, e: Expr, ctm: TypedModule) -> Expr:
        match e:
            case IntLit() | BoolLit():
                return e
            case Var(n):
                if n in self.fn_decls:
                    site = prune(ctm.expr_types[id(e)])
                    if isinstance(site, TArrow):
                        raise LoweringError(
                            "Unsupported", f"{n} is used as a functional value"
                        )
                    return Var(self.fun_req(n, site), loc=e.loc)
                site = ctm.expr_types.get(id(e))
                if site is not None and isinstance(prune(site), TArrow):
                    raise LoweringError(
                        "Unsupported", f"{n} is a functional value in the ground goal"
                    )
                return Var(n, loc=e.loc)
            case App(fn, args):
                fn, args = _flatten_app(fn, args)
                if isinstance(fn, Var) and fn.name in self.fn_decls:
                    nparams = len(self.fn_decls[fn.name].params)
                    if len(args) != nparams:
                        raise LoweringError(
                            "Unsupported",
                            f"{fn.name} applied to {len(args)} of {nparams} arguments",
                        )
                    site = prune(ctm.expr_types[id(fn)])
                    name = self.fun_req(fn.name, site)
                    return App(Var(name), [self.walk(a, ctm) for a in args], loc=e.loc)
                if isinstance(fn, Var) and fn.name in BINOPS:
                    if len(args) != 2:
                        raise LoweringError(
                            "Unsupported", f"operator {fn.name} partially applied"
                        )
                    return BinOp(fn.name, self.walk(args[0], ctm), self.walk(args[1], ctm), loc=e.loc)
                raise LoweringError(
                    "Unsupported",
                    "application head is not a known function",
                )
            case Lambda():
                raise LoweringError("Internal", "lambda survived lifting")
            case Let(n, b1, b2):
                return Let(n, self.walk(b1, ctm), self.walk(b2, ctm), loc=e.loc)
            case If(c, t, f):
                return If(self.walk(c, ctm), self.walk(t, ctm), self.walk(f, ctm), loc=e.loc)
            case Match(scrut, branches):
                return Match(
                    self.walk(scrut, ctm),
                    [(self.walk_pat(p, ctm), self.walk(b, ctm)) for p, b in branches],
                    loc=e.loc,
                )
            case Construct(n, args):
                owner = ctm.expr_types[id(e)]
                return Construct(
                    self.ctor_at(n, owner), [self.walk(a, ctm) for a in args], loc=e.loc
                )
            case Tuple(elems):
                t = prune(ctm.expr_types[id(e)])
                sort = self.sort_of(t)
                return Construct(
                    self.tuple_ctor[sort], [self.walk(x, ctm) for x in elems], loc=e.loc
                )
            case BinOp(op, a, b):
                return BinOp(op, self.walk(a, ctm), self.walk(b, ctm), loc=e.loc)
            case Not(a):
                return Not(self.walk(a, ctm), loc=e.loc)
            case Tester(cn, a):
                owner = ctm.expr_types[id(a)]
                return Tester(self.ctor_at(cn, owner), self.walk(a, ctm), loc=e.loc)
            case Selector(cn, i, a):
                owner = ctm.expr_types[id(a)]
                return Selector(self.ctor_at(cn, owner), i, self.walk(a, ctm), loc=e.loc)
        raise TypeError(f"not an expression: {e!r}")

    def walk_pat(self, p: Pattern, ctm: TypedModule) -> Pattern:
        match p:
            case PVar() | PWildcard() | PIntLit() | PBoolLit():
                return p
            case PConstruct(n, args):
                owner = ctm.pat_types[id(p)]
                return PConstruct(
                    self.ctor_at(n, owner), [self.walk_pat(a, ctm) for a in args]
                )
            case PTuple(elems):
                t = prune(ctm.pat_types[id(p)])
                sort = self.sort_of(t)
                return PConstruct(
                    self.tuple_ctor[sort], [self.walk_pat(x, ctm) for x in elems]
                )
        raise TypeError(f"not a pattern: {p!r}")


def _surface_instance(st, scope: dict[str, Type], env: TypeEnv) -> Type:
    from .typecheck import surface_to_type

    return surface_to_type(st, scope, env)


def _instantiate_with(t: Type, mapping: dict[int, TVar]) -> Type:
    t = prune(t)
    match t:
        case TVar():
            return mapping.get(t.id, t)
        case TCon(name, args):
            return TCon(name, [_instantiate_with(a, mapping) for a in args])
        case TTuple(elems):
            return TTuple([_instantiate_with(x, mapping) for x in elems])
        case TArrow(d, c):
            return TArrow(_instantiate_with(d, mapping), _instantiate_with(c, mapping))
    raise TypeError(f"not a type: {t!r}")


def monomorphize(x, goal_name: str) -> GroundProgram:
    """Lower the named goal and everything it reaches to ground form."""
    low = _as_lowering(x)
    tm = low.tm
    thm = next(
        (d for d in tm.module.decls if isinstance(d, TheoremDecl) and d.name == goal_name),
        None,
    )
    if thm is None:
        raise LoweringError("Internal", f"no goal named {goal_name!r}")
    m = _Mono(low)
    sc = tm.schemes[goal_name]
    default_unbound_to_int(sc.body)
    ptys, _ = strip_arrows(sc.body)
    goal_vars = [(pn, m.sort_of(t)) for (pn, _), t in zip(thm.params, ptys)]
    goal = m.walk(thm.body, tm)
    funs = list(m.funs_out)
    _pair_mutual(funs, {d.name for d in funs})
    funs = _toposort_funs(funs)
    templates = {d.name: template_of(d) for d in funs}
    return GroundProgram(
        types=m.types_out,
        funs=funs,
        goal=goal,
        goal_vars=goal_vars,
        fun_sorts=m.fun_sorts,
        templates=templates,
        measures=m.measures,
        manifest=m.manifest,
        goal_name=goal_name,
    )


# ---------------------------------------------------------------------------
# the whole pipeline, from a world
# ---------------------------------------------------------------------------


def lower_goal(w: World, goal: Expr, *, name: str = "goal") -> GroundProgram:
    """Lower a boolean goal (a lambda over its variables, or a bare
    expression whose free variables become the universals) against the
    definitions admitted in ``w``."""
    goal = _clone(goal)
    params: list[tuple[str, object]] = []
    body = goal
    if isinstance(goal, Lambda):
        while isinstance(body, Lambda):
            ptys = body.param_tys or [None] * len(body.params)
            params.extend(zip(body.params, ptys))
            body = body.body
    else:
        known = set(w.env.values) | set(w.env.ctor_owner)
        params = [(v, None) for v in _ordered_frees(goal, set()) if v not in known]
    gname = name
    while gname in w.env.values or gname in w.theorems:
        gname += "_"
    thm = TheoremDecl(gname, params, body)
    decls: list[Decl] = [_clone_decl(d) for d in w.funs.values()] + [thm]
    tm = infer(SourceModule(decls), w.env)
    low = Lowering(
        tm,
        measures={n: w.measures[n] for n in w.funs if n in w.measures},
        origin={n: n for n in w.funs},
    )
    gp = monomorphize(specialize(lambda_lift(low)), gname)
    gp.goal_name = name
    return gp
