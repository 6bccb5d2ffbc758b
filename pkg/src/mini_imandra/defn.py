"""The definitional principle: admitting declarations into a logical world.

A ``World`` is an immutable registry of admitted types, functions, measures,
recursion call structure, templates, rewrite rules, and theorems.  ``admit``
extends it conservatively: a recursive function enters only with a measure
and a termination certificate — structural descent checked syntactically, or
one verification condition per recursive call discharged by a prover.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import ordinal
from .eval import (
    ConstructV,
    EvalError,
    TupleV,
    Value,
    eval_expr,
    match_pattern,
    ordinal_of_value,
)
from .syntax import (
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
    Not,
    Pattern,
    PConstruct,
    PTuple,
    PVar,
    STArrow,
    STCon,
    STTuple,
    SourceModule,
    Selector,
    SurfaceTy,
    Tester,
    TheoremDecl,
    Tuple,
    TypeDecl,
    Var,
    fresh_name,
    free_vars,
    parse_module,
    pattern_vars,
    pretty_expr,
    subst,
)
from .template import (
    Template,
    _conjuncts,
    _unnormalize,
    negate,
    normalize_shortcuts,
    pattern_as_term,
    template_of,
)
from .typecheck import (
    Scheme,
    TCon,
    TTuple,
    TVar,
    Type,
    TypeEnv,
    TypedModule,
    T_INT,
    builtin_env,
    check_fun_admissible,
    check_type_admissible,
    has_arrow,
    infer,
    prune,
    strip_arrows,
    unify,
)

ORD_LT = "Ordinal.lt"
ORD_PAIR = "Ordinal.pair"
ORD_OF_INT = "Ordinal.of_int"


class AdmissionError(Exception):
    def __init__(self, kind: str, msg: str, vc: Optional["TerminationVC"] = None):
        # TerminationUnproved | Redefinition | NoMeasure | TheoremUnproved | NotAdmissible
        self.kind = kind
        self.vc = vc
        super().__init__(f"{kind}: {msg}")


# ---------------------------------------------------------------------------
# measures and recursive calls
# ---------------------------------------------------------------------------


class MeasureSpec:
    pass


@dataclass(frozen=True)
class Structural(MeasureSpec):
    index: int

    def __str__(self) -> str:
        return f"structural descent on argument {self.index}"


@dataclass(frozen=True)
class AdmLex(MeasureSpec):
    names: tuple[str, ...]

    def __str__(self) -> str:
        return f"lexicographic on ({', '.join(self.names)})"


@dataclass(frozen=True)
class Explicit(MeasureSpec):
    expr: Expr

    def __str__(self) -> str:
        return pretty_expr(self.expr)


@dataclass
class Binder:
    """One binding step on the path to a call: a pattern matched against an
    expression (a match branch, or a let via a variable pattern), plus the
    guard equation that records it."""

    pat: Pattern
    subject: Expr
    equation: Expr


@dataclass
class RecCall:
    callee: str
    args: tuple[Expr, ...]
    guard: tuple[Expr, ...]
    binders: tuple[Binder, ...] = ()

    def __str__(self) -> str:
        g = ", ".join(pretty_expr(c) for c in self.guard) or "true"
        return f"({self.callee}, ({', '.join(pretty_expr(a) for a in self.args)}), {{{g}}})"


@dataclass
class TerminationVC:
    host: str
    call: RecCall
    hypotheses: tuple[Expr, ...]
    lhs: Expr  # measure at the call's arguments
    rhs: Expr  # measure at the formal parameters
    certificate: Optional[str] = None  # "structural" when discharged syntactically

    def goal(self) -> Expr:
        out: Expr = App(Var(ORD_LT), [self.lhs, self.rhs])
        for h in reversed(self.hypotheses):
            out = BinOp("||", Not(h), out)
        return out

    def __str__(self) -> str:
        hyps = ", ".join(pretty_expr(h) for h in self.hypotheses) or "true"
        return f"{{ {hyps} }} |- {pretty_expr(self.lhs)} << {pretty_expr(self.rhs)}"


def decl_params_body(f: FunDecl) -> tuple[list[str], Expr]:
    """Parameters with any leading lambda layers folded in."""
    params = list(f.params)
    body = f.body
    while isinstance(body, Lambda):
        params += body.params
        body = body.body
    return params, body


def collect_rec_calls(f: FunDecl, clique: Optional[set[str]] = None) -> list[RecCall]:
    """Every occurrence of a call to f (or its recursion clique) in f's
    body, with the conjunction of if-conditions and match/let constraints
    on the path to it.  Match constraints are equations
    ``scrutinee = pattern-as-term``."""
    if clique is None:
        clique = set(f.group) or {f.name}
    params, body = decl_params_body(f)
    body = normalize_shortcuts(body)

    calls: list[RecCall] = []

    def walk(e: Expr, guard: list[Expr], binders: list[Binder], scope: set[str], shadow: set[str]):
        match e:
            case App(Var(g), args) if g in clique and g not in shadow:
                calls.append(RecCall(g, tuple(args), tuple(guard), tuple(binders)))
                for a in args:
                    walk(a, guard, binders, scope, shadow)
            case App(fn, args):
                walk(fn, guard, binders, scope, shadow)
                for a in args:
                    walk(a, guard, binders, scope, shadow)
            case If(c, t, f_):
                walk(c, guard, binders, scope, shadow)
                walk(t, guard + _conjuncts(c), binders, scope, shadow)
                walk(f_, guard + [negate(_unnormalize(c))], binders, scope, shadow)
            case Let(name, b1, b2):
                walk(b1, guard, binders, scope, shadow)
                if isinstance(b1, Lambda):
                    # a functional let: inline it, no first-order equation
                    walk(subst(b2, {name: b1}), guard, binders, scope, shadow)
                    return
                if name in scope:
                    nm = fresh_name(name, scope)
                    b2 = subst(b2, {name: Var(nm)})
                    name = nm
                eq = BinOp("=", Var(name), b1)
                walk(
                    b2,
                    guard + [eq],
                    binders + [Binder(PVar(name), b1, eq)],
                    scope | {name},
                    shadow | {name} if name in clique else shadow,
                )
            case Match(scrut, branches):
                walk(scrut, guard, binders, scope, shadow)
                for p, b in branches:
                    pvars = pattern_vars(p)
                    ren = {v: fresh_name(v, scope | set(pvars)) for v in pvars if v in scope}
                    if ren:
                        p = _rename_pat(p, ren)
                        b = subst(b, {old: Var(new) for old, new in ren.items()})
                    term, names = pattern_as_term(p, scope)
                    eq = BinOp("=", scrut, term)
                    walk(
                        b,
                        guard + [eq],
                        binders + [Binder(p, scrut, eq)],
                        scope | set(names),
                        shadow | (set(names) & clique),
                    )
            case Lambda(ps, b):
                walk(b, guard, binders, scope | set(ps), shadow | set(ps))
            case Construct(_, args) | Tuple(args):
                for a in args:
                    walk(a, guard, binders, scope, shadow)
            case BinOp(_, a, b):
                walk(a, guard, binders, scope, shadow)
                walk(b, guard, binders, scope, shadow)
            case Not(a) | Tester(_, a) | Selector(_, _, a):
                walk(a, guard, binders, scope, shadow)
            case _:
                pass

    walk(body, [], [], set(params), set())
    return calls


def _rename_pat(p: Pattern, ren: dict[str, str]) -> Pattern:
    match p:
        case PVar(name):
            return PVar(ren.get(name, name))
        case PConstruct(c, args):
            return PConstruct(c, [_rename_pat(a, ren) for a in args])
        case PTuple(elems):
            return PTuple([_rename_pat(x, ren) for x in elems])
        case _:
            return p


# ---------------------------------------------------------------------------
# structural descent
# ---------------------------------------------------------------------------


def value_size(v: Value) -> int:
    """Constructor-node count: the datatype size used by structural
    measures."""
    match v:
        case ConstructV(_, args):
            return 1 + sum(value_size(a) for a in args)
        case TupleV(items):
            return 1 + sum(value_size(x) for x in items)
        case _:
            return 0


def structural_positions(fs: list[FunDecl], clique: set[str]) -> list[int]:
    """Parameter positions i such that every intra-clique call, in every
    clique member, passes a strict subterm of parameter i in position i."""
    arities = [len(decl_params_body(f)[0]) for f in fs]
    if not arities or min(arities) == 0:
        return []
    ok = set(range(min(arities)))

    def bind_pat(p: Pattern, origin: Optional[tuple[int, bool]], strict: bool, sub: dict):
        match p:
            case PVar(name):
                if origin is not None:
                    sub[name] = (origin[0], origin[1] or strict)
                else:
                    sub.pop(name, None)
            case PConstruct(_, args):
                for a in args:
                    bind_pat(a, origin, True, sub)
            case PTuple(elems):
                for x in elems:
                    bind_pat(x, origin, True, sub)
            case _:
                pass

    for f in fs:
        params, body = decl_params_body(f)
        # var -> (param index, strictly below a constructor?)
        sub0 = {p: (i, False) for i, p in enumerate(params)}
        sites: list[tuple[list[Expr], dict]] = []

        def walk(e: Expr, sub: dict):
            match e:
                case App(Var(g), args) if g in clique:
                    sites.append((list(args), dict(sub)))
                    for a in args:
                        walk(a, sub)
                case App(fn, args):
                    walk(fn, sub)
                    for a in args:
                        walk(a, sub)
                case If(c, t, f_):
                    walk(c, sub)
                    walk(t, sub)
                    walk(f_, sub)
                case Let(name, b1, b2):
                    walk(b1, sub)
                    s2 = dict(sub)
                    if isinstance(b1, Var) and b1.name in sub:
                        s2[name] = sub[b1.name]  # alias keeps its pedigree
                    else:
                        s2.pop(name, None)
                    walk(b2, s2)
                case Match(scrut, branches):
                    walk(scrut, sub)
                    origin = sub.get(scrut.name) if isinstance(scrut, Var) else None
                    for p, b in branches:
                        s2 = dict(sub)
                        bind_pat(p, origin, False, s2)
                        walk(b, s2)
                case Lambda(ps, b):
                    walk(b, {k: v for k, v in sub.items() if k not in ps})
                case Construct(_, args) | Tuple(args):
                    for a in args:
                        walk(a, sub)
                case BinOp(_, a, b):
                    walk(a, sub)
                    walk(b, sub)
                case Not(a) | Tester(_, a) | Selector(_, _, a):
                    walk(a, sub)
                case _:
                    pass

        walk(body, sub0)
        for args, sub_at in sites:
            ok = {
                i
                for i in ok
                if i < len(args)
                and isinstance(args[i], Var)
                and sub_at.get(args[i].name) == (i, True)
            }
            if not ok:
                return []
    return sorted(ok)


# ---------------------------------------------------------------------------
# measure elaboration
# ---------------------------------------------------------------------------


def _adm_chain(names: list[str]) -> Expr:
    head = App(Var(ORD_OF_INT), [Var(names[0])])
    if len(names) == 1:
        return head
    return App(Var(ORD_PAIR), [head, _adm_chain(names[1:])])


def elaborate_measure(
    f: FunDecl, typed: TypedModule, clique_fs: list[FunDecl]
) -> MeasureSpec:
    """Resolve f's measure: an @@adm annotation becomes an explicit ordinal
    pair chain, @@measure is taken as written (int-valued measures are
    wrapped in of_int), and with no annotation a structurally decreasing
    argument position is inferred."""
    from .syntax import Adm, Measure

    params, _ = decl_params_body(f)
    anns = [a for a in f.annotations if isinstance(a, (Adm, Measure))]
    if len(anns) > 1:
        raise AdmissionError("NoMeasure", f"{f.name}: more than one measure annotation")
    if anns and isinstance(anns[0], Adm):
        names = anns[0].vars
        bad = [n for n in names if n not in params]
        if bad:
            raise AdmissionError(
                "NoMeasure", f"{f.name}: @@adm names {bad} are not parameters"
            )
        ptypes = dict(zip(params, strip_arrows(typed.schemes[f.name].body)[0]))
        for n in names:
            if prune(ptypes[n]) != T_INT:
                raise AdmissionError(
                    "NoMeasure", f"{f.name}: @@adm parameter {n} is not an int"
                )
        return Explicit(_adm_chain(list(names)))
    if anns:
        from .typecheck import _normalize_ctors

        e = _normalize_ctors(anns[0].expr, typed.env)
        unknown = free_vars(e) - set(params) - set(typed.env.values)
        if unknown:
            raise AdmissionError(
                "NoMeasure", f"{f.name}: measure mentions unknown names {sorted(unknown)}"
            )
        if _measure_result_kind(e, f, typed) == "int":
            return Explicit(App(Var(ORD_OF_INT), [e]))
        return Explicit(e)
    pos = structural_positions(clique_fs, {g.name for g in clique_fs})
    if not pos:
        raise AdmissionError(
            "NoMeasure",
            f"{f.name}: no structurally decreasing argument; "
            f"annotate with [@@adm ...] or [@@measure ...]",
        )
    return Structural(pos[0])


def _measure_result_kind(e: Expr, f: FunDecl, typed: TypedModule) -> str:
    """Type a measure body in the host's parameter scope: 'int' or
    'ordinal'."""
    from .typecheck import TypeCheckError, _Inferencer

    params, _ = decl_params_body(f)
    ptypes = strip_arrows(typed.schemes[f.name].instantiate())[0]
    inf = _Inferencer(typed.env.copy())
    scope = dict(inf.env.values)
    for p, t in zip(params, ptypes):
        scope[p] = Scheme([], t)
    try:
        t = prune(inf.type_expr(e, scope))
    except TypeCheckError as exc:
        raise AdmissionError("NoMeasure", f"{f.name}: ill-typed measure: {exc}")
    if t == T_INT:
        return "int"
    if isinstance(t, TCon) and t.name == "ordinal":
        return "ordinal"
    raise AdmissionError(
        "NoMeasure", f"{f.name}: measure must be an int or ordinal, not {t}"
    )


def measure_expr(spec: MeasureSpec, tag: Optional[int] = None) -> Optional[Expr]:
    """The measure as an expression over the host's formals, or None for
    structural specs (whose obligation is checked syntactically).  A tag
    pairs the measure with a constant, ordering the members of a mutual
    group when their base measures tie."""
    match spec:
        case Explicit(e):
            if tag is not None:
                e = App(Var(ORD_PAIR), [e, App(Var(ORD_OF_INT), [IntLit(tag)])])
            return e
        case AdmLex(names):
            return measure_expr(Explicit(_adm_chain(list(names))), tag)
        case Structural():
            return None
    raise TypeError(f"not a measure: {spec!r}")


def gen_termination_vcs(
    fs: list[FunDecl],
    specs: dict[str, MeasureSpec],
    calls: dict[str, list[RecCall]],
) -> list[TerminationVC]:
    """One VC per recursive call.  Structural measures yield VCs carrying a
    "structural" certificate; explicit measures substitute the call's
    arguments into the callee's measure."""
    by_name = {f.name: f for f in fs}
    all_structural = all(isinstance(s, Structural) for s in specs.values())
    tags = (
        {f.name: i for i, f in enumerate(fs)}
        if len(fs) > 1 and not all_structural
        else {}
    )
    vcs: list[TerminationVC] = []
    for f in fs:
        spec = specs[f.name]
        params, _ = decl_params_body(f)
        for rc in calls[f.name]:
            callee = by_name[rc.callee]
            cparams, _ = decl_params_body(callee)
            if len(rc.args) != len(cparams):
                raise AdmissionError(
                    "TerminationUnproved",
                    f"{f.name}: recursive call to {rc.callee} is not saturated",
                )
            if isinstance(spec, Structural):
                i = spec.index
                vcs.append(
                    TerminationVC(
                        host=f.name,
                        call=rc,
                        hypotheses=rc.guard,
                        lhs=rc.args[i],
                        rhs=Var(params[i]),
                        certificate="structural",
                    )
                )
                continue
            lhs = subst(
                measure_expr(specs[rc.callee], tags.get(rc.callee)),
                dict(zip(cparams, rc.args)),
            )
            vcs.append(
                TerminationVC(
                    host=f.name,
                    call=rc,
                    hypotheses=rc.guard,
                    lhs=lhs,
                    rhs=measure_expr(spec, tags.get(f.name)),
                )
            )
    return vcs


# ---------------------------------------------------------------------------
# rewrite rules and theorems
# ---------------------------------------------------------------------------


@dataclass
class Rule:
    name: str
    conditions: tuple[Expr, ...]
    lhs: Expr
    rhs: Expr

    def __str__(self) -> str:
        conds = " && ".join(pretty_expr(c) for c in self.conditions)
        arrow = f"{pretty_expr(self.lhs)} --> {pretty_expr(self.rhs)}"
        return f"[{self.name}] {conds + ' ==> ' if conds else ''}{arrow}"


def _flatten_and(e: Expr) -> list[Expr]:
    if isinstance(e, BinOp) and e.op == "&&":
        return _flatten_and(e.lhs) + _flatten_and(e.rhs)
    return [e]


def rule_of_theorem(name: str, body: Expr) -> Rule:
    """Orient a proved goal as a conditional rewrite: hypotheses of an
    implication become conditions, an equational conclusion rewrites left
    to right, and a bare boolean conclusion rewrites to true."""
    conds: list[Expr] = []
    b = body
    while isinstance(b, BinOp) and b.op == "||" and isinstance(b.lhs, Not):
        conds.extend(_flatten_and(b.lhs.arg))
        b = b.rhs
    match b:
        case BinOp("=", l, r):
            lhs, rhs = l, r
        case Not(x):
            lhs, rhs = x, BoolLit(False)
        case _:
            lhs, rhs = b, BoolLit(True)
    return Rule(name, tuple(conds), lhs, rhs)


@dataclass
class TheoremRec:
    name: str
    params: list[str]
    body: Expr
    annotations: list
    proved_by: str


# ---------------------------------------------------------------------------
# the world
# ---------------------------------------------------------------------------

# prover(goal_expr, world, budget) -> True if proved
ProverFn = Callable[[Expr, "World", int], bool]


@dataclass
class World:
    env: TypeEnv
    funs: dict[str, FunDecl] = field(default_factory=dict)
    schemes: dict[str, Scheme] = field(default_factory=dict)
    measures: dict[str, MeasureSpec] = field(default_factory=dict)
    rec_calls: dict[str, list[RecCall]] = field(default_factory=dict)
    vcs: dict[str, list[TerminationVC]] = field(default_factory=dict)
    templates: dict[str, Template] = field(default_factory=dict)
    rules: list[Rule] = field(default_factory=list)
    theorems: dict[str, TheoremRec] = field(default_factory=dict)

    def copy(self) -> "World":
        return World(
            env=self.env.copy(),
            funs=dict(self.funs),
            schemes=dict(self.schemes),
            measures=dict(self.measures),
            rec_calls={k: list(v) for k, v in self.rec_calls.items()},
            vcs={k: list(v) for k, v in self.vcs.items()},
            templates=dict(self.templates),
            rules=list(self.rules),
            theorems=dict(self.theorems),
        )

    def fun_table(self) -> dict[str, tuple[list[str], Expr]]:
        return {n: decl_params_body(f) for n, f in self.funs.items()}


def initial_world() -> World:
    return World(env=builtin_env())


# ---------------------------------------------------------------------------
# admission
# ---------------------------------------------------------------------------


def admit(
    d: Decl | list[FunDecl],
    w: World,
    *,
    prover: Optional[ProverFn] = None,
    theorem_prover=None,
    budget: int = 50,
) -> World:
    """Admit one declaration (or one mutually recursive pair) into the
    world, returning the extended world.  Raises AdmissionError; the input
    world is never mutated."""
    group = d if isinstance(d, list) else [d]
    out = w.copy()
    match group[0]:
        case TypeDecl() as td:
            if td.name in out.env.types:
                raise AdmissionError("Redefinition", f"type {td.name} is already admitted")
            check_type_admissible(td)
            out.env = infer(SourceModule([td]), out.env).env
        case FunDecl():
            _admit_funs(group, out, prover, budget)
        case TheoremDecl() as th:
            _admit_theorem(th, out, theorem_prover)
        case Directive():
            raise AdmissionError(
                "NotAdmissible", "directives are commands, not admissible declarations"
            )
        case other:
            raise TypeError(f"not a declaration: {other!r}")
    return out


def _admit_funs(
    group: list[FunDecl], out: World, prover: Optional[ProverFn], budget: int
) -> None:
    for f in group:
        if f.name in out.funs or f.name in out.env.values:
            raise AdmissionError("Redefinition", f"{f.name} is already admitted")
    typed = infer(SourceModule(list(group)), out.env)
    normalized = [d for d in typed.module.decls if isinstance(d, FunDecl)]
    for f in normalized:
        check_fun_admissible(f, normalized, typed)

    clique = {f.name for f in normalized}
    flat = [
        FunDecl(
            f.name,
            *decl_params_body(f),
            annotations=f.annotations,
            is_rec=f.is_rec,
            group=f.group,
            loc=f.loc,
        )
        for f in normalized
    ]

    calls = {f.name: collect_rec_calls(f, clique) for f in flat}
    specs: dict[str, MeasureSpec] = {}
    vcs: list[TerminationVC] = []
    if any(calls.values()):
        try:
            specs = {f.name: elaborate_measure(f, typed, flat) for f in flat}
        except AdmissionError as e:
            if e.kind == "NoMeasure":
                raise AdmissionError("TerminationUnproved", str(e)) from e
            raise
        vcs = gen_termination_vcs(flat, specs, calls)
        for vc in vcs:
            if vc.certificate == "structural":
                continue
            if prover is None:
                raise AdmissionError(
                    "TerminationUnproved",
                    f"{vc.host}: no prover available for {vc}",
                    vc=vc,
                )
            if not prover(vc.goal(), out, budget):
                raise AdmissionError(
                    "TerminationUnproved", f"{vc.host}: cannot prove {vc}", vc=vc
                )

    for f in flat:
        out.funs[f.name] = f
        out.schemes[f.name] = typed.schemes[f.name]
        out.env.values[f.name] = typed.schemes[f.name]
        if calls.get(f.name):
            out.measures[f.name] = specs[f.name]
            out.rec_calls[f.name] = calls[f.name]
            out.vcs[f.name] = [v for v in vcs if v.host == f.name]
        ptypes = strip_arrows(typed.schemes[f.name].body)[0]
        if not any(has_arrow(t) for t in ptypes):
            out.templates[f.name] = template_of(f)


def _admit_theorem(th: TheoremDecl, out: World, theorem_prover) -> None:
    from .syntax import Rewrite

    if th.name in out.theorems:
        raise AdmissionError("Redefinition", f"theorem {th.name} is already admitted")
    infer(SourceModule([th]), out.env)
    if theorem_prover is None:
        raise AdmissionError("TheoremUnproved", f"{th.name}: no prover configured")
    outcome = theorem_prover(th, out)
    if not outcome:
        raise AdmissionError("TheoremUnproved", f"{th.name}: proof failed")
    out.theorems[th.name] = TheoremRec(
        th.name,
        [p for p, _ in th.params],
        th.body,
        th.annotations,
        outcome if isinstance(outcome, str) else "proved",
    )
    if any(isinstance(a, Rewrite) for a in th.annotations):
        out.rules.append(rule_of_theorem(th.name, th.body))


def admit_module(
    src_or_module,
    w: World,
    *,
    prover: Optional[ProverFn] = None,
    theorem_prover=None,
    budget: int = 50,
    on_directive=None,
) -> World:
    """Admit every declaration of a module in order.  Directives are passed
    to ``on_directive(d, world)`` if given, else skipped."""
    m = parse_module(src_or_module) if isinstance(src_or_module, str) else src_or_module
    i = 0
    while i < len(m.decls):
        d = m.decls[i]
        if isinstance(d, Directive):
            if on_directive is not None:
                on_directive(d, w)
            i += 1
            continue
        if isinstance(d, FunDecl) and len(d.group) == 2 and i + 1 < len(m.decls):
            partner = m.decls[i + 1]
            assert isinstance(partner, FunDecl) and partner.group == d.group
            w = admit([d, partner], w, prover=prover, theorem_prover=theorem_prover, budget=budget)
            i += 2
            continue
        w = admit(d, w, prover=prover, theorem_prover=theorem_prover, budget=budget)
        i += 1
    return w


# ---------------------------------------------------------------------------
# runtime checks: random values and measure decrease
# ---------------------------------------------------------------------------


def _mentions(st: SurfaceTy, name: str) -> bool:
    match st:
        case STCon(n, args):
            return n == name or any(_mentions(a, name) for a in args)
        case STTuple(elems):
            return any(_mentions(x, name) for x in elems)
        case STArrow(dom, cod):
            return _mentions(dom, name) or _mentions(cod, name)
        case _:
            return False


def random_value(ty: Type, env: TypeEnv, rng: random.Random, size: int = 4) -> Value:
    """A random value of a ground instance of ty (type variables read as
    int); recursive constructors are avoided once the size budget runs
    out."""
    ty = prune(ty)
    match ty:
        case TVar():
            return rng.randint(-5, 5)
        case TTuple(elems):
            return TupleV(tuple(random_value(t, env, rng, size) for t in elems))
        case TCon("int", _):
            return rng.randint(-5, 5)
        case TCon("bool", _):
            return rng.random() < 0.5
        case TCon(name, _):
            info = env.types[name]
            ctors = info.ctors
            if size <= 0:
                base = [
                    (cn, fs) for cn, fs in ctors if not any(_mentions(f, name) for f in fs)
                ]
                ctors = base or ctors
            cname, _ = ctors[rng.randrange(len(ctors))]
            field_tys, result, _ = env.ctor_sig(cname)
            unify(result, ty)
            return ConstructV(
                cname, tuple(random_value(t, env, rng, size - 1) for t in field_tys)
            )
    raise ValueError(f"cannot generate a value of type {ty}")


def check_call_decrease(
    w: World, fname: str, rc: RecCall, param_vals: dict[str, Value]
) -> Optional[bool]:
    """Runtime check of one termination VC instance: None when the guard is
    not satisfied by these parameter values, else whether the measure
    strictly decreased."""
    funs = w.fun_table()
    env = dict(param_vals)
    binder_eqs = {id(b.equation) for b in rc.binders}
    for b in rc.binders:
        try:
            v = eval_expr(b.subject, env, funs)
        except EvalError:
            return None
        m = match_pattern(b.pat, v)
        if m is None:
            return None
        env.update(m)
    for c in rc.guard:
        if id(c) in binder_eqs:
            continue  # already realized by the binder above
        try:
            if eval_expr(c, env, funs) is not True:
                return None
        except EvalError:
            return None

    spec = w.measures[fname]
    params, _ = decl_params_body(w.funs[fname])
    try:
        if isinstance(spec, Structural):
            i = spec.index
            lhs_v = eval_expr(rc.args[i], env, funs)
            return value_size(lhs_v) < value_size(param_vals[params[i]])
        cparams, _ = decl_params_body(w.funs[rc.callee])
        tags = _group_tags(w, fname)
        lhs = subst(
            measure_expr(w.measures[rc.callee], tags.get(rc.callee)),
            dict(zip(cparams, rc.args)),
        )
        lhs_v = eval_expr(lhs, env, funs)
        rhs_v = eval_expr(
            measure_expr(spec, tags.get(fname)),
            {p: param_vals[p] for p in params},
            funs,
        )
    except EvalError:
        # measure instances may nest live recursive calls whose evaluation
        # exceeds the budget at extreme sample points
        return None
    return ordinal.lt(ordinal_of_value(lhs_v), ordinal_of_value(rhs_v))


def _group_tags(w: World, fname: str) -> dict[str, int]:
    group = w.funs[fname].group
    if len(group) <= 1:
        return {}
    if all(isinstance(w.measures.get(g, Structural(0)), Structural) for g in group):
        return {}
    return {g: i for i, g in enumerate(group)}
