"""Inference and admissibility tests, pinned to hand-derived schemes."""

from __future__ import annotations

import pytest

from mini_imandra.syntax import FunDecl, Lambda, TypeDecl, parse_expr, parse_module
from mini_imandra.typecheck import (
    AdmissibilityError,
    Scheme,
    T_BOOL,
    T_INT,
    TArrow,
    TCon,
    TVar,
    TypeCheckError,
    arrows,
    builtin_env,
    check_fun_admissible,
    check_type_admissible,
    infer,
    type_to_str,
)

LENGTH_SRC = "let rec length l = match l with | [] -> 0 | _ :: tl -> 1 + length tl"


def _scheme_str(s: Scheme) -> str:
    return type_to_str(s.body)


def test_length_scheme():
    typed = infer(parse_module(LENGTH_SRC), builtin_env())
    assert _scheme_str(typed.schemes["length"]) == "'a list -> int"


def test_identity_scheme():
    typed = infer(parse_module("let id x = x"), builtin_env())
    assert _scheme_str(typed.schemes["id"]) == "'a -> 'a"


def test_map_scheme():
    src = "let rec map f l = match l with | [] -> [] | x :: tl -> f x :: map f tl"
    typed = infer(parse_module(src), builtin_env())
    assert _scheme_str(typed.schemes["map"]) == "('a -> 'b) -> 'a list -> 'b list"


def test_same_len_body_types():
    env = builtin_env()
    a = TVar()
    env.values["List.length"] = Scheme([a], arrows([TCon("list", [a])], T_INT))
    a2, b2 = TVar(), TVar()
    env.values["List.map"] = Scheme(
        [a2, b2],
        arrows([TArrow(a2, b2), TCon("list", [a2])], TCon("list", [b2])),
    )
    src = """
theorem same_len (l : int list) =
  List.length (List.map (fun x -> x + 1) l) = List.length l
"""
    typed = infer(parse_module(src), env)
    thm = typed.module.decls[0]
    lam = thm.body.lhs.args[0].args[0]
    assert isinstance(lam, Lambda)
    assert type_to_str(typed.type_of(lam)) == "int -> int"
    assert _scheme_str(typed.schemes["same_len"]) == "int list -> bool"


def test_theorem_must_be_bool():
    with pytest.raises(TypeCheckError, match="bool"):
        infer(parse_module("theorem bad (x : int) = x + 1"), builtin_env())


def test_directive_goal_must_be_bool():
    with pytest.raises(TypeCheckError):
        infer(parse_module("verify (fun x -> x + 1)"), builtin_env())
    infer(parse_module("verify (fun x -> x = x)"), builtin_env())  # fine


def test_unknown_identifier():
    with pytest.raises(TypeCheckError, match="unknown identifier"):
        infer(parse_module("let f x = g x"), builtin_env())


def test_occurs_check():
    with pytest.raises(TypeCheckError):
        infer(parse_module("let rec selfapp f = selfapp (f f)"), builtin_env())


def test_annotated_lambda_param():
    typed = infer(parse_module("verify (fun (l : bool list) -> l = l)"), builtin_env())
    goal = typed.module.decls[0].goal
    assert type_to_str(typed.type_of(goal)) == "bool list -> bool"


def test_polymorphic_equality():
    typed = infer(parse_module("let f x y = x = y"), builtin_env())
    assert _scheme_str(typed.schemes["f"]) == "'a -> 'a -> bool"


def test_binop_types():
    env = builtin_env()
    typed = infer(parse_module("let f a b = a + b * 2 <= b && true"), env)
    assert _scheme_str(typed.schemes["f"]) == "int -> int -> bool"
    with pytest.raises(TypeCheckError):
        infer(parse_module("let g = true + 1"), env)


def test_mutual_pair_inference():
    src = (
        "let rec even n = if n <= 0 then true else odd (n - 1) "
        "and odd n = if n <= 0 then false else even (n - 1)"
    )
    typed = infer(parse_module(src), builtin_env())
    assert _scheme_str(typed.schemes["even"]) == "int -> bool"
    assert _scheme_str(typed.schemes["odd"]) == "int -> bool"


# ---------------------------------------------------------------------------
# exhaustiveness
# ---------------------------------------------------------------------------


def test_non_exhaustive_match_rejected():
    with pytest.raises(TypeCheckError, match="non-exhaustive"):
        infer(parse_module("let f l = match l with | x :: tl -> 1"), builtin_env())
    with pytest.raises(TypeCheckError, match="non-exhaustive"):
        infer(parse_module("let f b = match b with | true -> 1"), builtin_env())
    with pytest.raises(TypeCheckError, match="non-exhaustive"):
        infer(parse_module("let f n = match n with | 0 -> 1"), builtin_env())


def test_exhaustive_matches_accepted():
    env = builtin_env()
    infer(parse_module("let f l = match l with | [] -> 0 | _ :: tl -> 1"), env)
    infer(parse_module("let g b = match b with | true -> 1 | false -> 0"), env)
    infer(parse_module("let h n = match n with | 0 -> 1 | _ -> 2"), env)
    # two-deep split still covered
    infer(
        parse_module(
            "let k l = match l with | [] -> 0 | [x] -> 1 | x :: y :: t -> 2"
        ),
        env,
    )
    infer(parse_module("let p t = match t with | (a, b) -> a + b"), env)


# ---------------------------------------------------------------------------
# type admissibility
# ---------------------------------------------------------------------------


def _type_decl(src: str) -> TypeDecl:
    return parse_module(src).decls[0]


def test_nat_admissible():
    check_type_admissible(_type_decl("type nat = Z | S of nat"))


def test_list_like_admissible():
    check_type_admissible(_type_decl("type 'a seq = Snil | Scons of 'a * 'a seq"))


def test_higher_order_data_rejected():
    with pytest.raises(AdmissibilityError) as ei:
        check_type_admissible(_type_decl("type t = C of (int -> int)"))
    assert ei.value.kind == "HigherOrderData"


def test_not_well_founded_rejected():
    with pytest.raises(AdmissibilityError) as ei:
        check_type_admissible(_type_decl("type stream = SCons of int * stream"))
    assert ei.value.kind == "NotWellFounded"


def test_non_uniform_recursion_rejected():
    with pytest.raises(AdmissibilityError) as ei:
        check_type_admissible(_type_decl("type 'a t = Leaf of 'a | Tree of ('a * 'a) t"))
    assert ei.value.kind == "NonUniformRecursion"


def test_type_redefinition_rejected():
    env = builtin_env()
    src = "type t = A | B\ntype t = C | D"
    with pytest.raises(AdmissibilityError) as ei:
        infer(parse_module(src), env)
    assert ei.value.kind == "Redefinition"


# ---------------------------------------------------------------------------
# function admissibility (specializability)
# ---------------------------------------------------------------------------


def _check_clique(src: str):
    m = parse_module(src)
    typed = infer(m, builtin_env())
    funs = [d for d in typed.module.decls if isinstance(d, FunDecl)]
    clique = [d for d in funs if d.is_rec and d.group == funs[-1].group]
    for f in clique:
        check_fun_admissible(f, clique, typed)


def test_first_order_recursion_vacuously_ok():
    _check_clique(LENGTH_SRC)


def test_hof_passing_own_param_ok():
    _check_clique("let rec map f l = match l with | [] -> [] | x :: tl -> f x :: map f tl")


def test_nonspecializable_growing_argument():
    src = (
        "let rec bad h x = "
        "if x <= 0 then h x else bad (fun y -> h (h y)) (x - 1)"
    )
    with pytest.raises(AdmissibilityError) as ei:
        _check_clique(src)
    assert ei.value.kind == "NonSpecializable"


def test_nonspecializable_conflicting_sites():
    src = (
        "let rec r h k x = "
        "if x <= 0 then h x + k x else r h k (x - 1) + r k h (x - 2)"
    )
    with pytest.raises(AdmissibilityError) as ei:
        _check_clique(src)
    assert ei.value.kind == "NonSpecializable"
    assert "conflicting" in ei.value.explanation


def test_specializable_mutual_pair():
    src = (
        "let rec walk f l = match l with | [] -> [] | x :: tl -> f x :: hop f tl "
        "and hop g l = match l with | [] -> [] | x :: tl -> g x :: walk g tl"
    )
    m = parse_module(src)
    typed = infer(m, builtin_env())
    funs = [d for d in typed.module.decls if isinstance(d, FunDecl)]
    for f in funs:
        check_fun_admissible(f, funs, typed)
