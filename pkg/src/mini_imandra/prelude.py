"""The initial world: list combinators and ordinal arithmetic, defined in
the source language itself and admitted under the same definitional
discipline as user code.

Every recursive definition here descends structurally, so the prelude
admits without any prover: the ordinal comparison is written as a three-way
``cmp`` whose recursive calls all take strict subterms in matching
positions, and the order, addition, and pairing are derived from it.
"""

from __future__ import annotations

from functools import lru_cache

from .defn import World, admit_module, initial_world

PRELUDE_SRC = """
(* ordinals in Cantor normal form: OrdCons (e, c, r) stands for c*w^e + r *)
type ordinal = Fin of int | OrdCons of ordinal * int * ordinal

let rec Ordinal.cmp x y =
  match x with
  | Fin a ->
    (match y with
     | Fin b -> if a < b then -1 else if b < a then 1 else 0
     | OrdCons (_, _, _) -> -1)
  | OrdCons (e1, c1, r1) ->
    (match y with
     | Fin _ -> 1
     | OrdCons (e2, c2, r2) ->
       let ce = Ordinal.cmp e1 e2 in
       if ce = -1 then -1
       else if ce = 1 then 1
       else if c1 < c2 then -1
       else if c2 < c1 then 1
       else Ordinal.cmp r1 r2)

let Ordinal.lt x y = Ordinal.cmp x y < 0

let Ordinal.of_int n = if n < 0 then Fin 0 else Fin n

let rec Ordinal.plus x y =
  match x with
  | Fin a ->
    (match y with
     | Fin b -> Fin (a + b)
     | OrdCons (_, _, _) -> y)
  | OrdCons (e1, c1, r1) ->
    (match y with
     | Fin _ -> OrdCons (e1, c1, Ordinal.plus r1 y)
     | OrdCons (e2, c2, r2) ->
       if Ordinal.lt e1 e2 then y
       else if Ordinal.lt e2 e1 then OrdCons (e1, c1, Ordinal.plus r1 y)
       else OrdCons (e1, c1 + c2, r2))

let rec Ordinal.shift x =
  match x with
  | Fin n -> if n = 0 then Fin 0 else OrdCons (Fin 1, n, Fin 0)
  | OrdCons (e, c, r) -> OrdCons (Ordinal.plus e (Fin 1), c, Ordinal.shift r)

let Ordinal.pair x y = Ordinal.plus (Ordinal.shift x) y

let rec List.length l = match l with [] -> 0 | _ :: t -> 1 + List.length t

let rec List.append a b = match a with [] -> b | x :: t -> x :: List.append t b

let rec List.rev l = match l with [] -> [] | x :: t -> List.append (List.rev t) [x]

let rec List.map f l = match l with [] -> [] | x :: t -> f x :: List.map f t

let rec List.fold_left f acc l =
  match l with [] -> acc | x :: t -> List.fold_left f (f acc x) t
"""


@lru_cache(maxsize=1)
def _prelude() -> World:
    return admit_module(PRELUDE_SRC, initial_world())


def prelude_world() -> World:
    """A fresh world containing exactly the prelude."""
    return _prelude().copy()


PRELUDE_NAMES = (
    "Ordinal.cmp",
    "Ordinal.lt",
    "Ordinal.of_int",
    "Ordinal.plus",
    "Ordinal.shift",
    "Ordinal.pair",
    "List.length",
    "List.append",
    "List.rev",
    "List.map",
    "List.fold_left",
)
