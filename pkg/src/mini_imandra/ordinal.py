"""Ordinals below epsilon_0 in Cantor normal form.

An ordinal is either ``Fin(n)`` (a natural number) or ``Cons(exp, coeff, rest)``
denoting ``coeff * omega^exp + rest``.  Normal form requires every leading
exponent inside ``rest`` to be strictly below ``exp``, and ``coeff >= 1``.
The strict order ``lt`` is the well-founded relation all termination proofs
bottom out in; ``plus`` is ordinal addition (not commutative), and ``pair``
is the omega-scaled lexicographic pairing used to elaborate ``[@@adm]``
annotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Fin:
    n: int  # >= 0 in normal form


@dataclass(frozen=True)
class Cons:
    exp: "Ordinal"
    coeff: int  # >= 1 in normal form
    rest: "Ordinal"


Ordinal = Union[Fin, Cons]

ZERO = Fin(0)
ONE = Fin(1)
OMEGA = Cons(Fin(1), 1, Fin(0))


def lt(x: Ordinal, y: Ordinal) -> bool:
    """The strict order ``<<``: lexicographic on (exp, coeff, rest), with
    every Fin below every Cons."""
    match x, y:
        case Fin(a), Fin(b):
            return a < b
        case Fin(_), Cons():
            return True
        case Cons(), Fin(_):
            return False
        case Cons(a1, c1, r1), Cons(a2, c2, r2):
            if lt(a1, a2):
                return True
            if a1 == a2:
                return c1 < c2 or (c1 == c2 and lt(r1, r2))
            return False
    raise TypeError(f"not an ordinal: {x!r}")


def of_int(n: int) -> Ordinal:
    """Embed an integer, clamping negatives to zero so measures stay
    ordinal-valued."""
    return Fin(n if n > 0 else 0)


def plus(x: Ordinal, y: Ordinal) -> Ordinal:
    """Ordinal addition.  Not commutative: a finite left summand is absorbed
    by an infinite right one (1 + omega = omega, but omega + 1 > omega)."""
    match x, y:
        case Fin(a), Fin(b):
            return Fin(a + b)
        case Fin(_), Cons():
            return y  # absorbed
        case Cons(a, c, r), Fin(_):
            return Cons(a, c, plus(r, y))
        case Cons(a1, c1, r1), Cons(a2, c2, r2):
            if lt(a1, a2):
                return y  # absorbed
            if a1 == a2:
                # same exponent: combine coefficients, r1 is infinitely
                # smaller than y and drops out
                return Cons(a1, c1 + c2, r2)
            return Cons(a1, c1, plus(r1, y))
    raise TypeError(f"not an ordinal: {x!r}")


def shift(x: Ordinal) -> Ordinal:
    """Multiply by omega on the exponent: Fin n becomes n*omega, and each
    term of a Cons has its exponent bumped by one."""
    match x:
        case Fin(0):
            return ZERO
        case Fin(n):
            return Cons(Fin(1), n, ZERO)
        case Cons(e, c, r):
            return Cons(plus(e, ONE), c, shift(r))
    raise TypeError(f"not an ordinal: {x!r}")


def pair(x: Ordinal, y: Ordinal) -> Ordinal:
    """Lexicographic pairing: pair(m, n) = m*omega + n on finite inputs,
    so lt(pair(a, b), pair(c, d)) holds whenever a << c, or a = c and
    b << d."""
    return plus(shift(x), y)


def is_normal_form(x: Ordinal) -> bool:
    """Check the CNF invariants: nonneg Fin, positive coefficients, strictly
    decreasing exponents, and no omega^0 Cons (that must be folded into Fin)."""
    match x:
        case Fin(n):
            return n >= 0
        case Cons(e, c, r):
            if c < 1 or e == ZERO:
                return False
            if not (is_normal_form(e) and is_normal_form(r)):
                return False
            return lt(_leading_exp(r), e) if isinstance(r, Cons) else True
    return False


def _leading_exp(x: Ordinal) -> Ordinal:
    return x.exp if isinstance(x, Cons) else ZERO


def pretty(x: Ordinal) -> str:
    """Readable rendering, e.g. ``2w^2 + 3``."""
    match x:
        case Fin(n):
            return str(n)
        case Cons(e, c, r):
            if e == ONE:
                head = f"{c}w"
            elif isinstance(e, Fin):
                head = f"{c}w^{e.n}"
            else:
                head = f"{c}w^({pretty(e)})"
            return head if r == ZERO else f"{head} + {pretty(r)}"
    return repr(x)
