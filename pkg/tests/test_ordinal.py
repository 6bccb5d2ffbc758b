"""Ordinal arithmetic tests.

The oracle used here models ordinals with finite exponents as sparse
polynomials in omega (``{degree: coeff}`` dicts) and implements the order
and addition directly from the textbook definitions, so it shares no code
with the implementation under test.
"""

from __future__ import annotations

import random
import time

import pytest

from mini_imandra.ordinal import (
    OMEGA,
    ONE,
    ZERO,
    Cons,
    Fin,
    Ordinal,
    is_normal_form,
    lt,
    of_int,
    pair,
    plus,
    pretty,
)

# ---------------------------------------------------------------------------
# oracle: sparse omega-polynomials (finite exponents only)
# ---------------------------------------------------------------------------


def poly_of(x: Ordinal) -> dict[int, int]:
    """Convert an ordinal whose exponents are all finite to {degree: coeff}."""
    out: dict[int, int] = {}
    while isinstance(x, Cons):
        assert isinstance(x.exp, Fin), "oracle only covers finite exponents"
        out[x.exp.n] = out.get(x.exp.n, 0) + x.coeff
        x = x.rest
    out[0] = out.get(0, 0) + x.n
    return out


def ordinal_of_poly(p: dict[int, int]) -> Ordinal:
    out: Ordinal = Fin(p.get(0, 0))
    for d in sorted(d for d, c in p.items() if d >= 1 and c > 0):
        out = Cons(Fin(d), p[d], out)
    return out


def poly_lt(p: dict[int, int], q: dict[int, int]) -> bool:
    for d in sorted(set(p) | set(q), reverse=True):
        a, b = p.get(d, 0), q.get(d, 0)
        if a != b:
            return a < b
    return False


def poly_plus(p: dict[int, int], q: dict[int, int]) -> dict[int, int]:
    """Ordinal addition on polynomials: everything in p strictly below q's
    leading degree is absorbed."""
    lead = max((d for d, c in q.items() if c > 0), default=0)
    out = {d: c for d, c in p.items() if d > lead and c > 0}
    out[lead] = p.get(lead, 0) + q.get(lead, 0)
    for d, c in q.items():
        if d < lead and c > 0:
            out[d] = c
    return out


def rand_poly(rng: random.Random) -> dict[int, int]:
    return {d: rng.randrange(0, 4) for d in range(rng.randrange(0, 4))}


# ---------------------------------------------------------------------------
# random normal-form generator (arbitrary exponent depth)
# ---------------------------------------------------------------------------


def rand_ordinal(rng: random.Random, depth: int) -> Ordinal:
    if depth == 0 or rng.random() < 0.3:
        return Fin(rng.randrange(0, 5))
    exps: list[Ordinal] = []
    for _ in range(rng.randrange(1, 4)):
        e = rand_ordinal(rng, depth - 1)
        if e != ZERO and e not in exps:
            exps.append(e)
    # sort exponents ascending; wrapping in that order puts the largest
    # exponent outermost, as normal form requires
    exps.sort(key=_sort_key)
    out: Ordinal = Fin(rng.randrange(0, 5))
    for e in exps:
        out = Cons(e, rng.randrange(1, 4), out)
    return out


def _sort_key(x: Ordinal):
    # total order key compatible with lt, good enough for the generator's
    # small ordinals: compare via exhaustive pairwise insertion
    import functools

    return functools.cmp_to_key(lambda a, b: -1 if lt(a, b) else (1 if lt(b, a) else 0))(x)


def random_below(rng: random.Random, x: Ordinal) -> Ordinal:
    """Produce some ordinal strictly below x (x must be nonzero)."""
    match x:
        case Fin(n):
            assert n > 0
            return Fin(rng.randrange(n))
        case Cons(e, c, r):
            choice = rng.randrange(4)
            if choice == 0 and r != ZERO:
                return Cons(e, c, random_below(rng, r))
            if choice == 1 and c > 1:
                return Cons(e, rng.randrange(1, c), r)
            if choice == 2:
                smaller_exp = random_below(rng, e)
                if smaller_exp == ZERO:
                    return Fin(rng.randrange(0, 4))
                return Cons(smaller_exp, rng.randrange(1, 4), ZERO)
            return Fin(rng.randrange(0, 4))
    raise AssertionError


# ---------------------------------------------------------------------------
# pinned values
# ---------------------------------------------------------------------------


def test_lt_examples():
    assert lt(Fin(0), Fin(1))
    assert not lt(Fin(1), Fin(0))
    assert lt(Fin(5), OMEGA)
    assert not lt(OMEGA, Fin(5))
    assert lt(Cons(Fin(1), 2, Fin(0)), Cons(Fin(1), 2, Fin(1)))
    assert lt(Cons(Fin(1), 1, Fin(9)), Cons(Fin(1), 2, Fin(0)))
    assert lt(Cons(Fin(1), 3, Fin(0)), Cons(Fin(2), 1, Fin(0)))
    # exponents compared recursively: w^w vs w^2
    assert lt(Cons(Fin(2), 5, Fin(0)), Cons(OMEGA, 1, Fin(0)))


def test_of_int():
    assert of_int(3) == Fin(3)
    assert of_int(0) == Fin(0)
    assert of_int(-2) == Fin(0)


def test_plus_examples():
    assert plus(Fin(1), Fin(2)) == Fin(3)
    assert plus(Fin(1), OMEGA) == OMEGA  # finite left summand absorbed
    assert plus(OMEGA, Fin(1)) == Cons(Fin(1), 1, Fin(1))
    assert plus(OMEGA, Fin(1)) != OMEGA
    assert plus(OMEGA, OMEGA) == Cons(Fin(1), 2, Fin(0))
    # lower-order left tail absorbed on exponent tie
    assert plus(Cons(Fin(1), 1, Fin(7)), OMEGA) == Cons(Fin(1), 2, Fin(0))
    w2 = Cons(Fin(2), 1, Fin(0))
    assert plus(OMEGA, w2) == w2
    assert plus(w2, OMEGA) == Cons(Fin(2), 1, Cons(Fin(1), 1, Fin(0)))


def test_pair_examples():
    assert pair(of_int(2), of_int(3)) == Cons(Fin(1), 2, Fin(3))
    assert pair(Fin(0), Fin(5)) == Fin(5)
    assert pair(Fin(1), Fin(0)) == OMEGA
    # nesting: pair(pair(a, b), c) stays in normal form and is still
    # lexicographic in (a, b, c)
    p = pair(pair(Fin(1), Fin(2)), Fin(3))
    assert is_normal_form(p)
    q = pair(pair(Fin(1), Fin(2)), Fin(4))
    assert lt(p, q)
    r = pair(pair(Fin(2), Fin(0)), Fin(0))
    assert lt(p, r)


def test_is_normal_form():
    assert is_normal_form(Fin(3))
    assert is_normal_form(OMEGA)
    assert is_normal_form(Cons(Fin(2), 1, Cons(Fin(1), 2, Fin(5))))
    assert not is_normal_form(Cons(Fin(0), 1, Fin(0)))  # w^0 must fold into Fin
    assert not is_normal_form(Cons(Fin(1), 0, Fin(0)))  # zero coefficient
    assert not is_normal_form(Cons(Fin(1), 1, Cons(Fin(2), 1, Fin(0))))  # exps increase
    assert not is_normal_form(Cons(Fin(1), 1, Cons(Fin(1), 1, Fin(0))))  # exps tie
    assert not is_normal_form(Fin(-1))


def test_pretty_smoke():
    assert pretty(Fin(4)) == "4"
    assert pretty(OMEGA) == "1w"
    assert pretty(Cons(Fin(2), 3, Fin(1))) == "3w^2 + 1"
    assert "w^(" in pretty(Cons(OMEGA, 1, Fin(0)))


# ---------------------------------------------------------------------------
# property suites (reused by the acceptance test)
# ---------------------------------------------------------------------------


def run_order_properties(n: int = 10_000, seed: int = 2024) -> None:
    rng = random.Random(seed)
    sample = [rand_ordinal(rng, 3) for _ in range(n)]
    for x in sample:
        assert is_normal_form(x)
        assert not lt(x, x)  # irreflexive
    for _ in range(n):
        x, y = rng.choice(sample), rng.choice(sample)
        assert (lt(x, y) + lt(y, x) + (x == y)) == 1  # trichotomy
    for _ in range(n // 2):
        a, b, c = rng.choice(sample), rng.choice(sample), rng.choice(sample)
        if lt(a, b) and lt(b, c):
            assert lt(a, c)  # transitivity (non-vacuous often enough)


def run_plus_properties(n: int = 4_000, seed: int = 2025) -> None:
    rng = random.Random(seed)
    for _ in range(n):
        x, y, z = (rand_ordinal(rng, 3) for _ in range(3))
        s = plus(x, y)
        assert is_normal_form(s)
        assert plus(ZERO, x) == x
        assert plus(x, ZERO) == x
        assert plus(plus(x, y), z) == plus(x, plus(y, z))
        # addition is strictly monotone on the right
        if lt(y, z):
            assert lt(plus(x, y), plus(x, z))
    assert plus(ONE, OMEGA) == OMEGA
    assert plus(OMEGA, ONE) != OMEGA


def run_pair_properties() -> None:
    for a in range(20):
        for b in range(20):
            for c in range(20):
                for d in range(20):
                    expected = (a, b) < (c, d)
                    got = lt(pair(of_int(a), of_int(b)), pair(of_int(c), of_int(d)))
                    assert got == expected, (a, b, c, d)


def run_descent_walks(n_walks: int = 1_000, seed: int = 2026) -> None:
    rng = random.Random(seed)
    for _ in range(n_walks):
        cur = rand_ordinal(rng, 3)
        steps = 0
        while cur != ZERO:
            nxt = random_below(rng, cur)
            assert lt(nxt, cur)
            assert is_normal_form(nxt)
            cur = nxt
            steps += 1
            assert steps < 100_000, "descent walk failed to bottom out"


def run_oracle_agreement(n: int = 3_000, seed: int = 2027) -> None:
    rng = random.Random(seed)
    for _ in range(n):
        p, q = rand_poly(rng), rand_poly(rng)
        x, y = ordinal_of_poly(p), ordinal_of_poly(q)
        assert lt(x, y) == poly_lt(p, q), (p, q)
        assert poly_of(plus(x, y)) == _norm(poly_plus(p, q)), (p, q)
        # pair on finite ordinals is the polynomial a*w + b
        a, b = rng.randrange(0, 6), rng.randrange(0, 6)
        assert poly_of(pair(of_int(a), of_int(b))) == _norm({1: a, 0: b})


def _norm(p: dict[int, int]) -> dict[int, int]:
    out = {d: c for d, c in p.items() if c > 0}
    out.setdefault(0, 0)
    return out


def test_order_properties():
    run_order_properties()


def test_plus_properties():
    run_plus_properties()


def test_pair_lexicographic_exhaustive():
    run_pair_properties()


def test_descent_walks_terminate():
    run_descent_walks()


def test_oracle_agreement():
    run_oracle_agreement()


def test_suite_runtime_budget():
    start = time.monotonic()
    run_order_properties()
    run_plus_properties()
    run_pair_properties()
    run_descent_walks()
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"ordinal property suite took {elapsed:.1f}s"
