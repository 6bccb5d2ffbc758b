"""Prelude tests: the bootstrap world admits without a prover, and its
ordinal arithmetic — defined in the source language over the ordinal
datatype — agrees with the native implementation on random inputs."""

import random

from mini_imandra import ordinal
from mini_imandra.defn import Structural
from mini_imandra.eval import (
    eval_call,
    ordinal_of_value,
    value_of_ordinal,
)
from mini_imandra.prelude import PRELUDE_NAMES, prelude_world


def vlist(items):
    from mini_imandra.eval import ConstructV

    out = ConstructV("Nil", ())
    for x in reversed(items):
        out = ConstructV("Cons", (x, out))
    return out


def plist(v):
    from mini_imandra.eval import ConstructV

    items = []
    while isinstance(v, ConstructV) and v.name == "Cons":
        items.append(v.args[0])
        v = v.args[1]
    return items


def rand_ordinal(rng, depth=3):
    if depth == 0 or rng.random() < 0.4:
        return ordinal.Fin(rng.randrange(5))
    rest = rand_ordinal(rng, depth - 1) if rng.random() < 0.3 else ordinal.Fin(rng.randrange(3))
    return ordinal.Cons(rand_ordinal(rng, depth - 1), 1 + rng.randrange(3), rest)


class TestAdmission:
    def test_all_names_admitted_structurally(self):
        w = prelude_world()
        for name in PRELUDE_NAMES:
            assert name in w.funs, name
        assert "ordinal" in w.env.types
        # every recursive prelude function carries a structural certificate
        for name, spec in w.measures.items():
            assert isinstance(spec, Structural), (name, spec)

    def test_worlds_are_independent(self):
        a, b = prelude_world(), prelude_world()
        a.funs["junk"] = a.funs["List.length"]
        assert "junk" not in b.funs and "junk" not in prelude_world().funs


class TestListOps:
    def test_against_python(self):
        w = prelude_world()
        funs = w.fun_table()
        rng = random.Random(41)
        for _ in range(100):
            xs = [rng.randint(-5, 5) for _ in range(rng.randrange(7))]
            ys = [rng.randint(-5, 5) for _ in range(rng.randrange(7))]
            assert eval_call("List.length", [vlist(xs)], funs) == len(xs)
            assert plist(eval_call("List.append", [vlist(xs), vlist(ys)], funs)) == xs + ys
            assert plist(eval_call("List.rev", [vlist(xs)], funs)) == xs[::-1]


class TestOrdinalAgreement:
    """Dual route: the datatype arithmetic admitted from source must agree
    with the native ordinal module."""

    def test_lt_plus_pair_agree(self):
        w = prelude_world()
        funs = w.fun_table()
        rng = random.Random(5)
        for _ in range(400):
            a, b = rand_ordinal(rng), rand_ordinal(rng)
            va, vb = value_of_ordinal(a), value_of_ordinal(b)
            assert eval_call("Ordinal.lt", [va, vb], funs) == ordinal.lt(a, b)
            assert ordinal_of_value(
                eval_call("Ordinal.plus", [va, vb], funs)
            ) == ordinal.plus(a, b)
            assert ordinal_of_value(
                eval_call("Ordinal.pair", [va, vb], funs)
            ) == ordinal.pair(a, b)

    def test_of_int_clamps(self):
        w = prelude_world()
        funs = w.fun_table()
        for n in (-7, -1, 0, 1, 12):
            assert ordinal_of_value(
                eval_call("Ordinal.of_int", [n], funs)
            ) == ordinal.of_int(n)

    def test_shift_agrees(self):
        w = prelude_world()
        funs = w.fun_table()
        rng = random.Random(6)
        for _ in range(200):
            a = rand_ordinal(rng)
            assert ordinal_of_value(
                eval_call("Ordinal.shift", [value_of_ordinal(a)], funs)
            ) == ordinal.shift(a)

    def test_omega_via_source(self):
        w = prelude_world()
        funs = w.fun_table()
        one = eval_call("Ordinal.of_int", [1], funs)
        omega = eval_call("Ordinal.shift", [one], funs)
        assert ordinal_of_value(omega) == ordinal.OMEGA
        # 1 + omega = omega, omega + 1 > omega
        assert ordinal_of_value(eval_call("Ordinal.plus", [one, omega], funs)) == ordinal.OMEGA
        bigger = eval_call("Ordinal.plus", [omega, one], funs)
        assert eval_call("Ordinal.lt", [omega, bigger], funs) is True
