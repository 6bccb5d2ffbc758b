"""A small SMT solver speaking SMT-LIB 2.6 on standard input/output.

Scope: quantifier-free formulas over booleans, linear integer arithmetic,
algebraic datatypes (constructors, selectors, testers), and uninterpreted
functions — the fragment the unrolling engine emits.  Nonlinear integer
multiplication is handled by a lemma loop (tangent and point lemmas) and is
therefore incomplete in general: hard instances answer `unknown`.

Architecture: a CDCL SAT core assigns all atoms; a theory round then runs
congruence closure (datatype axioms included), a simplex-based integer
feasibility check with branch & bound, and finally builds a candidate model
that is *validated by evaluation* against every assertion before `sat` is
ever answered.  Inconsistencies learned along the way come back as clauses
and the loop repeats.  Unsat answers under assumptions report a core
computed from the implication graph, so an empty core really does mean the
assertions alone are unsatisfiable.

Supported commands: set-option, set-info, set-logic, declare-datatypes,
declare-const, declare-fun, assert, check-sat, check-sat-assuming,
get-unsat-assumptions, get-model, get-value, echo, exit.
"""

from __future__ import annotations

import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .sexp import Reader, SexpError, Str, parse_all, to_text

_DEBUG = bool(os.environ.get("SMTLITE_DEBUG"))


def _dbg(*a):
    if _DEBUG:
        print("[smtlite]", *a, file=sys.stderr)


class SmtError(Exception):
    """Protocol-level error; reported as (error "...") and survivable."""


class _Budget(Exception):
    """Internal: per-query resource limit reached."""


# ---------------------------------------------------------------------------
# linear forms over integer-sorted opaque terms
# ---------------------------------------------------------------------------
#
# A linear form is (coeffs, const) with integer coefficients over "LIA
# variables": opaque integer terms identified by hashable keys.  Keys are
# term-key strings for constants / applications / selectors, and
# ("mul", lfa, lfb) tuples for nonlinear products.


def lf_const(k):
    return ({}, k)


def lf_var(v):
    return ({v: 1}, 0)


def lf_add(a, b):
    ca, ka = a
    cb, kb = b
    out = dict(ca)
    for v, c in cb.items():
        c2 = out.get(v, 0) + c
        if c2:
            out[v] = c2
        else:
            out.pop(v, None)
    return (out, ka + kb)


def lf_neg(a):
    ca, ka = a
    return ({v: -c for v, c in ca.items()}, -ka)


def lf_sub(a, b):
    return lf_add(a, lf_neg(b))


def lf_scale(a, n):
    if n == 0:
        return lf_const(0)
    ca, ka = a
    return ({v: c * n for v, c in ca.items()}, ka * n)


def lf_key(a):
    ca, ka = a
    return (tuple(sorted(ca.items(), key=lambda it: repr(it[0]))), ka)


def lf_is_const(a):
    return not a[0]


def lf_eval(a, beta):
    ca, ka = a
    return sum(c * beta.get(v, Fraction(0)) for v, c in ca.items()) + ka


# ---------------------------------------------------------------------------
# CDCL SAT core with assumption handling
# ---------------------------------------------------------------------------
#
# Literal encoding: variable v (0-based) gives literals 2v (positive) and
# 2v+1 (negative).  Assumptions are enqueued as the first decisions; when an
# assumption is already false at its turn, the responsible subset is read
# off the implication graph, which yields exact empty cores for
# assumption-free conflicts.


def _neg(lit):
    return lit ^ 1


def _var(lit):
    return lit >> 1


class SatSolver:
    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: list = []  # var -> True/False/None
        self.level: list[int] = []
        self.reason: list = []  # var -> clause index | None
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.activity: list[float] = []
        self.phase: list[bool] = []
        self.act_inc = 1.0
        self.qhead = 0
        self.unsat0 = False  # clauses alone are unsatisfiable

    # -- variables and clauses ------------------------------------------

    def new_var(self) -> int:
        v = self.nvars
        self.nvars += 1
        self.assign.append(None)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(False)
        return v

    def value(self, lit):
        a = self.assign[_var(lit)]
        if a is None:
            return None
        return a ^ bool(lit & 1)

    def add_clause(self, lits):
        """Add a clause (deduplicated; tautologies dropped).  Must be called
        at decision level 0."""
        assert not self.trail_lim
        out = []
        seen = set()
        for l in lits:
            if l in seen:
                continue
            if _neg(l) in seen:
                return  # tautology
            if self.value(l) is True:
                return  # already satisfied at level 0
            if self.value(l) is False:
                continue  # false at level 0: drop
            seen.add(l)
            out.append(l)
        if not out:
            self.unsat0 = True
            return
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.unsat0 = True
            return
        idx = len(self.clauses)
        self.clauses.append(out)
        # watches[w] lists clauses currently watching literal w; they are
        # visited when w becomes false
        self.watches.setdefault(out[0], []).append(idx)
        self.watches.setdefault(out[1], []).append(idx)

    # -- trail ------------------------------------------------------------

    def _enqueue(self, lit, reason) -> bool:
        v = _var(lit)
        val = self.value(lit)
        if val is not None:
            return val
        self.assign[v] = not (lit & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _propagate(self):
        """Unit propagation; returns a conflicting clause index or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            falsified = _neg(lit)
            wl = self.watches.get(falsified)
            if not wl:
                continue
            keep = []
            j = 0
            while j < len(wl):
                ci = wl[j]
                j += 1
                cl = self.clauses[ci]
                # ensure falsified is cl[1]
                if cl[0] == falsified:
                    cl[0], cl[1] = cl[1], cl[0]
                if self.value(cl[0]) is True:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if self.value(cl[k]) is not False:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches.setdefault(cl[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if self.value(cl[0]) is False:
                    # conflict: restore remaining watches and report
                    keep.extend(wl[j:])
                    self.watches[falsified] = keep
                    return ci
                self._enqueue(cl[0], ci)
            self.watches[falsified] = keep
        return None

    def _backtrack(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        for lit in reversed(self.trail[bound:]):
            v = _var(lit)
            self.phase[v] = self.assign[v]
            self.assign[v] = None
            self.reason[v] = None
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, len(self.trail))

    # -- conflict analysis ------------------------------------------------

    def _bump(self, v):
        self.activity[v] += self.act_inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.act_inc *= 1e-100

    def _analyze(self, confl):
        """1UIP learning; returns (learnt clause, backjump level)."""
        dl = len(self.trail_lim)
        learnt = [0]  # slot for the asserting literal
        seen = set()  # marks stay for the whole walk so no var counts twice
        counter = 0
        idx = len(self.trail) - 1
        p = None
        cl = self.clauses[confl]
        while True:
            # slot 0 of a reason clause is the literal it propagated
            for q in (cl if p is None else cl[1:]):
                v = _var(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] == dl:
                        counter += 1
                    else:
                        learnt.append(q)
            while _var(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            cl = self.clauses[self.reason[_var(p)]]
        learnt[0] = _neg(p)
        if len(learnt) == 1:
            return learnt, 0
        # keep a literal from the backjump level in the second watch slot so
        # the watch invariant survives backtracking
        hi = 1
        for i in range(2, len(learnt)):
            if self.level[_var(learnt[i])] > self.level[_var(learnt[hi])]:
                hi = i
        learnt[1], learnt[hi] = learnt[hi], learnt[1]
        return learnt, self.level[_var(learnt[1])]

    def _analyze_final(self, p):
        """p is an assumption literal found false at its turn: collect the
        assumptions responsible for its negation."""
        out = [p]
        seen = {_var(p)}
        for lit in reversed(self.trail):
            v = _var(lit)
            if v not in seen:
                continue
            r = self.reason[v]
            if r is None:
                if self.level[v] > 0:
                    out.append(lit)
            else:
                for q in self.clauses[r]:
                    if _var(q) != v and self.level[_var(q)] > 0:
                        seen.add(_var(q))
        return out

    # -- search -----------------------------------------------------------

    def solve(self, assumptions, deadline=None):
        """Returns ("sat", assignment list) or ("unsat", core list of
        assumption literals) or ("unknown", None) on deadline."""
        self._backtrack(0)
        if self.unsat0:
            return ("unsat", [])
        if self._propagate() is not None:
            self.unsat0 = True
            return ("unsat", [])
        conflicts = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                if deadline is not None and conflicts % 256 == 0 and time.monotonic() > deadline:
                    self._backtrack(0)
                    return ("unknown", None)
                if not self.trail_lim:
                    self.unsat0 = True
                    return ("unsat", [])
                learnt, bj = self._analyze(confl)
                self._backtrack(bj)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                    # a unit learned at level 0 may immediately conflict
                    if self._propagate() is not None:
                        self.unsat0 = True
                        return ("unsat", [])
                    # re-establish pending assumptions from scratch
                else:
                    idx = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches.setdefault(learnt[0], []).append(idx)
                    self.watches.setdefault(learnt[1], []).append(idx)
                    self._enqueue(learnt[0], idx)
                self.act_inc /= 0.95
                continue
            dl = len(self.trail_lim)
            if dl < len(assumptions):
                a = assumptions[dl]
                val = self.value(a)
                if val is True:
                    self.trail_lim.append(len(self.trail))
                    continue
                if val is False:
                    core = self._analyze_final(a)
                    self._backtrack(0)
                    return ("unsat", core)
                self.trail_lim.append(len(self.trail))
                self._enqueue(a, None)
                continue
            # free decision
            best, bestv = None, -1.0
            for v in range(self.nvars):
                if self.assign[v] is None and self.activity[v] >= bestv:
                    best, bestv = v, self.activity[v]
            if best is None:
                return ("sat", list(self.assign))
            self.trail_lim.append(len(self.trail))
            lit = (best << 1) | (0 if self.phase[best] else 1)
            self._enqueue(lit, None)


# ---------------------------------------------------------------------------
# congruence closure with datatype axioms and explanations
# ---------------------------------------------------------------------------
#
# Nodes are term keys.  Reasons on union edges are either ("lit", lit) for an
# asserted literal, or ("cong"|"inject", t1, t2) expanded recursively by
# explain().  Children of applications may be integer linear forms or boolean
# literals — those participate in congruence signatures syntactically only;
# semantic equality across them is recovered later by the model-based
# congruence pass.


class CcConflict(Exception):
    def __init__(self, lits):
        self.lits = lits  # set of (atomkey, bool) responsible
        super().__init__("cc conflict")


class Cc:
    def __init__(self, reg):
        self.reg = reg  # term registry: key -> info dict
        self.parent: dict = {}
        self.rank: dict = {}
        self.ctor_member: dict = {}  # root -> ctor-headed member key
        self.members: dict = {}  # root -> list of keys
        self.use: dict = {}  # root -> list of app-like keys using it
        self.sig: dict = {}  # (head, child-rep tuple) -> app key
        self.proof_next: dict = {}
        self.proof_reason: dict = {}
        self.pending_bool_inject: list = []  # (t1, t2, blit1, blit2)
        self.pending_int_eqs: list = []  # (lf1, lf2, t1, t2) from injectivity
        self.merge_queue: list = []

    # -- union-find with proof forest ----------------------------------

    def add(self, key):
        if key in self.parent:
            return
        self.parent[key] = key
        self.rank[key] = 0
        self.members[key] = [key]
        self.use[key] = []
        info = self.reg[key]
        if info["kind"] == "ctor":
            self.ctor_member[key] = key
        for ck in self._term_children(key):
            self.add(ck)
            self.use[self.find(ck)].append(key)
        if info["kind"] in ("app", "sel", "ctor"):
            self._install_sig(key)

    def _term_children(self, key):
        out = []
        for tag, payload in self.reg[key]["children"]:
            if tag == "dt" or tag == "term":
                out.append(payload)
        return out

    def _child_reps(self, key):
        reps = []
        for tag, payload in self.reg[key]["children"]:
            if tag in ("dt", "term"):
                reps.append(("t", self.find(payload)))
            elif tag == "int":
                reps.append(("int", lf_key(payload)))
            else:
                reps.append((tag, payload))
        return tuple(reps)

    def _install_sig(self, key):
        head = self.reg[key]["head"]
        sig = (head, self._child_reps(key))
        other = self.sig.get(sig)
        if other is not None and self.find(other) != self.find(key):
            self.merge_queue.append((key, other, ("cong", key, other)))
        else:
            self.sig[sig] = key

    def find(self, key):
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def merge(self, a, b, reason):
        self.merge_queue.append((a, b, reason))
        self._drain()

    def _drain(self):
        while self.merge_queue:
            a, b, reason = self.merge_queue.pop()
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                continue
            # orient: attach smaller rank under larger
            if self.rank[ra] > self.rank[rb]:
                ra, rb = rb, ra
                a, b = b, a
            if self.rank[ra] == self.rank[rb]:
                self.rank[rb] += 1
            # datatype head bookkeeping, conflict and injectivity
            ca = self.ctor_member.get(ra)
            cb = self.ctor_member.get(rb)
            if ca is not None and cb is not None:
                ha = self.reg[ca]["head"]
                hb = self.reg[cb]["head"]
                if ha != hb:
                    # distinct constructors forced equal: blame the pending
                    # merge plus the paths to each constructor-headed member
                    raise CcConflict(
                        self._expand({("reason", reason)})
                        | self._expand_pair(ca, a)
                        | self._expand_pair(cb, b)
                    )
            # proof forest: reroot a's tree, add edge a -> b
            self._reroot(a)
            self.proof_next[a] = b
            self.proof_reason[a] = reason
            # move members / uses
            self.parent[ra] = rb
            self.members[rb].extend(self.members[ra])
            if ca is not None and cb is None:
                self.ctor_member[rb] = ca
            ulist = self.use.pop(ra, [])
            for uk in ulist:
                self._install_sig(uk)
            self.use[rb].extend(ulist)
            if ca is not None and cb is not None:
                self._inject(ca, cb)

    def _inject(self, t1, t2):
        """Same-constructor terms in one class: children are equal."""
        ch1 = self.reg[t1]["children"]
        ch2 = self.reg[t2]["children"]
        for (tag1, p1), (tag2, p2) in zip(ch1, ch2):
            if tag1 in ("dt", "term") and tag2 in ("dt", "term"):
                # node children (integer node classes are exported to the
                # arithmetic theory after closure)
                if self.find(p1) != self.find(p2):
                    self.merge_queue.append((p1, p2, ("inject", t1, t2)))
            elif tag1 == "bool" and tag2 == "bool":
                if p1 != p2:
                    self.pending_bool_inject.append((t1, t2, p1, p2))
            else:
                # at least one side is a bare linear form
                lf1 = p1 if tag1 == "int" else lf_var(p1)
                lf2 = p2 if tag2 == "int" else lf_var(p2)
                if lf_key(lf1) != lf_key(lf2):
                    # handed to the arithmetic theory, tagged with this merge
                    self.pending_int_eqs.append((lf1, lf2, t1, t2))

    def _reroot(self, a):
        prev, prev_reason = None, None
        node = a
        while node is not None:
            nxt = self.proof_next.get(node)
            nreason = self.proof_reason.get(node)
            self.proof_next[node] = prev
            self.proof_reason[node] = prev_reason
            prev, prev_reason = node, nreason
            node = nxt

    # -- explanations ----------------------------------------------------

    def explain(self, a, b):
        """Set of ("reason", r) entries along the proof path a..b."""
        anc_a = {}
        node, d = a, 0
        while node is not None:
            anc_a[node] = d
            node = self.proof_next.get(node)
            d += 1
        node = b
        while node not in anc_a:
            node = self.proof_next.get(node)
            if node is None:
                raise AssertionError("explain: no common ancestor")
        lca = node
        out = set()
        node = a
        while node != lca:
            out.add(("reason", self.proof_reason[node]))
            node = self.proof_next[node]
        node = b
        while node != lca:
            out.add(("reason", self.proof_reason[node]))
            node = self.proof_next[node]
        return out

    def _expand(self, entries):
        """Expand ("reason", r) entries into asserted literals."""
        out = set()
        work = list(entries)
        seen = set()
        while work:
            e = work.pop()
            if e in seen:
                continue
            seen.add(e)
            if e[0] != "reason":
                out.add(e)
                continue
            r = e[1]
            if r[0] == "lit":
                out.add(r[1])
            elif r[0] in ("cong", "inject"):
                t1, t2 = r[1], r[2]
                if r[0] == "cong":
                    # equal child classes made the signatures collide
                    for (tag1, p1), (tag2, p2) in zip(
                        self.reg[t1]["children"], self.reg[t2]["children"]
                    ):
                        if tag1 in ("dt", "term"):
                            work.extend(self.explain(p1, p2))
                else:
                    work.extend(self.explain(t1, t2))
            else:
                raise AssertionError(r)
        return out

    def _expand_pair(self, a, b):
        return self._expand(self.explain(a, b))

    def explain_lits(self, a, b):
        return self._expand(self.explain(a, b))


# ---------------------------------------------------------------------------
# simplex over the rationals with integer branch & bound
# ---------------------------------------------------------------------------
#
# Dutertre–de Moura style: every variable carries optional lower/upper
# bounds tagged with their origin; basic variables are defined by tableau
# rows over nonbasic ones.  Bound violations pivot or produce a conflict
# consisting of the blocking bounds' tags.


class LiaConflict(Exception):
    def __init__(self, tags):
        self.tags = tags
        super().__init__("lia conflict")


class Lia:
    def __init__(self, order):
        self.order = order  # var -> int, for deterministic pivoting
        self.rows: dict = {}  # basic var -> {nonbasic: Fraction}
        self.lower: dict = {}  # var -> (Fraction, tag)
        self.upper: dict = {}
        self.beta: dict = {}

    def clone(self):
        c = Lia(self.order)
        c.rows = {b: dict(r) for b, r in self.rows.items()}
        c.lower = dict(self.lower)
        c.upper = dict(self.upper)
        c.beta = dict(self.beta)
        return c

    def _val(self, v):
        return self.beta.setdefault(v, Fraction(0))

    def add_row(self, s, coeffs):
        """Define slack s = sum coeffs over problem vars (expanding any that
        are already basic)."""
        row = {}
        for v, c in coeffs.items():
            c = Fraction(c)
            if v in self.rows:
                for w, cw in self.rows[v].items():
                    row[w] = row.get(w, Fraction(0)) + c * cw
            else:
                row[v] = row.get(v, Fraction(0)) + c
        row = {v: c for v, c in row.items() if c}
        self.rows[s] = row
        self.beta[s] = sum(c * self._val(v) for v, c in row.items()) if row else Fraction(0)

    def assert_lower(self, x, b, tag):
        b = Fraction(b)
        cur = self.lower.get(x)
        if cur is not None and cur[0] >= b:
            return
        up = self.upper.get(x)
        if up is not None and b > up[0]:
            raise LiaConflict({tag, up[1]})
        self.lower[x] = (b, tag)
        if x not in self.rows and self._val(x) < b:
            self._update(x, b)

    def assert_upper(self, x, b, tag):
        b = Fraction(b)
        cur = self.upper.get(x)
        if cur is not None and cur[0] <= b:
            return
        lo = self.lower.get(x)
        if lo is not None and b < lo[0]:
            raise LiaConflict({tag, lo[1]})
        self.upper[x] = (b, tag)
        if x not in self.rows and self._val(x) > b:
            self._update(x, b)

    def _update(self, x, v):
        delta = v - self._val(x)
        self.beta[x] = v
        for b, row in self.rows.items():
            c = row.get(x)
            if c:
                self.beta[b] = self._val(b) + c * delta

    def _pivot(self, basic, nonbasic):
        row = self.rows.pop(basic)
        c = row.pop(nonbasic)
        # basic = sum(row) + c*nonbasic  =>  nonbasic = (basic - sum(row))/c
        newrow = {basic: Fraction(1) / c}
        for v, cv in row.items():
            newrow[v] = -cv / c
        # substitute into every other row
        for b2, row2 in self.rows.items():
            c2 = row2.pop(nonbasic, None)
            if c2:
                for v, cv in newrow.items():
                    nv = row2.get(v, Fraction(0)) + c2 * cv
                    if nv:
                        row2[v] = nv
                    else:
                        row2.pop(v, None)
        self.rows[nonbasic] = newrow

    def check(self, deadline=None):
        """Restore bound consistency; raises LiaConflict if infeasible."""
        steps = 0
        while True:
            steps += 1
            if steps % 64 == 0 and deadline is not None and time.monotonic() > deadline:
                raise _Budget()
            # smallest violated basic variable (Bland)
            cand = None
            for b in self.rows:
                lo = self.lower.get(b)
                if lo is not None and self._val(b) < lo[0]:
                    if cand is None or self.order[b] < self.order[cand[0]]:
                        cand = (b, True, lo)
                    continue
                up = self.upper.get(b)
                if up is not None and self._val(b) > up[0]:
                    if cand is None or self.order[b] < self.order[cand[0]]:
                        cand = (b, False, up)
            if cand is None:
                return
            b, need_up, bound = cand
            row = self.rows[b]
            pick = None
            for v in sorted(row, key=lambda v: self.order[v]):
                c = row[v]
                if need_up:
                    ok = (c > 0 and self._can_increase(v)) or (c < 0 and self._can_decrease(v))
                else:
                    ok = (c > 0 and self._can_decrease(v)) or (c < 0 and self._can_increase(v))
                if ok:
                    pick = v
                    break
            if pick is None:
                tags = {bound[1]}
                for v, c in row.items():
                    if need_up:
                        blk = self.upper.get(v) if c > 0 else self.lower.get(v)
                    else:
                        blk = self.lower.get(v) if c > 0 else self.upper.get(v)
                    if blk is not None:
                        tags.add(blk[1])
                raise LiaConflict(tags)
            self._pivot(b, pick)
            self._force(b, bound[0])

    def _force(self, x, v):
        # x just became nonbasic; set it to its bound
        delta = v - self._val(x)
        if delta:
            self.beta[x] = v
            for b2, row2 in self.rows.items():
                c = row2.get(x)
                if c:
                    self.beta[b2] = self._val(b2) + c * delta

    def _can_increase(self, v):
        up = self.upper.get(v)
        return up is None or self._val(v) < up[0]

    def _can_decrease(self, v):
        lo = self.lower.get(v)
        return lo is None or self._val(v) > lo[0]


def lia_integer_solve(lia, int_vars, deadline, nodes):
    """Branch & bound for integer feasibility.

    Returns ("sat", beta) or raises LiaConflict with tags (branch tags are
    removed: if both branches of x conflict, the union of their cores minus
    the branch bounds is itself inconsistent over the integers)."""
    lia.check(deadline)
    branch = None
    for v in sorted(int_vars, key=lambda v: lia.order[v]):
        val = lia._val(v)
        if val.denominator != 1:
            branch = (v, val)
            break
    if branch is None:
        return {v: lia._val(v) for v in int_vars}
    if nodes[0] <= 0 or (deadline is not None and time.monotonic() > deadline):
        raise _Budget()
    nodes[0] -= 1
    node_id = nodes[0]  # unique per expansion, so tags never collide
    v, val = branch
    fl = math.floor(val)
    tag_l = ("bb", node_id, "le")
    tag_r = ("bb", node_id, "ge")
    try:
        left = lia.clone()
        left.assert_upper(v, fl, tag_l)
        return lia_integer_solve(left, int_vars, deadline, nodes)
    except LiaConflict as e1:
        core1 = e1.tags
    try:
        right = lia.clone()
        right.assert_lower(v, fl + 1, tag_r)
        return lia_integer_solve(right, int_vars, deadline, nodes)
    except LiaConflict as e2:
        core2 = e2.tags
    merged = (core1 | core2) - {tag_l, tag_r}
    raise LiaConflict(merged)


# ---------------------------------------------------------------------------
# sorts, declarations, values
# ---------------------------------------------------------------------------
#
# Model values: Python ints, bools, and ("Ctor", (children...)) tuples.


@dataclass
class Datatype:
    name: str
    ctors: list  # [(cname, [(sel, sort), ...])]


@dataclass
class Decls:
    datatypes: dict = field(default_factory=dict)  # name -> Datatype
    ctor: dict = field(default_factory=dict)  # cname -> (typename, [(sel, sort)])
    sel: dict = field(default_factory=dict)  # sname -> (typename, cname, idx, sort)
    consts: dict = field(default_factory=dict)  # name -> sort
    funs: dict = field(default_factory=dict)  # name -> ([argsorts], ressort)

    def is_sort(self, s):
        return s in ("Int", "Bool") or s in self.datatypes

    def fresh_ok(self, name):
        return not (
            name in self.consts
            or name in self.funs
            or name in self.ctor
            or name in self.sel
            or name in self.datatypes
        )

    def default_value(self, sort, _seen=None):
        if sort == "Int":
            return 0
        if sort == "Bool":
            return False
        _seen = _seen or frozenset()
        if sort in _seen:
            raise SmtError(f"datatype {sort} has no base constructor")
        dt = self.datatypes[sort]
        # pick the first constructor whose fields all admit defaults
        for cname, fields in dt.ctors:
            try:
                children = tuple(
                    self.default_value(fs, _seen | {sort}) for _, fs in fields
                )
            except SmtError:
                continue
            return (cname, children)
        raise SmtError(f"datatype {sort} has no base constructor")

    def value_stream(self, sort):
        """Yield distinct values of a sort, smallest first."""
        if sort == "Int":
            n = 0
            while True:
                yield n
                n = -n if n > 0 else -n + 1
        elif sort == "Bool":
            yield False
            yield True
        else:
            dt = self.datatypes[sort]
            # breadth-first over constructor trees with bounded child menus
            last = [self.default_value(sort)]
            emitted = {repr(last[0])}
            yield last[0]
            fresh_int = 100
            while True:
                nxt = []
                for cname, fields in dt.ctors:
                    menus = []
                    for _, fs in fields:
                        if fs == "Int":
                            menus.append([0, fresh_int])
                        elif fs == "Bool":
                            menus.append([False, True])
                        elif fs == sort:
                            menus.append(last)
                        else:
                            menus.append([self.default_value(fs)])
                    combos = [()]
                    for m in menus:
                        combos = [c + (x,) for c in combos for x in m]
                    for c in combos:
                        v = (cname, c)
                        if repr(v) not in emitted:
                            emitted.add(repr(v))
                            nxt.append(v)
                            yield v
                fresh_int += 7
                if nxt:
                    last = nxt


def value_to_sexp(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return v
    cname, children = v
    if not children:
        return cname
    return [cname] + [value_to_sexp(c) for c in children]


# ---------------------------------------------------------------------------
# the session
# ---------------------------------------------------------------------------

_ARITH = ("+", "-", "*")
_CMP = ("<=", "<", ">=", ">")
_LOGIC = ("and", "or", "not", "=>", "ite", "=", "distinct", "xor")


class Solver:
    def __init__(self):
        self.decls = Decls()
        self.opts = {}
        self.asserts = []  # normalized formula sexps, for validation
        self.sat = SatSolver()
        self.atom_var = {}  # atom key -> SAT var
        self.var_atom = {}  # SAT var -> atom key
        self.tseitin = {}  # formula text -> lit
        self.reg = {}  # term key -> info (sort, sexp, kind, head, children)
        self.lia_order = {}  # LIA var -> insertion index
        self.int_vars = []  # problem (non-slack) integer vars
        self.mults = {}  # mul var key -> (lfa, lfb)
        self.dt_terms = set()  # DT-sorted occurring terms with tester clauses
        self.eq_split_done = set()
        self.lemma_done = set()
        self.internal = set()  # fresh definitional constants, kept off the wire
        self.last = None  # ("sat", model_env) | ("unsat", core sexps) | ("unknown",)
        self.done = False
        self._fresh = 0

    # ------------------------------------------------------------------
    # command dispatch
    # ------------------------------------------------------------------

    def execute_script(self, text: str) -> list[str]:
        out = []
        for cmd in parse_all(text):
            r = self.execute(cmd)
            if r is not None:
                out.append(r)
            if self.done:
                break
        return out

    def execute(self, cmd) -> str | None:
        try:
            return self._execute(cmd)
        except SmtError as e:
            return "(error " + to_text(Str(str(e))) + ")"
        except (SexpError, RecursionError) as e:
            return "(error " + to_text(Str(f"malformed input: {e}")) + ")"

    def _silent(self):
        if self.opts.get(":print-success"):
            return "success"
        return None

    def _execute(self, cmd):
        if not isinstance(cmd, list) or not cmd or not isinstance(cmd[0], str):
            raise SmtError("expected a command")
        head = cmd[0]
        if head in ("set-option",):
            if len(cmd) == 3:
                v = cmd[2]
                self.opts[cmd[1]] = {"true": True, "false": False}.get(v, v)
            return self._silent()
        if head in ("set-info", "set-logic"):
            return self._silent()
        if head == "echo":
            return to_text(cmd[1]) if len(cmd) > 1 else '""'
        if head == "exit":
            self.done = True
            return None
        if head == "declare-datatypes":
            self._declare_datatypes(cmd)
            return self._silent()
        if head == "declare-const":
            if len(cmd) != 3:
                raise SmtError("declare-const takes a name and a sort")
            self._declare_fun(cmd[1], [], cmd[2])
            return self._silent()
        if head == "declare-fun":
            if len(cmd) != 4 or not isinstance(cmd[2], list):
                raise SmtError("declare-fun takes name, argument sorts, result sort")
            self._declare_fun(cmd[1], cmd[2], cmd[3])
            return self._silent()
        if head == "assert":
            if len(cmd) != 2:
                raise SmtError("assert takes one term")
            self._assert(cmd[1])
            return self._silent()
        if head == "check-sat":
            return self._check([])
        if head == "check-sat-assuming":
            if len(cmd) != 2 or not isinstance(cmd[1], list):
                raise SmtError("check-sat-assuming takes a literal list")
            return self._check(cmd[1])
        if head == "get-unsat-assumptions":
            if not self.last or self.last[0] != "unsat":
                raise SmtError("no unsat query to report assumptions for")
            return "(" + " ".join(to_text(l) for l in self.last[1]) + ")"
        if head == "get-model":
            if not self.last or self.last[0] != "sat":
                raise SmtError("no sat query to report a model for")
            env = self.last[1]
            parts = []
            for name, sort in self.decls.consts.items():
                if name in self.internal:
                    continue
                parts.append(
                    "(define-fun "
                    + name
                    + " () "
                    + to_text(sort)
                    + " "
                    + to_text(value_to_sexp(env[name]))
                    + ")"
                )
            return "(model " + " ".join(parts) + ")"
        if head == "get-value":
            if not self.last or self.last[0] != "sat":
                raise SmtError("no sat query to report values for")
            if len(cmd) != 2 or not isinstance(cmd[1], list):
                raise SmtError("get-value takes a term list")
            env = self.last[1]
            parts = []
            for t in cmd[1]:
                v = self._eval_model(t, env)
                parts.append("(" + to_text(t) + " " + to_text(value_to_sexp(v)) + ")")
            return "(" + " ".join(parts) + ")"
        raise SmtError(f"unknown command {head}")

    # ------------------------------------------------------------------
    # declarations
    # ------------------------------------------------------------------

    def _declare_datatypes(self, cmd):
        if len(cmd) != 3 or not isinstance(cmd[1], list) or not isinstance(cmd[2], list):
            raise SmtError("declare-datatypes takes sort declarations and definitions")
        names = []
        for sd in cmd[1]:
            if not (isinstance(sd, list) and len(sd) == 2 and sd[1] == 0):
                raise SmtError("only arity-0 datatypes are supported")
            if not self.decls.fresh_ok(sd[0]):
                raise SmtError(f"name {sd[0]} already declared")
            names.append(sd[0])
        if len(cmd[2]) != len(names):
            raise SmtError("datatype definition count mismatch")
        # register names first so fields may refer to any of them
        for n in names:
            self.decls.datatypes[n] = Datatype(n, [])
        try:
            for n, body in zip(names, cmd[2]):
                ctors = []
                for c in body:
                    if not isinstance(c, list) or not c:
                        raise SmtError("malformed constructor")
                    cname = c[0]
                    if not self.decls.fresh_ok(cname):
                        raise SmtError(f"name {cname} already declared")
                    fields = []
                    for f in c[1:]:
                        if not (isinstance(f, list) and len(f) == 2):
                            raise SmtError("malformed selector")
                        sname, fsort = f
                        if not self.decls.is_sort(fsort):
                            raise SmtError(f"unknown sort {to_text(fsort)}")
                        if not self.decls.fresh_ok(sname):
                            raise SmtError(f"name {sname} already declared")
                        fields.append((sname, fsort))
                    ctors.append((cname, fields))
                    self.decls.ctor[cname] = (n, fields)
                    for i, (sname, fsort) in enumerate(fields):
                        self.decls.sel[sname] = (n, cname, i, fsort)
                self.decls.datatypes[n].ctors = ctors
                if not body:
                    raise SmtError(f"datatype {n} has no constructors")
        except SmtError:
            for n in names:
                self.decls.datatypes.pop(n, None)
            raise

    def _declare_fun(self, name, argsorts, ressort):
        if not isinstance(name, str):
            raise SmtError("bad declaration name")
        if not self.decls.fresh_ok(name):
            raise SmtError(f"name {name} already declared")
        for s in list(argsorts) + [ressort]:
            if not self.decls.is_sort(s):
                raise SmtError(f"unknown sort {to_text(s)}")
        if argsorts:
            self.decls.funs[name] = (list(argsorts), ressort)
        else:
            self.decls.consts[name] = ressort

    # ------------------------------------------------------------------
    # sorts of terms
    # ------------------------------------------------------------------

    def sort_of(self, t):
        if isinstance(t, bool) or t in ("true", "false"):
            return "Bool"
        if isinstance(t, int):
            return "Int"
        if isinstance(t, str):
            if t in self.decls.consts:
                return self.decls.consts[t]
            if t in self.decls.ctor:
                return self.decls.ctor[t][0]
            raise SmtError(f"unknown constant {t}")
        if not isinstance(t, list) or not t:
            raise SmtError(f"bad term {to_text(t)}")
        head = t[0]
        if isinstance(head, list):
            if len(head) == 3 and head[0] == "_" and head[1] == "is":
                return "Bool"
            raise SmtError(f"bad term head {to_text(head)}")
        if head in _ARITH:
            return "Int"
        if head in _CMP or head in ("and", "or", "not", "=>", "=", "distinct", "xor"):
            return "Bool"
        if head == "ite":
            return self.sort_of(t[2])
        if head in self.decls.ctor:
            return self.decls.ctor[head][0]
        if head in self.decls.sel:
            return self.decls.sel[head][3]
        if head in self.decls.funs:
            return self.decls.funs[head][1]
        raise SmtError(f"unknown function {head}")

    # ------------------------------------------------------------------
    # assertion pipeline: normalize, atomize, tseitin
    # ------------------------------------------------------------------

    def _assert(self, raw):
        self.sat._backtrack(0)
        f = self._norm(raw)
        self.asserts.append(f)
        self.last = None
        lit = self._formula_lit(f)
        self.sat._backtrack(0)
        self.sat.add_clause([lit])

    def _fresh_const(self, sort):
        self._fresh += 1
        name = f"!k{self._fresh}"
        self.decls.consts[name] = sort
        self.internal.add(name)  # not reported in models
        return name

    def _norm(self, t):
        """Normalize a raw input term: fold datatype redexes, lift non-bool
        ite out of term positions, expand n-ary forms lazily later.  The
        result is still an s-expression."""
        if isinstance(t, (int, bool)):
            return t
        if isinstance(t, str):
            if t in ("true", "false"):
                return t == "true"
            self.sort_of(t)  # raises for unknown names
            return t
        if not isinstance(t, list) or not t:
            raise SmtError(f"bad term {to_text(t)}")
        head = t[0]
        if isinstance(head, list) and len(head) == 3 and head[0] == "_" and head[1] == "is":
            cname = head[2]
            if cname not in self.decls.ctor:
                raise SmtError(f"unknown constructor {to_text(cname)}")
            arg = self._norm(t[1])
            hd = arg[0] if isinstance(arg, list) else arg
            if isinstance(hd, str) and hd in self.decls.ctor:
                return hd == cname
            return [head, arg]
        if not isinstance(head, str):
            raise SmtError(f"bad term head {to_text(head)}")
        args = [self._norm(a) for a in t[1:]]
        if head in self.decls.sel:
            if len(args) != 1:
                raise SmtError(f"selector {head} takes one argument")
            (_ty, cname, idx, _sort) = self.decls.sel[head]
            a = args[0]
            if isinstance(a, list) and a and a[0] == cname:
                return a[idx + 1]  # selector applied to a matching constructor
            return [head, a]
        if head == "ite":
            if len(args) != 3:
                raise SmtError("ite takes three arguments")
            return ["ite"] + args
        if head in _ARITH or head in _CMP or head in _LOGIC or head in self.decls.funs or head in self.decls.ctor:
            return [head] + args
        raise SmtError(f"unknown function {head}")

    def sort_of_norm(self, t):
        if isinstance(t, bool):
            return "Bool"
        return self.sort_of(t)

    # -- atoms ------------------------------------------------------------

    def _atom_lit(self, key, payload=None):
        """SAT literal for an atom key; creates the variable on demand."""
        v = self.atom_var.get(key)
        if v is None:
            v = self.sat.new_var()
            self.atom_var[key] = v
            self.var_atom[v] = (key, payload)
        return v << 1

    def _const_lit(self, b):
        lit = self._atom_lit(("bconst",))
        self.sat._backtrack(0)
        self.sat.add_clause([lit])  # the atom is pinned true
        return lit if b else _neg(lit)

    def _register_term(self, sexp, sort, kind, head, children):
        key = to_text(sexp)
        if key not in self.reg:
            self.reg[key] = {
                "sort": sort,
                "sexp": sexp,
                "kind": kind,
                "head": head,
                "children": children,
            }
            if sort == "Int" and kind != "lin":
                self._lia_var(key)
            if sort in self.decls.datatypes and kind != "ctor":
                self._ensure_tester_clauses(key, sort)
        return key

    def _lia_var(self, v):
        if v not in self.lia_order:
            self.lia_order[v] = len(self.lia_order)
            self.int_vars.append(v)

    def _ensure_tester_clauses(self, key, sort):
        if key in self.dt_terms:
            return
        self.dt_terms.add(key)
        ctors = self.decls.datatypes[sort].ctors
        lits = [self._atom_lit(("is", c, key)) for c, _ in ctors]
        self.sat._backtrack(0)
        self.sat.add_clause(list(lits))
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                self.sat.add_clause([_neg(lits[i]), _neg(lits[j])])

    def _int_linform(self, t):
        """Translate an Int-sorted term into a linear form, registering
        opaque subterms."""
        if isinstance(t, int):
            return lf_const(t)
        if isinstance(t, str):
            key = self._register_term(t, "Int", "const", t, [])
            return lf_var(key)
        head = t[0]
        if head == "+":
            out = lf_const(0)
            for a in t[1:]:
                out = lf_add(out, self._int_linform(a))
            return out
        if head == "-":
            if len(t) == 2:
                return lf_neg(self._int_linform(t[1]))
            out = self._int_linform(t[1])
            for a in t[2:]:
                out = lf_sub(out, self._int_linform(a))
            return out
        if head == "*":
            out = lf_const(1)
            for a in t[1:]:
                out = self._lf_mul(out, self._int_linform(a))
            return out
        if head == "ite":
            # introduce a definition: fresh k with (c => k=then) (not c => k=else)
            name = self._fresh_const("Int")
            key = self._register_term(name, "Int", "const", name, [])
            cl = self._formula_lit(t[1])
            then_lf = self._int_linform(t[2])
            else_lf = self._int_linform(t[3])
            eq_t = self._arith_atom("eq0", lf_sub(lf_var(key), then_lf))
            eq_e = self._arith_atom("eq0", lf_sub(lf_var(key), else_lf))
            self.sat._backtrack(0)
            self.sat.add_clause([_neg(cl), eq_t])
            self.sat.add_clause([cl, eq_e])
            return lf_var(key)
        if head in self.decls.sel or head in self.decls.funs:
            key = self._app_term(t)
            return lf_var(key)
        raise SmtError(f"not an integer term: {to_text(t)}")

    def _lf_mul(self, a, b):
        if lf_is_const(a):
            return lf_scale(b, a[1])
        if lf_is_const(b):
            return lf_scale(a, b[1])
        ka, kb = sorted((lf_key(a), lf_key(b)))
        mv = ("mul", ka, kb)
        if mv not in self.mults:
            self.mults[mv] = (a, b) if (lf_key(a), lf_key(b)) == (ka, kb) else (b, a)
            self._lia_var(mv)
        return lf_var(mv)

    def _term_key(self, t):
        """Key for an arbitrary-sorted term in child position."""
        sort = self.sort_of_norm(t)
        if sort == "Int":
            return ("int", self._int_linform(t))
        if sort == "Bool":
            return ("bool", self._formula_lit(t))
        return ("dt", self._dt_term(t))

    def _app_term(self, t):
        head = t[0]
        children = [self._term_key(a) for a in t[1:]]
        if head in self.decls.sel:
            sort = self.decls.sel[head][3]
            kind = "sel"
        else:
            sort = self.decls.funs[head][1]
            kind = "app"
        return self._register_term(
            [head] + [self._child_repr(c) for c in children], sort, kind, head, children
        )

    def _child_repr(self, c):
        # canonical sexp fragment used only to build a stable registry key
        if c[0] == "int":
            return ["$lin", str(lf_key(c[1]))]
        if c[0] == "bool":
            return ["$lit", str(c[1])]
        return c[1]

    def _dt_term(self, t):
        """Register a datatype-sorted term; returns its key."""
        if isinstance(t, str):
            if t in self.decls.ctor:
                return self._register_term(t, self.decls.ctor[t][0], "ctor", t, [])
            sort = self.decls.consts.get(t)
            if sort is None:
                raise SmtError(f"unknown constant {t}")
            return self._register_term(t, sort, "const", t, [])
        head = t[0]
        if head == "ite":
            sort = self.sort_of_norm(t[2])
            name = self._fresh_const(sort)
            key = self._register_term(name, sort, "const", name, [])
            cl = self._formula_lit(t[1])
            tk = self._dt_term(t[2])
            ek = self._dt_term(t[3])
            eq_t = self._deq_atom(key, tk)
            eq_e = self._deq_atom(key, ek)
            self.sat._backtrack(0)
            self.sat.add_clause([_neg(cl), eq_t])
            self.sat.add_clause([cl, eq_e])
            return key
        if head in self.decls.ctor:
            sort = self.decls.ctor[head][0]
            children = [self._term_key(a) for a in t[1:]]
            return self._register_term(
                [head] + [self._child_repr(c) for c in children],
                sort,
                "ctor",
                head,
                children,
            )
        if head in self.decls.sel or head in self.decls.funs:
            return self._app_term(t)
        raise SmtError(f"not a datatype term: {to_text(t)}")

    def _arith_atom(self, kind, lf):
        """Literal for `lf <= 0` or `lf = 0` (with integer tightening)."""
        coeffs, k = lf
        if not coeffs:
            return self._const_lit(k <= 0 if kind == "le" else k == 0)
        g = 0
        for c in coeffs.values():
            g = math.gcd(g, abs(c))
        if kind == "eq0":
            if k % g != 0:
                return self._const_lit(False)
            coeffs = {v: c // g for v, c in coeffs.items()}
            k //= g
            # sign-normalize so x=y and y=x share an atom
            first = min(coeffs, key=lambda v: repr(v))
            if coeffs[first] < 0:
                coeffs = {v: -c for v, c in coeffs.items()}
                k = -k
        else:
            # (sum c x) + k <= 0  divides to  (sum c/g x) <= -k/g, and the
            # integer right side rounds down, so the constant rounds up
            coeffs = {v: c // g for v, c in coeffs.items()}
            k = math.ceil(Fraction(k, g))
        key = (kind, tuple(sorted(coeffs.items(), key=lambda it: repr(it[0]))), k)
        return self._atom_lit(key, (kind, (coeffs, k)))

    def _deq_atom(self, ka, kb):
        if ka == kb:
            return self._const_lit(True)
        a, b = sorted((ka, kb))
        return self._atom_lit(("deq", a, b))

    # -- boolean structure -------------------------------------------------

    def _formula_lit(self, f):
        """Tseitin: literal equivalent to the formula."""
        if isinstance(f, bool):
            return self._const_lit(f)
        if isinstance(f, str):
            if f in ("true", "false"):
                return self._const_lit(f == "true")
            sort = self.sort_of(f)
            if sort != "Bool":
                raise SmtError(f"{f} is not a boolean")
            return self._atom_lit(("bvar", f))
        head = f[0]
        if isinstance(head, list):  # tester
            cname = head[2]
            arg = f[1]
            key = self._dt_term(arg)
            if self.reg[key]["kind"] == "ctor":
                return self._const_lit(self.reg[key]["head"] == cname)
            return self._atom_lit(("is", cname, key))
        if head in self.decls.funs or head in self.decls.sel:
            key = self._app_term(f)
            return self._atom_lit(("bapp", key))
        if head in _CMP:
            a = self._int_linform(f[1])
            b = self._int_linform(f[2])
            if head == "<=":
                return self._arith_atom("le", lf_sub(a, b))
            if head == "<":
                return self._arith_atom("le", lf_add(lf_sub(a, b), lf_const(1)))
            if head == ">=":
                return self._arith_atom("le", lf_sub(b, a))
            return self._arith_atom("le", lf_add(lf_sub(b, a), lf_const(1)))
        if head == "=":
            lits = []
            for x, y in zip(f[1:], f[2:]):
                lits.append(self._eq_lit(x, y))
            return self._and_lits(lits)
        if head == "distinct":
            lits = []
            args = f[1:]
            for i in range(len(args)):
                for j in range(i + 1, len(args)):
                    lits.append(_neg(self._eq_lit(args[i], args[j])))
            return self._and_lits(lits)
        if head == "not":
            return _neg(self._formula_lit(f[1]))
        if head == "and":
            return self._and_lits([self._formula_lit(a) for a in f[1:]])
        if head == "or":
            return _neg(self._and_lits([_neg(self._formula_lit(a)) for a in f[1:]]))
        if head == "=>":
            lits = [self._formula_lit(a) for a in f[1:]]
            out = lits[-1]
            for l in reversed(lits[:-1]):
                out = _neg(self._and_lits([l, _neg(out)]))
            return out
        if head == "xor":
            lits = [self._formula_lit(a) for a in f[1:]]
            out = lits[0]
            for l in lits[1:]:
                out = _neg(self._iff_lit(out, l))
            return out
        if head == "ite":
            c = self._formula_lit(f[1])
            t = self._formula_lit(f[2])
            e = self._formula_lit(f[3])
            return _neg(
                self._and_lits(
                    [_neg(self._and_lits([c, t])), _neg(self._and_lits([_neg(c), e]))]
                )
            )
        raise SmtError(f"not a formula: {to_text(f)}")

    def _eq_lit(self, x, y):
        sx = self.sort_of_norm(x)
        if sx == "Bool":
            return self._iff_lit(self._formula_lit(x), self._formula_lit(y))
        if sx == "Int":
            return self._arith_atom(
                "eq0", lf_sub(self._int_linform(x), self._int_linform(y))
            )
        return self._deq_atom(self._dt_term(x), self._dt_term(y))

    def _gate(self, kind, lits):
        key = (kind,) + tuple(lits)
        hit = self.tseitin.get(key)
        if hit is not None:
            return hit
        v = self.sat.new_var() << 1
        self.tseitin[key] = v
        self.sat._backtrack(0)
        if kind == "and":
            for l in lits:
                self.sat.add_clause([_neg(v), l])
            self.sat.add_clause([v] + [_neg(l) for l in lits])
        else:  # iff of two
            a, b = lits
            self.sat.add_clause([_neg(v), _neg(a), b])
            self.sat.add_clause([_neg(v), a, _neg(b)])
            self.sat.add_clause([v, a, b])
            self.sat.add_clause([v, _neg(a), _neg(b)])
        return v

    def _and_lits(self, lits):
        out = []
        for l in lits:
            if self.sat.value(l) is True and self.sat.level[_var(l)] == 0:
                continue
            if self.sat.value(l) is False and self.sat.level[_var(l)] == 0:
                return self._const_lit(False)
            out.append(l)
        if not out:
            return self._const_lit(True)
        if len(out) == 1:
            return out[0]
        return self._gate("and", tuple(sorted(set(out))))

    def _iff_lit(self, a, b):
        if a == b:
            return self._const_lit(True)
        if a == _neg(b):
            return self._const_lit(False)
        return self._gate("iff", (min(a, b), max(a, b)))

    # ------------------------------------------------------------------
    # check-sat
    # ------------------------------------------------------------------

    def _check(self, assumption_sexps):
        assumption_lits = []
        for a in assumption_sexps:
            if isinstance(a, str):
                assumption_lits.append(self._atom_lit(("bvar", self._require_bool_const(a))))
            elif isinstance(a, list) and len(a) == 2 and a[0] == "not" and isinstance(a[1], str):
                assumption_lits.append(
                    _neg(self._atom_lit(("bvar", self._require_bool_const(a[1]))))
                )
            else:
                raise SmtError(f"bad assumption literal {to_text(a)}")
        deadline = None
        t = self.opts.get(":timeout")
        if isinstance(t, int) and t > 0:
            deadline = time.monotonic() + t / 1000.0
        rounds = 0
        max_rounds = 2000
        while True:
            rounds += 1
            if rounds > max_rounds or (deadline is not None and time.monotonic() > deadline):
                self.last = ("unknown",)
                return "unknown"
            status, payload = self.sat.solve(assumption_lits, deadline)
            if status == "unknown":
                self.last = ("unknown",)
                return "unknown"
            if status == "unsat":
                core = []
                coreset = set(payload)
                for lit, sexp in zip(assumption_lits, assumption_sexps):
                    if lit in coreset:
                        core.append(sexp)
                self.last = ("unsat", core)
                return "unsat"
            outcome = self._theory_round(payload, deadline)
            if outcome[0] == "sat":
                self.last = ("sat", outcome[1])
                return "sat"
            if outcome[0] == "unknown":
                self.last = ("unknown",)
                return "unknown"
            # otherwise clauses were added; loop
            _dbg("round", rounds, outcome[0])

    def _require_bool_const(self, name):
        if self.decls.consts.get(name) == "Bool":
            return name
        raise SmtError(f"assumption {name} is not a declared boolean constant")

    # -- one theory round -------------------------------------------------

    def _assigned_atoms(self, assignment):
        out = {}
        n = len(assignment)
        for key, v in self.atom_var.items():
            if v >= n:
                continue  # variable created after this assignment was taken
            val = assignment[v]
            if val is not None:
                out[key] = val
        return out

    def _theory_round(self, assignment, deadline):
        atoms = self._assigned_atoms(assignment)

        def lit_of(entry):
            # the clause literal that *negates* an assigned (atom, value) pair
            key, pol = entry
            base = self.atom_var[key] << 1
            return _neg(base) if pol else base

        def conflict_clause(entries):
            # entries are (atomkey, bool) pairs that are jointly inconsistent
            cl = []
            for key, pol in entries:
                v = self.atom_var[key] << 1
                cl.append(_neg(v) if pol else v)
            self.sat._backtrack(0)
            self.sat.add_clause(cl)

        # 1. congruence closure over datatype/uninterpreted structure
        cc = Cc(self.reg)
        for key in list(self.reg):
            cc.add(key)
        try:
            for key, val in atoms.items():
                if key[0] == "deq" and val:
                    cc.merge(key[1], key[2], ("lit", (key, True)))
            # testers: materialize true ones, refute contradicted ones
            for key, val in atoms.items():
                if key[0] != "is":
                    continue
                _, cname, tkey = key
                root = cc.find(tkey)
                member = cc.ctor_member.get(root)
                if val:
                    if member is not None and self.reg[member]["head"] != cname:
                        raise CcConflict(
                            cc.explain_lits(tkey, member) | {(key, True)}
                        )
                    # materialize even when a member exists: injectivity then
                    # ties occurring selector terms to the member's children
                    self._materialize(cc, tkey, cname, (key, True))
                else:
                    if member is not None and self.reg[member]["head"] == cname:
                        raise CcConflict(
                            cc.explain_lits(tkey, member) | {(key, False)}
                        )
            # disequalities
            for key, val in atoms.items():
                if key[0] == "deq" and not val:
                    if cc.find(key[1]) == cc.find(key[2]):
                        raise CcConflict(
                            cc.explain_lits(key[1], key[2]) | {(key, False)}
                        )
            self._check_acyclic(cc)
        except CcConflict as e:
            conflict_clause(e.lits)
            return ("clauses", None)

        # boolean injectivity discovered during closure
        if cc.pending_bool_inject:
            added = False
            for t1, t2, l1, l2 in cc.pending_bool_inject:
                memo = ("binj", t1, t2, l1, l2)
                if memo in self.lemma_done:
                    continue
                self.lemma_done.add(memo)
                expl = [lit_of(e) for e in cc.explain_lits(t1, t2)]
                self.sat._backtrack(0)
                self.sat.add_clause(expl + [_neg(l1), l2])
                self.sat.add_clause(expl + [l1, _neg(l2)])
                added = True
            if added:
                return ("clauses", None)

        # 2. integer equalities asserted false need their split clause
        added = False
        for key, val in atoms.items():
            if key[0] == "eq0" and not val and key not in self.eq_split_done:
                self.eq_split_done.add(key)
                coeffs = dict(key[1])
                k = key[2]
                lo = self._arith_atom("le", (coeffs, k + 1))  # lf <= -1
                hi = self._arith_atom("le", ({v: -c for v, c in coeffs.items()}, -k + 1))
                eq = self.atom_var[key] << 1
                self.sat._backtrack(0)
                self.sat.add_clause([eq, lo, hi])
                added = True
        if added:
            return ("clauses", None)

        # 3. linear integer feasibility
        lia = Lia(self.lia_order)
        slack_of = {}

        def slack_for(coeffs):
            k = tuple(sorted(coeffs.items(), key=lambda it: repr(it[0])))
            s = slack_of.get(k)
            if s is None:
                s = ("slack", k)
                if s not in self.lia_order:
                    self.lia_order[s] = len(self.lia_order)
                slack_of[k] = s
                lia.add_row(s, coeffs)
            return s

        try:
            for key, val in atoms.items():
                if key[0] == "le":
                    coeffs = dict(key[1])
                    k = key[2]
                    s = slack_for(coeffs)
                    if val:
                        lia.assert_upper(s, -k, (key, True))
                    else:
                        lia.assert_lower(s, 1 - k, (key, False))
                elif key[0] == "eq0" and val:
                    coeffs = dict(key[1])
                    k = key[2]
                    s = slack_for(coeffs)
                    lia.assert_upper(s, -k, (key, True))
                    lia.assert_lower(s, -k, (key, True))
            # congruence-closure equalities between integer terms
            for root, mem in cc.members.items():
                if cc.find(root) != root:
                    continue
                ints = [m for m in mem if self.reg[m]["sort"] == "Int"]
                for m in ints[1:]:
                    s = slack_for({ints[0]: 1, m: -1})
                    tag = ("cc", ints[0], m)
                    lia.assert_upper(s, 0, tag)
                    lia.assert_lower(s, 0, tag)
            # injectivity equalities over integer constructor fields
            for lf1, lf2, t1, t2 in cc.pending_int_eqs:
                diff = lf_sub(lf1, lf2)
                if lf_is_const(diff):
                    if diff[1] != 0:
                        conflict_clause(cc.explain_lits(t1, t2))
                        return ("clauses", None)
                    continue
                tag = ("cc2", t1, t2)
                s = slack_for(dict(diff[0]))
                lia.assert_upper(s, -diff[1], tag)
                lia.assert_lower(s, -diff[1], tag)
            beta = lia_integer_solve(lia, self.int_vars, deadline, [4000])
        except LiaConflict as e:
            entries = set()
            for tag in e.tags:
                if tag[0] in ("cc", "cc2"):
                    entries |= cc.explain_lits(tag[1], tag[2])
                elif tag[0] == "bb":
                    continue  # should have been stripped; defensive
                else:
                    entries.add(tag)
            conflict_clause(entries)
            return ("clauses", None)
        except _Budget:
            return ("unknown", None)

        # 4. candidate model
        return self._build_model(cc, atoms, beta, assignment, deadline)

    def _materialize(self, cc, tkey, cname, lit):
        """Assert tkey = cname(selectors...) inside the closure."""
        tyname, fields = self.decls.ctor[cname]
        children = []
        child_sexps = []
        for sname, fsort in fields:
            ssexp = [sname, self.reg[tkey]["sexp"]]
            if fsort == "Int":
                key = self._register_term(ssexp, "Int", "sel", sname, [("dt", tkey)])
                cc.add(key)
                children.append(("term", key))
                child_sexps.append(key)
            elif fsort == "Bool":
                key = self._register_term(ssexp, "Bool", "sel", sname, [("dt", tkey)])
                cc.add(key)
                blit = self._atom_lit(("bapp", key))
                children.append(("bool", blit))
                child_sexps.append(["$lit", blit])
            else:
                key = self._register_term(ssexp, fsort, "sel", sname, [("dt", tkey)])
                cc.add(key)
                children.append(("dt", key))
                child_sexps.append(key)
        csexp = [cname] + child_sexps
        ckey = self._register_term(
            csexp, self.decls.ctor[cname][0], "ctor", cname, children
        )
        cc.add(ckey)
        cc.merge(tkey, ckey, ("lit", lit))

    def _check_acyclic(self, cc):
        # graph over class roots via constructor children
        color = {}

        def edges(root):
            m = cc.ctor_member.get(root)
            if m is None:
                return []
            out = []
            for tag, p in self.reg[m]["children"]:
                if tag in ("dt", "term") and self.reg[p]["sort"] in self.decls.datatypes:
                    out.append((m, p))
            return out

        roots = [r for r in cc.members if cc.find(r) == r]
        for start in roots:
            if color.get(start):
                continue
            stack = [(start, iter(edges(start)), None)]
            color[start] = 1
            path = {start: None}
            while stack:
                node, it, _ = stack[-1]
                adv = next(it, None)
                if adv is None:
                    color[node] = 2
                    stack.pop()
                    continue
                m, child = adv
                croot = cc.find(child)
                if color.get(croot) == 1:
                    # cycle: collect explanation along the stack
                    lits = set()
                    # walk stack from croot..node, linking child to the
                    # ctor member of the next class
                    seq = []
                    hit = False
                    for n, _, info in stack:
                        if n == croot:
                            hit = True
                        if hit:
                            seq.append(n)
                    seq.append(croot)
                    for i in range(len(seq) - 1):
                        mem = cc.ctor_member[seq[i]]
                        # find the child of mem that lands in seq[i+1]
                        for tag, p in self.reg[mem]["children"]:
                            if tag in ("dt", "term") and cc.find(p) == seq[i + 1]:
                                nxt_anchor = cc.ctor_member.get(seq[i + 1])
                                if nxt_anchor is None:
                                    nxt_anchor = p
                                lits |= cc.explain_lits(p, nxt_anchor)
                                break
                    raise CcConflict(lits)
                if color.get(croot) is None:
                    color[croot] = 1
                    stack.append((croot, iter(edges(croot)), None))
            # done component
        return

    # -- model construction and validation --------------------------------

    def _build_model(self, cc, atoms, beta, assignment, deadline):
        decls = self.decls

        def blit_val(lit):
            v = _var(lit)
            a = assignment[v] if v < len(assignment) else None
            if a is None:
                a = False
            return a ^ bool(lit & 1)

        # resolve every class to a value
        classval = {}
        resolving = set()

        def class_value(root):
            root = cc.find(root)
            if root in classval:
                return classval[root]
            if root in resolving:
                raise SmtError("internal: cyclic value (acyclicity hole)")
            resolving.add(root)
            m = cc.ctor_member.get(root)
            if m is None:
                sort = self.reg[root]["sort"]
                if sort == "Int":
                    anchor = next(
                        (k for k in cc.members[root] if k in beta), None
                    )
                    val = int(beta[anchor]) if anchor is not None else 0
                elif sort == "Bool":
                    val = False
                else:
                    val = decls.default_value(sort)
            else:
                cname = self.reg[m]["head"]
                children = []
                for tag, p in self.reg[m]["children"]:
                    if tag in ("dt", "term"):
                        s2 = self.reg[p]["sort"]
                        if s2 == "Int":
                            children.append(int(beta.get(p, Fraction(0))))
                        elif s2 == "Bool":
                            lit = self.atom_var.get(("bapp", p))
                            children.append(blit_val(lit << 1) if lit is not None else False)
                        else:
                            children.append(class_value(p))
                    elif tag == "int":
                        children.append(int(lf_eval(p, beta)))
                    else:  # bool literal
                        children.append(blit_val(p))
                val = (cname, tuple(children))
            resolving.discard(root)
            classval[root] = val
            return val

        # integer terms take their simplex value directly
        def term_value(key):
            info = self.reg[key]
            if info["sort"] == "Int":
                return int(beta.get(key, Fraction(0)))
            if info["sort"] == "Bool":
                lit = self.atom_var.get(("bapp", key))
                if lit is None:
                    return False
                return blit_val(lit << 1)
            return class_value(key)

        # repair distinctness among unshaped classes
        false_deqs = [k for k, v in atoms.items() if k[0] == "deq" and not v]
        for _ in range(3):
            violated = []
            for k in false_deqs:
                va, vb = class_value(cc.find(k[1])), class_value(cc.find(k[2]))
                if va == vb:
                    violated.append(k)
            if not violated:
                break
            progressed = False
            for k in violated:
                ra, rb = cc.find(k[1]), cc.find(k[2])
                free = None
                if cc.ctor_member.get(ra) is None and self.reg[ra]["sort"] in decls.datatypes:
                    free = ra
                elif cc.ctor_member.get(rb) is None and self.reg[rb]["sort"] in decls.datatypes:
                    free = rb
                if free is not None:
                    other = class_value(rb if free == ra else ra)
                    avoid = {repr(other)}
                    for v in decls.value_stream(self.reg[free]["sort"]):
                        if repr(v) not in avoid:
                            classval[free] = v
                            progressed = True
                            break
                else:
                    # both shaped with the same constructor: decompose
                    ma, mb = cc.ctor_member.get(ra), cc.ctor_member.get(rb)
                    if ma is None or mb is None:
                        continue
                    memo = ("deqdec", k)
                    if memo in self.lemma_done:
                        continue
                    self.lemma_done.add(memo)
                    if self._add_decomposition(k, ma, mb):
                        return ("clauses", None)
            if not progressed:
                break

        # function tables by argument values; congruence conflicts -> lemmas
        tables = {}
        sel_tables = {}
        lemma_added = False
        for key, info in self.reg.items():
            if info["kind"] not in ("app", "sel"):
                continue
            argvals = []
            for tag, p in info["children"]:
                if tag == "int":
                    argvals.append(int(lf_eval(p, beta)))
                elif tag == "bool":
                    argvals.append(blit_val(p))
                else:
                    argvals.append(class_value(p))
            res = term_value(key)
            tkey = (info["head"], tuple(map(repr, argvals)))
            prev = tables.get(tkey)
            if prev is None:
                tables[tkey] = (res, key, argvals)
            elif prev[0] != res:
                if self._add_congruence(key, prev[1]):
                    lemma_added = True
        if lemma_added:
            return ("clauses", None)

        # multiplication: validate every product against its factors
        for mv, (lfa, lfb) in self.mults.items():
            mval = beta.get(mv, Fraction(0))
            aval = lf_eval(lfa, beta)
            bval = lf_eval(lfb, beta)
            if mval != aval * bval:
                self._add_mult_lemmas(mv, lfa, lfb, int(aval), int(bval))
                lemma_added = True
        if lemma_added:
            return ("clauses", None)

        # environment for validation and reporting (assertions are stored in
        # pre-atomization form, so internal definitional names never appear)
        env = {}
        for name, sort in decls.consts.items():
            if name in self.internal:
                continue
            key = to_text(name)
            if key in self.reg:
                env[name] = term_value(key)
            elif sort == "Bool":
                lit = self.atom_var.get(("bvar", name))
                env[name] = blit_val(lit << 1) if lit is not None else False
            elif sort == "Int":
                env[name] = 0
            else:
                env[name] = decls.default_value(sort)
        # selector/function fallback tables for evaluation
        for (head, argreprs), (res, _key, argvals) in tables.items():
            if head in decls.sel:
                sel_tables[(head, argreprs[0])] = res
            else:
                tables[(head, argreprs)] = (res, _key, argvals)
        self._model_tables = (tables, sel_tables)

        for f in self.asserts:
            try:
                ok = self._eval_model(f, env)
            except SmtError:
                ok = None
            if ok is not True:
                _dbg("validation failed on", to_text(f))
                return ("unknown", None)
        return ("sat", env)

    def _child_eq_lit(self, c1, c2):
        """Literal asserting equality of two like-sorted child entries."""
        tag1, p1 = c1
        tag2, p2 = c2
        if tag1 == "bool" or tag2 == "bool":
            return self._iff_lit(p1, p2)
        s1 = "Int" if tag1 == "int" else self.reg[p1]["sort"]
        if s1 == "Int":
            lf1 = p1 if tag1 == "int" else lf_var(p1)
            lf2 = p2 if tag2 == "int" else lf_var(p2)
            return self._arith_atom("eq0", lf_sub(lf1, lf2))
        if s1 == "Bool":
            return self._iff_lit(
                self._atom_lit(("bapp", p1)), self._atom_lit(("bapp", p2))
            )
        return self._deq_atom(p1, p2)

    def _add_decomposition(self, deq_key, ma, mb):
        """not (a=b) for same-constructor a,b implies some child differs."""
        ia = self.reg[ma]
        ib = self.reg[mb]
        if ia["head"] != ib["head"]:
            return False
        eqlit = self.atom_var[deq_key] << 1
        disj = [eqlit]
        for c1, c2 in zip(ia["children"], ib["children"]):
            disj.append(_neg(self._child_eq_lit(c1, c2)))
        self.sat._backtrack(0)
        self.sat.add_clause(disj)
        return True

    def _add_congruence(self, k1, k2):
        """Arguments equal implies results equal, for two applications of
        the same symbol."""
        memo = ("cong", min(k1, k2), max(k1, k2))
        if memo in self.lemma_done:
            return False
        self.lemma_done.add(memo)
        i1, i2 = self.reg[k1], self.reg[k2]
        hyps = []  # literals that must all hold
        for c1, c2 in zip(i1["children"], i2["children"]):
            hyps.append(self._child_eq_lit(c1, c2))
        if i1["sort"] == "Bool":
            c1 = self._atom_lit(("bapp", k1))
            c2 = self._atom_lit(("bapp", k2))
            self.sat._backtrack(0)
            self.sat.add_clause([_neg(h) for h in hyps] + [_neg(c1), c2])
            self.sat.add_clause([_neg(h) for h in hyps] + [c1, _neg(c2)])
        elif i1["sort"] == "Int":
            conc = self._arith_atom("eq0", lf_sub(lf_var(k1), lf_var(k2)))
            self.sat._backtrack(0)
            self.sat.add_clause([_neg(h) for h in hyps] + [conc])
        else:
            conc = self._deq_atom(k1, k2)
            self.sat._backtrack(0)
            self.sat.add_clause([_neg(h) for h in hyps] + [conc])
        return True

    def _add_mult_lemmas(self, mv, lfa, lfb, a, b):
        m = lf_var(mv)
        self.sat._backtrack(0)
        if lf_key(lfa) == lf_key(lfb):
            # square: tangent m >= 2a*x - a^2 at the sampled point, plus the
            # point value itself
            for pt in {a, b}:
                tangent = lf_sub(lf_add(lf_scale(lfa, 2 * pt), lf_const(-pt * pt)), m)
                self.sat.add_clause([self._arith_atom("le", tangent)])
                ant = self._arith_atom("eq0", lf_sub(lfa, lf_const(pt)))
                conc = self._arith_atom("eq0", lf_sub(m, lf_const(pt * pt)))
                self.sat.add_clause([_neg(ant), conc])
        else:
            ant_a = self._arith_atom("eq0", lf_sub(lfa, lf_const(a)))
            conc_a = self._arith_atom("eq0", lf_sub(m, lf_scale(lfb, a)))
            self.sat.add_clause([_neg(ant_a), conc_a])
            ant_b = self._arith_atom("eq0", lf_sub(lfb, lf_const(b)))
            conc_b = self._arith_atom("eq0", lf_sub(m, lf_scale(lfa, b)))
            self.sat.add_clause([_neg(ant_b), conc_b])

    # -- evaluation under a model ------------------------------------------

    def _eval_model(self, t, env):
        decls = self.decls
        tables, sel_tables = getattr(self, "_model_tables", ({}, {}))

        def ev(t):
            if isinstance(t, bool):
                return t
            if isinstance(t, int):
                return t
            if isinstance(t, str):
                if t == "true":
                    return True
                if t == "false":
                    return False
                if t in env:
                    return env[t]
                if t in decls.ctor:
                    return (t, ())
                raise SmtError(f"unknown constant {t}")
            head = t[0]
            if isinstance(head, list):  # tester
                v = ev(t[1])
                return isinstance(v, tuple) and v[0] == head[2]
            if head in decls.ctor:
                return (head, tuple(ev(a) for a in t[1:]))
            if head in decls.sel:
                tyname, cname, idx, fsort = decls.sel[head]
                v = ev(t[1])
                if isinstance(v, tuple) and v[0] == cname:
                    return v[1][idx]
                hit = sel_tables.get((head, repr(v)))
                if hit is not None:
                    return hit
                return decls.default_value(fsort)
            if head in decls.funs:
                args = tuple(ev(a) for a in t[1:])
                hit = tables.get((head, tuple(map(repr, args))))
                if hit is not None:
                    return hit[0]
                return decls.default_value(decls.funs[head][1])
            if head == "ite":
                return ev(t[2]) if ev(t[1]) else ev(t[3])
            if head == "not":
                return not ev(t[1])
            if head == "and":
                return all(ev(a) for a in t[1:])
            if head == "or":
                return any(ev(a) for a in t[1:])
            if head == "=>":
                vals = [ev(a) for a in t[1:]]
                out = vals[-1]
                for v in reversed(vals[:-1]):
                    out = (not v) or out
                return out
            if head == "xor":
                out = ev(t[1])
                for a in t[2:]:
                    out = out != ev(a)
                return out
            if head == "=":
                vals = [ev(a) for a in t[1:]]
                return all(v == vals[0] for v in vals[1:])
            if head == "distinct":
                vals = [ev(a) for a in t[1:]]
                return len(set(map(repr, vals))) == len(vals)
            if head == "+":
                return sum(ev(a) for a in t[1:])
            if head == "-":
                vals = [ev(a) for a in t[1:]]
                if len(vals) == 1:
                    return -vals[0]
                out = vals[0]
                for v in vals[1:]:
                    out -= v
                return out
            if head == "*":
                out = 1
                for a in t[1:]:
                    out *= ev(a)
                return out
            if head in _CMP:
                a, b = ev(t[1]), ev(t[2])
                return {"<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b}[head]
            raise SmtError(f"cannot evaluate {to_text(t)}")

        return ev(t)


# ---------------------------------------------------------------------------
# process entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    solver = Solver()
    reader = Reader()
    stdin = sys.stdin
    while not solver.done:
        chunk = stdin.readline()
        if chunk == "":
            if reader.pending():
                print('(error "unexpected end of input")', flush=True)
            break
        try:
            reader.feed(chunk)
        except SexpError as e:
            print("(error " + to_text(Str(str(e))) + ")", flush=True)
            reader = Reader()
            continue
        for cmd in reader.take():
            r = solver.execute(cmd)
            if r is not None:
                print(r, flush=True)
            if solver.done:
                break
    return 0


if __name__ == "__main__":
    sys.exit(main())
