"""Sigma2 maintenance of Member(M) for an arbitrary finite monoid.

The word is padded with two epsilon positions 0 and n+1, and quantifiers
range over 0..n+1.  For a J-class J, an element y with y >=J J and a
position j the program stores

    R_{J,y}(j)   value of w[j+1, k] for the greatest k >= j with y.w[j+1,k] >=J J
    Rb_{J,y}(j)  value of w[j, k]   for the greatest k >= j-1 with y.w[j,k] >=J J
    L_{J,y}(j)   value of w[k, j-1] for the least k <= j with w[k,j-1].y >=J J
    Lb_{J,y}(j)  value of w[k, j]   for the least k <= j+1 with w[k,j].y >=J J

as one relation per value.  From these, ``psi(v, a, b)`` says that the
infix w[a+1, b-1] evaluates to v: existential quantifiers locate the
positions where the prefix values w[a+1, .] enter a new J-class, universal
quantifiers check that the class is kept in between (read off the L
relations), and the exact element inside its H-class is recovered from
R_{J,1}(a) and Rb_{J,t}(b) through right multiplication, which is injective
on H-classes that stay in their J-class.
"""

from __future__ import annotations

from ..dyn_engine import CHANGE_VAR, REL_VAR, DynamicProgram
from ..lang_frontend import EPS
from ..logic import (FALSE, TRUE, And, Eq, Exists, Forall, Formula, Leq, Lt, Or, Rel,
                     is_max, is_min)
from ..monoid_core import FiniteMonoid, GreenData, Morphism, green_relations
from .common import letter_value, word_values

KINDS = ("R", "Rb", "L", "Lb")
_BOUND = ("h", "g", "e", "d", "c", "h2", "g2", "e2", "d2", "c2")


def _pick(*avoid: str) -> str:
    for v in _BOUND:
        if v not in avoid and v != CHANGE_VAR:
            return v
    raise RuntimeError("ran out of bound variable names")


def relation_name(kind: str, J: int, y: int, x: int) -> str:
    return f"{kind}_J{J}_y{y}_x{x}"


class Sigma2Builder:
    def __init__(self, m: FiniteMonoid, phi: Morphism):
        self.m = m
        self.phi = phi
        self.g: GreenData = green_relations(m)
        self.one = m.identity
        self.top = int(self.g.J[self.one])
        self.jclasses = list(self.g.jclasses)
        self._cache: dict = {}

    # -- algebra ----------------------------------------------------------

    def mul(self, *xs) -> int:
        return self.m.product(xs)

    def geq(self, x: int, J: int) -> bool:
        return bool(self.g.leqJ[J, x])

    def inJ(self, x: int, J: int) -> bool:
        return int(self.g.J[x]) == J

    def above(self, J: int) -> list[int]:
        """J-classes strictly above J."""
        return [K for K in self.jclasses if K != J and self.g.leqJ[J, K]]

    def elements(self):
        return range(self.m.size)

    def h_rep(self, v: int) -> int:
        return int(self.g.H[v])

    # -- atoms ------------------------------------------------------------

    def rel(self, kind: str, J: int, y: int, x: int, t: str) -> Formula:
        return Rel(relation_name(kind, J, y, x), t)

    def lam(self, z: int, t: str, old: bool = True) -> Formula:
        return letter_value(self.phi, z, t, old=old)

    def names(self) -> list[str]:
        return [relation_name(k, J, y, x) for k in KINDS for J in self.jclasses
                for y in self.elements() for x in self.elements()]

    # -- infix formulas over the pre-change structure ------------------------

    def stay(self, J: int, i: str) -> Formula:
        """Extending a prefix in J by the letter at i keeps it in J."""
        return Or(*[And(self.rel("L", J, self.one, yv, i),
                        Or(*[self.lam(z, i) for z in self.elements() if self.inJ(self.mul(yv, z), J)]))
                    for yv in self.elements() if self.geq(yv, J)])

    def seg(self, J: int, s: str, t: str) -> Formula:
        i = "i" if "i" not in (s, t) else "i2"
        return Forall(i, Or(Leq(i, s), Leq(t, i), self.stay(J, i)))

    def fall(self, J1: int, J2: int, a: str, f: str) -> Formula:
        """The prefix starting after a falls from J1 into J2 at position f."""
        leaves = Or(*[And(self.rel("L", J1, self.one, yv, f),
                          Or(*[self.lam(z, f) for z in self.elements()
                               if not self.geq(self.mul(yv, z), J1)]))
                      for yv in self.elements() if self.geq(yv, J1)])
        lands = Or(*[And(self.rel("R", J1, self.one, xv, a),
                         Or(*[self.lam(z, f) for z in self.elements() if self.inJ(self.mul(xv, z), J2)]))
                     for xv in self.elements() if self.inJ(xv, J1)])
        return And(leaves, lands)

    def prefix(self, J: int, a: str, f: str) -> Formula:
        """f is the position where the prefix w[a+1, .] enters class J (f = a for the top class)."""
        key = ("prefix", J, a, f)
        if key in self._cache:
            return self._cache[key]
        if J == self.top:
            r = Eq(a, f)
        else:
            h = _pick(a, f)
            r = Or(*[Exists(h, And(self.prefix(K, a, h), Lt(h, f), self.seg(K, h, f),
                                   self.fall(K, J, a, f)))
                     for K in self.above(J)])
        self._cache[key] = r
        return r

    def chain(self, J: int, a: str, b: str) -> Formula:
        """w[a+1, b-1] lies in class J."""
        f = _pick(a, b)
        return Exists(f, And(self.prefix(J, a, f), Lt(f, b), self.seg(J, f, b)))

    def psi(self, v: int, a: str, b: str) -> Formula:
        """w[a+1, b-1] evaluates to v (a < b)."""
        key = ("psi", v, a, b)
        if key in self._cache:
            return self._cache[key]
        J = int(self.g.J[v])
        t = self.h_rep(v)
        r_class = Or(*[self.rel("R", J, self.one, r, a) for r in self.elements()
                       if self.g.R[r] == self.g.R[v]])
        l_class = Or(*[self.rel("L", J, self.one, l, b) for l in self.elements()
                       if self.g.L[l] == self.g.L[v]])
        exact = Or(*[And(self.rel("R", J, self.one, self.mul(v, z), a), self.rel("Rb", J, t, z, b))
                     for z in self.elements() if self.inJ(self.mul(v, z), J)])
        r = And(Lt(a, b), self.chain(J, a, b), r_class, l_class, exact)
        self._cache[key] = r
        return r

    def psi_changed(self, v: int, s: int, a: str, b: str) -> Formula:
        """After setting position y to a letter of value s, w[a+1, b-1] evaluates to v."""
        key = ("psis", v, s, a, b)
        if key in self._cache:
            return self._cache[key]
        y = CHANGE_VAR
        inside = Or(*[And(self.psi(u, a, y), self._right_part(u, s, v, b))
                      for u in self.elements() if self._right_values(u, s, v)])
        r = Or(And(Lt(a, y), Lt(y, b), inside),
               And(Or(Leq(y, a), Leq(b, y)), self.psi(v, a, b)))
        self._cache[key] = r
        return r

    def _right_values(self, u: int, s: int, v: int) -> tuple:
        return tuple(w for w in self.elements() if self.mul(u, s, w) == v)

    def _right_part(self, u: int, s: int, v: int, b: str) -> Formula:
        return Or(*[self.psi(w, CHANGE_VAR, b) for w in self._right_values(u, s, v)])

    # -- update formulas -----------------------------------------------------

    def fail_right(self, J: int, c: int, k: str) -> Formula:
        """The new letter at k drops c.letter below J."""
        bad = [t for t in self.elements() if not self.geq(self.mul(c, t), J)]
        return Or(*[self.lam(t, k, old=False) for t in bad])

    def fail_left(self, J: int, c: int, k: str) -> Formula:
        bad = [t for t in self.elements() if not self.geq(self.mul(t, c), J)]
        return Or(*[self.lam(t, k, old=False) for t in bad])

    def update(self, kind: str, J: int, yv: int, v: int, s: int) -> Formula:
        if not self.geq(yv, J):
            return FALSE
        x, k = REL_VAR, "k"
        one = v == self.one
        if kind == "R":
            c = self.mul(yv, v)
            if not self.geq(c, J):
                return FALSE
            stop = Or(is_max(k), self.fail_right(J, c, k))
            return Or(And(is_max(x), TRUE if one else FALSE),
                      Exists(k, And(Lt(x, k), self.psi_changed(v, s, x, k), stop)))
        if kind == "L":
            c = self.mul(v, yv)
            if not self.geq(c, J):
                return FALSE
            stop = Or(is_min(k), self.fail_left(J, c, k))
            return Or(And(is_min(x), TRUE if one else FALSE),
                      Exists(k, And(Lt(k, x), self.psi_changed(v, s, k, x), stop)))
        if kind == "Rb":
            empty = Or(*[self.lam(t0, x, old=False) for t0 in self.elements()
                         if not self.geq(self.mul(yv, t0), J)]) if one else FALSE
            edge = is_max(x) if one else FALSE
            c = self.mul(yv, v)
            if not self.geq(c, J):
                return Or(empty, edge)
            body = Or(*[And(self.lam(t0, x, old=False), self.psi_changed(u, s, x, k))
                        for t0 in self.elements() if self.geq(self.mul(yv, t0), J)
                        for u in self.elements() if self.mul(t0, u) == v])
            stop = Or(is_max(k), self.fail_right(J, c, k))
            return Or(empty, edge, Exists(k, And(Lt(x, k), body, stop)))
        if kind == "Lb":
            empty = Or(*[self.lam(t0, x, old=False) for t0 in self.elements()
                         if not self.geq(self.mul(t0, yv), J)]) if one else FALSE
            edge = is_min(x) if one else FALSE
            c = self.mul(v, yv)
            if not self.geq(c, J):
                return Or(empty, edge)
            body = Or(*[And(self.lam(t0, x, old=False), self.psi_changed(u, s, k, x))
                        for t0 in self.elements() if self.geq(self.mul(t0, yv), J)
                        for u in self.elements() if self.mul(u, t0) == v])
            stop = Or(is_min(k), self.fail_left(J, c, k))
            return Or(empty, edge, Exists(k, And(Lt(k, x), body, stop)))
        raise ValueError(kind)

    def member_bit(self, v: int, s: int) -> Formula:
        a, b = REL_VAR, "k"
        return Exists(a, Exists(b, And(is_min(a), is_max(b), self.psi_changed(v, s, a, b))))

    # -- semantics -------------------------------------------------------------

    def values(self, kind: str, J: int, yv: int, vals: list) -> list:
        """Value of the relation family at each padded position (None = undefined)."""
        g = [self.one] + list(vals) + [self.one]
        N = len(g)
        out: list = []
        mult = self.m.mult
        for j in range(N):
            if not self.geq(yv, J):
                out.append(None)
                continue
            acc = best = self.one
            if kind in ("R", "Rb"):
                start = j + 1 if kind == "R" else j
                for k in range(start, N):
                    acc = int(mult[acc, g[k]])
                    if self.geq(int(mult[yv, acc]), J):
                        best = acc
                    else:
                        break
            else:
                start = j - 1 if kind == "L" else j
                for k in range(start, -1, -1):
                    acc = int(mult[g[k], acc])
                    if self.geq(int(mult[acc, yv]), J):
                        best = acc
                    else:
                        break
            out.append(best)
        return out

    def init_values(self, vals: list) -> tuple[dict, dict]:
        rels = {name: set() for name in self.names()}
        for kind in KINDS:
            for J in self.jclasses:
                for yv in self.elements():
                    for j, x in enumerate(self.values(kind, J, yv, vals)):
                        if x is not None:
                            rels[relation_name(kind, J, yv, x)].add(j)
        total = self.m.product(vals)
        bits = {f"Q_{v}": v == total for v in self.elements()}
        return rels, bits

    def explain(self) -> dict:
        names = self.m.names
        text = {
            "R": "greatest k with {y}.w[j+1,k] >=J {J}; w[j+1,k] evaluates to {x}",
            "Rb": "greatest k with {y}.w[j,k] >=J {J}; w[j,k] evaluates to {x}",
            "L": "least k with w[k,j-1].{y} >=J {J}; w[k,j-1] evaluates to {x}",
            "Lb": "least k with w[k,j].{y} >=J {J}; w[k,j] evaluates to {x}",
        }
        out = {}
        for kind in KINDS:
            for J in self.jclasses:
                for yv in self.elements():
                    for x in self.elements():
                        out[relation_name(kind, J, yv, x)] = text[kind].format(
                            y=names[yv], J=f"J({names[J]})", x=names[x])
        for v in self.elements():
            out[f"Q_{v}"] = f"the whole word evaluates to {names[v]}"
        return out


def build_sigma2_program(m: FiniteMonoid, phi: Morphism, accepting=None,
                         name: str = "sigma2") -> DynamicProgram:
    """Sigma2 program with bits Q_v (word evaluates to v) and, given
    ``accepting``, a query bit ``q`` for the union of those elements."""
    bld = Sigma2Builder(m, phi)
    rels = bld.names()
    bits = [f"Q_{v}" for v in bld.elements()]
    updates = {}
    symbols = {s: phi.letter(s) for s in phi.alphabet}
    symbols[EPS] = m.identity
    for sym, s in symbols.items():
        for kind in KINDS:
            for J in bld.jclasses:
                for yv in bld.elements():
                    for v in bld.elements():
                        updates[(relation_name(kind, J, yv, v), sym)] = bld.update(kind, J, yv, v, s)
        for v in bld.elements():
            updates[(f"Q_{v}", sym)] = bld.member_bit(v, s)
    initial = {r: "none" for r in rels}
    for kind in KINDS:
        for J in bld.jclasses:
            for yv in bld.elements():
                if bld.geq(yv, J):
                    initial[relation_name(kind, J, yv, m.identity)] = "all"
    for v in bld.elements():
        initial[f"Q_{v}"] = v == m.identity

    def initializer(word):
        return bld.init_values(word_values(phi, word))

    p = DynamicProgram(name, phi.alphabet, tuple(rels), tuple(bits), "Sigma2", updates,
                       query=f"Q_{m.identity}", padded=True, initial=initial,
                       initializer=initializer, explain=bld.explain())
    p.builder = bld
    p.validate()
    if accepting is not None:
        from .transforms import combine_disjunction
        p2 = combine_disjunction(p, accepting)
        p2.builder = bld
        return p2
    return p


def j_fall_decomposition(m: FiniteMonoid, vals: list, j: int) -> list[int]:
    """Positions j = l0 < l1 < ... < lm = n+1 where w[j, .] changes J-class.

    ``vals`` holds the letter values of positions 1..n.
    """
    g = green_relations(m)
    n = len(vals)
    out = [j]
    acc = vals[j - 1]
    cls = g.J[acc]
    for i in range(j + 1, n + 1):
        acc = int(m.mult[acc, vals[i - 1]])
        if g.J[acc] != cls:
            out.append(i)
            cls = g.J[acc]
    out.append(n + 1)
    return out
