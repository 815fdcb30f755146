"""Existential maintenance of group monomials L1 a1 L2 ... an L(n+1).

Each Li is mu^-1(Ai) for one morphism mu into a finite group G.  With the
prefix/suffix group relations of ``GroupFormulas`` the program keeps

    P_{k,g}(x)  some x1 < ... < xk < x carry a1..ak, the gaps before them lie
                in L1..Lk, and w[xk+1, x-1] evaluates to g
    S_{k,g}(x)  some x < xk < ... < xn carry ak..an, the gaps after them lie
                in L(k+1)..L(n+1), and w[x+1, xk-1] evaluates to g

so P_{0,g} = P_g and S_{n+1,g} = S_g.  Gap values of the new word are read
off the new prefix (or suffix) values at the two ends.  The query bit is
quantifier-free over the old relations at the changed position; the
complemented variant negates only that formula.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dyn_engine import CHANGE_VAR, REL_VAR, DynamicProgram, ProgramError
from ..lang_frontend import EPS
from ..logic import FALSE, And, Exists, Formula, Lt, Not, Or, Rel, W
from ..monoid_core import FiniteMonoid, Morphism
from .common import inverses
from .group import GroupFormulas, GroupPresentation


@dataclass(frozen=True)
class MonomialPresentation:
    languages: tuple  # GroupPresentation per gap, n + 1 of them
    letters: tuple  # a1..an
    complemented: bool = False

    def __post_init__(self):
        if len(self.languages) != len(self.letters) + 1:
            raise ProgramError("need one gap language more than letters")
        first = self.languages[0]
        for gp in self.languages:
            if gp.group is not first.group or gp.morphism is not first.morphism:
                raise ProgramError("gap languages must share one group and morphism")
        for a in self.letters:
            if a not in first.morphism.alphabet:
                raise ProgramError(f"letter {a!r} outside the alphabet")

    @property
    def group(self) -> FiniteMonoid:
        return self.languages[0].group

    @property
    def morphism(self) -> Morphism:
        return self.languages[0].morphism

    def gap_sets(self) -> list[frozenset]:
        return [frozenset(gp.accepting) for gp in self.languages]


def monomial_presentation(group: FiniteMonoid, morphism: Morphism, gaps, letters,
                          complemented: bool = False) -> MonomialPresentation:
    langs = tuple(GroupPresentation(group, morphism, frozenset(a)) for a in gaps)
    return MonomialPresentation(langs, tuple(letters), complemented)


def prefix_states(mp: MonomialPresentation, word) -> list[set]:
    """out[x-1] = set of (k, g) with P_{k,g}(x), for x = 1..n+1."""
    G, mu, A, a = mp.group, mp.morphism, mp.gap_sets(), mp.letters
    cur = {(0, G.identity)}
    out = [cur]
    for c in word:
        nxt = set()
        for k, g in cur:
            nxt.add((k, int(G.mult[g, mu.letter(c)])))
            if c is not EPS and k < len(a) and c == a[k] and g in A[k]:
                nxt.add((k + 1, G.identity))
        cur = nxt
        out.append(cur)
    return out


def suffix_states(mp: MonomialPresentation, word) -> list[set]:
    """out[x] = set of (k, g) with S_{k,g}(x), for x = 0..n."""
    G, mu, A, a = mp.group, mp.morphism, mp.gap_sets(), mp.letters
    m = len(a)
    cur = {(m + 1, G.identity)}
    out = [cur]
    for c in reversed(list(word)):
        nxt = set()
        for k, g in cur:
            nxt.add((k, int(G.mult[mu.letter(c), g])))
            if c is not EPS and k >= 2 and c == a[k - 2] and g in A[k - 1]:
                nxt.add((k - 1, G.identity))
        cur = nxt
        out.append(cur)
    return out[::-1]


def monomial_accepts(mp: MonomialPresentation, word) -> bool:
    end = prefix_states(mp, word)[-1]
    m = len(mp.letters)
    inside = any(k == m and g in mp.gap_sets()[m] for k, g in end)
    return inside != mp.complemented


def build_sigma1_monomial_program(mp: MonomialPresentation, name: str = "monomial"
                                  ) -> DynamicProgram:
    G, mu, A, a = mp.group, mp.morphism, mp.gap_sets(), mp.letters
    m = len(a)
    inv = inverses(G)
    gf = GroupFormulas(G)
    grels, gbits = gf.names()
    elems = range(G.size)
    mul = G.product
    alphabet = mu.alphabet

    def P(k, g, t):
        return gf.P(g, t) if k == 0 else Rel(f"P_{k}_{g}", t)

    def S(k, g, t):
        return gf.S(g, t) if k == m + 1 else Rel(f"S_{k}_{g}", t)

    names = [f"P_{k}_{g}" for k in range(1, m + 1) for g in elems]
    names += [f"S_{k}_{g}" for k in range(1, m + 1) for g in elems]

    def gap_prefix(at: int, s: int, u: str, v: str, ok) -> Formula:
        """New w[u+1, v-1] is in ``ok`` when u holds a_at, from new prefix values."""
        return Or(*[And(gf.new_P(h1, s, u), gf.new_P(h2, s, v)) for h1 in elems for h2 in elems
                    if mul([inv[mu.letter(a[at])], inv[h1], h2]) in ok])

    def gap_suffix(at: int, s: int, u: str, v: str, ok) -> Formula:
        """New w[u+1, v-1] is in ``ok`` when v holds a_at, from new suffix values."""
        return Or(*[And(gf.new_S(h1, s, u), gf.new_S(h2, s, v)) for h1 in elems for h2 in elems
                    if mul([h1, inv[h2], inv[mu.letter(a[at])]]) in ok])

    def other(v: str) -> str:
        return "u" if v != "u" else "v"

    def pre(t: int, s: int, v: str) -> Formula:
        """v carries a_t (1-based) and closes a valid prefix chain in the new word."""
        head = W(a[t - 1], v)
        if t == 1:
            return And(head, Or(*[gf.new_P(h, s, v) for h in A[0]]))
        u = other(v)
        return And(head, Exists(u, And(Lt(u, v), pre(t - 1, s, u),
                                       gap_prefix(t - 2, s, u, v, A[t - 1]))))

    def suf(t: int, s: int, v: str) -> Formula:
        """v carries a_t and opens a valid suffix chain in the new word."""
        head = W(a[t - 1], v)
        if t == m:
            return And(head, Or(*[gf.new_S(h, s, v) for h in A[m]]))
        u = other(v)
        return And(head, Exists(u, And(Lt(v, u), suf(t + 1, s, u),
                                       gap_suffix(t, s, v, u, A[t]))))

    updates = dict(gf.updates({**{c: mu.letter(c) for c in alphabet}, EPS: G.identity}))
    for sym in alphabet + (EPS,):
        s = mu.letter(sym)
        x = REL_VAR
        for k in range(1, m + 1):
            for g in elems:
                updates[(f"P_{k}_{g}", sym)] = Exists("u", And(
                    Lt("u", x), pre(k, s, "u"), gap_prefix(k - 1, s, "u", x, {g})))
                updates[(f"S_{k}_{g}", sym)] = Exists("u", And(
                    Lt(x, "u"), suf(k, s, "u"), gap_suffix(k - 1, s, x, "u", {g})))
        updates[("q", sym)] = answer(mp, sym, P, S)
    initial = gf.initial()
    initial.update({r: "none" for r in names})
    initial["q"] = monomial_accepts(mp, [])

    def initializer(word):
        rels, bits = gf.init_values([mu.letter(c) for c in word])
        for r in names:
            rels[r] = set()
        ps, ss = prefix_states(mp, word), suffix_states(mp, word)
        for x in range(1, len(word) + 1):
            for k, g in ps[x - 1]:
                if 1 <= k <= m:
                    rels[f"P_{k}_{g}"].add(x)
            for k, g in ss[x]:
                if 1 <= k <= m:
                    rels[f"S_{k}_{g}"].add(x)
        bits["q"] = monomial_accepts(mp, word)
        return rels, bits

    explain = gf.explain()
    for k in range(1, m + 1):
        for g in elems:
            explain[f"P_{k}_{g}"] = (f"a1..a{k} matched before x with valid gaps, and the gap "
                                     f"since the last one evaluates to {G.names[g]}")
            explain[f"S_{k}_{g}"] = (f"a{k}..a{m} matched after x with valid gaps, and the gap "
                                     f"up to the first one evaluates to {G.names[g]}")
    explain["q"] = ("the word is outside the monomial" if mp.complemented
                    else "the word is in the monomial")
    p = DynamicProgram(name, alphabet, tuple(grels + names), tuple(gbits) + ("q",), "Sigma1",
                       updates, "q", padded=False, initial=initial, initializer=initializer,
                       explain=explain)
    p.presentation = mp
    p.validate()
    return p


def answer(mp: MonomialPresentation, sym, P, S) -> Formula:
    """Quantifier-free membership test of the new word from old relations at y."""
    G, mu, A, a = mp.group, mp.morphism, mp.gap_sets(), mp.letters
    m = len(a)
    y = CHANGE_VAR
    s = mu.letter(sym)
    parts = []
    for k in range(1, m + 1):
        if sym is not EPS and sym == a[k - 1]:
            parts.append(And(Or(*[P(k - 1, g, y) for g in A[k - 1]]),
                             Or(*[S(k + 1, g, y) for g in A[k]])))
    for k in range(1, m + 2):
        parts.append(Or(*[And(P(k - 1, g, y), S(k, h, y))
                          for g in range(G.size) for h in range(G.size)
                          if G.product([g, s, h]) in A[k - 1]]))
    f = Or(*parts) if parts else FALSE
    return Not(f) if mp.complemented else f
