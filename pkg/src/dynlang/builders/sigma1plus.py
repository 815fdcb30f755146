"""Positive existential maintenance of ordered semidirect products M * G.

M is an ordered monoid with 1 <= x for every x and G a finite group (whose
compatible order is necessarily equality).  A word (m1,g1)...(mn,gn)
evaluates to (sum_i P_i.m_i, g1...gn) where P_i is the group value of the
strict prefix before i.  The program keeps the group relations of
``GroupFormulas`` and relations D_v holding at the positions i with
P_i.m_i = v.  Since deleting letters can only lower a product in M, the
words over M whose product lies in an upset form an upward closed set for
the subword order, so membership is witnessed by one of finitely many
minimal subwords, which an existential formula can look for.
"""

from __future__ import annotations

from itertools import product as iproduct

from ..dyn_engine import CHANGE_VAR, REL_VAR, DynamicProgram, ProgramError
from ..lang_frontend import EPS, Dfa, dfa_accepts
from ..logic import FALSE, TRUE, And, Eq, Exists, Formula, Lt, Or, Rel, W
from ..monoid_core import (Morphism, OrderedMonoid, SemidirectAction,
                           is_group, is_jplus, semidirect_product)
from .common import base_init
from .group import GroupFormulas


def is_subword(u, w) -> bool:
    it = iter(w)
    return all(any(c == d for d in it) for c in u)


def minimal_subwords(d: Dfa) -> list[tuple]:
    """Subword-minimal members of an upward closed language given by a DFA.

    Upward closure is checked on all words of length up to q+1 (q the
    number of states); a minimal word is shorter than q since a repeated
    state lets a factor be cut out.
    """
    q = d.size
    alpha = list(d.alphabet)
    for k in range(q + 1):
        for w in iproduct(alpha, repeat=k):
            if dfa_accepts(d, w):
                for i in range(k + 1):
                    for a in alpha:
                        v = w[:i] + (a,) + w[i:]
                        if not dfa_accepts(d, v):
                            raise UpwardClosureError(w, v)
    out = []
    for k in range(q):
        for w in iproduct(alpha, repeat=k):
            if dfa_accepts(d, w) and not any(dfa_accepts(d, w[:i] + w[i + 1:]) for i in range(k)):
                out.append(w)
    return out


class UpwardClosureError(ProgramError):
    def __init__(self, member, non_member):
        super().__init__(f"not upward closed: {''.join(member) or 'eps'} is in the language, "
                         f"{''.join(non_member)} is not")
        self.member, self.non_member = member, non_member


def minimal_words_in_upset(om: OrderedMonoid, upset) -> list[tuple]:
    """Minimal words (under the subword order) over M minus 1 whose product lies in ``upset``.

    Needs 1 <= x for all x.  A minimal word has pairwise distinct prefix
    products (else a factor could be cut out), so its length is below |M|.
    """
    M = om.monoid
    one = M.identity
    if not is_jplus(om):
        raise ProgramError("the ordered monoid does not satisfy 1 <= x for all x")
    upset = set(upset)
    if not om.is_upset(upset):
        raise ProgramError("accepting set is not an upset")
    letters = [x for x in range(M.size) if x != one]
    found: list[tuple] = []
    frontier = [((), one)]
    while frontier:
        nxt = []
        for word, val in frontier:
            if val in upset:
                if not any(is_subword(u, word) for u in found):
                    found.append(word)
                continue
            seen = set(M.product(word[:k]) for k in range(len(word) + 1))
            for a in letters:
                v = int(M.mult[val, a])
                if v not in seen:
                    nxt.append((word + (a,), v))
        frontier = nxt
    return found


class SemidirectPresentation:
    """Letters of the semidirect product, named "m.g" from the element names."""

    def __init__(self, act: SemidirectAction, upset, letters: dict | None = None):
        self.act = act
        self.M = act.left.monoid
        self.G = act.right.monoid
        if not is_group(self.G):
            raise ProgramError("right factor must be a group")
        self.product = semidirect_product(act)
        self.upset = frozenset(upset)
        if not self.product.is_upset(self.upset):
            raise ProgramError("accepting set is not an upset of the semidirect product")
        if letters is None:
            letters = {}
            for e in range(self.product.size):
                if e != self.product.monoid.identity:
                    m, g = act.unpair(e)
                    letters[f"{self.M.names[m]}.{self.G.names[g]}"] = e
        self.letters = dict(letters)
        self.morphism = Morphism(tuple(self.letters), self.product.monoid, self.letters)

    def component(self, sym) -> tuple[int, int]:
        if sym is EPS:
            return self.M.identity, self.G.identity
        return self.act.unpair(self.letters[sym])

    def upset_by_group(self) -> dict:
        out = {g: set() for g in range(self.G.size)}
        for e in self.upset:
            m, g = self.act.unpair(e)
            out[g].add(m)
        return out


def build_sigma1plus_program(act: SemidirectAction, upset, letters: dict | None = None,
                             name: str = "sigma1plus") -> DynamicProgram:
    """Sigma1+ program for the upset ``upset`` of the product ``act``.

    The alphabet is the non-identity elements of the product, named "m.g",
    unless ``letters`` maps symbols to product elements.
    """
    sp = SemidirectPresentation(act, upset, letters)
    act, M, G = sp.act, sp.M, sp.G
    om = act.left
    gf = GroupFormulas(G, prefix="G")
    grels, gbits = gf.names()
    others = [v for v in range(M.size) if v != M.identity]
    drels = [f"D_{v}" for v in others]
    minimal = {g: minimal_words_in_upset(om, us) for g, us in sp.upset_by_group().items()}
    alphabet = tuple(sp.letters)
    gsym = {s: sp.component(s)[1] for s in alphabet}
    gsym[EPS] = G.identity

    def D(v: int, t: str) -> Formula:
        return Rel(f"D_{v}", t)

    def new_D(v: int, sym, t: str) -> Formula:
        y = CHANGE_VAR
        m_s, g_s = sp.component(sym)
        here = Or(*[gf.P(h, y) for h in range(G.size) if act.action[h, m_s] == v])
        later = Or(*[And(gf.new_P(h, g_s, t), W(a, t))
                     for a in alphabet for h in range(G.size)
                     if act.action[h, sp.component(a)[0]] == v])
        return Or(And(Lt(t, y), D(v, t)), And(Eq(t, y), here), And(Lt(y, t), later))

    updates = dict(gf.updates(gsym))
    for sym in alphabet + (EPS,):
        for v in others:
            updates[(f"D_{v}", sym)] = new_D(v, sym, REL_VAR)
        g_s = gsym[sym]
        pred = (lambda v, t, sym=sym: new_D(v, sym, t))
        updates[("q", sym)] = Or(*[And(gf.new_Q(g, g_s), sigma1plus_upset_formula(minimal[g], pred))
                                   for g in range(G.size)])
    initial = gf.initial()
    initial.update(base_init(drels, ()))
    one = sp.product.monoid.identity
    initial["q"] = one in sp.upset

    def initializer(word):
        values = [gsym[s] for s in word]
        rels, bits = gf.init_values(values)
        for r in drels:
            rels[r] = set()
        pre = G.identity
        total = M.identity
        for i, s in enumerate(word, start=1):
            m, g = sp.component(s)
            v = int(act.action[pre, m])
            total = int(M.mult[total, v])
            if v != M.identity:
                rels[f"D_{v}"].add(i)
            pre = int(G.mult[pre, g])
        bits["q"] = act.pair(total, pre) in sp.upset
        return rels, bits

    explain = gf.explain()
    for v in others:
        explain[f"D_{v}"] = (f"positions i whose letter (m, g) has P(i).m = {M.names[v]}, "
                             "P(i) the group value of the strict prefix")
    explain["q"] = "the word evaluates into the accepting upset"
    p = DynamicProgram(name, alphabet, tuple(grels + drels), tuple(gbits) + ("q",), "Sigma1+",
                       updates, "q", padded=False, initial=initial, initializer=initializer,
                       explain=explain)
    p.presentation = sp
    p.validate()
    return p


def sigma1plus_upset_formula(words, pred=lambda a, t: W(a, t)) -> Formula:
    """Disjunction over ``words`` of: the letters of the word occur at increasing positions."""
    def chain(word, prev, depth):
        if depth == len(word):
            return TRUE
        p = f"p{depth + 1}"
        body = And(pred(word[depth], p), chain(word, p, depth + 1))
        if prev is not None:
            body = And(Lt(prev, p), body)
        return Exists(p, body)

    return Or(*[chain(tuple(u), None, 0) for u in words]) if words else FALSE
