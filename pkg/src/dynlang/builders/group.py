"""Quantifier-free maintenance of group evaluation (Member, StrictPrefix, StrictSuffix)."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dyn_engine import CHANGE_VAR, REL_VAR, DynamicProgram, ProgramError
from ..lang_frontend import EPS
from ..logic import And, Bit, Formula, Leq, Lt, Or, Rel
from ..monoid_core import FiniteMonoid, Morphism, is_group
from .common import base_init, inverses, prefix_values, word_values


@dataclass(frozen=True)
class GroupPresentation:
    group: FiniteMonoid
    morphism: Morphism
    accepting: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not is_group(self.group):
            raise ProgramError("presentation monoid is not a group")
        if self.morphism.target is not self.group:
            raise ProgramError("morphism must map into the presentation group")


class GroupFormulas:
    """Positive quantifier-free formulas for the post-change group values.

    With P(p), S(p) the strict prefix/suffix values at the changed position p
    and Q the whole word before the change, the change to a letter with
    value s gives, for x > p, new P(x) = P(p) s S(p) Q^-1 P(x), and for
    x < p, new S(x) = S(x) Q^-1 P(p) s S(p).  No letter atoms are needed.
    """

    def __init__(self, G: FiniteMonoid, prefix: str = ""):
        self.G = G
        self.inv = inverses(G)
        self.prefix = prefix

    def P(self, g: int, t: str) -> Formula:
        return Rel(f"{self.prefix}P_{g}", t)

    def S(self, g: int, t: str) -> Formula:
        return Rel(f"{self.prefix}S_{g}", t)

    def Q(self, g: int) -> Formula:
        return Bit(f"{self.prefix}Q_{g}")

    def names(self) -> tuple[list, list]:
        rels = [f"{self.prefix}P_{g}" for g in range(self.G.size)]
        rels += [f"{self.prefix}S_{g}" for g in range(self.G.size)]
        bits = [f"{self.prefix}Q_{g}" for g in range(self.G.size)]
        return rels, bits

    def _mul(self, *xs) -> int:
        return self.G.product(xs)

    def delta_left(self, d: int, s: int, y: str = CHANGE_VAR) -> Formula:
        """P(y) s S(y) Q^-1 = d."""
        G, inv = self.G, self.inv
        return Or(*[And(self.P(a, y), self.S(b, y), self.Q(q))
                    for a in range(G.size) for b in range(G.size) for q in range(G.size)
                    if self._mul(a, s, b, inv[q]) == d])

    def delta_right(self, e: int, s: int, y: str = CHANGE_VAR) -> Formula:
        """Q^-1 P(y) s S(y) = e."""
        G, inv = self.G, self.inv
        return Or(*[And(self.Q(q), self.P(a, y), self.S(b, y))
                    for a in range(G.size) for b in range(G.size) for q in range(G.size)
                    if self._mul(inv[q], a, s, b) == e])

    def new_P(self, h: int, s: int, t: str, y: str = CHANGE_VAR) -> Formula:
        G, inv = self.G, self.inv
        moved = Or(*[And(self.P(c, t), self.delta_left(self._mul(h, inv[c]), s, y))
                     for c in range(G.size)])
        return Or(And(Leq(t, y), self.P(h, t)), And(Lt(y, t), moved))

    def new_S(self, h: int, s: int, t: str, y: str = CHANGE_VAR) -> Formula:
        G, inv = self.G, self.inv
        moved = Or(*[And(self.S(c, t), self.delta_right(self._mul(inv[c], h), s, y))
                     for c in range(G.size)])
        return Or(And(Leq(y, t), self.S(h, t)), And(Lt(t, y), moved))

    def new_Q(self, h: int, s: int, y: str = CHANGE_VAR) -> Formula:
        G = self.G
        return Or(*[And(self.P(a, y), self.S(b, y))
                    for a in range(G.size) for b in range(G.size) if self._mul(a, s, b) == h])

    def updates(self, symbols: dict) -> dict:
        """Update formulas for each change symbol, ``symbols`` maps symbol -> value."""
        out = {}
        for sym, s in symbols.items():
            for g in range(self.G.size):
                out[(f"{self.prefix}P_{g}", sym)] = self.new_P(g, s, REL_VAR)
                out[(f"{self.prefix}S_{g}", sym)] = self.new_S(g, s, REL_VAR)
                out[(f"{self.prefix}Q_{g}", sym)] = self.new_Q(g, s)
        return out

    def initial(self) -> dict:
        rels, bits = self.names()
        one = self.G.identity
        return base_init(rels, bits, all_rel=(f"{self.prefix}P_{one}", f"{self.prefix}S_{one}"),
                         true_bits=(f"{self.prefix}Q_{one}",))

    def init_values(self, values: list) -> tuple[dict, dict]:
        G, n = self.G, len(values)
        pre = prefix_values(G, values)
        rels = {name: set() for name in self.names()[0]}
        for i in range(1, n + 1):
            rels[f"{self.prefix}P_{pre[i - 1]}"].add(i)
            s = G.product(values[i:])
            rels[f"{self.prefix}S_{s}"].add(i)
        bits = {f"{self.prefix}Q_{g}": g == pre[n] for g in range(G.size)}
        return rels, bits

    def explain(self) -> dict:
        out = {}
        for g in range(self.G.size):
            name = self.G.names[g]
            out[f"{self.prefix}P_{g}"] = f"positions i whose strict prefix evaluates to {name}"
            out[f"{self.prefix}S_{g}"] = f"positions i whose strict suffix evaluates to {name}"
            out[f"{self.prefix}Q_{g}"] = f"the whole word evaluates to {name}"
        return out


def build_group_program(gp: GroupPresentation, name: str = "group") -> DynamicProgram:
    G, phi = gp.group, gp.morphism
    gf = GroupFormulas(G)
    rels, bits = gf.names()
    symbols = {s: phi.letter(s) for s in phi.alphabet}
    symbols[EPS] = G.identity
    updates = gf.updates(symbols)
    initial = gf.initial()

    def initializer(word):
        return gf.init_values(word_values(phi, word))

    p = DynamicProgram(name, phi.alphabet, tuple(rels), tuple(bits), "Prop", updates,
                       query=f"Q_{G.identity}", padded=False, initial=initial,
                       initializer=initializer, explain=gf.explain())
    p.validate()
    if gp.accepting is not None:
        from .transforms import combine_disjunction
        p = combine_disjunction(p, gp.accepting)
    return p
