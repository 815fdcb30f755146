"""Bundled programs and presentations used by the tests, demos and CLI."""

from __future__ import annotations

from importlib.resources import files

import numpy as np

from .dyn_engine import DynamicProgram, program_from_text
from .lang_frontend import Dfa, dfa_from_table, regex_dfa
from .monoid_core import (Morphism, OrderedMonoid, SemidirectAction, cyclic_group,
                          dfa_from_morphism, semidirect_product, symmetric_group3,
                          trivial_monoid, trivial_order, u1)

AB = ("a", "b")


def example1_text() -> str:
    return files("dynlang").joinpath("data/example1.dyn").read_text()


def example1_program() -> DynamicProgram:
    """Hand-written Sigma1 program for (a+b)*aa(a+b)*."""
    return program_from_text(example1_text())


# -- group presentations -------------------------------------------------------


def group_fixtures() -> dict:
    """name -> (GroupPresentation, oracle DFA)."""
    from .builders.group import GroupPresentation
    out = {}
    z2 = cyclic_group(2)
    phi = Morphism(("a",), z2, {"a": 1})
    out["Z2"] = GroupPresentation(z2, phi, frozenset({0}))
    z3 = cyclic_group(3)
    phi = Morphism(AB, z3, {"a": 1, "b": 2})
    out["Z3"] = GroupPresentation(z3, phi, frozenset({0}))
    s3 = symmetric_group3()
    # a is a transposition, b a 3-cycle; accept the even permutations
    a = s3.index("102")
    b = s3.index("120")
    phi = Morphism(AB, s3, {"a": a, "b": b})
    even = frozenset(s3.index(n) for n in ("012", "120", "201"))
    out["S3"] = GroupPresentation(s3, phi, even)
    return {k: (gp, dfa_from_morphism(gp.morphism, gp.accepting)) for k, gp in out.items()}


def z4_to_z2():
    """Z4 program (one generator) divided onto Z2 by reduction mod 2."""
    from .builders.group import GroupPresentation
    from .builders.transforms import DivisionWitness
    z4, z2 = cyclic_group(4), cyclic_group(2)
    phi = Morphism(("g", "g2", "g3"), z4, {"g": 1, "g2": 2, "g3": 3})
    gp = GroupPresentation(z4, phi, frozenset({0}))
    witness = DivisionWitness("quotient", z4, z2, (0, 1, 0, 1))
    return gp, witness


# -- ordered semidirect products -----------------------------------------------


def u1_plus() -> OrderedMonoid:
    """U1 = {1, a} ordered by 1 <= a."""
    return OrderedMonoid(u1(), [[True, True], [False, True]])


def semidirect_fixtures() -> dict:
    """name -> (SemidirectAction, upset)."""
    U, T, Z = u1_plus(), trivial_order(trivial_monoid()), trivial_order(cyclic_group(2))
    out = {}
    act = SemidirectAction(U, T, [[0, 1]])
    out["U1+ * 1"] = (act, _up(act, "a", "1"))
    act = SemidirectAction(T, Z, [[0], [0]])
    out["1 * Z2"] = (act, _up(act, "1", "1"))
    act = SemidirectAction(U, Z, [[0, 1], [0, 1]])
    out["U1+ * Z2"] = (act, _up(act, "a", "1"))
    return out


def _up(act: SemidirectAction, m: str, g: str) -> frozenset:
    prod = semidirect_product(act)
    e = act.pair(act.left.monoid.index(m), act.right.monoid.index(g))
    return frozenset(prod.upset_of([e]))


def semidirect_oracle(p: DynamicProgram) -> Dfa:
    sp = p.presentation
    return dfa_from_morphism(sp.morphism, sp.upset)


# -- monomials ---------------------------------------------------------------------


def monomial_fixtures() -> dict:
    """name -> (MonomialPresentation, oracle DFA)."""
    from .builders.monomial import monomial_presentation
    T, Z = trivial_monoid(), cyclic_group(2)
    mu_t = Morphism(AB, T, {"a": 0, "b": 0})
    mu_z = Morphism(AB, Z, {"a": 1, "b": 1})
    return {
        "S*aS*": (monomial_presentation(T, mu_t, [{0}, {0}], ["a"]),
                  regex_dfa("(a+b)*a(a+b)*", AB)),
        "EaE": (monomial_presentation(Z, mu_z, [{0}, {0}], ["a"]),
                regex_dfa("((a+b)(a+b))*a((a+b)(a+b))*", AB)),
        "b*": (monomial_presentation(T, mu_t, [{0}, {0}], ["a"], complemented=True),
               regex_dfa("b*", AB)),
    }


# -- random automata -----------------------------------------------------------------


def random_dfa(states: int, alphabet=AB, seed: int = 0) -> Dfa:
    rng = np.random.default_rng(seed)
    delta = rng.integers(states, size=(states, len(alphabet))).tolist()
    acc = [q for q in range(states) if rng.random() < 0.5] or [0]
    return dfa_from_table(alphabet, delta, 0, acc)


def small_random_dfas(count: int = 2, states: int = 4, max_monoid: int = 10,
                      seed: int = 0) -> list[tuple[int, Dfa]]:
    """Seeded random DFAs whose transition monoids stay small.

    The Sigma2 schema has 4 |J| |M|^2 relations, so larger monoids make the
    random trace checks slow; seeds are scanned in order until ``count``
    automata with a non-trivial monoid of at most ``max_monoid`` elements
    (and at least 3 minimal states) are found.
    """
    from .lang_frontend import minimize
    from .monoid_core import transition_monoid
    out = []
    s = seed
    while len(out) < count:
        d = random_dfa(states, seed=s)
        m = minimize(d)
        if m.size >= 3:
            mon, _ = transition_monoid(m)
            if mon.size <= max_monoid:
                out.append((s, d))
        s += 1
    return out


# -- wrong programs for the adversary ----------------------------------------------------

_WRONG_PROP = {
    # parity of the number of a's instead of "some a"
    "odd-a": """
program odd-a
fragment Prop
alphabet a b
bit q false
query q
update q a: (or (and (q) (Wo_a y)) (and (not (q)) (not (Wo_a y))))
update q b: (or (and (q) (not (Wo_a y))) (and (not (q)) (Wo_a y)))
update q eps: (or (and (q) (not (Wo_a y))) (and (not (q)) (Wo_a y)))
""",
    # remembers whether the last change wrote an a
    "last-a": """
program last-a
fragment Prop
alphabet a b
bit q false
query q
update q a: true
update q b: false
update q eps: false
""",
    # forgets every a as soon as one a is overwritten
    "forgetful": """
program forgetful
fragment Prop
alphabet a b
bit q false
query q
update q a: true
update q b: (and (q) (not (Wo_a y)))
update q eps: (and (q) (not (Wo_a y)))
""",
    # counts a's modulo 4 in two bits and accepts a nonzero count
    "mod4": """
program mod4
fragment Prop
alphabet a b
bit c0 false
bit c1 false
bit q false
query q
update c0 a: (or (and (c0) (Wo_a y)) (and (not (c0)) (not (Wo_a y))))
update c1 a: (or (and (c1) (or (Wo_a y) (not (c0)))) (and (not (c1)) (not (Wo_a y)) (c0)))
update c0 b: (or (and (c0) (not (Wo_a y))) (and (not (c0)) (Wo_a y)))
update c1 b: (or (and (c1) (or (not (Wo_a y)) (c0))) (and (not (c1)) (Wo_a y) (not (c0))))
update c0 eps: (or (and (c0) (not (Wo_a y))) (and (not (c0)) (Wo_a y)))
update c1 eps: (or (and (c1) (or (not (Wo_a y)) (c0))) (and (not (c1)) (Wo_a y) (not (c0))))
update q a: (or (and (Wo_a y) (or (c0) (c1))) (and (not (Wo_a y)) (not (and (c0) (c1)))))
update q b: (or (and (Wo_a y) (not (and (c0) (not (c1))))) (and (not (Wo_a y)) (or (c0) (c1))))
update q eps: (or (and (Wo_a y) (not (and (c0) (not (c1))))) (and (not (Wo_a y)) (or (c0) (c1))))
""",
}

_WRONG_SIGMA1PLUS = {
    "always": """
program always
fragment Sigma1+
alphabet a b
bit q true
query q
update q a: true
update q b: true
update q eps: true
""",
    # "some b" instead of "no a"
    "some-b": """
program some-b
fragment Sigma1+
alphabet a b
bit q true
query q
update q a: (exists p (W_b p))
update q b: (exists p (W_b p))
update q eps: (exists p (W_b p))
""",
    # trusts that removing one a removes all of them
    "optimist": """
program optimist
fragment Sigma1+
alphabet a b
bit q true
query q
update q a: false
update q b: (or (q) (Wo_a y))
update q eps: (or (q) (Wo_a y))
""",
    # tracks the positions written with b and accepts once every change was a b
    "b-marks": """
program b-marks
fragment Sigma1+
alphabet a b
relation B none
bit q true
query q
update B a: (and (B x) (< x y))
update B b: (or (B x) (= x y))
update B eps: (or (and (B x) (< x y)) (and (B x) (< y x)))
update q a: false
update q b: (or (q) (exists p (and (B p) (= p y))))
update q eps: (q)
""",
}


def wrong_prop_programs() -> dict:
    """Plausible but incorrect Prop programs that claim (a+b)*a(a+b)*."""
    return {k: program_from_text(v) for k, v in _WRONG_PROP.items()}


def wrong_sigma1plus_programs() -> dict:
    """Plausible but incorrect Sigma1+ programs that claim b*."""
    return {k: program_from_text(v) for k, v in _WRONG_SIGMA1PLUS.items()}
