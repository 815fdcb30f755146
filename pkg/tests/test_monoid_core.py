from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynlang.fixtures import semidirect_fixtures, u1_plus
from dynlang.lang_frontend import dfa_accepts, regex_dfa
from dynlang.monoid_core import (ActionAxiomError, AlgebraError, FiniteMonoid, SemidirectAction,
                                 cyclic_group, dfa_from_morphism, evaluate_word,
                                 find_u1_minus_divisor, find_u1_submonoid, green_relations,
                                 idempotent_power, is_ejplus, is_group, is_jplus,
                                 monoid_from_text, monoid_to_text, semidirect_product,
                                 symmetric_group3, syntactic_ordered_monoid, transition_monoid,
                                 trivial_order, u1, u2)

AB = ("a", "b")
LANGS = ["(aa)*", "(a+b)*a(a+b)*", "b*", "(a+b)*a", "(a+b)*aa(a+b)*", "(ab)*", "a*b*",
         "(a+b)*ab(a+b)*", "((a+b)(a+b)(a+b))*"]


def words(alpha, max_len):
    for k in range(max_len + 1):
        yield from product(alpha, repeat=k)


def rep(mon, x):
    """A word evaluating to element x (transition monoid names are words)."""
    name = mon.names[x]
    return () if name == "1" else tuple(name)


@pytest.mark.parametrize("src", LANGS)
def test_transition_monoid_evaluates_like_the_dfa(src):
    d = regex_dfa(src, AB)
    mon, phi = transition_monoid(d)
    for w in words(AB, 6):
        f = mon.functions[evaluate_word(phi, w)]
        assert all(f[q] == d.run(w, q) for q in range(d.size))
    # every element is reached by the word it is named after
    for x in range(mon.size):
        assert evaluate_word(phi, rep(mon, x)) == x


@pytest.mark.parametrize("src", LANGS)
def test_syntactic_order_against_word_contexts(src):
    d = regex_dfa(src, AB)
    om, phi, up = syntactic_ordered_monoid(d)
    mon = om.monoid
    ctx = list(words(AB, mon.size))
    for x, y in product(range(mon.size), repeat=2):
        want = all(dfa_accepts(d, u + rep(mon, y) + v)
                   for u in ctx for v in ctx if dfa_accepts(d, u + rep(mon, x) + v))
        assert bool(om.leq[x, y]) == want, (src, mon.names[x], mon.names[y])
    assert om.is_upset(up)


@pytest.mark.parametrize("src", LANGS)
def test_green_relations_against_definitions(src):
    mon, _ = transition_monoid(regex_dfa(src, AB))
    g = green_relations(mon)
    M = range(mon.size)
    for x, y in product(M, repeat=2):
        r = any(mon.mul(y, a) == x for a in M)
        l_ = any(mon.mul(a, y) == x for a in M)
        j = any(mon.mul(mon.mul(a, y), b) == x for a in M for b in M)
        assert g.leqR[x, y] == r and g.leqL[x, y] == l_ and g.leqJ[x, y] == j
        assert (g.R[x] == g.R[y]) == (r and any(mon.mul(x, a) == y for a in M))
        assert (g.H[x] == g.H[y]) == (g.R[x] == g.R[y] and g.L[x] == g.L[y])


@pytest.mark.parametrize("src", LANGS)
def test_idempotent_power(src):
    mon, _ = transition_monoid(regex_dfa(src, AB))
    for x in range(mon.size):
        e = idempotent_power(mon, x)
        assert mon.mul(e, e) == e
        p, powers = x, {x}
        for _ in range(mon.size):
            p = mon.mul(p, x)
            powers.add(p)
        assert e in powers


def test_group_and_order_classes_brute_force():
    for src in LANGS:
        om, _, _ = syntactic_ordered_monoid(regex_dfa(src, AB))
        mon = om.monoid
        one = mon.identity
        group = all(any(mon.mul(x, y) == one for y in range(mon.size)) for x in range(mon.size))
        assert is_group(mon) == group
        assert is_jplus(om) == all(om.leq[one, x] for x in range(mon.size))
        idem = [x for x in range(mon.size) if mon.mul(x, x) == x]
        assert is_ejplus(om) == all(om.leq[one, e] for e in idem)
        w = find_u1_minus_divisor(om)
        assert (w is None) == is_ejplus(om)


regexes = st.recursive(
    st.sampled_from(["a", "b"]),
    lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: f"({t[0]}+{t[1]})"),
        st.tuples(inner, inner).map(lambda t: f"{t[0]}{t[1]}"),
        inner.map(lambda r: f"({r})*"),
    ),
    max_leaves=6,
)


@settings(max_examples=80, deadline=None)
@given(regexes)
def test_verdicts_are_consistent(src):
    om, phi, up = syntactic_ordered_monoid(regex_dfa(src, AB))
    if is_group(om.monoid) or is_jplus(om):
        assert is_ejplus(om)
    # the morphism and upset recognize the language again
    d = regex_dfa(src, AB)
    back = dfa_from_morphism(phi, up)
    assert all(dfa_accepts(back, w) == dfa_accepts(d, w) for w in words(AB, 5))


def test_fixture_monoids():
    assert is_group(cyclic_group(4)) and is_group(symmetric_group3())
    assert not is_group(u1()) and not is_group(u2())
    assert find_u1_submonoid(cyclic_group(3)) is None
    assert find_u1_submonoid(u1()) == 1
    assert is_jplus(u1_plus())
    s3 = symmetric_group3()
    assert s3.size == 6 and len({s3.mul(x, y) == s3.mul(y, x) for x in range(6) for y in range(6)}) == 2


def test_constructor_rejects_bad_tables():
    with pytest.raises(AlgebraError):
        FiniteMonoid([[0, 1], [1, 0]], 1)  # 1 is not an identity
    with pytest.raises(AlgebraError):
        FiniteMonoid([[0, 1, 2], [1, 2, 0], [2, 1, 0]], 0)  # not associative


def test_action_axioms_are_checked():
    U, Z = u1_plus(), trivial_order(cyclic_group(2))
    with pytest.raises(ActionAxiomError):
        SemidirectAction(U, Z, [[0, 1], [1, 1]])  # the identity of Z2 must act trivially


@pytest.mark.parametrize("name", sorted(semidirect_fixtures()))
def test_semidirect_product_table_against_definition(name):
    act, up = semidirect_fixtures()[name]
    prod = semidirect_product(act)
    M, N = act.left.monoid, act.right.monoid
    for (x1, y1), (x2, y2) in product(product(range(M.size), range(N.size)), repeat=2):
        e = prod.monoid.mul(act.pair(x1, y1), act.pair(x2, y2))
        assert act.unpair(e) == (M.mul(x1, int(act.action[y1, x2])), N.mul(y1, y2))
    assert prod.is_upset(up)


def test_monoid_text_round_trip():
    om, _, _ = syntactic_ordered_monoid(regex_dfa("(ab)*", AB))
    mon2, om2 = monoid_from_text(monoid_to_text(om.monoid, om.leq))
    assert np.array_equal(mon2.mult, om.monoid.mult)
    assert np.array_equal(om2.leq, om.leq)
