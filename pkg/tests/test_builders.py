from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynlang.builders import (DivisionWitness, build_group_program, build_sigma2_program,
                              combine_disjunction, minimal_subwords, sigma1plus_upset_formula,
                              transform_division, transform_inverse_morphism,
                              transform_quotient)
from dynlang.builders.common import word_values
from dynlang.builders.group import GroupPresentation
from dynlang.builders.monomial import monomial_accepts
from dynlang.builders.sigma1plus import (UpwardClosureError, is_subword,
                                         minimal_words_in_upset)
from dynlang.builders.sigma2 import Sigma2Builder, j_fall_decomposition
from dynlang.dyn_engine import ProgramError
from dynlang.fixtures import group_fixtures, monomial_fixtures, u1_plus
from dynlang.lang_frontend import dfa_accepts, regex_dfa
from dynlang.logic import eval_formula
from dynlang.monoid_core import (Morphism, OrderedMonoid, accepting_set, cyclic_group,
                                 dfa_from_morphism, direct_product, green_relations,
                                 syntactic_ordered_monoid, transition_monoid, u1, u2)
from dynlang.verify import random_verify

AB = ("a", "b")


def words(alpha, max_len):
    for k in range(max_len + 1):
        yield from product(alpha, repeat=k)


# -- minimal subwords ---------------------------------------------------------------


@pytest.mark.parametrize("src", ["(a+b)*a(a+b)*", "(a+b)*a(a+b)*b(a+b)*",
                                 "(a+b)*a(a+b)*a(a+b)*+(a+b)*b(a+b)*", "(a+b)*"])
def test_minimal_subwords_against_brute_force(src):
    d = regex_dfa(src, AB)
    got = set(minimal_subwords(d))
    members = [w for w in words(AB, 6) if dfa_accepts(d, w)]
    want = {w for w in members if not any(u != w and is_subword(u, w) for u in members)}
    assert got == want
    # the minimal words generate the language
    for w in words(AB, 6):
        assert dfa_accepts(d, w) == any(is_subword(u, w) for u in got)


def test_minimal_subwords_rejects_non_upward_closed():
    with pytest.raises(UpwardClosureError) as e:
        minimal_subwords(regex_dfa("b*", AB))
    assert e.value.member == ()


def test_minimal_words_in_upset_u1_squared():
    # U1 x U1 ordered componentwise with 1 below everything
    m = direct_product(u1(), u1())
    leq = np.array([[all(int(a) <= int(b) for a, b in zip(divmod(x, 2), divmod(y, 2)))
                     for y in range(4)] for x in range(4)])
    om = OrderedMonoid(m, leq)
    top = 3
    got = set(minimal_words_in_upset(om, {top}))
    letters = [x for x in range(4) if x != m.identity]
    members = [w for w in words(letters, 3) if m.product(w) == top]
    want = {w for w in members if not any(u != w and is_subword(u, w) for u in members)}
    assert got == want


def test_minimal_words_need_jplus():
    om, _, up = syntactic_ordered_monoid(regex_dfa("b*", AB))
    with pytest.raises(ProgramError):
        minimal_words_in_upset(om, up)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([None, "a", "b"]), min_size=1, max_size=7))
def test_upset_formula_detects_subwords(word):
    minimal = [("a", "b"), ("b", "b", "a")]
    f = sigma1plus_upset_formula(minimal)
    letters = [c for c in word if c is not None]
    assert eval_formula(f, word, {}, alphabet=list(AB)) == any(is_subword(u, letters)
                                                                for u in minimal)


# -- Sigma2 semantics ---------------------------------------------------------------


@pytest.mark.parametrize("src", ["(ab)*", "(a+b)*a", "b*"])
def test_sigma2_relation_semantics_against_definition(src):
    mon, phi = transition_monoid(regex_dfa(src, AB))
    bld = Sigma2Builder(mon, phi)
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(0, 7))
        vals = word_values(phi, [AB[k] for k in rng.integers(2, size=n)])
        g = [mon.identity] + vals + [mon.identity]
        for J in bld.jclasses:
            for yv in bld.elements():
                if not bld.geq(yv, J):
                    continue
                got = bld.values("R", J, yv, vals)
                for j in range(n + 2):
                    ks = [k for k in range(j, n + 2) if bld.geq(mon.product([yv] + g[j + 1:k + 1]), J)]
                    assert got[j] == mon.product(g[j + 1:max(ks) + 1])


@pytest.mark.parametrize("src", ["(ab)*", "(a+b)*aa(a+b)*", "a*b*"])
def test_j_fall_decomposition(src):
    mon, phi = transition_monoid(regex_dfa(src, AB))
    gd = green_relations(mon)
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        vals = word_values(phi, [AB[k] for k in rng.integers(2, size=n)])
        for j in range(1, n + 1):
            cuts = j_fall_decomposition(mon, vals, j)
            assert cuts[0] == j and cuts[-1] == n + 1
            classes = {k: int(gd.J[mon.product(vals[j - 1:k])]) for k in range(j, n + 1)}
            changes = [k for k in range(j + 1, n + 1) if classes[k] != classes[k - 1]]
            assert cuts[1:-1] == changes


@pytest.mark.parametrize("phi", [Morphism(AB, u2(), {"a": 1, "b": 2}),
                                 Morphism(("a",), cyclic_group(3), {"a": 1})])
def test_sigma2_program_small_monoids(phi):
    p = build_sigma2_program(phi.target, phi, {phi.target.identity})
    d = dfa_from_morphism(phi, {phi.target.identity})
    assert random_verify(p, d, 10, 60, 20, seed=7).passed


# -- groups and combinators ---------------------------------------------------------


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3"])
def test_group_program_element_bits(name):
    gp, _ = group_fixtures()[name]
    p = build_group_program(gp, name)
    G = gp.group
    rng = np.random.default_rng(3)
    for v in range(G.size):
        q = combine_disjunction(p, {v}, query="only")
        d = dfa_from_morphism(gp.morphism, {v})
        assert random_verify(q, d, 8, 40, 10, seed=int(rng.integers(100))).passed


def test_division_witness_is_checked():
    z4, z2 = cyclic_group(4), cyclic_group(2)
    with pytest.raises(ProgramError):
        DivisionWitness("quotient", z4, z2, (0, 1, 1, 0)).verify()
    with pytest.raises(ProgramError):
        DivisionWitness("embedding", z4, z2, (0, 1)).verify()
    DivisionWitness("embedding", z4, z2, (0, 2)).verify()


def test_division_by_embedding():
    z4, z2 = cyclic_group(4), cyclic_group(2)
    gp = GroupPresentation(z4, Morphism(("g", "g2", "g3"), z4, {"g": 1, "g2": 2, "g3": 3}))
    p = transform_division(build_group_program(gp), DivisionWitness("embedding", z4, z2, (0, 2)))
    d = dfa_from_morphism(Morphism(p.alphabet, z2, {"g": 1}), {0})
    assert random_verify(p, d, 10, 80, 20).passed
    assert p.fragment == "Prop"


# -- monomials ----------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(monomial_fixtures()))
def test_monomial_semantics_match_oracle(name):
    mp, d = monomial_fixtures()[name]
    for w in words(AB, 7):
        assert monomial_accepts(mp, w) == dfa_accepts(d, w)


# -- transformers ---------------------------------------------------------------------


def test_transformers_reject_sigma2_sources():
    mon, phi = transition_monoid(regex_dfa("(ab)*", AB))
    p = build_sigma2_program(mon, phi, accepting_set(mon, regex_dfa("(ab)*", AB)))
    with pytest.raises(ProgramError):
        transform_quotient(p, "a", "right")
    with pytest.raises(ProgramError):
        transform_inverse_morphism(p, {"c": ("a",)})


def test_inverse_morphism_example_c_to_aa():
    gp, _ = group_fixtures()["Z2"]
    p = transform_inverse_morphism(build_group_program(gp), {"c": ("a", "a")})
    # h(c) = aa, so every word over c maps into (aa)*
    assert random_verify(p, regex_dfa("c*", ["c"]), 8, 60, 10).passed


def test_u1_plus_fixture_is_ordered_as_expected():
    om = u1_plus()
    assert om.leq[0, 1] and not om.leq[1, 0]
