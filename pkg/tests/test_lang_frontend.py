import re
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynlang.fixtures import random_dfa
from dynlang.lang_frontend import (EPS, RegexSyntaxError, dfa_accepts, dfa_from_text,
                                   dfa_inverse_morphism, dfa_quotient, dfa_to_text,
                                   guess_alphabet, is_isomorphic, minimize, parse_regex,
                                   regex_dfa)

AB = ("a", "b")


def words(alpha, max_len):
    for k in range(max_len + 1):
        yield from product(alpha, repeat=k)


def to_python_re(src: str) -> str:
    return src.replace("+", "|").replace("1", "(?:)").replace("0", "(?!)")


regexes = st.recursive(
    st.sampled_from(["a", "b", "1", "0"]),
    lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: f"({t[0]}+{t[1]})"),
        st.tuples(inner, inner).map(lambda t: f"{t[0]}{t[1]}"),
        inner.map(lambda r: f"({r})*"),
    ),
    max_leaves=8,
)


@settings(max_examples=150, deadline=None)
@given(regexes)
def test_regex_dfa_matches_python_re(src):
    d = regex_dfa(src, AB)
    pat = re.compile(to_python_re(src))
    for w in words(AB, 6):
        assert dfa_accepts(d, w) == bool(pat.fullmatch("".join(w))), (src, w)


@settings(max_examples=60, deadline=None)
@given(regexes)
def test_minimal_dfa_has_no_equivalent_states(src):
    d = regex_dfa(src, AB)
    sigs = set()
    for q in range(d.size):
        sig = tuple(d.run(w, q) in d.accepting for w in words(AB, d.size))
        sigs.add(sig)
    assert len(sigs) == d.size


@pytest.mark.parametrize("seed", range(10))
def test_minimize_preserves_language_and_is_idempotent(seed):
    d = random_dfa(5, seed=seed)
    m = minimize(d)
    assert m.size <= d.size
    for w in words(AB, 6):
        assert dfa_accepts(d, w) == dfa_accepts(m, w)
    assert is_isomorphic(minimize(m), m)


def test_epsilon_positions_are_skipped():
    d = regex_dfa("(a+b)*aa(a+b)*", AB)
    assert dfa_accepts(d, ["a", EPS, EPS, "a"])
    assert not dfa_accepts(d, ["a", EPS, "b", "a"])


@pytest.mark.parametrize("src,pos", [("(ab", 0), ("ab)", 2), ("*a", 0), ("a+", 2), ("ac", 1)])
def test_syntax_errors_report_positions(src, pos):
    with pytest.raises(RegexSyntaxError) as e:
        parse_regex(src, AB)
    assert e.value.pos == pos


def test_guess_alphabet():
    assert guess_alphabet("(aa)*") == ["a"]
    assert guess_alphabet("b*") == ["a", "b"]


@pytest.mark.parametrize("src", ["(ab)*", "(a+b)*aa(a+b)*", "b*", "0", "1"])
def test_dfa_text_round_trip(src):
    d = regex_dfa(src, AB)
    assert is_isomorphic(dfa_from_text(dfa_to_text(d)), d)


@pytest.mark.parametrize("src", ["(ab)*", "(a+b)*aa(a+b)*", "b*", "(aa+b)*a"])
def test_inverse_morphism_against_definition(src):
    d = regex_dfa(src, AB)
    h = {"c": ("a", "b"), "d": ("a",), "e": ()}
    inv = dfa_inverse_morphism(d, h)
    for w in words(("c", "d", "e"), 5):
        image = [x for c in w for x in h[c]]
        assert dfa_accepts(inv, w) == dfa_accepts(d, image)


@pytest.mark.parametrize("src", ["(ab)*", "(a+b)*aa(a+b)*", "b*", "(aa+b)*a"])
@pytest.mark.parametrize("sym", AB)
def test_quotients_against_definition(src, sym):
    d = regex_dfa(src, AB)
    right, left = dfa_quotient(d, sym, "right"), dfa_quotient(d, sym, "left")
    for w in words(AB, 6):
        assert dfa_accepts(right, w) == dfa_accepts(d, w + (sym,))
        assert dfa_accepts(left, w) == dfa_accepts(d, (sym,) + w)


def test_right_quotient_of_b_star_by_a_is_empty():
    q = dfa_quotient(regex_dfa("b*", AB), "a", "right")
    assert not any(dfa_accepts(q, w) for w in words(AB, 6))
