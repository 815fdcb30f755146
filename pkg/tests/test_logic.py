import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynlang.logic import (And, Bit, Eq, Exists, FormulaError, Forall, Leq, Lt, Not, Or, Rel, W,
                           Wo, check_fragment, eval_formula, eval_naive, is_prenex, nnf,
                           parse_sexpr, prenex, quantifier_prefix, substitute, to_sexpr)

VARS = ("x", "y", "z")

atoms = st.one_of(
    st.builds(W, st.sampled_from(["a", "b"]), st.sampled_from(VARS)),
    st.builds(Wo, st.sampled_from(["a", "b"]), st.sampled_from(VARS)),
    st.builds(Rel, st.sampled_from(["R", "S"]), st.sampled_from(VARS)),
    st.builds(Bit, st.sampled_from(["q"])),
    st.builds(Leq, st.sampled_from(VARS), st.sampled_from(VARS)),
    st.builds(Eq, st.sampled_from(VARS), st.sampled_from(VARS)),
)

formulas = st.recursive(atoms, lambda inner: st.one_of(
    st.builds(Not, inner),
    st.builds(And, inner, inner),
    st.builds(Or, inner, inner),
    st.builds(Exists, st.sampled_from(VARS), inner),
    st.builds(Forall, st.sampled_from(VARS), inner),
), max_leaves=8)

letters = st.sampled_from([None, "a", "b"])


@st.composite
def structures(draw):
    n = draw(st.integers(1, 5))
    word = draw(st.lists(letters, min_size=n, max_size=n))
    old = draw(st.lists(letters, min_size=n, max_size=n))
    rels = {r: set(draw(st.lists(st.integers(1, n), max_size=n))) for r in ("R", "S")}
    bits = {"q": draw(st.booleans())}
    env = {v: draw(st.integers(1, n)) for v in VARS}
    return n, word, old, rels, bits, env


@settings(max_examples=300, deadline=None)
@given(formulas, structures())
def test_vectorized_evaluator_matches_naive(f, s):
    n, word, old, rels, bits, env = s
    aux = {"relations": rels, "bits": bits, "old": old}
    env = {v: env[v] for v in f.free}
    got = eval_formula(f, word, aux, env, alphabet=["a", "b"])
    want = eval_naive(f, [None] + word + [None], [None] + old + [None], rels, bits, env, 1, n)
    assert got == want


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_sexpr_round_trip_is_identity(f):
    assert parse_sexpr(to_sexpr(f)) is f


@settings(max_examples=200, deadline=None)
@given(formulas, structures())
def test_nnf_and_prenex_preserve_meaning(f, s):
    n, word, old, rels, bits, env = s
    aux = {"relations": rels, "bits": bits, "old": old}
    env = {v: env[v] for v in f.free}
    want = eval_formula(f, word, aux, env, alphabet=["a", "b"])
    assert eval_formula(nnf(f), word, aux, env, alphabet=["a", "b"]) == want
    assert eval_formula(prenex(f), word, aux, env, alphabet=["a", "b"]) == want


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_fragment_check_is_sound_for_the_prenex_form(f):
    g = prenex(f)
    prefix, _ = quantifier_prefix(g)
    kinds = [q for q, _ in prefix]
    assert is_prenex(g)
    if check_fragment(f, "Prop").ok:
        assert not kinds
    if check_fragment(f, "Sigma1").ok:
        assert all(q == "∃" for q in kinds)
    if check_fragment(f, "Sigma2").ok and "∀" in kinds:
        assert "∃" not in kinds[kinds.index("∀"):]


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_positive_fragments_forbid_negated_atoms(f):
    g = nnf(f)
    bad = False
    stack = [g]
    while stack:
        h = stack.pop()
        if h.kind == "not" and h.args[0].kind != "leq":
            bad = True
        if h.kind not in ("letter", "old", "rel", "bit", "leq", "eq", "true", "false"):
            stack.extend(a for a in h.args if not isinstance(a, str))
    if check_fragment(f, "Sigma2").ok:
        assert check_fragment(f, "Sigma2+").ok == (not bad)


def test_fragment_examples():
    x, y = "x", "y"
    assert check_fragment(Lt(x, y), "Prop+").ok  # strict order is a negated <=
    assert not check_fragment(Not(Eq(x, y)), "Prop+").ok
    assert not check_fragment(Not(W("a", x)), "Sigma1+").ok
    assert check_fragment(Exists("z", And(Rel("R", "z"), Lt("z", x))), "Sigma1+").ok
    assert not check_fragment(Not(Exists("z", Rel("R", "z"))), "Sigma1").ok
    assert check_fragment(Not(Exists("z", Rel("R", "z"))), "Sigma2").ok
    assert not check_fragment(Forall("z", Exists("u", Leq("z", "u"))), "Sigma2").ok


def test_substitute_avoids_capture():
    f = Exists("y", And(Rel("R", "x"), Leq("x", "y")))
    g = substitute(f, {"x": "y"})
    assert g.free == frozenset({"y"})
    # the result still says: R(y) and some position is at or after y
    for pos in range(1, 4):
        aux = {"relations": {"R": {pos}}}
        assert eval_formula(g, ["a"] * 3, aux, {"y": pos}, alphabet=["a"])


def test_parse_errors_and_unbound_variables():
    with pytest.raises(FormulaError):
        parse_sexpr("(and (W_a x)")
    with pytest.raises(FormulaError):
        eval_formula(W("a", "x"), ["a"], {}, {})


def test_macros_expand():
    macros = {"P": (("v",), parse_sexpr("(or (W_a v) (R v))"))}
    f = parse_sexpr("(exists z (@P z))", macros)
    assert f is Exists("z", Or(W("a", "z"), Rel("R", "z")))
