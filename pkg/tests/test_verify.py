from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynlang.builders import build_group_program, build_sigma2_program
from dynlang.dyn_engine import ProgramError, program_from_text
from dynlang.fixtures import (_WRONG_PROP, group_fixtures, wrong_prop_programs,
                              wrong_sigma1plus_programs)
from dynlang.lang_frontend import dfa_accepts, regex_dfa
from dynlang.monoid_core import accepting_set, transition_monoid
from dynlang.verify import (embed, find_higman_pair, higman_adversary, parse_script,
                            random_verify, replay_script, substructure_trials)

AB = ("a", "b")

types = st.lists(st.sampled_from("xyz"), max_size=6)


def brute_embeds(small, large) -> bool:
    return any(all(large[i] == t for i, t in zip(idx, small))
               for idx in combinations(range(len(large)), len(small)))


@settings(max_examples=300, deadline=None)
@given(types, types)
def test_embed_matches_brute_force(small, large):
    pi = embed(small, large)
    assert (pi is not None) == brute_embeds(small, large)
    if pi is not None:
        assert all(a < b for a, b in zip(pi, pi[1:]))
        assert all(large[p - 1] == t for p, t in zip(pi, small))


@settings(max_examples=150, deadline=None)
@given(st.lists(types, min_size=2, max_size=6))
def test_higman_pair_is_the_smallest_sum_pair(seqs):
    got = find_higman_pair(seqs)
    pairs = [(a, b) for a in range(1, len(seqs) + 1) for b in range(a + 1, len(seqs) + 1)
             if brute_embeds(seqs[a - 1], seqs[b - 1])]
    if not pairs:
        assert got is None
    else:
        best = min(a + b for a, b in pairs)
        assert got is not None and got[0] + got[1] == best
        assert (got[0], got[1]) in pairs


def test_monotone_embedding_allows_more_relations():
    small = [("a", "a", frozenset({"R"}))]
    large = [("a", "a", frozenset({"R", "S"}))]
    assert embed(small, large, "monotone") == [1]
    assert embed(small, large, "exact") is None
    assert embed(large, small, "monotone") is None


def test_random_verify_is_reproducible_and_catches_errors():
    p = wrong_prop_programs()["odd-a"]
    d = regex_dfa("(a+b)*a(a+b)*", AB)
    r1 = random_verify(p, d, 8, 30, 5, seed=11)
    r2 = random_verify(p, d, 8, 30, 5, seed=11)
    assert not r1.passed
    assert r1.mismatches == r2.mismatches
    assert [rec["passed"] for rec in r1.records()] == [rec["passed"] for rec in r2.records()]


def test_random_verify_rejects_alphabet_mismatch():
    gp, _ = group_fixtures()["Z2"]
    with pytest.raises(ProgramError):
        random_verify(build_group_program(gp), regex_dfa("(ab)*", AB), 4, 4, 2)


def test_adversary_finds_nothing_against_a_correct_group_program():
    gp, d = group_fixtures()["Z2"]
    assert higman_adversary(build_group_program(gp), d, "a", "a") is None


@pytest.mark.parametrize("name", sorted(wrong_prop_programs()))
def test_exact_witnesses_replay(name):
    p = wrong_prop_programs()[name]
    d = regex_dfa("(a+b)*a(a+b)*", AB)
    w = higman_adversary(p, d, "a", "b", mode="exact")
    assert w is not None and w.replay(p)
    size, changes, expect = parse_script(w.to_script())
    assert (size, changes) == w.changes_for()
    bits, expect = replay_script(p, w.to_script())
    assert bits[-1] == w.reported != expect
    word = [c for c in w.word if c is not None]
    assert dfa_accepts(d, word) == expect


@pytest.mark.parametrize("name", sorted(wrong_sigma1plus_programs()))
def test_monotone_witnesses_replay(name):
    p = wrong_sigma1plus_programs()[name]
    w = higman_adversary(p, regex_dfa("b*", AB), "a", "b", mode="monotone")
    assert w is not None and w.replay(p)


def test_adversary_checks_the_fragment():
    p = wrong_sigma1plus_programs()["some-b"]
    with pytest.raises(ProgramError):
        higman_adversary(p, regex_dfa("b*", AB), "a", "b", mode="exact")
    d = regex_dfa("(ab)*", AB)
    mon, phi = transition_monoid(d)
    with pytest.raises(ProgramError):
        higman_adversary(build_sigma2_program(mon, phi, accepting_set(mon, d)), d, "a", "b",
                         mode="monotone")


def test_substructure_trials_hold_for_prop_and_flag_non_prop():
    gp, _ = group_fixtures()["S3"]
    rep = substructure_trials(build_group_program(gp), "exact", instances=1000, seed=3)
    assert rep.passed and rep.instances == 1000
    rep = substructure_trials(wrong_sigma1plus_programs()["b-marks"], "monotone",
                              instances=1000, seed=3)
    assert rep.passed
    # a program that lies about its fragment is caught by the exact check
    liar = program_from_text(_WRONG_PROP["odd-a"].replace(
        "update q a: (or (and (q) (Wo_a y)) (and (not (q)) (not (Wo_a y))))",
        "update q a: (exists p (and (W_a p) (< y p)))").replace("fragment Prop", "fragment Sigma1"),
        check=True)
    with pytest.raises(ProgramError):
        substructure_trials(liar, "exact", instances=10)
