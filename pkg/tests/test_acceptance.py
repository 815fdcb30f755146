"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import time
from itertools import product

import numpy as np

from dynlang.builders import (build_group_program, build_sigma1_monomial_program,
                              build_sigma1plus_program, build_sigma2_program,
                              transform_division, transform_inverse_morphism,
                              transform_quotient)
from dynlang.builders.sigma2 import Sigma2Builder
from dynlang.builders.common import word_values
from dynlang.cli import classify
from dynlang.dyn_engine import CHANGE_VAR, REL_VAR
from dynlang.fixtures import (example1_program, group_fixtures, monomial_fixtures,
                              semidirect_fixtures, semidirect_oracle, small_random_dfas,
                              wrong_prop_programs, wrong_sigma1plus_programs, z4_to_z2)
from dynlang.lang_frontend import (dfa_accepts, dfa_inverse_morphism, dfa_quotient,
                                   guess_alphabet, regex_dfa)
from dynlang.logic import EvalContext, check_fragment
from dynlang.monoid_core import (Morphism, accepting_set, cyclic_group, dfa_from_morphism,
                                 semidirect_product, syntactic_ordered_monoid, transition_monoid,
                                 u1, u2, unfold_semidirect)
from dynlang.verify import higman_adversary, random_verify, replay_script, substructure_trials

# the common verification regime
N, STEPS, TRIALS, SEED = 16, 200, 50, 2024
AB = ["a", "b"]

GOLDEN = [
    # regex, alphabet, expected verdicts
    ("(aa)*", ["a"], {"monoid": "Z2", "group": True}),
    ("(a+b)*a(a+b)*", AB, {"monoid": "U1", "group": False, "ordered": "U1+", "jplus": True}),
    ("b*", AB, {"monoid": "U1", "ordered": "U1-", "ejplus": False}),
    ("(a+b)*a", AB, {"monoid": "U2", "a R b": True, "a L b": False}),
    ("(a+b)*aa(a+b)*", AB, {"group": False, "jplus": False, "ejplus": True}),
    ("(ab)*", AB, {"ejplus": False}),
]


def _verdict(c, key):
    if " " in key:
        a, kind, b = key.split()
        return f"{a} {kind} {b}" in c.letter_relations
    return getattr(c, key)


def _fragment_ok(p, tag=None) -> bool:
    return all(check_fragment(f, tag or p.fragment).ok for f in p.updates.values())


def _unary(p) -> bool:
    """Relation updates have free variables within {x, y}, bit updates within {y}."""
    rels = set(p.relations)
    for (target, _), f in p.updates.items():
        allowed = {REL_VAR, CHANGE_VAR} if target in rels else {CHANGE_VAR}
        if not f.free <= allowed:
            return False
    return True


def test_criterion_1_classification_golden(report):
    t0 = time.perf_counter()
    wrong = []
    for src, alpha, want in GOLDEN:
        c = classify(src, alpha)
        for key, val in want.items():
            got = _verdict(c, key)
            if got != val:
                wrong.append(f"{src}: {key} expected {val}, got {got}")
    elapsed = time.perf_counter() - t0
    ok = not wrong and elapsed < 1.0
    report("criterion 1", ok, f"{len(GOLDEN)} languages in {elapsed:.2f}s; "
           + ("; ".join(wrong) if wrong else "all verdicts match"))
    assert elapsed < 1.0
    assert not wrong, wrong


def _sigma2_corpus():
    out = [(src, regex_dfa(src, alpha)) for src, alpha, _ in GOLDEN]
    out += [("a(a+b)*", regex_dfa("a(a+b)*", AB)), ("(aaa)*", regex_dfa("(aaa)*", ["a"]))]
    out += [(f"random DFA seed {s}", d) for s, d in small_random_dfas(2, states=4)]
    return out


def test_criterion_2_sigma2_corpus(report):
    t0 = time.perf_counter()
    bad = []
    corpus = _sigma2_corpus()
    for label, d in corpus:
        mon, phi = transition_monoid(d)
        p = build_sigma2_program(mon, phi, accepting_set(mon, d), name=label)
        rep = random_verify(p, d, N, STEPS, TRIALS, seed=SEED)
        if not rep.passed:
            bad.append(rep.summary())
        if not _fragment_ok(p, "Sigma2"):
            bad.append(f"{label}: fragment")
        if not _unary(p):
            bad.append(f"{label}: non-unary update")
    elapsed = time.perf_counter() - t0
    ok = not bad and len(corpus) >= 10 and elapsed < 300
    report("criterion 2", ok, f"{len(corpus)} languages, {elapsed:.1f}s; "
           + ("; ".join(bad) if bad else "0 mismatches, all Sigma2, all unary"))
    assert len(corpus) >= 10
    assert not bad, bad
    assert elapsed < 300


def _group_programs():
    out = {}
    for name, (gp, d) in group_fixtures().items():
        out[name] = (build_group_program(gp, name=name), d)
    gp, w = z4_to_z2()
    q = transform_division(build_group_program(gp, name="Z4"), w)
    out["Z4->Z2"] = (q, dfa_from_morphism(Morphism(q.alphabet, w.target, {"g": 1}), {0}))
    return out


def test_criterion_3_group_programs(report):
    bad = []
    progs = _group_programs()
    for name, (p, d) in progs.items():
        rep = random_verify(p, d, N, STEPS, TRIALS, seed=SEED)
        if not rep.passed:
            bad.append(rep.summary())
        if p.fragment != "Prop" or not _fragment_ok(p, "Prop"):
            bad.append(f"{name}: not Prop")
    report("criterion 3", not bad, f"{sorted(progs)}; " + ("; ".join(bad) or "0 mismatches, all Prop"))
    assert not bad, bad


def _adversary_round(programs, claimed, mode):
    lines, bad = [], []
    for name, p in programs.items():
        w = higman_adversary(p, claimed, "a", "b", mode=mode)
        if w is None:
            bad.append(f"{name}: no witness")
            continue
        bits, expect = replay_script(p, w.to_script())
        final_word = [c for c in w.word if c is not None]
        truth = dfa_accepts(claimed, final_word)
        confirmed = w.replay(p) and expect == truth and bits[-1] != truth
        if not confirmed:
            bad.append(f"{name}: witness does not replay")
        lines.append(f"{name}(n={w.n},m={w.m})")
    return lines, bad


def test_criterion_4_prop_adversary(report):
    progs = wrong_prop_programs()
    lines, bad = _adversary_round(progs, regex_dfa("(a+b)*a(a+b)*", AB), "exact")
    ok = not bad and len(progs) >= 3
    report("criterion 4", ok, f"{len(lines)} witnesses: {', '.join(lines)}"
           + (f"; {'; '.join(bad)}" if bad else ""))
    assert len(progs) >= 3
    assert not bad, bad


def _semidirect_programs():
    out = {}
    for name, (act, up) in semidirect_fixtures().items():
        p = build_sigma1plus_program(act, up, name=name)
        out[name] = (p, semidirect_oracle(p))
    return out


def test_criterion_5_sigma1plus_programs(report):
    bad = []
    progs = _semidirect_programs()
    for name, (p, d) in progs.items():
        rep = random_verify(p, d, N, STEPS, TRIALS, seed=SEED)
        if not rep.passed:
            bad.append(rep.summary())
        if p.fragment != "Sigma1+" or not _fragment_ok(p, "Sigma1+"):
            bad.append(f"{name}: not Sigma1+")
    report("criterion 5", not bad, f"{sorted(progs)}; " + ("; ".join(bad) or "0 mismatches, all Sigma1+"))
    assert not bad, bad


def test_criterion_6_monotone_adversary(report):
    progs = wrong_sigma1plus_programs()
    lines, bad = _adversary_round(progs, regex_dfa("b*", AB), "monotone")
    ok = not bad and len(progs) >= 3
    report("criterion 6", ok, f"{len(lines)} witnesses: {', '.join(lines)}"
           + (f"; {'; '.join(bad)}" if bad else ""))
    assert len(progs) >= 3
    assert not bad, bad


def _transform_cases():
    sources = {**_group_programs(), **_semidirect_programs()}
    for name, (p, d) in sources.items():
        a, b = p.alphabet[0], p.alphabet[-1]
        h = {"c": (a, b), "d": (b,), "e": ()}
        yield f"{name} inverse", p, transform_inverse_morphism(p, h), dfa_inverse_morphism(d, h)
        for side in ("left", "right"):
            yield (f"{name} {side} quotient", p, transform_quotient(p, a, side),
                   dfa_quotient(d, a, side))


def test_criterion_7_closure_transformers(report):
    bad, count = [], 0
    for label, src, p, d in _transform_cases():
        count += 1
        rep = random_verify(p, d, N, STEPS, TRIALS, seed=SEED)
        if not rep.passed:
            bad.append(f"{label}: {rep.summary()}")
        if p.fragment != src.fragment or not _fragment_ok(p, src.fragment):
            bad.append(f"{label}: left {src.fragment}")
    report("criterion 7", not bad, f"{count} transformed programs; "
           + ("; ".join(bad) or "0 mismatches, fragments kept"))
    assert not bad, bad


def test_criterion_8_monomials(report):
    bad = []
    fx = monomial_fixtures()
    for name, (mp, d) in fx.items():
        p = build_sigma1_monomial_program(mp, name=name)
        rep = random_verify(p, d, N, STEPS, TRIALS, seed=SEED)
        if not rep.passed:
            bad.append(rep.summary())
        if not _fragment_ok(p, "Sigma1"):
            bad.append(f"{name}: not Sigma1")
        if name == "b*" and _fragment_ok(p, "Sigma1+"):
            bad.append("b*: unexpectedly Sigma1+")
    report("criterion 8", not bad, f"{sorted(fx)}; "
           + ("; ".join(bad) or "0 mismatches, Sigma1, b* outside Sigma1+"))
    assert not bad, bad


def _psi_matches(m, phi, rng, words: int = 6, n_max: int = 12) -> list[str]:
    bld = Sigma2Builder(m, phi)
    bad = []
    for _ in range(words):
        n = int(rng.integers(1, n_max + 1))
        word = [phi.alphabet[k] for k in rng.integers(len(phi.alphabet), size=n)]
        rels, _ = bld.init_values(word_values(phi, word))
        letters = np.zeros((1, n + 2), dtype=np.int64)
        letters[0, 1:n + 1] = [phi.alphabet.index(c) + 1 for c in word]
        arrs = {}
        for name, pos in rels.items():
            arr = np.zeros((1, n + 2), dtype=bool)
            arr[0, sorted(pos)] = True
            arrs[name] = arr
        ctx = EvalContext(phi.alphabet, letters, letters, arrs, {}, {}, 0, n + 1)
        g = [m.identity] + word_values(phi, word) + [m.identity]
        for v in range(m.size):
            got = ctx.result(bld.psi(v, "a", "b"), ("a", "b"))[0]
            for j, k in product(range(n + 2), repeat=2):
                want = j < k and m.product(g[j + 1:k]) == v
                if bool(got[j, k]) != want:
                    bad.append(f"{word} v={m.names[v]} (j,k)=({j},{k})")
    return bad


def test_criterion_9_engine_meta_properties(report):
    lines, bad = [], []
    # substructure property: exact on Prop programs, monotone on Sigma1+ programs
    z2 = _group_programs()["Z2"][0]
    s1 = _semidirect_programs()["U1+ * Z2"][0]
    for p, mode in ((z2, "exact"), (s1, "monotone")):
        r = substructure_trials(p, mode, instances=10_000, n_max=12, seed=SEED)
        lines.append(f"{mode} {r.instances} instances {r.violations} violations")
        if not r.passed or r.instances < 10_000:
            bad.append(f"{p.name} {mode}: {r.violations} violations")
    # infix formulas against brute-force folds
    rng = np.random.default_rng(SEED)
    ab_om, ab_phi, _ = syntactic_ordered_monoid(regex_dfa("(ab)*", AB))
    monoids = [("U1", Morphism(("a", "b"), u1(), {"a": 1, "b": 0})),
               ("U2", Morphism(("a", "b"), u2(), {"a": 1, "b": 2})),
               ("Z2", Morphism(("a",), cyclic_group(2), {"a": 1})),
               ("(ab)*", ab_phi)]
    for label, phi in monoids:
        miss = _psi_matches(phi.target, phi, rng)
        if miss:
            bad.append(f"psi over {label}: {miss[:3]}")
    lines.append(f"psi checked over {[m for m, _ in monoids]}")
    # semidirect unfolding against the product table
    checked = 0
    for name, (act, _) in semidirect_fixtures().items():
        prod = semidirect_product(act).monoid
        M, G = act.left.monoid, act.right.monoid
        elems = list(product(range(M.size), range(G.size)))
        for k in range(6):
            for seq in product(elems, repeat=k):
                checked += 1
                want = act.unpair(prod.product([act.pair(x, y) for x, y in seq]))
                if unfold_semidirect(act, seq) != want:
                    bad.append(f"unfold {name} {seq}")
    lines.append(f"{checked} semidirect sequences")
    report("criterion 9", not bad, "; ".join(lines) + ("; " + "; ".join(bad[:5]) if bad else ""))
    assert not bad, bad


def test_criterion_10_example1(report):
    p = example1_program()
    d = regex_dfa("(a+b)*aa(a+b)*", guess_alphabet("(a+b)*aa(a+b)*"))
    frag = _fragment_ok(p, "Sigma1")
    rep = random_verify(p, d, N, STEPS, TRIALS, seed=SEED)
    ok = frag and rep.passed and p.fragment == "Sigma1"
    report("criterion 10", ok, f"fragment Sigma1 {'ok' if frag else 'violated'}; {rep.summary()}")
    assert frag
    assert rep.passed, rep.summary()
