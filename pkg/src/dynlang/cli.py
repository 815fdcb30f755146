"""Command line: classify, build, run, verify, adversary, replay.

Exit codes: 0 success or pass, 1 verification failure or witness found,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from itertools import permutations

import numpy as np

from .dyn_engine import (init_batch, load_program, parse_changes, parse_sym,
                         program_to_text, step, sym_name)
from .lang_frontend import (Dfa, dfa_from_text, dfa_inverse_morphism, dfa_to_text,
                            dfa_quotient, guess_alphabet, regex_dfa)
from .monoid_core import (AlgebraError, OrderedMonoid, cyclic_group, find_u1_minus_divisor,
                          green_relations, is_ejplus, is_group, is_jplus, symmetric_group3,
                          syntactic_ordered_monoid, trivial_monoid, u1, u2)

TIER_PROP = "UDynProp"
TIER_SIGMA1PLUS = "UDynΣ₁⁺ (given presentation)"
TIER_SIGMA2 = "UDynΣ₂"


class UsageError(Exception):
    pass


# -- classification ------------------------------------------------------------------


def _catalog():
    out = [("1", trivial_monoid()), ("U1", u1()), ("U2", u2()), ("S3", symmetric_group3())]
    out += [(f"Z{k}", cyclic_group(k)) for k in range(2, 7)]
    return out


def _iso_map(m1, m2) -> dict | None:
    if m1.size != m2.size:
        return None
    rest = [x for x in range(m1.size) if x != m1.identity]
    orest = [x for x in range(m2.size) if x != m2.identity]
    for perm in permutations(orest):
        f = {m1.identity: m2.identity, **dict(zip(rest, perm))}
        if all(f[int(m1.mult[x, y])] == m2.mult[f[x], f[y]]
               for x in range(m1.size) for y in range(m1.size)):
            return f
    return None


def monoid_name(om: OrderedMonoid) -> tuple[str, str]:
    """Catalog name of the monoid, and of the ordered monoid when it is a U1."""
    mon = om.monoid
    for name, ref in _catalog():
        if ref.size != mon.size:
            continue
        if _iso_map(mon, ref) is None:
            continue
        if name != "U1":
            return name, name
        one, zero = mon.identity, 1 - mon.identity
        if om.leq[one, zero]:
            return name, "U1+"
        if om.leq[zero, one]:
            return name, "U1-"
        return name, "U1"
    return f"M{mon.size}", f"M{mon.size}"


@dataclass
class Classification:
    regex: str
    alphabet: list
    dfa_states: int
    monoid_size: int
    monoid: str
    ordered: str
    letters: dict
    group: bool
    jplus: bool
    ejplus: bool
    tier: str
    letter_relations: list = field(default_factory=list)
    ejplus_witness: str | None = None

    def lines(self) -> list[str]:
        yn = {True: "yes", False: "no"}
        out = [f"language: {self.regex} over {{{', '.join(self.alphabet)}}}",
               f"minimal DFA states: {self.dfa_states}",
               f"syntactic monoid: {self.monoid} ({self.monoid_size} elements), ordered {self.ordered}",
               "letters: " + ", ".join(f"{a} -> {v}" for a, v in self.letters.items()),
               f"group: {yn[self.group]}",
               f"J+: {yn[self.jplus]}",
               f"EJ+: {yn[self.ejplus]}"]
        if self.ejplus_witness is not None:
            out.append(f"idempotent not above 1: {self.ejplus_witness}")
        out += [f"green: {r}" for r in self.letter_relations]
        out.append(f"tier: {self.tier}")
        return out


def tier_of(group: bool, ejplus: bool) -> str:
    if group:
        return TIER_PROP
    if ejplus:
        return TIER_SIGMA1PLUS
    return TIER_SIGMA2


def classify(src: str, alphabet=None) -> Classification:
    alphabet = list(alphabet) if alphabet else guess_alphabet(src)
    d = regex_dfa(src, alphabet)
    return classify_dfa(d, src)


def classify_dfa(d: Dfa, label: str = "dfa") -> Classification:
    om, phi, _ = syntactic_ordered_monoid(d)
    mon = om.monoid
    g, jp, ej = is_group(mon), is_jplus(om), is_ejplus(om)
    if (g and not ej) or (jp and not ej):
        raise AlgebraError(f"inconsistent verdicts: group={g} J+={jp} EJ+={ej}")
    gd = green_relations(mon)
    rels = []
    letters = list(phi.alphabet)
    for i, a in enumerate(letters):
        for b in letters[i + 1:]:
            x, y = phi.letter(a), phi.letter(b)
            for kind in ("R", "L", "J", "H"):
                vec = getattr(gd, kind)
                sign = "" if vec[x] == vec[y] else "not "
                rels.append(f"{sign}{a} {kind} {b}")
    e = find_u1_minus_divisor(om)
    name, oname = monoid_name(om)
    return Classification(
        regex=label, alphabet=letters, dfa_states=d.size, monoid_size=mon.size, monoid=name,
        ordered=oname, letters={a: mon.names[phi.letter(a)] for a in letters}, group=g,
        jplus=jp, ejplus=ej, tier=tier_of(g, ej), letter_relations=rels,
        ejplus_witness=None if e is None else mon.names[e])


# -- helpers ---------------------------------------------------------------------------


def _alphabet(args):
    if getattr(args, "alphabet", None):
        return [a for a in args.alphabet.replace(",", " ").split() if a]
    return None


def _oracle(args, p=None) -> Dfa:
    if getattr(args, "oracle", None):
        with open(args.oracle) as fh:
            return dfa_from_text(fh.read())
    if getattr(args, "regex", None):
        alpha = _alphabet(args) or (list(p.alphabet) if p is not None else None)
        return regex_dfa(args.regex, alpha)
    raise UsageError("an oracle is needed: --regex or --oracle")


def _parse_morphism(text: str) -> dict:
    """``c=aa d=a`` -> {c: (a, a), d: (a,)}; letters are single characters or eps."""
    out = {}
    for part in text.replace(",", " ").split():
        if "=" not in part:
            raise UsageError(f"bad morphism entry {part!r}, expected letter=word")
        k, v = part.split("=", 1)
        out[k] = () if v in ("", "eps") else tuple(v)
    return out


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


# -- verbs -------------------------------------------------------------------------------


def cmd_classify(args) -> int:
    c = classify(args.regex, _alphabet(args))
    _emit(args, asdict(c), c.lines())
    return 0


def _build(args):
    """The program and a DFA for the language it should maintain."""
    from . import fixtures
    from .builders import (build_group_program, build_sigma1_monomial_program,
                           build_sigma1plus_program, build_sigma2_program)
    from .builders.group import GroupPresentation
    from .builders.transforms import transform_inverse_morphism, transform_quotient

    kind = args.builder
    if kind == "example1":
        p = fixtures.example1_program()
        d = regex_dfa("(a+b)*aa(a+b)*", p.alphabet)
    elif kind == "sigma1plus":
        table = fixtures.semidirect_fixtures()
        if args.fixture not in table:
            raise UsageError(f"--fixture must be one of {sorted(table)}")
        act, up = table[args.fixture]
        p = build_sigma1plus_program(act, up)
        d = fixtures.semidirect_oracle(p)
    elif kind == "monomial":
        table = fixtures.monomial_fixtures()
        if args.fixture not in table:
            raise UsageError(f"--fixture must be one of {sorted(table)}")
        mp, d = table[args.fixture]
        p = build_sigma1_monomial_program(mp)
    else:
        if not args.regex:
            raise UsageError(f"builder {kind} needs --regex")
        d = regex_dfa(args.regex, _alphabet(args) or guess_alphabet(args.regex))
        om, phi, acc = syntactic_ordered_monoid(d)
        if kind == "auto":
            kind = "group" if is_group(om.monoid) else "sigma2"
        if kind == "group":
            if not is_group(om.monoid):
                raise UsageError("the syntactic monoid is not a group; use --builder sigma2")
            p = build_group_program(GroupPresentation(om.monoid, phi, acc))
        elif kind == "sigma2":
            p = build_sigma2_program(om.monoid, phi, acc)
        else:
            raise UsageError(f"unknown builder {kind!r}")
    if args.inverse:
        h = _parse_morphism(args.inverse)
        p = transform_inverse_morphism(p, h)
        d = dfa_inverse_morphism(d, h)
    if args.quotient:
        sym = args.quotient
        p = transform_quotient(p, sym, args.side)
        d = dfa_quotient(d, sym, args.side)
    return p, d


def cmd_build(args) -> int:
    p, d = _build(args)
    text = program_to_text(p)
    if args.oracle_out:
        with open(args.oracle_out, "w") as fh:
            fh.write(dfa_to_text(d))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        ok = _fragment_ok(p)
        _emit(args, {"program": p.name, "fragment": p.fragment, "relations": len(p.relations),
                     "bits": len(p.bits), "out": args.out, "fragment_ok": ok},
              [f"wrote {p.name} ({p.fragment}, {len(p.relations)} relations, "
               f"{len(p.bits)} bits) to {args.out}"])
    else:
        sys.stdout.write(text)
    return 0


def _fragment_ok(p) -> bool:
    return all(r.ok for r in p.fragment_report().values())


def _load(args):
    return load_program(args.program)


def cmd_run(args) -> int:
    p = _load(args)
    st = init_batch(p, args.n, B=1)
    src = open(args.script) if args.script else sys.stdin
    try:
        for raw in src:
            line = raw.split("#")[0].strip()
            if not line:
                continue
            if line.startswith("domain"):
                st = init_batch(p, int(line.split()[1]), B=1)
                continue
            if line.startswith("expect"):
                continue
            (c,) = parse_changes([line])
            if not 1 <= c.position <= st.n:
                raise UsageError(f"position {c.position} outside 1..{st.n}")
            st = step(st, [c.symbol], np.array([c.position]))
            print(f"bit {int(st.query()[0])}", flush=True)
    finally:
        if src is not sys.stdin:
            src.close()
    return 0


def cmd_verify(args) -> int:
    from .verify import random_verify
    p = _load(args)
    rep = random_verify(p, _oracle(args, p), args.n, args.steps, args.trials, seed=args.seed)
    frag_ok = _fragment_ok(p)
    ok = rep.passed and frag_ok
    lines = [rep.summary(), f"fragment {p.fragment}: {'ok' if frag_ok else 'VIOLATED'}"]
    lines += [f"mismatch trial {m.trial} step {m.step} ({m.change}): program {int(m.program_bit)}, "
              f"language {int(m.oracle_bit)}" for m in rep.mismatches[:10]]
    _emit(args, {"summary": rep.summary(), "passed": ok, "fragment_ok": frag_ok,
                 "trials": rep.records()}, lines)
    return 0 if ok else 1


def cmd_adversary(args) -> int:
    from .verify import higman_adversary
    p = _load(args)
    w = higman_adversary(p, _oracle(args, p), args.pump, args.kill, budget=args.budget,
                         mode=args.mode)
    if w is None:
        _emit(args, {"program": p.name, "witness": None},
              [f"{p.name}: no witness found within the budget"])
        return 0
    script = w.to_script()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(script)
    payload = asdict(w)
    payload["word"] = [sym_name(s) for s in w.word]
    payload["small_changes"] = [str(c) for c in w.small_changes]
    payload["large_changes"] = [str(c) for c in w.large_changes]
    payload["replays"] = w.replay(p)
    lines = [w.summary(), f"replays: {'yes' if payload['replays'] else 'no'}"]
    if args.out:
        lines.append(f"script written to {args.out}")
    else:
        lines.append(script.rstrip())
    _emit(args, payload, lines)
    return 1


def cmd_replay(args) -> int:
    from .verify import replay_script
    p = _load(args)
    with open(args.script) as fh:
        bits, expect = replay_script(p, fh.read())
    final = bits[-1] if bits else bool(p.initial.get(p.query, False))
    refuted = expect is not None and final != expect
    lines = [f"bit {int(b)}" for b in bits]
    if expect is not None:
        lines.append(f"final bit {int(final)}, expected {int(expect)}: "
                     + ("program refuted" if refuted else "agrees"))
    _emit(args, {"bits": [int(b) for b in bits], "expect": None if expect is None else int(expect),
                 "refuted": refuted}, lines)
    return 1 if refuted else 0


# -- argument parsing ------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynlang", description=(
        "Classify regular languages by their syntactic monoid and build, run and check "
        "dynamic programs with unary auxiliary relations."))
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        return sp

    sp = common(sub.add_parser("classify", help="algebraic verdicts and maintenance tier"))
    sp.add_argument("regex")
    sp.add_argument("--alphabet", help="letters, e.g. 'a,b' (default: letters of the regex)")
    sp.set_defaults(func=cmd_classify)

    sp = common(sub.add_parser("build", help="write a program file"))
    sp.add_argument("--builder", default="auto",
                    choices=("auto", "group", "sigma2", "sigma1plus", "monomial", "example1"))
    sp.add_argument("--regex")
    sp.add_argument("--alphabet")
    sp.add_argument("--fixture", help="bundled presentation for sigma1plus/monomial")
    sp.add_argument("--inverse", help="apply an inverse morphism, e.g. 'c=aa d=a'")
    sp.add_argument("--quotient", help="apply a quotient by this letter")
    sp.add_argument("--side", choices=("left", "right"), default="right")
    sp.add_argument("--out")
    sp.add_argument("--oracle-out", help="also write a DFA for the maintained language")
    sp.set_defaults(func=cmd_build)

    sp = common(sub.add_parser("run", help="apply 'set <symbol> <i>' lines, print 'bit 0|1'"))
    sp.add_argument("program")
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--script", help="read changes from a file instead of stdin")
    sp.set_defaults(func=cmd_run)

    sp = common(sub.add_parser("verify", help="random traces against a DFA oracle"))
    sp.add_argument("program")
    sp.add_argument("--regex")
    sp.add_argument("--alphabet")
    sp.add_argument("--oracle", help="DFA text file")
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("adversary", help="search a refutation by pumping and killing"))
    sp.add_argument("program")
    sp.add_argument("--regex")
    sp.add_argument("--alphabet")
    sp.add_argument("--oracle")
    sp.add_argument("--pump", required=True, type=parse_sym)
    sp.add_argument("--kill", required=True, type=parse_sym)
    sp.add_argument("--mode", choices=("exact", "monotone"), default="exact")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--out", help="write the witness script here")
    sp.set_defaults(func=cmd_adversary)

    sp = common(sub.add_parser("replay", help="execute a witness script"))
    sp.add_argument("program")
    sp.add_argument("script")
    sp.set_defaults(func=cmd_replay)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as e:
        print(f"dynlang {args.verb}: {e}", file=sys.stderr)
        if isinstance(e, UsageError):
            print(ap.format_usage(), end="", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
