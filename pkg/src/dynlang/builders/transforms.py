"""Program combinators and closure transformers.

``combine_disjunction`` adds a query bit for a set of element bits.
``transform_division`` moves a program along a submonoid embedding or a
surjective morphism.  ``transform_inverse_morphism`` and
``transform_quotient`` simulate the source program on a block-encoded word:
position i of the new word stands for the block of positions
(i, 1), ..., (i, s) of the simulated word, and every source relation R is
split into copies R_1..R_s, one per block offset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from ..dyn_engine import CHANGE_VAR, REL_VAR, DynamicProgram, ProgramError
from ..lang_frontend import EPS
from ..logic import (FALSE, TRUE, And, Bit, Eq, Exists, Forall, Formula, Leq, Lt, Not, Or,
                     Rel, W, Wo, fragment_includes, substitute)
from ..monoid_core import FiniteMonoid


def _union_init(p: DynamicProgram, names: Iterable[str]) -> bool:
    return any(bool(p.initial.get(q, False)) for q in names)


def combine_disjunction(p: DynamicProgram, subset: Iterable[int],
                        bit_name: Callable[[int], str] = lambda x: f"Q_{x}",
                        query: str = "q") -> DynamicProgram:
    """Add a bit that is the disjunction of the element bits for ``subset``."""
    subset = sorted(set(subset))
    names = [bit_name(x) for x in subset]
    for nm in names:
        if nm not in p.bits:
            raise ProgramError(f"unknown element bit {nm!r}")
    if query in p.targets():
        raise ProgramError(f"name {query!r} already in use")
    updates = dict(p.updates)
    for sym in p.symbols:
        updates[(query, sym)] = Or(*[p.updates[(nm, sym)] for nm in names])
    initial = dict(p.initial)
    initial[query] = _union_init(p, names)
    setup = dict(p.setup)
    if any(nm in setup for nm in names):
        setup[query] = Or(*[setup.get(nm, TRUE if p.initial.get(nm) else FALSE) for nm in names])
    init = None
    if p.initializer is not None:
        inner = p.initializer

        def init(word):
            rels, bits = inner(word)
            bits = dict(bits)
            bits[query] = any(bits[nm] for nm in names)
            return rels, bits

    explain = dict(p.explain)
    explain[query] = "disjunction of " + ", ".join(names) if names else "constant false"
    out = DynamicProgram(p.name, p.alphabet, p.relations, p.bits + (query,), p.fragment,
                         updates, query, padded=p.padded, initial=initial, setup=setup,
                         initializer=init, explain=explain)
    out.validate()
    return out


# -- division ------------------------------------------------------------------


@dataclass(frozen=True)
class DivisionWitness:
    """``kind`` is "embedding" (N -> M injective) or "quotient" (M -> N onto).

    ``mapping[i]`` is the image of element i of the domain monoid.  For the
    embedding the domain is N, for the quotient it is M.
    """

    kind: str
    source: FiniteMonoid  # M, the monoid the program evaluates
    target: FiniteMonoid  # N
    mapping: tuple

    def verify(self, leq_source=None, leq_target=None) -> None:
        M, N, f = self.source, self.target, self.mapping
        dom, cod = (N, M) if self.kind == "embedding" else (M, N)
        if self.kind not in ("embedding", "quotient"):
            raise ProgramError(f"unknown witness kind {self.kind!r}")
        if len(f) != dom.size:
            raise ProgramError("mapping must give one image per element")
        if f[dom.identity] != cod.identity:
            raise ProgramError("witness does not preserve the identity")
        for x in range(dom.size):
            for y in range(dom.size):
                if f[int(dom.mult[x, y])] != cod.mult[f[x], f[y]]:
                    raise ProgramError(f"witness is not multiplicative at ({x},{y})")
        if self.kind == "embedding" and len(set(f)) != dom.size:
            raise ProgramError("embedding is not injective")
        if self.kind == "quotient" and set(f) != set(range(cod.size)):
            raise ProgramError("quotient map is not surjective")
        if leq_source is not None and leq_target is not None and self.kind == "quotient":
            for x in range(M.size):
                for y in range(M.size):
                    if leq_source[x, y] and not leq_target[f[x], f[y]]:
                        raise ProgramError("quotient map does not preserve the order")


def transform_division(p: DynamicProgram, witness: DivisionWitness,
                       letter: Callable[[FiniteMonoid, int], str] | None = None,
                       accepting: Iterable[int] | None = None,
                       bit_name: Callable[[int], str] = lambda x: f"Q_{x}") -> DynamicProgram:
    """Program for Member(N) from a program for Member(M).

    ``p`` reads words over M's non-identity elements (letter names given by
    ``letter``, default the element names) and has element bits
    ``bit_name(x)``.  The new program reads N's non-identity elements; each
    letter is replaced by a chosen preimage.  New bits ``N_Q_x`` collect the
    bits of all preimages and ``accepting`` (default: the identity of N)
    selects the query.
    """
    witness.verify()
    M, N = witness.source, witness.target
    letter = letter or (lambda mon, x: mon.names[x])
    f = witness.mapping
    if witness.kind == "embedding":
        rep = {x: f[x] for x in range(N.size)}
        pre = {x: [f[x]] for x in range(N.size)}
    else:
        rep, pre = {}, {x: [] for x in range(N.size)}
        for y in range(M.size):
            pre[f[y]].append(y)
        for x in range(N.size):
            cands = [y for y in pre[x] if y != M.identity] or pre[x]
            rep[x] = cands[0]
    new_alpha = tuple(letter(N, x) for x in range(N.size) if x != N.identity)
    m_letter = {letter(M, rep[x]): letter(N, x) for x in range(N.size) if x != N.identity}
    for a in m_letter:
        if a not in p.alphabet:
            raise ProgramError(f"program has no letter {a!r}")

    def relabel(g: Formula) -> Formula:
        from ..logic import map_atoms

        def fn(atom):
            if atom.kind in ("letter", "old"):
                s = m_letter.get(atom.args[0])
                if s is None:
                    return FALSE
                return (W if atom.kind == "letter" else Wo)(s, atom.args[1])
            return None

        return map_atoms(g, fn)

    new_bits = [f"N_{bit_name(x)}" for x in range(N.size)]
    sym_of = {letter(N, x): letter(M, rep[x]) for x in range(N.size) if x != N.identity}
    sym_of[EPS] = EPS
    updates = {}
    for new_sym, old_sym in sym_of.items():
        for target in p.targets():
            updates[(target, new_sym)] = relabel(p.updates[(target, old_sym)])
        for x in range(N.size):
            updates[(new_bits[x], new_sym)] = Or(*[relabel(p.updates[(bit_name(y), old_sym)])
                                                   for y in pre[x]])
    initial = dict(p.initial)
    for x in range(N.size):
        initial[new_bits[x]] = _union_init(p, [bit_name(y) for y in pre[x]])
    init = None
    if p.initializer is not None:
        inner = p.initializer
        back = {letter(N, x): letter(M, rep[x]) for x in range(N.size) if x != N.identity}

        def init(word):
            rels, bits = inner([EPS if s is EPS else back[s] for s in word])
            bits = dict(bits)
            for x in range(N.size):
                bits[new_bits[x]] = any(bits[bit_name(y)] for y in pre[x])
            return rels, bits

    explain = dict(p.explain)
    for x in range(N.size):
        explain[new_bits[x]] = f"the word evaluates to {N.names[x]} in the divided monoid"
    mid = DynamicProgram(f"{p.name}/div", new_alpha, p.relations, p.bits + tuple(new_bits),
                         p.fragment, updates, new_bits[N.identity], padded=p.padded,
                         initial=initial, setup={k: relabel(v) for k, v in p.setup.items()},
                         initializer=init, explain=explain)
    mid.validate()
    acc = [N.identity] if accepting is None else list(accepting)
    return combine_disjunction(mid, acc, bit_name=lambda x: new_bits[x], query="q_div")


# -- block simulation ----------------------------------------------------------------------


class _BlockSimulation:
    """Rewrites source formulas over the block-encoded word.

    Source position (z, m) is offset m of new position z.  A change of the
    new program runs a fixed schedule of source changes at offsets of the
    changed block y; the formula for a source relation after k of them is
    built from the one after k - 1 by substitution.  Letters of the source
    word are kept in relations ``L.tau.m``.
    """

    def __init__(self, p: DynamicProgram, s: int, base: Mapping | None = None):
        self.p, self.s = p, s
        self.rels = set(p.relations)
        self.base = dict(base or {})  # (R, m) or bit name -> stage-0 formula

    @staticmethod
    def copy(R: str, m: int) -> str:
        return f"{R}.{m}"

    @staticmethod
    def letter(tau: str, m: int) -> str:
        return f"L.{tau}.{m}"

    def run(self, schedule: Sequence[tuple]) -> None:
        """Prepare stage formulas for one change: ``schedule`` lists (offset, source symbol)."""
        self.schedule = list(schedule)
        self.F: dict = {}
        self.bitF: dict = {}
        self.tmemo: dict = {}

    def letter_at(self, sym, z: str, m: int, k: int) -> Formula:
        """Source letter ``sym`` at (z, m) in the word after k schedule steps."""
        here = [t for off, t in self.schedule[:k] if off == m]
        stored = Rel(self.letter(sym, m), z)
        if not here:
            return stored
        y = CHANGE_VAR
        hit = TRUE if here[-1] == sym else FALSE
        return Or(And(Eq(z, y), hit), And(Or(Lt(z, y), Lt(y, z)), stored))

    def rel_at(self, R: str, m: int, k: int) -> Formula:
        """Source relation R at offset m after k steps, with the position in variable x."""
        key = (R, m, k)
        r = self.F.get(key)
        if r is None:
            if k == 0:
                r = self.base.get((R, m)) or Rel(self.copy(R, m), REL_VAR)
            else:
                off, sym = self.schedule[k - 1]
                r = self.translate(self.p.updates[(R, sym)], {REL_VAR: m, CHANGE_VAR: off}, k)
            self.F[key] = r
        return r

    def bit_at(self, B: str, k: int) -> Formula:
        key = (B, k)
        r = self.bitF.get(key)
        if r is None:
            if k == 0:
                r = self.base.get(B) or Bit(B)
            else:
                off, sym = self.schedule[k - 1]
                r = self.translate(self.p.updates[(B, sym)], {CHANGE_VAR: off}, k)
            self.bitF[key] = r
        return r

    def translate(self, f: Formula, env: Mapping[str, int], k: int) -> Formula:
        """Formula evaluated at step k (new letters after k steps, relations after k - 1)."""
        key = (f, tuple(sorted((v, b) for v, b in env.items() if v in f.free)), k)
        r = self.tmemo.get(key)
        if r is not None:
            return r
        kind, a = f.kind, f.args
        if kind in ("true", "false"):
            r = f
        elif kind == "letter":
            r = self.letter_at(a[0], a[1], env[a[1]], k)
        elif kind == "old":
            r = self.letter_at(a[0], a[1], env[a[1]], k - 1)
        elif kind == "rel":
            r = substitute(self.rel_at(a[0], env[a[1]], k - 1), {REL_VAR: a[1]})
        elif kind == "bit":
            r = self.bit_at(a[0], k - 1)
        elif kind == "leq":
            s, t = a
            r = Leq(s, t) if env[s] <= env[t] else Lt(s, t)
        elif kind == "eq":
            s, t = a
            r = Eq(s, t) if env[s] == env[t] else FALSE
        elif kind == "not":
            r = Not(self.translate(a[0], env, k))
        elif kind in ("and", "or"):
            parts = [self.translate(c, env, k) for c in a]
            r = And(*parts) if kind == "and" else Or(*parts)
        elif kind in ("exists", "forall"):
            v, body = a
            parts = [self.translate(body, {**env, v: b}, k) for b in range(1, self.s + 1)]
            r = Exists(v, Or(*parts)) if kind == "exists" else Forall(v, And(*parts))
        else:
            raise ProgramError(f"cannot translate {kind!r}")
        self.tmemo[key] = r
        return r


def _block_initial(p: DynamicProgram, s: int) -> dict:
    init = {}
    for R in p.relations:
        kind = p.initial.get(R, "none")
        for m in range(1, s + 1):
            name = _BlockSimulation.copy(R, m)
            if kind in ("none", "all"):
                init[name] = kind
            elif kind == "first":
                init[name] = "first" if m == 1 else "none"
            elif kind == "last":
                init[name] = "last" if m == s else "none"
    for B in p.bits:
        init[B] = bool(p.initial.get(B, False))
    return init


def _check_source(p: DynamicProgram) -> None:
    if not (fragment_includes("Prop", p.fragment) or fragment_includes("Sigma1+", p.fragment)):
        raise ProgramError(f"closure transforms need a Prop or Sigma1+ program, got {p.fragment}")
    if p.padded:
        raise ProgramError("closure transforms need an unpadded program")


def _block_program(p: DynamicProgram, s: int, name: str, alphabet: Sequence,
                   schedules: Mapping, extra_rels: Mapping, setup_change=None,
                   initializer=None, explain_extra=None) -> DynamicProgram:
    """Assemble the simulating program.

    ``schedules`` maps each new symbol (and EPS) to its source schedule;
    ``extra_rels`` maps extra relation names to (initial, update formula);
    ``setup_change`` is an optional (offset, symbol, anchor relation) applied
    once at the anchor position to build the initial state.
    """
    sim = _BlockSimulation(p, s)
    rel_copies = [sim.copy(R, m) for R in p.relations for m in range(1, s + 1)]
    letters = [sim.letter(t, m) for t in p.alphabet for m in range(1, s + 1)]
    relations = rel_copies + letters + list(extra_rels)
    initial = _block_initial(p, s)
    initial.update({L: "none" for L in letters})
    initial.update({r: init for r, (init, _) in extra_rels.items()})
    # base state of the source (its own setup, translated at step 0)
    base = {}
    if p.setup:
        sim.run([])
        for target, f in p.setup.items():
            if target in sim.rels:
                for m in range(1, s + 1):
                    base[(target, m)] = sim.translate(f, {REL_VAR: m}, 0)
            else:
                base[target] = sim.translate(f, {}, 0)
    setup = {}
    if setup_change is not None:
        off, sym, anchor = setup_change
        sim = _BlockSimulation(p, s, base)
        sim.run([(off, sym)])
        y = CHANGE_VAR
        for R in p.relations:
            for m in range(1, s + 1):
                setup[sim.copy(R, m)] = Exists(y, And(Rel(anchor, y), sim.rel_at(R, m, 1)))
        for B in p.bits:
            setup[B] = Exists(y, And(Rel(anchor, y), sim.bit_at(B, 1)))
        for t in p.alphabet:
            setup[sim.letter(t, off)] = And(Rel(anchor, REL_VAR), TRUE if t == sym else FALSE)
        initial.update({sim.letter(t, off): "none" for t in p.alphabet})
    else:
        for key, f in base.items():
            if isinstance(key, tuple):
                setup[sim.copy(*key)] = f
            else:
                setup[key] = f
    updates = {}
    for new_sym, sched in schedules.items():
        sim = _BlockSimulation(p, s)
        sim.run(sched)
        k = len(sched)
        for R in p.relations:
            for m in range(1, s + 1):
                updates[(sim.copy(R, m), new_sym)] = sim.rel_at(R, m, k)
        for B in p.bits:
            updates[(B, new_sym)] = sim.bit_at(B, k)
        for t in p.alphabet:
            for m in range(1, s + 1):
                updates[(sim.letter(t, m), new_sym)] = sim.letter_at(t, REL_VAR, m, k)
        for r, (_, upd) in extra_rels.items():
            updates[(r, new_sym)] = upd
    explain = {}
    for R in p.relations:
        for m in range(1, s + 1):
            explain[sim.copy(R, m)] = f"{R} at offset {m} of the block"
    for t in p.alphabet:
        for m in range(1, s + 1):
            explain[sim.letter(t, m)] = f"the simulated word has {t} at offset {m} of the block"
    for B in p.bits:
        explain[B] = p.explain.get(B, "bit of the simulated program")
    explain.update(explain_extra or {})
    out = DynamicProgram(name, tuple(alphabet), tuple(relations), p.bits, p.fragment, updates,
                         p.query, padded=False, initial=initial, setup=setup,
                         initializer=initializer, explain=explain)
    out.validate()
    return out


def _block_initializer(p: DynamicProgram, s: int, encode, extra=None):
    """Initializer from the source one: ``encode`` maps a new word to the source word."""
    if p.initializer is None:
        return None
    inner = p.initializer

    def init(word):
        src = encode(word)
        rels, bits = inner(src)
        out = {}
        for R in p.relations:
            for m in range(1, s + 1):
                out[_BlockSimulation.copy(R, m)] = {(j - 1) // s + 1 for j in rels[R]
                                                   if (j - 1) % s + 1 == m}
        for t in p.alphabet:
            for m in range(1, s + 1):
                out[_BlockSimulation.letter(t, m)] = {j // s + 1 for j, c in enumerate(src)
                                                     if c == t and j % s + 1 == m}
        if extra:
            out.update(extra(word))
        return out, dict(bits)

    return init


def transform_inverse_morphism(p: DynamicProgram, h: Mapping) -> DynamicProgram:
    """Program for h^-1(L) where ``h`` maps each new letter to a word over p's alphabet."""
    _check_source(p)
    h = {g: tuple(w) for g, w in h.items()}
    for g, w in h.items():
        bad = [c for c in w if c not in p.alphabet]
        if bad:
            raise ProgramError(f"h({g}) uses letters outside the alphabet: {bad}")
    s = max([len(w) for w in h.values()] + [1])

    def schedule(w):
        return [(m, w[m - 1] if m <= len(w) else EPS) for m in range(1, s + 1)]

    schedules = {g: schedule(w) for g, w in h.items()}
    schedules[EPS] = schedule(())

    def encode(word):
        out = []
        for g in word:
            w = () if g is EPS else h[g]
            out += list(w) + [EPS] * (s - len(w))
        return out

    name = f"{p.name}/inv"
    return _block_program(p, s, name, tuple(h), schedules, {},
                          initializer=_block_initializer(p, s, encode))


def transform_quotient(p: DynamicProgram, sym, side: str = "right") -> DynamicProgram:
    """Program for L sym^-1 (right) or sym^-1 L (left).

    Block i stands for (w_i, eps) on the right and (eps, w_i) on the left;
    the quotient letter sits in the spare offset of the last (or first)
    block, placed by the setup formulas through the relation Max (or Min).
    """
    _check_source(p)
    if sym not in p.alphabet:
        raise ProgramError(f"unknown symbol {sym!r}")
    if side not in ("left", "right"):
        raise ProgramError(f"side must be left or right, got {side!r}")
    word_off, spare = (1, 2) if side == "right" else (2, 1)
    anchor = "Max" if side == "right" else "Min"
    schedules = {t: [(word_off, t)] for t in p.alphabet}
    schedules[EPS] = [(word_off, EPS)]
    extra = {anchor: ("last" if side == "right" else "first", Rel(anchor, REL_VAR))}

    def encode(word):
        out = []
        for c in word:
            out += [c, EPS] if side == "right" else [EPS, c]
        if word:
            out[-1 if side == "right" else 0] = sym
        return out

    def anchor_rel(word):
        return {anchor: ({len(word)} if side == "right" else {1}) if word else set()}

    name = f"{p.name}/{'r' if side == 'right' else 'l'}q-{sym}"
    return _block_program(p, 2, name, p.alphabet, schedules, extra,
                          setup_change=(spare, sym, anchor),
                          initializer=_block_initializer(p, 2, encode, anchor_rel),
                          explain_extra={anchor: f"the {'last' if side == 'right' else 'first'} position"})
