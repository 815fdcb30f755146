"""Runtime for dynamic programs: word state, auxiliary store and change semantics.

A program keeps unary relations and bits.  After a change ``set_s(i)`` every
relation and bit is recomputed from its update formula for ``s``, evaluated
on the new word together with the auxiliary data from before the change.
The letters before the change are exposed to formulas as ``Wo_s`` atoms.

Internally many independent runs share one numpy batch (axis 0), which is
how the verification harness drives thousands of traces quickly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .lang_frontend import EPS
from .logic import (EvalContext, Formula, FormulaError, check_fragment,
                    fragment_tag, letters_used, parse_sexpr, shared_nodes, to_sexpr)

REL_VAR = "x"
CHANGE_VAR = "y"
EPS_NAME = "eps"


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class Change:
    symbol: str | None
    position: int

    def __str__(self):
        return f"set {sym_name(self.symbol)} {self.position}"


def sym_name(s) -> str:
    return EPS_NAME if s is EPS else str(s)


def parse_sym(tok: str):
    return EPS if tok in (EPS_NAME, "ε") else tok


@dataclass(frozen=True)
class WordState:
    n: int
    letters: tuple  # positions 1..n at indices 0..n-1

    def word(self) -> list:
        return list(self.letters)


@dataclass(frozen=True)
class AuxStore:
    relations: Mapping[str, frozenset]
    bits: Mapping[str, bool]
    old: tuple  # letters before the most recent change


# base values of the all-epsilon state
BASE_VALUES = ("none", "all", "first", "last")


@dataclass
class DynamicProgram:
    """Unary auxiliary schema with one update formula per (target, change symbol).

    ``initial`` gives the value of every relation on the all-epsilon word as
    one of ``none/all/first/last`` and of every bit as ``True/False``.
    ``setup`` optionally overrides relations or bits by formulas evaluated once
    on that base state.  ``initializer``, when given, computes the intended
    auxiliary data for an arbitrary starting word directly.
    """

    name: str
    alphabet: tuple
    relations: tuple
    bits: tuple
    fragment: str
    updates: dict
    query: str
    padded: bool = False
    initial: dict = field(default_factory=dict)
    setup: dict = field(default_factory=dict)
    initializer: Callable | None = None
    explain: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        self.relations = tuple(self.relations)
        self.bits = tuple(self.bits)
        self.fragment = fragment_tag(self.fragment)
        self._compiled = None

    @property
    def symbols(self) -> tuple:
        return self.alphabet + (EPS,)

    def targets(self) -> tuple:
        return self.relations + self.bits

    def validate(self, fragment: bool = True) -> None:
        names = self.targets()
        if len(set(names)) != len(names):
            raise ProgramError("relation and bit names must be unique")
        if self.query not in self.bits:
            raise ProgramError(f"query bit {self.query!r} is not a bit")
        rels, bits = set(self.relations), set(self.bits)
        for (target, sym), f in self.updates.items():
            if target not in rels and target not in bits:
                raise ProgramError(f"update for unknown target {target!r}")
            if sym is not EPS and sym not in self.alphabet:
                raise ProgramError(f"update for unknown symbol {sym!r}")
        for target in names:
            for sym in self.symbols:
                f = self.updates.get((target, sym))
                if f is None:
                    raise ProgramError(f"missing update formula for ({target}, {sym_name(sym)})")
                allowed = {REL_VAR, CHANGE_VAR} if target in rels else {CHANGE_VAR}
                if not f.free <= allowed:
                    raise ProgramError(f"update ({target}, {sym_name(sym)}) has free variables "
                                       f"{sorted(f.free - allowed)}; auxiliary relations are at most unary")
                self._check_refs(f, target)
                if fragment:
                    res = check_fragment(f, self.fragment)
                    if not res:
                        raise ProgramError(f"update ({target}, {sym_name(sym)}) is not "
                                           f"{self.fragment}: {res.diagnostic}")
        for target, f in self.setup.items():
            if target not in rels and target not in bits:
                raise ProgramError(f"setup for unknown target {target!r}")
            self._check_refs(f, target)

    def _check_refs(self, f: Formula, target: str) -> None:
        from .logic import bit_names, relation_names
        unknown = (relation_names(f) - set(self.relations)) | (bit_names(f) - set(self.bits))
        if unknown:
            raise ProgramError(f"formula for {target} refers to unknown {sorted(unknown)}")
        bad = letters_used(f) - set(self.alphabet)
        if bad:
            raise ProgramError(f"formula for {target} uses letters outside the alphabet: {sorted(bad)}")

    def fragment_report(self) -> dict:
        out = {}
        for (target, sym), f in self.updates.items():
            out[(target, sym_name(sym))] = check_fragment(f, self.fragment)
        return out

    def compiled(self) -> dict:
        if self._compiled is None:
            rels = set(self.relations)
            comp = {}
            for sym in self.symbols:
                comp[sym] = [(t, self.updates[(t, sym)], t in rels) for t in self.targets()]
            self._compiled = comp
        return self._compiled


# -- batched state --------------------------------------------------------------


class BatchState:
    """B independent (word, aux) pairs over one domain size n."""

    def __init__(self, program: DynamicProgram, n: int, letters: np.ndarray, old: np.ndarray,
                 relations: dict, bits: dict):
        self.program = program
        self.n = n
        self.letters = letters
        self.old = old
        self.relations = relations
        self.bits = bits

    @property
    def B(self) -> int:
        return self.letters.shape[0]

    def domain(self) -> tuple[int, int]:
        return (0, self.n + 1) if self.program.padded else (1, self.n)

    def query(self) -> np.ndarray:
        return self.bits[self.program.query].copy()

    def copy(self) -> "BatchState":
        return BatchState(self.program, self.n, self.letters.copy(), self.old.copy(),
                          {k: v.copy() for k, v in self.relations.items()},
                          {k: v.copy() for k, v in self.bits.items()})

    def take(self, idx) -> "BatchState":
        idx = np.asarray(idx)
        return BatchState(self.program, self.n, self.letters[idx], self.old[idx],
                          {k: v[idx] for k, v in self.relations.items()},
                          {k: v[idx] for k, v in self.bits.items()})

    def word(self, b: int) -> list:
        alpha = self.program.alphabet
        return [alpha[c - 1] if c else EPS for c in self.letters[b, 1:self.n + 1]]

    def position_types(self, b: int) -> list:
        """Per position: (letter, old letter, names of relations holding there)."""
        names = self.program.relations
        alpha = self.program.alphabet
        out = []
        for i in range(1, self.n + 1):
            held = frozenset(r for r in names if self.relations[r][b, i])
            c, o = self.letters[b, i], self.old[b, i]
            out.append((alpha[c - 1] if c else EPS, alpha[o - 1] if o else EPS, held))
        return out

    def true_bits(self, b: int) -> tuple:
        return tuple(k for k in self.program.bits if self.bits[k][b])

    def to_single(self, b: int = 0) -> tuple[WordState, AuxStore]:
        alpha = self.program.alphabet
        lo, hi = self.domain()
        rels = {k: frozenset(int(p) for p in np.flatnonzero(v[b]) if lo <= p <= hi)
                for k, v in self.relations.items()}
        old = tuple(alpha[c - 1] if c else EPS for c in self.old[b, 1:self.n + 1])
        return (WordState(self.n, tuple(self.word(b))),
                AuxStore(rels, {k: bool(v[b]) for k, v in self.bits.items()}, old))


def _encode(program: DynamicProgram, words: Sequence[Sequence], n: int) -> np.ndarray:
    codes = {s: i + 1 for i, s in enumerate(program.alphabet)}
    arr = np.zeros((len(words), n + 2), dtype=np.int64)
    for b, w in enumerate(words):
        if len(w) != n:
            raise ProgramError(f"word of length {len(w)} on a domain of size {n}")
        for i, s in enumerate(w, start=1):
            if s is not EPS:
                if s not in codes:
                    raise ProgramError(f"unknown symbol {s!r}")
                arr[b, i] = codes[s]
    return arr


def _base_relation(kind: str, n: int, padded: bool) -> np.ndarray:
    row = np.zeros(n + 2, dtype=bool)
    lo, hi = (0, n + 1) if padded else (1, n)
    if hi < lo:
        return row
    if kind == "all":
        row[lo:hi + 1] = True
    elif kind == "first":
        row[lo] = True
    elif kind == "last":
        row[hi] = True
    elif kind != "none":
        raise ProgramError(f"unknown initial value {kind!r}")
    return row


def empty_state(p: DynamicProgram, n: int, B: int = 1) -> BatchState:
    """The all-epsilon state: base values, then the setup formulas."""
    letters = np.zeros((B, n + 2), dtype=np.int64)
    rels = {}
    for r in p.relations:
        row = _base_relation(p.initial.get(r, "none"), n, p.padded)
        rels[r] = np.repeat(row[None], B, axis=0)
    bits = {q: np.full(B, bool(p.initial.get(q, False))) for q in p.bits}
    st = BatchState(p, n, letters, letters.copy(), rels, bits)
    if p.setup:
        lo, hi = st.domain()
        ctx = EvalContext(p.alphabet, st.letters, st.old, st.relations, st.bits, {}, lo, hi)
        new_rels, new_bits = dict(rels), dict(bits)
        for target, f in p.setup.items():
            if target in rels:
                arr = np.array(ctx.result(f, (REL_VAR,)))
                arr[:, :lo] = False
                arr[:, hi + 1:] = False
                new_rels[target] = arr
            else:
                new_bits[target] = np.array(ctx.result(f))
        st.relations, st.bits = new_rels, new_bits
    return st


def init_batch(p: DynamicProgram, n: int, words: Sequence[Sequence] | None = None,
               B: int | None = None) -> BatchState:
    if words is None:
        return empty_state(p, n, B or 1)
    words = [list(w) for w in words]
    if p.initializer is not None:
        letters = _encode(p, words, n)
        rels = {r: np.zeros((len(words), n + 2), dtype=bool) for r in p.relations}
        bits = {q: np.zeros(len(words), dtype=bool) for q in p.bits}
        for b, w in enumerate(words):
            r_b, q_b = p.initializer(w)
            missing = (set(p.relations) - set(r_b)) | (set(p.bits) - set(q_b))
            if missing:
                raise ProgramError(f"initializer did not define {sorted(missing)}")
            for r in p.relations:
                for pos in r_b[r]:
                    rels[r][b, pos] = True
            for q in p.bits:
                bits[q][b] = bool(q_b[q])
        return BatchState(p, n, letters, letters.copy(), rels, bits)
    st = empty_state(p, n, len(words))
    for i in range(1, n + 1):
        syms = [w[i - 1] for w in words]
        if all(s is EPS for s in syms):
            continue
        st = step(st, syms, np.full(len(words), i))
    st.old = st.letters.copy()
    return st


def step(st: BatchState, symbols: Sequence, positions: np.ndarray) -> BatchState:
    """Apply one change per batch element; all formulas see the frozen pre-state."""
    p = st.program
    positions = np.asarray(positions, dtype=np.int64)
    if positions.shape != (st.B,):
        raise ProgramError("one position per batch element required")
    if st.B and (positions.min() < 1 or positions.max() > st.n):
        raise ProgramError("change position out of range")
    codes = {EPS: 0, **{s: i + 1 for i, s in enumerate(p.alphabet)}}
    try:
        sym_codes = np.array([codes[s] for s in symbols], dtype=np.int64)
    except KeyError as e:
        raise ProgramError(f"unknown symbol {e.args[0]!r}") from None
    rows = np.arange(st.B)
    new_letters = st.letters.copy()
    new_letters[rows, positions] = sym_codes
    old = st.letters
    new_rels = {k: np.zeros_like(v) for k, v in st.relations.items()}
    new_bits = {k: np.zeros_like(v) for k, v in st.bits.items()}
    lo, hi = st.domain()
    comp = p.compiled()
    for sym, code in codes.items():
        idx = np.flatnonzero(sym_codes == code)
        if idx.size == 0:
            continue
        whole = idx.size == st.B
        sub = (lambda a: a) if whole else (lambda a: a[idx])
        ctx = EvalContext(p.alphabet, sub(new_letters), sub(old),
                          {k: sub(v) for k, v in st.relations.items()},
                          {k: sub(v) for k, v in st.bits.items()},
                          {CHANGE_VAR: positions[idx]}, lo, hi)
        for target, f, is_rel in comp[sym]:
            if is_rel:
                arr = ctx.result(f, (REL_VAR,))
                if whole:
                    new_rels[target][:, lo:hi + 1] = arr[:, lo:hi + 1]
                else:
                    new_rels[target][idx, lo:hi + 1] = arr[:, lo:hi + 1]
            else:
                val = ctx.result(f)
                if whole:
                    new_bits[target][:] = val
                else:
                    new_bits[target][idx] = val
    return BatchState(p, st.n, new_letters, old, new_rels, new_bits)


# -- single-structure API ---------------------------------------------------------


def init_program(p: DynamicProgram, n: int, w0: Sequence | WordState | None = None
                 ) -> tuple[WordState, AuxStore]:
    if isinstance(w0, WordState):
        w0 = w0.letters
    st = init_batch(p, n, None if w0 is None else [list(w0)])
    return st.to_single(0)


def _to_batch(p: DynamicProgram, w: WordState, aux: AuxStore) -> BatchState:
    letters = _encode(p, [w.letters], w.n)
    old = _encode(p, [aux.old], w.n) if aux.old is not None else letters.copy()
    missing = (set(p.relations) - set(aux.relations)) | (set(p.bits) - set(aux.bits))
    if missing:
        raise ProgramError(f"auxiliary store lacks {sorted(missing)}")
    rels = {}
    for r in p.relations:
        arr = np.zeros((1, w.n + 2), dtype=bool)
        for pos in aux.relations[r]:
            arr[0, pos] = True
        rels[r] = arr
    bits = {q: np.array([bool(aux.bits[q])]) for q in p.bits}
    return BatchState(p, w.n, letters, old, rels, bits)


def apply_change(p: DynamicProgram, w: WordState, aux: AuxStore, c: Change
                 ) -> tuple[WordState, AuxStore]:
    if not 1 <= c.position <= w.n:
        raise ProgramError(f"change position {c.position} outside 1..{w.n}")
    st = step(_to_batch(p, w, aux), [c.symbol], np.array([c.position]))
    return st.to_single(0)


def query_bit(p: DynamicProgram, aux: AuxStore) -> bool:
    return bool(aux.bits[p.query])


def run_changes(p: DynamicProgram, n: int, changes: Iterable[Change],
                w0: Sequence | None = None) -> list[bool]:
    """Query bit after each change, starting from ``w0`` (default all-epsilon)."""
    st = init_batch(p, n, None if w0 is None else [list(w0)])
    out = []
    for c in changes:
        st = step(st, [c.symbol], np.array([c.position]))
        out.append(bool(st.bits[p.query][0]))
    return out


def trace_lines(p: DynamicProgram, n: int, changes: Iterable[Change]) -> list[str]:
    changes = list(changes)
    bits = run_changes(p, n, changes)
    return [f"{c} -> bit {int(b)}" for c, b in zip(changes, bits)]


# -- program files ------------------------------------------------------------------

_NAME = re.compile(r"[^\s():@]+")


def program_to_text(p: DynamicProgram, min_macro: int = 6) -> str:
    """Serialize; subformulas shared between updates become macros."""
    roots = [f for f in p.updates.values()] + list(p.setup.values())
    shared = shared_nodes(roots, min_size=min_macro)
    macros: dict = {}
    lines = [f"program {p.name}", f"fragment {p.fragment}",
             "alphabet " + " ".join(p.alphabet), f"padded {'yes' if p.padded else 'no'}"]
    for r in p.relations:
        lines.append(f"relation {r} {p.initial.get(r, 'none')}")
    for q in p.bits:
        lines.append(f"bit {q} {'true' if p.initial.get(q, False) else 'false'}")
    lines.append(f"query {p.query}")
    for name, text in p.explain.items():
        lines.append(f"explain {name}: {text}")
    for k, g in enumerate(shared):
        body = to_sexpr(g, macros)
        name = f"M{k}"
        lines.append(f"macro {name} ({' '.join(sorted(g.free))}): {body}")
        macros[g] = name
    for target, f in p.setup.items():
        lines.append(f"setup {target}: {to_sexpr(f, macros)}")
    for target in p.targets():
        for sym in p.symbols:
            f = p.updates[(target, sym)]
            lines.append(f"update {target} {sym_name(sym)}: {to_sexpr(f, macros)}")
    return "\n".join(lines) + "\n"


def program_from_text(text: str, check: bool = True) -> DynamicProgram:
    name, fragment, alphabet, padded, query = "program", "Sigma2", (), False, None
    relations, bits, initial, explain, setup, updates = [], [], {}, {}, {}, {}
    macros: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "program":
                name = rest.strip()
            elif key == "fragment":
                fragment = rest.strip()
            elif key == "alphabet":
                alphabet = tuple(rest.split())
            elif key == "padded":
                padded = rest.strip() in ("yes", "true", "1")
            elif key == "relation":
                parts = rest.split()
                relations.append(parts[0])
                initial[parts[0]] = parts[1] if len(parts) > 1 else "none"
                if initial[parts[0]] not in BASE_VALUES:
                    raise ProgramError(f"unknown initial value {initial[parts[0]]!r}")
            elif key == "bit":
                parts = rest.split()
                bits.append(parts[0])
                initial[parts[0]] = len(parts) > 1 and parts[1] in ("true", "1")
            elif key == "query":
                query = rest.strip()
            elif key == "explain":
                target, _, desc = rest.partition(":")
                explain[target.strip()] = desc.strip()
            elif key == "macro":
                head, _, body = rest.partition(":")
                mname, _, params = head.partition("(")
                params = params.rstrip(") ").split()
                macros[mname.strip()] = (tuple(params), parse_sexpr(body, macros))
            elif key == "setup":
                target, _, body = rest.partition(":")
                setup[target.strip()] = parse_sexpr(body, macros)
            elif key == "update":
                head, _, body = rest.partition(":")
                target, sym = head.split()
                updates[(target, parse_sym(sym))] = parse_sexpr(body, macros)
            else:
                raise ProgramError(f"unknown directive {key!r}")
        except (FormulaError, ProgramError, ValueError, IndexError) as e:
            raise ProgramError(f"line {lineno}: {e}") from None
    if query is None:
        raise ProgramError("program file has no query line")
    p = DynamicProgram(name, alphabet, tuple(relations), tuple(bits), fragment, updates, query,
                       padded=padded, initial=initial, setup=setup, explain=explain)
    p.validate(fragment=check)
    return p


def load_program(path: str, check: bool = True) -> DynamicProgram:
    with open(path) as fh:
        return program_from_text(fh.read(), check=check)


def save_program(p: DynamicProgram, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(program_to_text(p))


def parse_changes(lines: Iterable[str]) -> list[Change]:
    out = []
    for raw in lines:
        line = raw.split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "set":
            raise ProgramError(f"expected 'set <symbol> <position>', got {raw.strip()!r}")
        out.append(Change(parse_sym(parts[1]), int(parts[2])))
    return out
