"""Oracle checks for dynamic programs and the substructure adversary.

``random_verify`` runs batches of random change sequences and compares the
query bit with a DFA after every change.  ``higman_adversary`` refutes
programs in Prop (exact mode) or Sigma1+ (monotone mode) that claim a
language they cannot maintain: it builds the words pump^i, looks for an
instance that embeds into a longer one position-wise (same types, or
contained types in monotone mode), overwrites the embedded positions in
both with ``kill`` and reports the instance whose bit then contradicts the
claimed language.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dyn_engine import (BatchState, Change, DynamicProgram, ProgramError, init_batch,
                         parse_changes, sym_name, parse_sym, step)
from .lang_frontend import EPS, Dfa, dfa_accepts
from .logic import fragment_includes


# -- random traces -----------------------------------------------------------------


@dataclass(frozen=True)
class Mismatch:
    trial: int
    step: int  # 0 is the initial word
    change: str
    program_bit: bool
    oracle_bit: bool


@dataclass
class TraceReport:
    program: str
    seed: int
    n: int
    steps: int
    trials: int
    mismatches: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def changes(self) -> int:
        return self.steps * self.trials

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def records(self) -> list[dict]:
        """One machine-readable record per trial."""
        out = []
        for t in range(self.trials):
            bad = [asdict(m) for m in self.mismatches if m.trial == t]
            out.append({"program": self.program, "trial": t, "seed": self.seed, "n": self.n,
                        "steps": self.steps, "mismatches": bad, "passed": not bad})
        return out

    def summary(self) -> str:
        verdict = "PASS" if self.passed else f"FAIL ({len(self.mismatches)} mismatches)"
        return (f"{self.program}: {verdict} over {self.trials} trials x {self.steps} changes, "
                f"n={self.n}, seed={self.seed}, {self.elapsed:.2f}s")


def _oracle_table(p: DynamicProgram, oracle: Dfa) -> np.ndarray:
    if set(oracle.alphabet) != set(p.alphabet):
        raise ProgramError(f"alphabet mismatch: program {list(p.alphabet)}, "
                           f"oracle {list(oracle.alphabet)}")
    # column 0 is epsilon (stay), column k is the program's k-th letter
    delta = np.array(oracle.delta, dtype=np.int64)
    cols = [oracle.alphabet.index(a) for a in p.alphabet]
    table = np.empty((oracle.size, len(cols) + 1), dtype=np.int64)
    table[:, 0] = np.arange(oracle.size)
    table[:, 1:] = delta[:, cols]
    return table


def oracle_bits(p: DynamicProgram, oracle: Dfa, letters: np.ndarray) -> np.ndarray:
    """DFA verdict for each row of a (B, n+2) letter-code array."""
    table = _oracle_table(p, oracle)
    acc = np.zeros(oracle.size, dtype=bool)
    acc[list(oracle.accepting)] = True
    state = np.full(letters.shape[0], oracle.start, dtype=np.int64)
    for i in range(1, letters.shape[1] - 1):
        state = table[state, letters[:, i]]
    return acc[state]


def trial_streams(seed: int, trials: int) -> list[np.random.Generator]:
    """Independent per-trial generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def random_verify(p: DynamicProgram, oracle: Dfa, n: int, steps: int, trials: int,
                  seed: int = 0) -> TraceReport:
    t0 = time.perf_counter()
    _oracle_table(p, oracle)
    symbols = list(p.symbols)
    syms = np.empty((trials, steps), dtype=np.int64)
    pos = np.empty((trials, steps), dtype=np.int64)
    for t, rng in enumerate(trial_streams(seed, trials)):
        syms[t] = rng.integers(len(symbols), size=steps)
        pos[t] = rng.integers(1, n + 1, size=steps)
    report = TraceReport(p.name, seed, n, steps, trials)
    st = init_batch(p, n, B=trials)
    _compare(p, oracle, st, 0, None, report)
    for k in range(steps):
        st = step(st, [symbols[s] for s in syms[:, k]], pos[:, k])
        _compare(p, oracle, st, k + 1, (syms[:, k], pos[:, k], symbols), report)
    report.elapsed = time.perf_counter() - t0
    return report


def _compare(p, oracle, st: BatchState, k: int, changes, report: TraceReport) -> None:
    got = st.query()
    want = oracle_bits(p, oracle, st.letters)
    for t in np.flatnonzero(got != want):
        if changes is None:
            desc = "initial"
        else:
            s, q, symbols = changes
            desc = str(Change(symbols[s[t]], int(q[t])))
        report.mismatches.append(Mismatch(int(t), k, desc, bool(got[t]), bool(want[t])))


# -- Higman pairs ---------------------------------------------------------------------


def _type_match(small, large, mode: str) -> bool:
    if mode == "exact":
        return small == large
    return small[0] == large[0] and small[1] == large[1] and small[2] <= large[2]


def _bits_match(small, large, mode: str) -> bool:
    small, large = frozenset(small), frozenset(large)
    return small == large if mode == "exact" else small <= large


def embed(small: Sequence, large: Sequence, mode: str = "exact") -> list[int] | None:
    """Greedy leftmost embedding of ``small`` into ``large`` (1-based positions)."""
    out, j = [], 0
    for t in small:
        while j < len(large) and not _type_match(t, large[j], mode):
            j += 1
        if j == len(large):
            return None
        j += 1
        out.append(j)
    return out


def _pairs_by_sum(count: int):
    for s in range(3, 2 * count):
        for a in range(1, (s + 1) // 2):
            b = s - a
            if b <= count:
                yield a, b


def find_higman_pair(type_sequences: Sequence[Sequence], mode: str = "exact",
                     bits: Sequence | None = None):
    """First pair (n, m), n < m, 1-based list indices, smallest n + m first,
    such that sequence n embeds into sequence m.  Returns (n, m, pi) or None."""
    if mode not in ("exact", "monotone"):
        raise ValueError(f"unknown mode {mode!r}")
    for a, b in _pairs_by_sum(len(type_sequences)):
        if bits is not None and not _bits_match(bits[a - 1], bits[b - 1], mode):
            continue
        pi = embed(type_sequences[a - 1], type_sequences[b - 1], mode)
        if pi is not None:
            return a, b, pi
    return None


# -- adversary ----------------------------------------------------------------------------


class SubstructureViolation(AssertionError):
    pass


@dataclass
class AdversaryWitness:
    program: str
    mode: str
    n: int
    m: int
    pi: list
    small_changes: list
    large_changes: list
    instance: str  # "small" or "large", the one whose bit is wrong
    word: list
    expected: bool
    reported: bool
    other_bit: bool

    def changes_for(self, which: str | None = None) -> tuple[int, list]:
        which = which or self.instance
        return (self.n, self.small_changes) if which == "small" else (self.m, self.large_changes)

    def replay(self, p: DynamicProgram) -> bool:
        """Re-run the wrong instance; True if the program still reports ``reported``."""
        size, changes = self.changes_for()
        st = _run(p, size, changes)
        return bool(st.query()[0]) == self.reported

    def to_script(self) -> str:
        size, changes = self.changes_for()
        word = "".join(sym_name(s) if s is not EPS else "_" for s in self.word)
        lines = [f"# {self.mode} adversary against {self.program}",
                 f"# instances of length {self.n} and {self.m}, embedding {self.pi}",
                 f"# final word {word}: program says {int(self.reported)}, "
                 f"language says {int(self.expected)}",
                 f"domain {size}"]
        lines += [str(c) for c in changes]
        lines.append(f"expect {int(self.expected)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        word = "".join(s if s is not EPS else "_" for s in self.word)
        return (f"{self.program}: witness n={self.n} m={self.m} pi={self.pi}; on the {self.instance} "
                f"instance ({word}) the program answers {int(self.reported)} but the language "
                f"answer is {int(self.expected)} (other instance answered {int(self.other_bit)})")


def parse_script(text: str) -> tuple[int, list[Change], bool | None]:
    size, expect, body = None, None, []
    for raw in text.splitlines():
        line = raw.split("#")[0].strip()
        if not line:
            continue
        if line.startswith("domain"):
            size = int(line.split()[1])
        elif line.startswith("expect"):
            expect = line.split()[1] in ("1", "true")
        else:
            body.append(line)
    if size is None:
        raise ProgramError("script has no domain line")
    return size, parse_changes(body), expect


def _run(p: DynamicProgram, size: int, changes: Sequence[Change]) -> BatchState:
    st = init_batch(p, size, B=1)
    for c in changes:
        st = step(st, [c.symbol], np.array([c.position]))
    return st


def replay_script(p: DynamicProgram, text: str) -> tuple[list[bool], bool | None]:
    """Query bit after each change of a script, and the script's expected final bit."""
    size, changes, expect = parse_script(text)
    st = init_batch(p, size, B=1)
    bits = []
    for c in changes:
        st = step(st, [c.symbol], np.array([c.position]))
        bits.append(bool(st.query()[0]))
    return bits, expect


def _check_fragment_for(p: DynamicProgram, mode: str) -> None:
    if p.padded:
        raise ProgramError("the substructure argument needs an unpadded program")
    need = "Prop" if mode == "exact" else "Sigma1+"
    if not fragment_includes(need, p.fragment):
        raise ProgramError(f"{mode} mode needs a {need} program, got {p.fragment}")
    p.validate()


def _structure_agrees(small: BatchState, large: BatchState, pi, mode: str) -> bool:
    ts, tl = small.position_types(0), large.position_types(0)
    if not all(_type_match(ts[j], tl[pi[j] - 1], mode) for j in range(len(pi))):
        return False
    return _bits_match(small.true_bits(0), large.true_bits(0), mode)


def higman_adversary(p: DynamicProgram, claimed: Dfa, pump, kill, budget: int | None = None,
                     mode: str = "exact", max_budget: int = 48) -> AdversaryWitness | None:
    """Search for a replayable refutation of ``p`` as a program for ``claimed``.

    With ``budget`` None the instances pump^1, pump^2, ... are generated while
    their number stays below 2^t + 2 for the t distinct position types seen so
    far, capped at ``max_budget``.
    """
    _check_fragment_for(p, mode)
    pump = parse_sym(pump) if isinstance(pump, str) else pump
    kill = parse_sym(kill) if isinstance(kill, str) else kill
    states: list[BatchState] = []
    types: list = []
    bits: list = []
    seen: set = set()

    def limit():
        if budget is not None:
            return budget
        return min(max_budget, 2 ** len(seen) + 2)

    total = 3
    while total < 2 * limit():
        while len(states) < min(total - 1, limit()):
            st = _run(p, len(states) + 1, [Change(pump, j) for j in range(1, len(states) + 2)])
            states.append(st)
            types.append(st.position_types(0))
            bits.append(st.true_bits(0))
            seen.update(types[-1])
        for a in range(1, (total + 1) // 2):
            b = total - a
            if b > len(states) or not _bits_match(bits[a - 1], bits[b - 1], mode):
                continue
            pi = embed(types[a - 1], types[b - 1], mode)
            if pi is None:
                continue
            w = _attack(p, claimed, pump, kill, a, b, pi, states, mode)
            if w is not None:
                return w
        total += 1
    return None


def _attack(p, claimed, pump, kill, n, m, pi, states, mode) -> AdversaryWitness | None:
    small, large = states[n - 1].copy(), states[m - 1].copy()
    build_s = [Change(pump, j) for j in range(1, n + 1)]
    build_l = [Change(pump, j) for j in range(1, m + 1)]
    kill_s, kill_l = [], []
    for j in range(1, n + 1):
        small = step(small, [kill], np.array([j]))
        large = step(large, [kill], np.array([pi[j - 1]]))
        kill_s.append(Change(kill, j))
        kill_l.append(Change(kill, pi[j - 1]))
        if not _structure_agrees(small, large, pi, mode):
            raise SubstructureViolation(
                f"{p.name}: {mode} substructure lost after {j} changes (n={n}, m={m}, pi={pi})")
    b_s, b_l = bool(small.query()[0]), bool(large.query()[0])
    w_s, w_l = small.word(0), large.word(0)
    o_s = dfa_accepts(claimed, [c for c in w_s if c is not EPS])
    o_l = dfa_accepts(claimed, [c for c in w_l if c is not EPS])
    if b_s == o_s and b_l == o_l:
        return None
    which = "small" if b_s != o_s else "large"
    return AdversaryWitness(p.name, mode, n, m, list(pi), build_s + kill_s, build_l + kill_l,
                            which, w_s if which == "small" else w_l,
                            o_s if which == "small" else o_l,
                            b_s if which == "small" else b_l,
                            b_l if which == "small" else b_s)


# -- randomized substructure check ------------------------------------------------------


@dataclass
class SubstructureReport:
    program: str
    mode: str
    instances: int
    violations: int
    elapsed: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _restrict(st: BatchState, idx: np.ndarray, rng, mode: str, drop: float) -> BatchState:
    """Per-row restriction to the (1-based, increasing) positions ``idx``."""
    B, n = idx.shape
    rows = np.arange(B)[:, None]

    def cut(arr):
        out = np.zeros((B, n + 2), dtype=arr.dtype)
        out[:, 1:n + 1] = arr[rows, idx]
        return out

    rels = {k: cut(v) for k, v in st.relations.items()}
    bits = {k: v.copy() for k, v in st.bits.items()}
    if mode == "monotone":
        for k in rels:
            rels[k] &= rng.random(rels[k].shape) >= drop
        for k in bits:
            bits[k] &= rng.random(B) >= drop
    return BatchState(st.program, n, cut(st.letters), cut(st.old), rels, bits)


def _agree_batch(small: BatchState, large: BatchState, idx: np.ndarray, mode: str) -> np.ndarray:
    B, n = idx.shape
    rows = np.arange(B)[:, None]
    ok = (small.letters[:, 1:n + 1] == large.letters[rows, idx]).all(axis=1)
    ok &= (small.old[:, 1:n + 1] == large.old[rows, idx]).all(axis=1)
    for k in small.relations:
        s, l = small.relations[k][:, 1:n + 1], large.relations[k][rows, idx]
        ok &= ((s == l) if mode == "exact" else (~s | l)).all(axis=1)
    for k in small.bits:
        s, l = small.bits[k], large.bits[k]
        ok &= (s == l) if mode == "exact" else (~s | l)
    return ok


def substructure_trials(p: DynamicProgram, mode: str, instances: int = 10_000,
                        n_max: int = 12, changes: int = 6, batch: int = 500,
                        seed: int = 0, drop: float = 0.3) -> SubstructureReport:
    """Random check of the substructure property behind the adversary.

    Each instance reaches a random word of length m <= n_max, restricts it to
    a random subset of n < m positions (dropping random relation entries in
    monotone mode) and applies the same random changes to both, mapped by
    the embedding; the restricted structure must stay isomorphic (exact) or
    contained (monotone) after every change.
    """
    _check_fragment_for(p, mode)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    symbols = list(p.symbols)
    bad = done = 0
    while done < instances:
        B = min(batch, instances - done)
        m = int(rng.integers(2, n_max + 1))
        n = int(rng.integers(1, m))
        large = init_batch(p, m, B=B)
        for _ in range(2 * m):
            large = step(large, [symbols[k] for k in rng.integers(len(symbols), size=B)],
                         rng.integers(1, m + 1, size=B))
        idx = np.sort(np.argsort(rng.random((B, m)), axis=1)[:, :n], axis=1) + 1
        small = _restrict(large, idx, rng, mode, drop)
        ok = _agree_batch(small, large, idx, mode)
        for _ in range(changes):
            sym = [symbols[k] for k in rng.integers(len(symbols), size=B)]
            j = rng.integers(1, n + 1, size=B)
            small = step(small, sym, j)
            large = step(large, sym, idx[np.arange(B), j - 1])
            ok &= _agree_batch(small, large, idx, mode)
        bad += int((~ok).sum())
        done += B
    return SubstructureReport(p.name, mode, instances, bad, time.perf_counter() - t0)
