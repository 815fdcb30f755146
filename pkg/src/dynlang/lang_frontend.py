"""Regular expressions, minimal DFAs and word acceptance.

Regex syntax: ``+`` is union, juxtaposition is concatenation, ``*`` is the
Kleene star, ``1`` denotes the empty word and ``0`` the empty language.
Every other non-blank character is a letter and must belong to the alphabet.

Words are sequences whose entries are alphabet symbols or ``EPS`` (``None``),
the marker for an empty position.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

EPS = None

_RESERVED = set("+*()01")


class RegexSyntaxError(ValueError):
    """Malformed regular expression; ``pos`` is the offending character index."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class RegexAst:
    kind: str  # empty, epsilon, letter, union, concat, star
    children: tuple = ()
    symbol: str | None = None
    alphabet: frozenset = frozenset()

    def depth(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.depth() for c in self.children)

    def __str__(self) -> str:
        if self.kind == "empty":
            return "0"
        if self.kind == "epsilon":
            return "1"
        if self.kind == "letter":
            return self.symbol
        if self.kind == "star":
            inner = str(self.children[0])
            if self.children[0].kind in ("union", "concat"):
                inner = f"({inner})"
            return inner + "*"
        if self.kind == "concat":
            parts = []
            for c in self.children:
                s = str(c)
                parts.append(f"({s})" if c.kind == "union" else s)
            return "".join(parts)
        return "+".join(str(c) for c in self.children)


class _Parser:
    def __init__(self, src: str, alphabet: frozenset):
        self.toks = [(i, ch) for i, ch in enumerate(src) if not ch.isspace()]
        self.k = 0
        self.end = len(src)
        self.alphabet = alphabet

    def peek(self):
        return self.toks[self.k][1] if self.k < len(self.toks) else None

    def pos(self):
        return self.toks[self.k][0] if self.k < len(self.toks) else self.end

    def node(self, kind, children=(), symbol=None):
        return RegexAst(kind, tuple(children), symbol, self.alphabet)

    def parse(self) -> RegexAst:
        if not self.toks:
            raise RegexSyntaxError("empty expression", 0)
        tree = self.union()
        if self.peek() is not None:
            if self.peek() == ")":
                raise RegexSyntaxError("unbalanced parenthesis", self.pos())
            raise RegexSyntaxError(f"unexpected {self.peek()!r}", self.pos())
        return tree

    def union(self):
        parts = [self.concat()]
        while self.peek() == "+":
            self.k += 1
            parts.append(self.concat())
        return parts[0] if len(parts) == 1 else self.node("union", parts)

    def concat(self):
        parts = []
        while self.peek() is not None and self.peek() not in "+)":
            parts.append(self.starred())
        if not parts:
            raise RegexSyntaxError("missing operand", self.pos())
        return parts[0] if len(parts) == 1 else self.node("concat", parts)

    def starred(self):
        base = self.atom()
        while self.peek() == "*":
            self.k += 1
            base = self.node("star", [base])
        return base

    def atom(self):
        ch, at = self.peek(), self.pos()
        if ch == "(":
            self.k += 1
            inner = self.union()
            if self.peek() != ")":
                raise RegexSyntaxError("unbalanced parenthesis", at)
            self.k += 1
            return inner
        if ch == "*":
            raise RegexSyntaxError("star without operand", at)
        self.k += 1
        if ch == "1":
            return self.node("epsilon")
        if ch == "0":
            return self.node("empty")
        if ch not in self.alphabet:
            raise RegexSyntaxError(f"symbol {ch!r} outside alphabet", at)
        return self.node("letter", symbol=ch)


def parse_regex(src: str, alphabet: Iterable[str]) -> RegexAst:
    alphabet = frozenset(alphabet)
    if not alphabet:
        raise ValueError("alphabet must be non-empty")
    bad = [a for a in alphabet if len(a) != 1 or a in _RESERVED or a.isspace()]
    if bad:
        raise ValueError(f"regex alphabet symbols must be single non-reserved characters: {bad}")
    return _Parser(src, alphabet).parse()


def guess_alphabet(src: str) -> list[str]:
    """Default alphabet: ``a`` up to the largest lowercase letter used.

    So ``(aa)*`` is read over ``{a}`` while ``b*`` is read over ``{a, b}``.
    Expressions using other characters get exactly the characters they use.
    """
    used = {ch for ch in src if not ch.isspace() and ch not in _RESERVED}
    if used and all("a" <= ch <= "z" for ch in used):
        return [chr(c) for c in range(ord("a"), ord(max(used)) + 1)]
    return sorted(used) or ["a"]


@dataclass(frozen=True)
class Dfa:
    """Complete DFA. ``delta[q][c]`` is indexed by the position of a symbol in ``alphabet``."""

    size: int
    alphabet: tuple
    delta: tuple
    start: int
    accepting: frozenset

    def __post_init__(self):
        if len(self.delta) != self.size:
            raise ValueError("transition table must have one row per state")
        for row in self.delta:
            if len(row) != len(self.alphabet) or any(not 0 <= t < self.size for t in row):
                raise ValueError("transition table is not total")

    def letter_index(self, sym) -> int:
        try:
            return self.alphabet.index(sym)
        except ValueError:
            raise KeyError(f"unknown symbol {sym!r}") from None

    def run(self, word: Sequence, state: int | None = None) -> int:
        q = self.start if state is None else state
        for sym in word:
            if sym is EPS:
                continue
            q = self.delta[q][self.letter_index(sym)]
        return q

    def reachable(self) -> set:
        seen, todo = {self.start}, [self.start]
        while todo:
            q = todo.pop()
            for t in self.delta[q]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen


def dfa_accepts(d: Dfa, word: Sequence) -> bool:
    return d.run(word) in d.accepting


# -- construction ---------------------------------------------------------


class _Nfa:
    def __init__(self):
        self.eps: list[list[int]] = []
        self.moves: list[dict] = []

    def state(self) -> int:
        self.eps.append([])
        self.moves.append({})
        return len(self.eps) - 1


def _thompson(nfa: _Nfa, r: RegexAst) -> tuple[int, int]:
    s, f = nfa.state(), nfa.state()
    if r.kind == "epsilon":
        nfa.eps[s].append(f)
    elif r.kind == "letter":
        nfa.moves[s].setdefault(r.symbol, []).append(f)
    elif r.kind == "union":
        for c in r.children:
            cs, cf = _thompson(nfa, c)
            nfa.eps[s].append(cs)
            nfa.eps[cf].append(f)
    elif r.kind == "concat":
        cur = s
        for c in r.children:
            cs, cf = _thompson(nfa, c)
            nfa.eps[cur].append(cs)
            cur = cf
        nfa.eps[cur].append(f)
    elif r.kind == "star":
        cs, cf = _thompson(nfa, r.children[0])
        nfa.eps[s] += [cs, f]
        nfa.eps[cf] += [cs, f]
    return s, f


def _closure(nfa: _Nfa, states) -> frozenset:
    seen, todo = set(states), list(states)
    while todo:
        q = todo.pop()
        for t in nfa.eps[q]:
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def _subset(r: RegexAst) -> Dfa:
    nfa = _Nfa()
    s, f = _thompson(nfa, r)
    alphabet = tuple(sorted(r.alphabet))
    start = _closure(nfa, [s])
    index, rows, todo = {start: 0}, [], deque([start])
    order = [start]
    while todo:
        cur = todo.popleft()
        row = []
        for a in alphabet:
            nxt = _closure(nfa, [t for q in cur for t in nfa.moves[q].get(a, ())])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                todo.append(nxt)
            row.append(index[nxt])
        rows.append(tuple(row))
    accepting = frozenset(i for i, S in enumerate(order) if f in S)
    return Dfa(len(order), alphabet, tuple(rows), 0, accepting)


def minimize(d: Dfa) -> Dfa:
    """Moore partition refinement on the reachable part, then canonical numbering."""
    live = sorted(d.reachable())
    block = {q: int(q in d.accepting) for q in live}
    while True:
        sig = {q: (block[q],) + tuple(block[t] for t in d.delta[q]) for q in live}
        ids: dict = {}
        new = {q: ids.setdefault(sig[q], len(ids)) for q in live}
        if len(ids) == len(set(block.values())):
            block = new
            break
        block = new
    reps = {}
    for q in live:
        reps.setdefault(block[q], q)
    quotient = {b: tuple(block[t] for t in d.delta[q]) for b, q in reps.items()}
    accept = {block[q] for q in live if q in d.accepting}
    return _canonical(quotient, block[d.start], accept, d.alphabet)


def _canonical(table: dict, start, accept, alphabet) -> Dfa:
    """Renumber states in BFS order from the start, following sorted letters."""
    number, order, todo = {start: 0}, [start], deque([start])
    while todo:
        q = todo.popleft()
        for t in table[q]:
            if t not in number:
                number[t] = len(order)
                order.append(t)
                todo.append(t)
    rows = tuple(tuple(number[t] for t in table[q]) for q in order)
    return Dfa(len(order), tuple(alphabet), rows, 0, frozenset(number[q] for q in accept if q in number))


def compile_min_dfa(r: RegexAst) -> Dfa:
    return minimize(_subset(r))


def regex_dfa(src: str, alphabet: Iterable[str] | None = None) -> Dfa:
    """Shortcut: parse and compile; the alphabet defaults to ``guess_alphabet``."""
    if alphabet is None:
        alphabet = guess_alphabet(src)
    return compile_min_dfa(parse_regex(src, alphabet))


def dfa_from_table(alphabet: Sequence, delta: Sequence, start: int, accepting: Iterable[int]) -> Dfa:
    """Build and minimize a DFA given as an explicit table (symbols may be any strings)."""
    raw = Dfa(len(delta), tuple(alphabet), tuple(tuple(r) for r in delta), start, frozenset(accepting))
    order = sorted(range(len(alphabet)), key=lambda c: alphabet[c])
    if order != list(range(len(alphabet))):
        raw = Dfa(raw.size, tuple(alphabet[c] for c in order),
                  tuple(tuple(r[c] for c in order) for r in raw.delta), start, raw.accepting)
    return minimize(raw)


def dfa_inverse_morphism(d: Dfa, h: Mapping) -> Dfa:
    """DFA for h^-1(L(d)) where ``h`` maps new letters to words over d's alphabet."""
    alpha = sorted(h)
    delta = [[d.run(h[g], q) for g in alpha] for q in range(d.size)]
    return dfa_from_table(alpha, delta, d.start, d.accepting)


def dfa_quotient(d: Dfa, sym, side: str = "right") -> Dfa:
    """Right quotient L sym^-1 = {w : w sym in L} or left quotient sym^-1 L."""
    c = d.letter_index(sym)
    if side == "right":
        acc = [q for q in range(d.size) if d.delta[q][c] in d.accepting]
        return dfa_from_table(d.alphabet, d.delta, d.start, acc)
    if side == "left":
        return dfa_from_table(d.alphabet, d.delta, d.delta[d.start][c], d.accepting)
    raise ValueError(f"side must be left or right, got {side!r}")


def is_isomorphic(d1: Dfa, d2: Dfa) -> bool:
    """Canonically numbered DFAs are isomorphic iff their tables coincide."""
    return (d1.alphabet == d2.alphabet and d1.delta == d2.delta
            and d1.start == d2.start and d1.accepting == d2.accepting)


# -- text form ------------------------------------------------------------


def dfa_to_text(d: Dfa) -> str:
    lines = [f"states {d.size}", f"start {d.start}",
             "accept " + ",".join(str(q) for q in sorted(d.accepting))]
    for q, row in enumerate(d.delta):
        for c, t in enumerate(row):
            lines.append(f"trans {q},{d.alphabet[c]},{t}")
    return "\n".join(lines) + "\n"


def dfa_from_text(text: str) -> Dfa:
    size = start = None
    accepting: list[int] = []
    trans = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "states":
            size = int(rest)
        elif key == "start":
            start = int(rest)
        elif key == "accept":
            accepting = [int(x) for x in rest.split(",") if x.strip()]
        elif key == "trans":
            q, sym, t = [x.strip() for x in rest.split(",")]
            trans.append((int(q), sym, int(t)))
        else:
            raise ValueError(f"unknown DFA record {key!r}")
    if size is None or start is None:
        raise ValueError("DFA text needs 'states' and 'start' records")
    alphabet = tuple(sorted({s for _, s, _ in trans}))
    table = [[None] * len(alphabet) for _ in range(size)]
    for q, sym, t in trans:
        table[q][alphabet.index(sym)] = t
    if any(t is None for row in table for t in row):
        raise ValueError("DFA text does not define a total transition table")
    return Dfa(size, alphabet, tuple(tuple(r) for r in table), start, frozenset(accepting))
