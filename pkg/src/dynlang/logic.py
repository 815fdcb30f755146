"""First-order formulas over words with unary auxiliary relations.

Formulas are hash-consed DAG nodes: building the same formula twice returns
the same object, so large update formulas share subterms and the evaluator
can memoize per node.  Quantifiers may appear anywhere; ``prenex`` produces
the prenex form when one is wanted and ``check_fragment`` decides fragment
membership by polarity analysis, which agrees with the prenex form.

Positions are integers.  The term ``y`` is the changed position in update
formulas and ``x`` the argument of a unary relation update, but nothing here
treats those names specially.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np


class FormulaError(ValueError):
    pass


class Formula:
    __slots__ = ("kind", "args", "free", "__weakref__")

    def __init__(self, kind: str, args: tuple, free: frozenset):
        self.kind = kind
        self.args = args
        self.free = free

    def __repr__(self):
        return f"Formula({to_sexpr(self, limit=200)})"

    def __str__(self):
        return to_sexpr(self)

    # readable operators for hand-written fixtures
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


_TABLE: dict = {}
_ATOMS = ("letter", "old", "rel", "bit", "leq", "eq")


def _mk(kind: str, args: tuple, free: frozenset) -> Formula:
    key = (kind, args)
    node = _TABLE.get(key)
    if node is None:
        node = Formula(kind, args, free)
        _TABLE[key] = node
    return node


TRUE = _mk("true", (), frozenset())
FALSE = _mk("false", (), frozenset())


def _var(t) -> str:
    if not isinstance(t, str) or not t or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t):
        raise FormulaError(f"bad variable name {t!r}")
    return t


def W(sym: str, t: str) -> Formula:
    return _mk("letter", (sym, _var(t)), frozenset((t,)))


def Wo(sym: str, t: str) -> Formula:
    """Old letter: the symbol held at ``t`` before the current change."""
    return _mk("old", (sym, _var(t)), frozenset((t,)))


def Rel(name: str, t: str) -> Formula:
    return _mk("rel", (name, _var(t)), frozenset((t,)))


def Bit(name: str) -> Formula:
    return _mk("bit", (name,), frozenset())


def Leq(s: str, t: str) -> Formula:
    if s == t:
        return TRUE
    return _mk("leq", (_var(s), _var(t)), frozenset((s, t)))


def Eq(s: str, t: str) -> Formula:
    if s == t:
        return TRUE
    s, t = sorted((_var(s), _var(t)))
    return _mk("eq", (s, t), frozenset((s, t)))


def Not(f: Formula) -> Formula:
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    if f.kind == "not":
        return f.args[0]
    return _mk("not", (f,), f.free)


def _nary(kind: str, unit: Formula, zero: Formula, fs) -> Formula:
    out, seen = [], set()
    for f in fs:
        if isinstance(f, (list, tuple)):
            f = _nary(kind, unit, zero, f)
        if f is zero:
            return zero
        if f is unit:
            continue
        parts = f.args if f.kind == kind else (f,)
        for p in parts:
            if p not in seen:
                seen.add(p)
                out.append(p)
    if not out:
        return unit
    if len(out) == 1:
        return out[0]
    return _mk(kind, tuple(out), frozenset().union(*(p.free for p in out)))


def And(*fs) -> Formula:
    return _nary("and", TRUE, FALSE, fs)


def Or(*fs) -> Formula:
    return _nary("or", FALSE, TRUE, fs)


def Exists(v, f: Formula) -> Formula:
    if isinstance(v, (list, tuple)):
        for u in reversed(v):
            f = Exists(u, f)
        return f
    if f is FALSE:
        return FALSE
    return _mk("exists", (_var(v), f), f.free - {v})


def Forall(v, f: Formula) -> Formula:
    if isinstance(v, (list, tuple)):
        for u in reversed(v):
            f = Forall(u, f)
        return f
    if f is TRUE:
        return TRUE
    return _mk("forall", (_var(v), f), f.free - {v})


def Lt(s: str, t: str) -> Formula:
    """``s < t``, written with a negated order atom."""
    if s == t:
        return FALSE
    return Not(Leq(t, s))


def Neq(s: str, t: str) -> Formula:
    return Or(Lt(s, t), Lt(t, s))


def Implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def WEps(t: str, alphabet: Iterable[str], old: bool = False) -> Formula:
    atom = Wo if old else W
    return And(*[Not(atom(s, t)) for s in alphabet])


def is_min(v: str, helper: str = "i_") -> Formula:
    return Forall(helper, Leq(v, helper))


def is_max(v: str, helper: str = "i_") -> Formula:
    return Forall(helper, Leq(helper, v))


# -- traversal --------------------------------------------------------------


def nodes(f: Formula) -> list[Formula]:
    """All distinct nodes, children before parents."""
    out, seen, stack = [], set(), [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            out.append(g)
            continue
        if g in seen:
            continue
        seen.add(g)
        stack.append((g, True))
        for c in _children(g):
            if c not in seen:
                stack.append((c, False))
    return out


def _children(f: Formula) -> tuple:
    if f.kind in ("and", "or"):
        return f.args
    if f.kind == "not":
        return f.args
    if f.kind in ("exists", "forall"):
        return (f.args[1],)
    return ()


def size(f: Formula) -> int:
    return len(nodes(f))


def atoms(f: Formula) -> set[Formula]:
    return {g for g in nodes(f) if g.kind in _ATOMS}


def relation_names(f: Formula) -> set[str]:
    return {g.args[0] for g in nodes(f) if g.kind == "rel"}


def bit_names(f: Formula) -> set[str]:
    return {g.args[0] for g in nodes(f) if g.kind == "bit"}


def letters_used(f: Formula) -> set[str]:
    return {g.args[0] for g in nodes(f) if g.kind in ("letter", "old")}


_fresh = itertools.count()


def fresh(base: str) -> str:
    base = base.split("_")[0] or "v"
    return f"{base}_{next(_fresh)}"


def map_atoms(f: Formula, fn: Callable[[Formula], Formula | None]) -> Formula:
    """Rebuild ``f`` replacing each atom ``a`` by ``fn(a)`` when that is not None.

    Replacements may have free variables; the caller is responsible for them
    not being captured (use ``substitute`` for variable renaming).
    """
    memo: dict = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is not None:
            return r
        k = g.kind
        if k in _ATOMS:
            r = fn(g)
            if r is None:
                r = g
        elif k == "not":
            r = Not(go(g.args[0]))
        elif k == "and":
            r = And(*[go(c) for c in g.args])
        elif k == "or":
            r = Or(*[go(c) for c in g.args])
        elif k == "exists":
            r = Exists(g.args[0], go(g.args[1]))
        elif k == "forall":
            r = Forall(g.args[0], go(g.args[1]))
        else:
            r = g
        memo[g] = r
        return r

    return go(f)


def _rebuild_atom(g: Formula, ren: Callable[[str], str]) -> Formula:
    k, a = g.kind, g.args
    if k == "letter":
        return W(a[0], ren(a[1]))
    if k == "old":
        return Wo(a[0], ren(a[1]))
    if k == "rel":
        return Rel(a[0], ren(a[1]))
    if k == "leq":
        return Leq(ren(a[0]), ren(a[1]))
    if k == "eq":
        return Eq(ren(a[0]), ren(a[1]))
    return g


def substitute(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Capture-avoiding renaming of free variables."""
    mapping = {k: v for k, v in mapping.items() if k != v and k in f.free}
    if not mapping:
        return f
    memo: dict = {}

    def go(g: Formula, m: tuple) -> Formula:
        m = tuple(kv for kv in m if kv[0] in g.free)
        if not m:
            return g
        key = (g, m)
        r = memo.get(key)
        if r is not None:
            return r
        md = dict(m)
        k = g.kind
        if k in _ATOMS:
            r = _rebuild_atom(g, lambda t: md.get(t, t))
        elif k == "not":
            r = Not(go(g.args[0], m))
        elif k == "and":
            r = And(*[go(c, m) for c in g.args])
        elif k == "or":
            r = Or(*[go(c, m) for c in g.args])
        else:
            v, body = g.args
            if v in md.values():
                nv = fresh(v)
                inner = tuple(sorted({**md, v: nv}.items()))
            else:
                nv, inner = v, m
            body2 = go(body, inner)
            r = Exists(nv, body2) if k == "exists" else Forall(nv, body2)
        memo[key] = r
        return r

    return go(f, tuple(sorted(mapping.items())))


def instantiate(template: Formula, params: Sequence[str], args: Sequence[str]) -> Formula:
    if len(params) != len(args):
        raise FormulaError("macro arity mismatch")
    return substitute(template, dict(zip(params, args)))


# -- fragments --------------------------------------------------------------

FRAGMENTS = ("Prop", "Prop+", "Sigma1", "Sigma1+", "Sigma2", "Sigma2+")
_ALIASES = {
    "prop": "Prop", "prop+": "Prop+", "prop⁺": "Prop+",
    "sigma1": "Sigma1", "σ1": "Sigma1", "σ₁": "Sigma1", "s1": "Sigma1",
    "sigma1+": "Sigma1+", "σ1+": "Sigma1+", "σ₁⁺": "Sigma1+", "s1+": "Sigma1+",
    "sigma2": "Sigma2", "σ2": "Sigma2", "σ₂": "Sigma2", "s2": "Sigma2",
    "sigma2+": "Sigma2+", "σ2+": "Sigma2+", "σ₂⁺": "Sigma2+", "s2+": "Sigma2+",
}
_ORDER = {"Prop": 0, "Sigma1": 1, "Sigma2": 2}


def fragment_tag(name: str) -> str:
    if name in FRAGMENTS:
        return name
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise FormulaError(f"unknown fragment {name!r}") from None


def fragment_includes(outer: str, inner: str) -> bool:
    """True if every ``inner`` formula is an ``outer`` formula."""
    outer, inner = fragment_tag(outer), fragment_tag(inner)
    if outer.endswith("+") and not inner.endswith("+"):
        return False
    return _ORDER[outer.rstrip("+")] >= _ORDER[inner.rstrip("+")]


@dataclass(frozen=True)
class FragmentResult:
    ok: bool
    diagnostic: str | None = None

    def __bool__(self):
        return self.ok


def check_fragment(f: Formula, tag: str) -> FragmentResult:
    """Decide membership of ``f`` (up to prenexing) in a fragment.

    A quantifier counts as existential when it sits under an even number of
    negations.  Prop forbids quantifiers, Sigma1 allows only existential
    ones and Sigma2 forbids an existential under a universal.  The ``+``
    variants also require every negation to sit directly on an order atom.
    """
    tag = fragment_tag(tag)
    level = _ORDER[tag.rstrip("+")]
    positive = tag.endswith("+")
    seen = set()
    stack = [(f, True, False)]  # node, positive polarity, under a universal
    while stack:
        g, pol, under_all = stack.pop()
        key = (g, pol, under_all)
        if key in seen:
            continue
        seen.add(key)
        k = g.kind
        if k in _ATOMS:
            if positive and not pol and k != "leq":
                what = "equality" if k == "eq" else {
                    "rel": "unary relation", "bit": "bit", "letter": "letter",
                    "old": "old letter"}[k]
                return FragmentResult(False, f"negation on {what}: {to_sexpr(g)}")
            continue
        if k == "not":
            stack.append((g.args[0], not pol, under_all))
        elif k in ("and", "or"):
            for c in reversed(g.args):
                stack.append((c, pol, under_all))
        elif k in ("exists", "forall"):
            existential = (k == "exists") == pol
            if level == 0:
                return FragmentResult(False, f"quantifier in Prop formula: {to_sexpr(g, limit=80)}")
            if level == 1 and not existential:
                return FragmentResult(False, f"universal quantifier in Sigma1 formula: {to_sexpr(g, limit=80)}")
            if level == 2 and existential and under_all:
                return FragmentResult(False, f"existential under universal: {to_sexpr(g, limit=80)}")
            stack.append((g.args[1], pol, under_all or not existential))
    return FragmentResult(True)


# -- normal forms -------------------------------------------------------------


def nnf(f: Formula) -> Formula:
    """Negation normal form (tree-expanding only where polarity differs)."""
    memo: dict = {}

    def go(g: Formula, pol: bool) -> Formula:
        key = (g, pol)
        r = memo.get(key)
        if r is not None:
            return r
        k = g.kind
        if k in _ATOMS or k in ("true", "false"):
            r = g if pol else Not(g)
        elif k == "not":
            r = go(g.args[0], not pol)
        elif k in ("and", "or"):
            parts = [go(c, pol) for c in g.args]
            r = And(*parts) if (k == "and") == pol else Or(*parts)
        else:
            v, body = g.args
            b = go(body, pol)
            r = Exists(v, b) if (k == "exists") == pol else Forall(v, b)
        memo[key] = r
        return r

    return go(f, True)


def prenex(f: Formula) -> Formula:
    """Prenex form with existential quantifiers pulled out first.

    Bound variables are renamed apart.  Pulling a quantifier across a
    disjunction assumes a non-empty domain, which holds for every n >= 1.
    The result is expanded into a tree, so this is meant for inspection and
    tests rather than for large program formulas.
    """
    g = nnf(f)
    prefix: list = []

    def pull(h: Formula) -> Formula:
        k = h.kind
        if k in ("and", "or"):
            parts = [pull(c) for c in h.args]
            return And(*parts) if k == "and" else Or(*parts)
        if k in ("exists", "forall"):
            v, body = h.args
            nv = fresh(v)
            prefix.append((k, nv))
            return pull(substitute(body, {v: nv}))
        return h

    matrix = pull(g)
    ex = [v for q, v in prefix if q == "exists"]
    al = [v for q, v in prefix if q == "forall"]
    # order of blocks: all existentials first, then all universals; valid when
    # no existential lies under a universal, otherwise keep the original order
    if check_fragment(f, "Sigma2"):
        out = Forall(al, matrix)
        return Exists(ex, out)
    out = matrix
    for q, v in reversed(prefix):
        out = Exists(v, out) if q == "exists" else Forall(v, out)
    return out


def quantifier_prefix(f: Formula) -> tuple[list, Formula]:
    prefix = []
    while f.kind in ("exists", "forall"):
        prefix.append(("∃" if f.kind == "exists" else "∀", f.args[0]))
        f = f.args[1]
    return prefix, f


def is_prenex(f: Formula) -> bool:
    _, matrix = quantifier_prefix(f)
    return all(g.kind not in ("exists", "forall") for g in nodes(matrix))


# -- s-expressions ------------------------------------------------------------


def to_sexpr(f: Formula, macros: Mapping[Formula, str] | None = None,
             limit: int | None = None) -> str:
    """Text form.  Nodes listed in ``macros`` print as ``(@NAME vars...)``."""
    out: list[str] = []
    budget = [limit if limit is not None else -1]

    def emit(s: str):
        out.append(s)
        if budget[0] >= 0:
            budget[0] -= len(s)
            if budget[0] < 0:
                raise _Truncated

    def go(g: Formula, top: bool):
        if macros and not top and g in macros:
            emit("(@" + macros[g] + "".join(" " + v for v in sorted(g.free)) + ")")
            return
        k, a = g.kind, g.args
        if k == "true":
            emit("true")
        elif k == "false":
            emit("false")
        elif k == "letter":
            emit(f"(W_{a[0]} {a[1]})")
        elif k == "old":
            emit(f"(Wo_{a[0]} {a[1]})")
        elif k == "rel":
            emit(f"({a[0]} {a[1]})")
        elif k == "bit":
            emit(f"({a[0]})")
        elif k == "leq":
            emit(f"(<= {a[0]} {a[1]})")
        elif k == "eq":
            emit(f"(= {a[0]} {a[1]})")
        elif k == "not":
            c = a[0]
            if c.kind == "leq":
                emit(f"(< {c.args[1]} {c.args[0]})")
            else:
                emit("(not ")
                go(c, False)
                emit(")")
        elif k in ("and", "or"):
            emit(f"({k}")
            for c in a:
                emit(" ")
                go(c, False)
            emit(")")
        else:
            emit(f"({k} {a[0]} ")
            go(a[1], False)
            emit(")")

    try:
        go(f, True)
    except _Truncated:
        return "".join(out)[:limit] + "..."
    return "".join(out)


class _Truncated(Exception):
    pass


def shared_nodes(roots: Iterable[Formula], min_size: int = 4) -> list[Formula]:
    """Non-atomic nodes referenced more than once across ``roots`` (children first)."""
    refs: dict = {}
    order: list = []
    sizes: dict = {}
    for r in roots:
        for g in nodes(r):
            if g not in sizes:
                order.append(g)
                sizes[g] = 1 + sum(sizes[c] for c in _children(g))
                for c in _children(g):
                    refs[c] = refs.get(c, 0) + 1
        refs[r] = refs.get(r, 0) + 1
    return [g for g in order
            if refs.get(g, 0) > 1 and sizes[g] >= min_size and g.kind not in _ATOMS]


class SexprError(FormulaError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokens(text: str):
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise SexprError("unexpected character", pos)
            return
        pos = m.end()
        tok = m.group(1) or m.group(2) or m.group(3)
        yield tok, m.start(m.lastindex)


def _read(text: str):
    stack: list = [[]]
    for tok, pos in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'", pos)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SexprError("unbalanced '('", len(text))
    if len(stack[0]) != 1:
        raise SexprError("expected exactly one expression", 0)
    return stack[0][0]


def parse_sexpr(text: str, macros: Mapping[str, tuple] | None = None) -> Formula:
    """Parse the text form.  ``macros`` maps a name to ``(params, formula)``."""
    macros = macros or {}

    def term(t) -> str:
        if not isinstance(t, str):
            raise FormulaError(f"expected a variable, got {t!r}")
        return _var(t)

    def go(e) -> Formula:
        if isinstance(e, str):
            if e == "true":
                return TRUE
            if e == "false":
                return FALSE
            raise FormulaError(f"unexpected token {e!r}")
        if not e:
            raise FormulaError("empty list")
        head, rest = e[0], e[1:]
        if not isinstance(head, str):
            raise FormulaError("list head must be an operator")
        if head == "not":
            _arity(head, rest, 1)
            return Not(go(rest[0]))
        if head == "and":
            return And(*[go(c) for c in rest])
        if head == "or":
            return Or(*[go(c) for c in rest])
        if head in ("exists", "forall"):
            _arity(head, rest, 2)
            vs = rest[0] if isinstance(rest[0], list) else [rest[0]]
            body = go(rest[1])
            return (Exists if head == "exists" else Forall)([term(v) for v in vs], body)
        if head in ("<=", "=", "<"):
            _arity(head, rest, 2)
            s, t = term(rest[0]), term(rest[1])
            return {"<=": Leq, "=": Eq, "<": Lt}[head](s, t)
        if head.startswith("@"):
            name = head[1:]
            if name not in macros:
                raise FormulaError(f"unknown macro {name!r}")
            params, body = macros[name]
            return instantiate(body, params, [term(t) for t in rest])
        if head.startswith("Wo_"):
            _arity(head, rest, 1)
            return Wo(head[3:], term(rest[0]))
        if head.startswith("W_"):
            _arity(head, rest, 1)
            return W(head[2:], term(rest[0]))
        if not rest:
            return Bit(head)
        _arity(head, rest, 1)
        return Rel(head, term(rest[0]))

    return go(_read(text))


def _arity(head, rest, k):
    if len(rest) != k:
        raise FormulaError(f"{head} expects {k} argument(s), got {len(rest)}")


# -- evaluation -----------------------------------------------------------------


class Table:
    """Truth table over free variables: axis 0 is the batch, then one axis per var."""

    __slots__ = ("vars", "arr")

    def __init__(self, vars: tuple, arr: np.ndarray):
        self.vars = vars
        self.arr = arr


class EvalContext:
    """Batched structures sharing one domain size.

    ``letters`` and ``old`` are integer arrays of shape (B, n+2) holding letter
    codes (0 is epsilon, symbol k is code k+1 in alphabet order).  Relations
    map names to boolean arrays of shape (B, n+2), bits to shape (B,).
    ``fixed`` assigns variables per batch element.  Quantifiers range over
    positions ``lo..hi`` inclusive.
    """

    def __init__(self, alphabet: Sequence[str], letters: np.ndarray, old: np.ndarray,
                 relations: Mapping[str, np.ndarray], bits: Mapping[str, np.ndarray],
                 fixed: Mapping[str, np.ndarray], lo: int, hi: int):
        self.codes = {s: i + 1 for i, s in enumerate(alphabet)}
        self.letters = letters
        self.old = old
        self.relations = relations
        self.bits = bits
        self.fixed = dict(fixed)
        self.lo, self.hi = lo, hi
        self.B, self.D = letters.shape
        self._rows = np.arange(self.B)
        self._pos = np.arange(self.D)
        self.memo: dict = {}
        self._partial: dict = {}

    def evaluate(self, f: Formula) -> Table:
        # iterative post-order evaluation avoids deep recursion on big DAGs
        memo = self.memo
        if f in memo:
            return memo[f]
        stack = [f]
        while stack:
            g = stack[-1]
            if g in memo:
                stack.pop()
                continue
            if g.kind in ("exists", "forall") and g.args[0] in self.fixed:
                memo[g] = self._shadowed(g)
                stack.pop()
                continue
            pending = [c for c in _children(g) if c not in memo]
            if pending and g.kind not in ("and", "or"):
                stack.extend(pending)
                continue
            if g.kind in ("and", "or"):
                r = self._junction(g, stack)
                if r is None:
                    continue
                memo[g] = r
            else:
                memo[g] = self._node(g)
            stack.pop()
        return memo[f]

    def _shadowed(self, g: Formula) -> Table:
        sub = EvalContext.__new__(EvalContext)
        sub.__dict__.update(self.__dict__)
        sub.fixed = {k: v for k, v in self.fixed.items() if k != g.args[0]}
        sub.memo = {}
        sub._partial = {}
        sub.evaluate(g.args[1])
        return sub._node(g)

    def _junction(self, g: Formula, stack: list) -> Table | None:
        # children are evaluated one at a time so that a decided junction
        # skips the rest; partial results survive between visits
        is_and = g.kind == "and"
        idx, acc_vars, acc = self._partial.pop(g, (0, (), None))
        args = g.args
        while idx < len(args):
            t = self.memo.get(args[idx])
            if t is None:
                self._partial[g] = (idx, acc_vars, acc)
                stack.append(args[idx])
                return None
            if acc is None:
                acc_vars, acc = t.vars, t.arr
            else:
                acc_vars, acc = self._combine(acc_vars, acc, t, is_and)
            idx += 1
            if is_and and not acc.any():
                return self._const(False)
            if not is_and and not acc_vars and acc.all():
                return self._const(True)
        return Table(acc_vars, acc)

    def _combine(self, va: tuple, a: np.ndarray, t: Table, is_and: bool):
        vb, b = t.vars, t.arr
        if va == vb:
            return va, (a & b) if is_and else (a | b)
        target = tuple(sorted(set(va) | set(vb)))
        a2 = self._align(va, a, target)
        b2 = self._align(vb, b, target)
        return target, (a2 & b2) if is_and else (a2 | b2)

    def _align(self, vars: tuple, arr: np.ndarray, target: tuple) -> np.ndarray:
        if vars == target:
            return arr
        shape = [arr.shape[0]]
        it = iter(arr.shape[1:])
        for v in target:
            shape.append(next(it) if v in vars else 1)
        return arr.reshape(shape)

    def _const(self, value: bool) -> Table:
        return Table((), np.full(1, value))

    def _term_free(self, t: str) -> bool:
        return t not in self.fixed

    def _node(self, g: Formula) -> Table:
        k, a = g.kind, g.args
        if k == "true":
            return self._const(True)
        if k == "false":
            return self._const(False)
        if k in ("letter", "old", "rel"):
            if k == "rel":
                try:
                    data = self.relations[a[0]]
                except KeyError:
                    raise FormulaError(f"unknown relation {a[0]!r}") from None
            else:
                code = self.codes.get(a[0])
                if code is None:
                    raise FormulaError(f"unknown symbol {a[0]!r}")
                src = self.letters if k == "letter" else self.old
                data = src == code
            t = a[1]
            if t in self.fixed:
                return Table((), data[self._rows, self.fixed[t]])
            return Table((t,), data)
        if k == "bit":
            try:
                return Table((), self.bits[a[0]])
            except KeyError:
                raise FormulaError(f"unknown bit {a[0]!r}") from None
        if k in ("leq", "eq"):
            return self._compare(k, a[0], a[1])
        if k == "not":
            t = self.memo[a[0]]
            return Table(t.vars, ~t.arr)
        if k in ("exists", "forall"):
            v = a[0]
            t = self.memo[a[1]]
            nonempty = self.hi >= self.lo
            if v not in t.vars:
                if nonempty:
                    return t
                return self._const(k == "forall")
            ax = 1 + t.vars.index(v)
            sl = [slice(None)] * t.arr.ndim
            sl[ax] = slice(self.lo, self.hi + 1)
            part = t.arr[tuple(sl)]
            r = part.any(axis=ax) if k == "exists" else part.all(axis=ax)
            return Table(t.vars[:ax - 1] + t.vars[ax:], r)
        raise FormulaError(f"cannot evaluate node kind {k}")

    def _compare(self, k: str, s: str, t: str) -> Table:
        op = np.less_equal if k == "leq" else np.equal
        fs, ft = s in self.fixed, t in self.fixed
        if fs and ft:
            return Table((), op(self.fixed[s], self.fixed[t]))
        if fs:
            return Table((t,), op(self.fixed[s][:, None], self._pos[None, :]))
        if ft:
            return Table((s,), op(self._pos[None, :], self.fixed[t][:, None]))
        grid = op(self._pos[:, None], self._pos[None, :])
        if s < t:
            return Table((s, t), grid[None])
        return Table((t, s), grid.T[None])

    def result(self, f: Formula, out_vars: tuple = ()) -> np.ndarray:
        """Evaluate and broadcast to shape (B, D, ...) over ``out_vars``."""
        t = self.evaluate(f)
        extra = set(t.vars) - set(out_vars)
        if extra:
            raise FormulaError(f"unbound variable(s): {', '.join(sorted(extra))}")
        target = tuple(sorted(out_vars))
        arr = self._align(t.vars, t.arr, target)
        arr = np.broadcast_to(arr, (self.B,) + (self.D,) * len(target))
        if target != tuple(out_vars):
            perm = [0] + [1 + target.index(v) for v in out_vars]
            arr = arr.transpose(perm)
        return arr


def eval_formula(f: Formula, w, aux, assignment: Mapping[str, int] | None = None,
                 alphabet: Sequence[str] | None = None, padded: bool = False) -> bool:
    """Evaluate a formula on one structure.

    ``w`` is a sequence of symbols (``None`` for epsilon) for positions 1..n,
    or an object with a ``letters`` attribute.  ``aux`` is a mapping or
    object offering ``relations`` (name -> set of positions), ``bits`` and
    optionally ``old`` (the pre-change letters).  With ``padded`` the domain
    is 0..n+1 and the two extra positions always carry epsilon.
    """
    letters = list(getattr(w, "letters", w))
    n = len(letters)
    rels = _get(aux, "relations", {})
    bits = _get(aux, "bits", {})
    old = list(_get(aux, "old", None) or letters)
    if alphabet is None:
        alphabet = sorted({s for s in letters + old if s is not None} | letters_used(f))
    codes = {s: i + 1 for i, s in enumerate(alphabet)}

    def encode(seq):
        row = np.zeros((1, n + 2), dtype=np.int64)
        for i, s in enumerate(seq, start=1):
            if s is not None:
                if s not in codes:
                    raise FormulaError(f"unknown symbol {s!r}")
                row[0, i] = codes[s]
        return row

    relarr = {}
    for name, pos in rels.items():
        arr = np.zeros((1, n + 2), dtype=bool)
        for p in pos:
            arr[0, p] = True
        relarr[name] = arr
    bitarr = {k: np.array([bool(v)]) for k, v in bits.items()}
    assignment = dict(assignment or {})
    missing = f.free - set(assignment)
    if missing:
        raise FormulaError(f"unbound variable(s): {', '.join(sorted(missing))}")
    fixed = {k: np.array([v]) for k, v in assignment.items()}
    lo, hi = (0, n + 1) if padded else (1, n)
    ctx = EvalContext(alphabet, encode(letters), encode(old), relarr, bitarr, fixed, lo, hi)
    return bool(ctx.result(f)[0])


def _get(obj, name, default):
    if obj is None:
        return default
    if isinstance(obj, Mapping):
        return obj.get(name, default)
    return getattr(obj, name, default)


def eval_naive(f: Formula, letters: Sequence, old: Sequence, relations: Mapping[str, set],
               bits: Mapping[str, bool], assignment: Mapping[str, int], lo: int, hi: int) -> bool:
    """Direct recursive evaluator, used as an independent check of ``EvalContext``.

    ``letters`` and ``old`` are indexed by position (index 0 is position 0).
    """
    k, a = f.kind, f.args
    if k == "true":
        return True
    if k == "false":
        return False
    if k == "letter":
        return letters[assignment[a[1]]] == a[0]
    if k == "old":
        return old[assignment[a[1]]] == a[0]
    if k == "rel":
        return assignment[a[1]] in relations[a[0]]
    if k == "bit":
        return bool(bits[a[0]])
    if k == "leq":
        return assignment[a[0]] <= assignment[a[1]]
    if k == "eq":
        return assignment[a[0]] == assignment[a[1]]
    if k == "not":
        return not eval_naive(a[0], letters, old, relations, bits, assignment, lo, hi)
    if k == "and":
        return all(eval_naive(c, letters, old, relations, bits, assignment, lo, hi) for c in a)
    if k == "or":
        return any(eval_naive(c, letters, old, relations, bits, assignment, lo, hi) for c in a)
    v, body = a
    vals = (eval_naive(body, letters, old, relations, bits, {**assignment, v: p}, lo, hi)
            for p in range(lo, hi + 1))
    return any(vals) if k == "exists" else all(vals)
