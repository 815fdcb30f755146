"""Finite monoids, ordered monoids, Green's relations and semidirect products.

Elements are integers ``0..m-1``. Tables are numpy integer arrays and are
never mutated after construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .lang_frontend import EPS, Dfa, dfa_from_table


class AlgebraError(ValueError):
    pass


class ActionAxiomError(AlgebraError):
    def __init__(self, axiom: int, witness: tuple):
        super().__init__(f"left action violates axiom {axiom} at {witness}")
        self.axiom = axiom
        self.witness = witness


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


class FiniteMonoid:
    def __init__(self, mult, identity: int, names: Sequence[str] | None = None):
        mult = np.asarray(mult, dtype=np.int64)
        m = mult.shape[0]
        if mult.shape != (m, m) or m == 0:
            raise AlgebraError("multiplication table must be a non-empty square")
        if mult.min() < 0 or mult.max() >= m:
            raise AlgebraError("table entries out of range")
        if not 0 <= identity < m:
            raise AlgebraError("identity out of range")
        r = np.arange(m)
        if not (np.array_equal(mult[identity], r) and np.array_equal(mult[:, identity], r)):
            raise AlgebraError(f"element {identity} is not an identity")
        left = mult[mult]  # (xy)z
        right = mult[:, mult]  # x(yz)
        if not np.array_equal(left, right):
            x, y, z = map(int, np.argwhere(left != right)[0])
            raise AlgebraError(f"not associative at ({x},{y},{z})")
        self.mult = _frozen(mult)
        self.size = m
        self.identity = identity
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(m))
        if len(self.names) != m:
            raise AlgebraError("one name per element required")

    def __repr__(self):
        return f"FiniteMonoid(size={self.size}, names={list(self.names)})"

    def mul(self, x: int, y: int) -> int:
        return int(self.mult[x, y])

    def product(self, xs: Iterable[int]) -> int:
        acc = self.identity
        for x in xs:
            acc = int(self.mult[acc, x])
        return acc

    def index(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        return self.names.index(name)

    def elements(self) -> range:
        return range(self.size)

    def idempotents(self) -> list[int]:
        return [x for x in range(self.size) if self.mult[x, x] == x]

    def inverse(self, x: int) -> int | None:
        for y in range(self.size):
            if self.mult[x, y] == self.identity and self.mult[y, x] == self.identity:
                return y
        return None

    def is_isomorphic_to(self, other: "FiniteMonoid") -> bool:
        """Brute-force isomorphism test; only meant for the small fixture monoids."""
        if self.size != other.size:
            return False
        rest = [x for x in range(self.size) if x != self.identity]
        orest = [x for x in range(other.size) if x != other.identity]
        from itertools import permutations
        for perm in permutations(orest):
            f = {self.identity: other.identity, **dict(zip(rest, perm))}
            if all(f[int(self.mult[x, y])] == other.mult[f[x], f[y]]
                   for x in range(self.size) for y in range(self.size)):
                return True
        return False


class OrderedMonoid:
    def __init__(self, monoid: FiniteMonoid, leq):
        leq = np.asarray(leq, dtype=bool)
        m = monoid.size
        if leq.shape != (m, m):
            raise AlgebraError("order matrix has the wrong shape")
        if not leq.diagonal().all():
            raise AlgebraError("order is not reflexive")
        if (leq & leq.T & ~np.eye(m, dtype=bool)).any():
            raise AlgebraError("order is not antisymmetric")
        li = leq.astype(np.int64)
        if ((li @ li > 0) & ~leq).any():
            raise AlgebraError("order is not transitive")
        mult = monoid.mult
        for x, y in np.argwhere(leq):
            for x2, y2 in np.argwhere(leq):
                if not leq[mult[x, x2], mult[y, y2]]:
                    raise AlgebraError(f"order not compatible: {x}<={y}, {x2}<={y2}")
        self.monoid = monoid
        self.leq = _frozen(leq)

    @property
    def size(self):
        return self.monoid.size

    def up(self, x: int) -> set:
        return {int(y) for y in np.flatnonzero(self.leq[x])}

    def is_upset(self, subset: Iterable[int]) -> bool:
        s = set(subset)
        return all(self.up(x) <= s for x in s)

    def minimal_elements(self, subset: Iterable[int]) -> list[int]:
        s = sorted(set(subset))
        return [x for x in s if not any(y != x and self.leq[y, x] for y in s)]

    def upset_of(self, xs: Iterable[int]) -> set:
        out = set()
        for x in xs:
            out |= self.up(x)
        return out


def trivial_order(m: FiniteMonoid) -> OrderedMonoid:
    return OrderedMonoid(m, np.eye(m.size, dtype=bool))


@dataclass(frozen=True)
class Morphism:
    alphabet: tuple
    target: FiniteMonoid
    letter_map: dict = field(hash=False)

    def __post_init__(self):
        for a in self.alphabet:
            if a not in self.letter_map:
                raise AlgebraError(f"letter {a!r} has no image")

    def letter(self, sym) -> int:
        if sym is EPS:
            return self.target.identity
        try:
            return self.letter_map[sym]
        except KeyError:
            raise KeyError(f"unknown symbol {sym!r}") from None


def evaluate_word(phi: Morphism, word: Sequence) -> int:
    acc = phi.target.identity
    for sym in word:
        acc = int(phi.target.mult[acc, phi.letter(sym)])
    return acc


# -- monoids from automata -----------------------------------------------


def transition_monoid(d: Dfa) -> tuple[FiniteMonoid, Morphism]:
    """Transition monoid of ``d``; words act left to right (``f_uv = f_v o f_u``)."""
    ident = tuple(range(d.size))
    gens = [tuple(d.delta[q][c] for q in range(d.size)) for c in range(len(d.alphabet))]
    index = {ident: 0}
    elems, names = [ident], ["1"]
    todo = deque([0])
    while todo:
        e = todo.popleft()
        f = elems[e]
        for c, g in enumerate(gens):
            h = tuple(g[f[q]] for q in range(d.size))
            if h not in index:
                index[h] = len(elems)
                elems.append(h)
                names.append(("" if e == 0 else names[e]) + str(d.alphabet[c]))
                todo.append(index[h])
    m = len(elems)
    mult = np.empty((m, m), dtype=np.int64)
    for i, f in enumerate(elems):
        for j, g in enumerate(elems):
            mult[i, j] = index[tuple(g[f[q]] for q in range(d.size))]
    mon = FiniteMonoid(mult, 0, names)
    mon.functions = tuple(elems)
    phi = Morphism(tuple(d.alphabet), mon, {a: index[g] for a, g in zip(d.alphabet, gens)})
    return mon, phi


def _accepting_elements(mon: FiniteMonoid, d: Dfa) -> np.ndarray:
    return np.array([f[d.start] in d.accepting for f in mon.functions], dtype=bool)


def syntactic_ordered_monoid(d: Dfa) -> tuple[OrderedMonoid, Morphism, frozenset]:
    """Order: x <= y iff every context (u, v) with uxv accepted also accepts uyv."""
    mon, phi = transition_monoid(d)
    acc = _accepting_elements(mon, d)
    mult = mon.mult
    # ctx[x, u, v] = acc(u x v)
    ctx = acc[mult[mult[:, :, None].transpose(1, 0, 2), np.arange(mon.size)[None, None, :]]]
    ctx = ctx.reshape(mon.size, -1)
    leq = ~(ctx[:, None, :] & ~ctx[None, :, :]).any(axis=2)
    om = OrderedMonoid(mon, leq)
    upset = frozenset(int(x) for x in np.flatnonzero(acc))
    if not om.is_upset(upset):
        raise AlgebraError("accepting set is not an upset of the syntactic order")
    return om, phi, upset


def accepting_set(mon: FiniteMonoid, d: Dfa) -> frozenset:
    return frozenset(int(x) for x in np.flatnonzero(_accepting_elements(mon, d)))


def dfa_from_morphism(phi: Morphism, accepting: Iterable[int]) -> Dfa:
    """Minimal DFA of phi^-1(accepting); states are monoid elements before minimization."""
    mon = phi.target
    delta = [[int(mon.mult[x, phi.letter(a)]) for a in phi.alphabet] for x in range(mon.size)]
    return dfa_from_table(phi.alphabet, delta, mon.identity, set(accepting))


# -- Green's relations ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class GreenData:
    leqR: np.ndarray
    leqL: np.ndarray
    leqJ: np.ndarray
    leqH: np.ndarray
    R: np.ndarray
    L: np.ndarray
    J: np.ndarray
    H: np.ndarray
    jclasses: tuple  # sorted class indices (smallest member)
    jorder: np.ndarray  # jorder[a, b]: class jclasses[a] <=J class jclasses[b]

    def members(self, kind: str, cls: int) -> list[int]:
        vec = getattr(self, kind)
        return [int(x) for x in np.flatnonzero(vec == cls)]

    def geq_class(self, x: int, jcls: int) -> bool:
        """``x >=J J`` for the J-class with index ``jcls``."""
        return bool(self.leqJ[jcls, x])


def _classes(pre: np.ndarray) -> np.ndarray:
    eq = pre & pre.T
    return np.argmax(eq, axis=1).astype(np.int64)


def green_relations(m: FiniteMonoid) -> GreenData:
    n = m.size
    mult = m.mult
    ar = np.arange(n)
    leqR = np.zeros((n, n), dtype=bool)
    leqL = np.zeros((n, n), dtype=bool)
    leqJ = np.zeros((n, n), dtype=bool)
    for y in range(n):
        leqR[mult[y, :], y] = True
        leqL[mult[:, y], y] = True
        leqJ[mult[mult[:, y][:, None], ar[None, :]].ravel(), y] = True
    leqH = leqR & leqL
    R, L, J, H = (_classes(p) for p in (leqR, leqL, leqJ, leqH))
    jclasses = tuple(sorted({int(c) for c in J}))
    jorder = np.array([[leqJ[a, b] for b in jclasses] for a in jclasses], dtype=bool)
    return GreenData(*(_frozen(a) for a in (leqR, leqL, leqJ, leqH, R, L, J, H)),
                     jclasses, _frozen(jorder))


def idempotent_power(m: FiniteMonoid, x: int) -> int:
    p = x
    seen = set()
    while m.mult[p, p] != p:
        if p in seen:
            raise AlgebraError("power sequence did not reach an idempotent")
        seen.add(p)
        p = int(m.mult[p, x])
    return int(p)


def is_group(m: FiniteMonoid) -> bool:
    return all(idempotent_power(m, x) == m.identity for x in range(m.size))


def is_jplus(om: OrderedMonoid) -> bool:
    return bool(om.leq[om.monoid.identity].all())


def is_ejplus(om: OrderedMonoid) -> bool:
    one = om.monoid.identity
    return all(om.leq[one, e] for e in om.monoid.idempotents())


def find_u1_minus_divisor(om: OrderedMonoid) -> int | None:
    one = om.monoid.identity
    for e in om.monoid.idempotents():
        if not om.leq[one, e]:
            return e
    return None


def find_u1_submonoid(m: FiniteMonoid) -> int | None:
    for e in m.idempotents():
        if e != m.identity:
            return e
    return None


# -- semidirect products --------------------------------------------------


class SemidirectAction:
    """Left action of ``right`` on ``left`` (``left`` written additively)."""

    def __init__(self, left: OrderedMonoid, right: OrderedMonoid, action):
        act = np.asarray(action, dtype=np.int64)
        M, N = left.monoid, right.monoid
        if act.shape != (N.size, M.size):
            raise AlgebraError("action table must have shape (|N|, |M|)")
        self.left, self.right, self.action = left, right, _frozen(act)
        self._check()

    def _check(self):
        M, N, act = self.left.monoid, self.right.monoid, self.action
        for y1, y2, x in product(range(N.size), range(N.size), range(M.size)):
            if act[N.mult[y1, y2], x] != act[y1, act[y2, x]]:
                raise ActionAxiomError(1, (y1, y2, x))
        for y, x1, x2 in product(range(N.size), range(M.size), range(M.size)):
            if act[y, M.mult[x1, x2]] != M.mult[act[y, x1], act[y, x2]]:
                raise ActionAxiomError(2, (y, x1, x2))
        for x in range(M.size):
            if act[N.identity, x] != x:
                raise ActionAxiomError(3, (x,))
        for y in range(N.size):
            if act[y, M.identity] != M.identity:
                raise ActionAxiomError(4, (y,))
        for y, x1, x2 in product(range(N.size), range(M.size), range(M.size)):
            if self.left.leq[x1, x2] and not self.left.leq[act[y, x1], act[y, x2]]:
                raise ActionAxiomError(5, (y, x1, x2))
        for y1, y2, x in product(range(N.size), range(N.size), range(M.size)):
            if self.right.leq[y1, y2] and not self.left.leq[act[y1, x], act[y2, x]]:
                raise ActionAxiomError(6, (y1, y2, x))

    def pair(self, x: int, y: int) -> int:
        return x * self.right.size + y

    def unpair(self, e: int) -> tuple[int, int]:
        return divmod(int(e), self.right.size)


def semidirect_product(act: SemidirectAction) -> OrderedMonoid:
    M, N = act.left.monoid, act.right.monoid
    size = M.size * N.size
    mult = np.empty((size, size), dtype=np.int64)
    leq = np.zeros((size, size), dtype=bool)
    for e1 in range(size):
        x1, y1 = act.unpair(e1)
        for e2 in range(size):
            x2, y2 = act.unpair(e2)
            mult[e1, e2] = act.pair(M.mult[x1, act.action[y1, x2]], N.mult[y1, y2])
            leq[e1, e2] = act.left.leq[x1, x2] and act.right.leq[y1, y2]
    names = [f"({M.names[x]},{N.names[y]})" for x in range(M.size) for y in range(N.size)]
    mon = FiniteMonoid(mult, act.pair(M.identity, N.identity), names)
    return OrderedMonoid(mon, leq)


def unfold_semidirect(act: SemidirectAction, pairs: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Closed form x1 + y1.x2 + (y1y2).x3 + ... of a product of pairs."""
    M, N = act.left.monoid, act.right.monoid
    x_acc, y_acc = M.identity, N.identity
    for x, y in pairs:
        x_acc = M.mult[x_acc, act.action[y_acc, x]]
        y_acc = N.mult[y_acc, y]
    return int(x_acc), int(y_acc)


# -- fixtures -------------------------------------------------------------


def cyclic_group(n: int, gen: str = "g") -> FiniteMonoid:
    r = np.arange(n)
    names = ["1"] + [gen if k == 1 else f"{gen}{k}" for k in range(1, n)]
    return FiniteMonoid((r[:, None] + r[None, :]) % n, 0, names)


def symmetric_group3() -> FiniteMonoid:
    from itertools import permutations
    perms = sorted(permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    mult = [[idx[tuple(q[p[k]] for k in range(3))] for q in perms] for p in perms]
    names = ["".join(map(str, p)) for p in perms]
    return FiniteMonoid(mult, idx[(0, 1, 2)], names)


def u1() -> FiniteMonoid:
    return FiniteMonoid([[0, 1], [1, 1]], 0, ["1", "a"])


def u2() -> FiniteMonoid:
    # ab = b, ba = a, both idempotent
    return FiniteMonoid([[0, 1, 2], [1, 1, 2], [2, 1, 2]], 0, ["1", "a", "b"])


def trivial_monoid() -> FiniteMonoid:
    return FiniteMonoid([[0]], 0, ["1"])


def direct_product(m1: FiniteMonoid, m2: FiniteMonoid) -> FiniteMonoid:
    n2 = m2.size
    mult = np.empty((m1.size * n2, m1.size * n2), dtype=np.int64)
    for a, b, c, d in product(range(m1.size), range(n2), range(m1.size), range(n2)):
        mult[a * n2 + b, c * n2 + d] = m1.mult[a, c] * n2 + m2.mult[b, d]
    names = [f"({x},{y})" for x in m1.names for y in m2.names]
    return FiniteMonoid(mult, m1.identity * n2 + m2.identity, names)


# -- text form ------------------------------------------------------------


def monoid_to_text(m: FiniteMonoid, leq: np.ndarray | None = None) -> str:
    lines = [f"size {m.size}", f"identity {m.identity}",
             "names " + " ".join(m.names)]
    for x in range(m.size):
        lines.append(f"row {x}: " + " ".join(str(int(v)) for v in m.mult[x]))
    if leq is not None:
        for x in range(m.size):
            lines.append(f"order {x}: " + " ".join(str(int(v)) for v in leq[x]))
    return "\n".join(lines) + "\n"


def monoid_from_text(text: str) -> tuple[FiniteMonoid, OrderedMonoid | None]:
    size = ident = None
    names = None
    rows: dict = {}
    order: dict = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "size":
            size = int(rest)
        elif key == "identity":
            ident = int(rest)
        elif key == "names":
            names = rest.split()
        elif key in ("row", "order"):
            idx, _, vals = rest.partition(":")
            target = rows if key == "row" else order
            target[int(idx)] = [int(v) for v in vals.split()]
        else:
            raise ValueError(f"unknown monoid record {key!r}")
    if size is None or ident is None or sorted(rows) != list(range(size)):
        raise ValueError("monoid text needs size, identity and one row per element")
    mon = FiniteMonoid([rows[x] for x in range(size)], ident, names)
    om = None
    if order:
        om = OrderedMonoid(mon, [[bool(v) for v in order[x]] for x in range(size)])
    return mon, om
