"""Helpers shared by the program builders."""

from __future__ import annotations

from typing import Sequence

from ..logic import FALSE, Formula, Or, W, WEps, Wo
from ..monoid_core import FiniteMonoid, Morphism


def letter_value(phi: Morphism, z: int, t: str, old: bool = False) -> Formula:
    """Position ``t`` holds a letter whose image under ``phi`` is ``z``.

    Epsilon positions carry the identity, which needs negated letter atoms.
    """
    atom = Wo if old else W
    parts = [atom(s, t) for s in phi.alphabet if phi.letter(s) == z]
    if z == phi.target.identity:
        parts.append(WEps(t, phi.alphabet, old=old))
    return Or(*parts) if parts else FALSE


def letter_value_positive(phi: Morphism, z: int, t: str, old: bool = False) -> Formula:
    """Like ``letter_value`` but never matches epsilon (no negation)."""
    atom = Wo if old else W
    return Or(*[atom(s, t) for s in phi.alphabet if phi.letter(s) == z])


def inverses(G: FiniteMonoid) -> list[int]:
    inv = [G.inverse(g) for g in range(G.size)]
    if any(i is None for i in inv):
        raise ValueError("monoid is not a group")
    return inv


def prefix_values(mon: FiniteMonoid, values: Sequence[int]) -> list[int]:
    """out[i] = product of values[:i] (so out[0] is the identity)."""
    acc, out = mon.identity, [mon.identity]
    for v in values:
        acc = int(mon.mult[acc, v])
        out.append(acc)
    return out


def word_values(phi: Morphism, word: Sequence) -> list[int]:
    return [phi.letter(s) for s in word]


def base_init(relations, bits, all_rel=(), true_bits=()) -> dict:
    init = {r: "none" for r in relations}
    init.update({r: "all" for r in all_rel})
    init.update({b: False for b in bits})
    init.update({b: True for b in true_bits})
    return init

