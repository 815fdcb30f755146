"""Closure constructions: inverse morphism, quotients and division."""
from dynlang.builders import (build_group_program, transform_division,
                              transform_inverse_morphism, transform_quotient)
from dynlang.fixtures import group_fixtures, z4_to_z2
from dynlang.lang_frontend import dfa_inverse_morphism, dfa_quotient
from dynlang.monoid_core import Morphism, dfa_from_morphism
from dynlang.verify import random_verify


def check(label, p, d):
    print(f"{label:<32} {random_verify(p, d, 10, 80, 20, seed=2).summary()}")


if __name__ == "__main__":
    gp, d = group_fixtures()["Z3"]
    base = build_group_program(gp, "Z3")
    h = {"c": ("a", "b"), "d": ("b",), "e": ()}
    check("inverse morphism c=ab d=b e=", transform_inverse_morphism(base, h),
          dfa_inverse_morphism(d, h))
    first = base.alphabet[0]
    for side in ("left", "right"):
        check(f"{side} quotient by {first}", transform_quotient(base, first, side),
              dfa_quotient(d, first, side))

    gp4, w = z4_to_z2()
    p = transform_division(build_group_program(gp4, "Z4"), w)
    check("Z4 divided down to Z2", p,
          dfa_from_morphism(Morphism(p.alphabet, w.target, {"g": 1}), {0}))
