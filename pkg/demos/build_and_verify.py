"""Build programs with each builder and check them on random change sequences."""
from dynlang.builders import (build_group_program, build_sigma1_monomial_program,
                              build_sigma1plus_program, build_sigma2_program)
from dynlang.builders.group import GroupPresentation
from dynlang.fixtures import monomial_fixtures, semidirect_fixtures, semidirect_oracle
from dynlang.lang_frontend import regex_dfa
from dynlang.monoid_core import syntactic_ordered_monoid
from dynlang.verify import random_verify


def check(p, d):
    rep = random_verify(p, d, 12, 100, 20, seed=1)
    print(f"{p.fragment:<8} {rep.summary()}")


if __name__ == "__main__":
    d = regex_dfa("(aa)*", ["a"])
    om, phi, acc = syntactic_ordered_monoid(d)
    check(build_group_program(GroupPresentation(om.monoid, phi, acc), "(aa)*"), d)

    act, up = semidirect_fixtures()["U1+ * Z2"]
    p = build_sigma1plus_program(act, up, name="U1+ * Z2")
    check(p, semidirect_oracle(p))

    for name, (mp, d) in sorted(monomial_fixtures().items()):
        check(build_sigma1_monomial_program(mp, name), d)

    for src in ["(ab)*", "(a+b)*aa(a+b)*"]:
        d = regex_dfa(src, ["a", "b"])
        om, phi, acc = syntactic_ordered_monoid(d)
        check(build_sigma2_program(om.monoid, phi, acc, src), d)
