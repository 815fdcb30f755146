"""Builders for dynamic programs and program transformers."""

from .group import GroupFormulas, GroupPresentation, build_group_program
from .monomial import MonomialPresentation, build_sigma1_monomial_program, monomial_presentation
from .sigma1plus import (SemidirectPresentation, build_sigma1plus_program, minimal_subwords,
                         sigma1plus_upset_formula)
from .sigma2 import build_sigma2_program
from .transforms import (DivisionWitness, combine_disjunction, transform_division,
                         transform_inverse_morphism, transform_quotient)

__all__ = ["GroupFormulas", "GroupPresentation", "build_group_program", "MonomialPresentation",
           "build_sigma1_monomial_program", "monomial_presentation", "SemidirectPresentation",
           "build_sigma1plus_program", "minimal_subwords", "sigma1plus_upset_formula",
           "build_sigma2_program", "DivisionWitness", "combine_disjunction",
           "transform_division", "transform_inverse_morphism", "transform_quotient"]
