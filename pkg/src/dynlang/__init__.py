"""Dynamic membership for regular languages with unary auxiliary relations."""

from .lang_frontend import EPS, Dfa, RegexAst, compile_min_dfa, dfa_accepts, parse_regex, regex_dfa

__all__ = ["EPS", "Dfa", "RegexAst", "compile_min_dfa", "dfa_accepts", "parse_regex", "regex_dfa"]
