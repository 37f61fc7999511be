"""popcert: certify polynomial innermost runtime complexity of rewrite systems."""

from .terms import App, Symbol, Term, Var, app, render_term
from .trs import TRS, ParseError, Rule, parse_trs, parse_term_in, render_trs

__version__ = "0.1.0"

__all__ = [
    "App", "Symbol", "Term", "Var", "app", "render_term",
    "TRS", "ParseError", "Rule", "parse_trs", "parse_term_in", "render_trs",
    "__version__",
]
