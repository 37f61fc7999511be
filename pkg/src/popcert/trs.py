"""Term rewrite systems and the sectioned text format they are read from.

The input grammar follows the classic termination-competition layout:

    (VAR x y)
    (RULES
      half(0) -> 0
      half(s(s(x))) -> s(half(x))
    )

with two optional extensions for sorted systems: ``(SORTS Nat Bool)`` and
``(TYPES f : Nat -> Bool, 0 : -> Nat)``.  ``#`` starts a comment that runs
to the end of the line.  Unknown parenthesised sections are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .terms import App, Symbol, Term, Var, functions, render_term, variables


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Rule:
    """A rewrite rule lhs -> rhs.  index is 1-based within its system."""

    lhs: Term
    rhs: Term
    index: int = 0

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError(f"rule {self.index}: left-hand side is a variable")
        if not variables(self.rhs) <= variables(self.lhs):
            raise ValueError(f"rule {self.index}: right-hand side has extra variables")

    def root(self) -> str:
        assert isinstance(self.lhs, App)
        return self.lhs.sym.name


@dataclass(frozen=True)
class SortDecl:
    arg_sorts: tuple[str, ...]
    sort: str


class TRS:
    """An immutable rewrite system with its signature and partitions.

    defined / constructors is the root partition (a symbol is defined iff it
    heads a left-hand side).  gdefined / gconstructors is the refined
    partition: the constructor side additionally absorbs every symbol that
    occurs inside an argument of some left-hand side, so that a symbol
    counts as properly recursive only if start terms can actually reach it
    at the root.
    """

    __slots__ = (
        "rules", "signature", "var_names", "defined", "constructors",
        "gdefined", "gconstructors", "sorts", "sort_decls",
    )

    def __init__(
        self,
        rules: Sequence[Rule],
        signature: dict[str, Symbol],
        var_names: Sequence[str] = (),
        sorts: Sequence[str] = (),
        sort_decls: Optional[dict[str, SortDecl]] = None,
    ):
        self.rules = tuple(rules)
        self.signature = dict(signature)
        self.var_names = tuple(var_names)
        self.sorts = tuple(sorts)
        self.sort_decls = dict(sort_decls or {})

        defined = {r.root() for r in self.rules}
        self.defined = frozenset(defined)
        self.constructors = frozenset(self.signature) - self.defined

        in_lhs_args: set[str] = set()
        for r in self.rules:
            assert isinstance(r.lhs, App)
            for a in r.lhs.args:
                in_lhs_args |= functions(a)
        self.gconstructors = frozenset(self.constructors | in_lhs_args)
        self.gdefined = frozenset(self.signature) - self.gconstructors

    # -- basic queries ------------------------------------------------

    def symbol(self, name: str) -> Symbol:
        return self.signature[name]

    def rule(self, index: int) -> Rule:
        return self.rules[index - 1]

    def is_constructor_trs(self) -> bool:
        """True iff every left-hand side is a defined root applied to constructor terms."""
        for r in self.rules:
            assert isinstance(r.lhs, App)
            for a in r.lhs.args:
                if functions(a) & self.defined:
                    return False
        return True

    def is_left_linear(self) -> bool:
        from .terms import var_multiplicities

        return all(max(var_multiplicities(r.lhs).values(), default=1) == 1 for r in self.rules)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TRS):
            return NotImplemented
        return (
            [(r.lhs, r.rhs) for r in self.rules] == [(r.lhs, r.rhs) for r in other.rules]
            and self.var_names == other.var_names
            and self.sorts == other.sorts
            and self.sort_decls == other.sort_decls
        )

    def __repr__(self) -> str:
        return f"TRS({len(self.rules)} rules over {sorted(self.signature)})"


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Tok:
    kind: str  # lp rp comma arrow colon ident eof
    text: str
    line: int
    col: int


_PUNCT = {"(": "lp", ")": "rp", ",": "comma", ":": "colon"}


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in _PUNCT:
            toks.append(_Tok(_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        if text.startswith("->", i):
            toks.append(_Tok("arrow", "->", line, col))
            i += 2
            col += 2
            continue
        # identifier: greedy until whitespace, punctuation, comment or ->
        start = i
        startcol = col
        while i < n:
            c = text[i]
            if c in " \t\r\n#(),:" or text.startswith("->", i):
                break
            i += 1
            col += 1
        if i == start:
            raise ParseError(f"unexpected character {c!r}", line, col)
        toks.append(_Tok("ident", text[start:i], line, startcol))
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {kind}, found {t.text!r}", t.line, t.col)
        return t


def _skip_balanced(p: _Parser) -> None:
    depth = 1
    while depth:
        t = p.next()
        if t.kind == "eof":
            raise ParseError("unbalanced parentheses", t.line, t.col)
        if t.kind == "lp":
            depth += 1
        elif t.kind == "rp":
            depth -= 1


def _parse_term(p: _Parser, vars_: dict[str, int], arities: dict[str, tuple[int, _Tok]]) -> Term:
    t = p.expect("ident")
    if p.peek().kind == "lp":
        p.next()
        args: list[Term] = []
        if p.peek().kind != "rp":
            while True:
                args.append(_parse_term(p, vars_, arities))
                if p.peek().kind == "comma":
                    p.next()
                    continue
                break
        p.expect("rp")
        if t.text in vars_:
            raise ParseError(f"variable {t.text!r} used as a function symbol", t.line, t.col)
        seen = arities.get(t.text)
        if seen is not None and seen[0] != len(args):
            raise ParseError(
                f"{t.text!r} used with {len(args)} arguments but previously with {seen[0]}",
                t.line, t.col,
            )
        arities.setdefault(t.text, (len(args), t))
        return App(Symbol(t.text, len(args)), tuple(args))
    if t.text in vars_:
        return Var(vars_[t.text])
    seen = arities.get(t.text)
    if seen is not None and seen[0] != 0:
        raise ParseError(f"{t.text!r} used as a constant but previously with {seen[0]} arguments", t.line, t.col)
    arities.setdefault(t.text, (0, t))
    return App(Symbol(t.text, 0), ())


def parse_trs(text: str) -> TRS:
    """Parse the sectioned competition format into a TRS."""
    p = _Parser(_tokenize(text))
    var_names: list[str] = []
    vars_: dict[str, int] = {}
    arities: dict[str, tuple[int, _Tok]] = {}
    rule_pairs: list[tuple[Term, Term, _Tok]] = []
    sorts: list[str] = []
    decls: dict[str, SortDecl] = {}

    while p.peek().kind != "eof":
        p.expect("lp")
        head = p.expect("ident")
        section = head.text.upper()
        if section == "VAR":
            while p.peek().kind == "ident":
                t = p.next()
                if t.text in vars_:
                    raise ParseError(f"variable {t.text!r} declared twice", t.line, t.col)
                vars_[t.text] = len(var_names)
                var_names.append(t.text)
            p.expect("rp")
        elif section == "RULES":
            while p.peek().kind == "ident":
                at = p.peek()
                lhs = _parse_term(p, vars_, arities)
                p.expect("arrow")
                rhs = _parse_term(p, vars_, arities)
                rule_pairs.append((lhs, rhs, at))
                if p.peek().kind == "comma":
                    p.next()
            p.expect("rp")
        elif section == "SORTS":
            while p.peek().kind == "ident":
                s = p.next().text
                if s not in sorts:
                    sorts.append(s)
            p.expect("rp")
        elif section == "TYPES":
            while p.peek().kind == "ident":
                name_tok = p.next()
                p.expect("colon")
                args: list[str] = []
                while p.peek().kind == "ident":
                    args.append(p.next().text)
                if p.peek().kind == "arrow":
                    p.next()
                    res = p.expect("ident").text
                else:
                    # shorthand "c : Sort" for constants
                    if len(args) != 1:
                        t = p.peek()
                        raise ParseError("type declaration needs -> or a single result sort", t.line, t.col)
                    res, args = args[0], []
                if name_tok.text in decls:
                    raise ParseError(f"{name_tok.text!r} declared twice", name_tok.line, name_tok.col)
                decls[name_tok.text] = SortDecl(tuple(args), res)
                if p.peek().kind == "comma":
                    p.next()
            p.expect("rp")
        else:
            _skip_balanced(p)

    if not rule_pairs:
        raise ParseError("no RULES section or it is empty", 1, 1)

    # declared arities must agree with usage
    for name, decl in decls.items():
        seen = arities.get(name)
        if seen is not None and seen[0] != len(decl.arg_sorts):
            tok = seen[1]
            raise ParseError(
                f"{name!r} declared with {len(decl.arg_sorts)} argument sorts but used with {seen[0]} arguments",
                tok.line, tok.col,
            )
        for s in decl.arg_sorts + (decl.sort,):
            if sorts and s not in sorts:
                raise ParseError(f"sort {s!r} of {name!r} not listed in SORTS", 1, 1)

    defined_roots = set()
    for lhs, rhs, at in rule_pairs:
        if isinstance(lhs, Var):
            raise ParseError("left-hand side is a variable", at.line, at.col)
        defined_roots.add(lhs.sym.name)

    signature: dict[str, Symbol] = {}
    for name, (arity, _) in arities.items():
        kind = "defined" if name in defined_roots else "constructor"
        decl = decls.get(name)
        signature[name] = Symbol(
            name, arity, kind,
            arg_sorts=decl.arg_sorts if decl else None,
            sort=decl.sort if decl else None,
        )

    rules = []
    for i, (lhs, rhs, at) in enumerate(rule_pairs, start=1):
        try:
            rules.append(Rule(_rebind(lhs, signature), _rebind(rhs, signature), i))
        except ValueError as e:
            raise ParseError(str(e), at.line, at.col) from None
    return TRS(rules, signature, var_names, sorts, decls)


def _rebind(t: Term, signature: dict[str, Symbol]) -> Term:
    """Re-tag every application with the final (kind- and sort-aware) symbol."""
    if isinstance(t, Var):
        return t
    return App(signature[t.sym.name], tuple(_rebind(a, signature) for a in t.args))


def parse_term_in(trs: TRS, text: str) -> Term:
    """Parse one term against an existing system's signature and variable names."""
    p = _Parser(_tokenize(text))
    vars_ = {name: i for i, name in enumerate(trs.var_names)}
    arities = {name: (sym.arity, _Tok("ident", name, 0, 0)) for name, sym in trs.signature.items()}
    t = _parse_term(p, vars_, arities)
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    for name in functions(t):
        if name not in trs.signature:
            raise ParseError(f"unknown symbol {name!r}", 1, 1)
    return _rebind(t, trs.signature)


# ---------------------------------------------------------------------------
# Rendering


def render_trs(trs: TRS) -> str:
    out: list[str] = []
    if trs.var_names:
        out.append("(VAR " + " ".join(trs.var_names) + ")")
    if trs.sorts:
        out.append("(SORTS " + " ".join(trs.sorts) + ")")
    if trs.sort_decls:
        out.append("(TYPES")
        for name in trs.sort_decls:
            d = trs.sort_decls[name]
            args = " ".join(d.arg_sorts)
            out.append(f"  {name} : {args + ' ' if args else ''}-> {d.sort}")
        out.append(")")
    out.append("(RULES")
    for r in trs.rules:
        out.append(f"  {render_term(r.lhs, trs.var_names)} -> {render_term(r.rhs, trs.var_names)}")
    out.append(")")
    return "\n".join(out) + "\n"
