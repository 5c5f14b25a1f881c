"""Terms, rewrite rules and TPDB plain-format parsing."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

__all__ = [
    "Symbol", "Var", "Fun", "Term", "Rule", "Trs",
    "ParseError", "ArityError",
    "parse_trs", "parse_srs", "load", "render_trs",
    "var_count", "symbol_count", "term_size", "variables", "symbols",
    "tokens", "subterms", "embeds", "cancel_common", "is_unary_tower",
    "term_str",
]


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("symbol name must be nonempty")
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name}")

    def __str__(self):
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Fun:
    symbol: Symbol
    args: Tuple["Term", ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise ArityError(
                f"{self.symbol.name} expects {self.symbol.arity} arguments, got {len(self.args)}",
                self.symbol.name,
            )
        object.__setattr__(self, "_hash", hash((self.symbol, self.args)))

    def __hash__(self):
        return self._hash

    @property
    def name(self) -> str:
        return self.symbol.name

    def __str__(self):
        return term_str(self)


Term = Union[Var, Fun]


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{term_str(self.lhs)} -> {term_str(self.rhs)}"


@dataclass(frozen=True)
class Trs:
    rules: Tuple[Rule, ...]
    signature: Tuple[Symbol, ...]
    kind: str = "trs"

    @classmethod
    def from_rules(cls, rules, kind: str = "trs") -> "Trs":
        rules = tuple(rules)
        sig: Dict[str, Symbol] = {}
        for rule in rules:
            for side in (rule.lhs, rule.rhs):
                for sym in symbols(side):
                    known = sig.get(sym.name)
                    if known is None:
                        sig[sym.name] = sym
                    elif known.arity != sym.arity:
                        raise ArityError(
                            f"symbol {sym.name} used with arities {known.arity} and {sym.arity}",
                            sym.name,
                        )
        return cls(rules, tuple(sig.values()), kind)

    def symbol(self, name: str) -> Symbol:
        for s in self.signature:
            if s.name == name:
                return s
        raise KeyError(name)

    def __len__(self):
        return len(self.rules)


# --- measures -------------------------------------------------------------

def subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal including ``t`` itself."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, Fun):
            stack.extend(reversed(u.args))


def tokens(t: Term) -> Counter:
    """Occurrence counts keyed by ``Var`` and ``Symbol`` objects.

    Variables and symbols are different types, so equal names never merge.
    """
    out: Counter = Counter()
    for u in subterms(t):
        out[u if isinstance(u, Var) else u.symbol] += 1
    return out


def var_count(t: Term, x) -> int:
    if isinstance(x, str):
        x = Var(x)
    return sum(1 for u in subterms(t) if u == x)


def symbol_count(t: Term, f) -> int:
    name = f.name if isinstance(f, Symbol) else f
    return sum(1 for u in subterms(t) if isinstance(u, Fun) and u.symbol.name == name)


def term_size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def variables(t: Term) -> Counter:
    return Counter(u for u in subterms(t) if isinstance(u, Var))


def symbols(t: Term) -> List[Symbol]:
    """Distinct symbols of ``t`` in order of first occurrence."""
    seen: Dict[Symbol, None] = {}
    for u in subterms(t):
        if isinstance(u, Fun):
            seen.setdefault(u.symbol)
    return list(seen)


def is_unary_tower(s: Term, x: Term) -> bool:
    """True iff ``s`` is a nonempty chain of unary symbols over the variable ``x``."""
    if not isinstance(x, Var) or s == x:
        return False
    while isinstance(s, Fun):
        if s.symbol.arity != 1:
            return False
        s = s.args[0]
    return s == x


def embeds(s: Term, t: Term) -> bool:
    """Strict homeomorphic embedding: ``t`` arises from ``s`` by deleting symbols."""
    return s != t and _emb(s, t)


def _emb(s: Term, t: Term) -> bool:
    if s == t:
        return True
    if isinstance(s, Var):
        return False
    if any(_emb(si, t) for si in s.args):
        return True
    return (
        isinstance(t, Fun)
        and t.symbol == s.symbol
        and all(_emb(si, ti) for si, ti in zip(s.args, t.args))
    )


def cancel_common(l: Term, r: Term) -> Tuple[Counter, Counter]:
    """Multiset difference of the token counts of ``l`` and ``r``.

    Returns ``(residual_l, residual_r)``; for each token at most one of the
    two residuals is nonzero.
    """
    cl, cr = tokens(l), tokens(r)
    return cl - cr, cr - cl


def term_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.symbol.name
    return f"{t.symbol.name}({','.join(term_str(a) for a in t.args)})"


# --- parsing --------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


class ArityError(ValueError):
    def __init__(self, msg: str, symbol: str):
        self.symbol = symbol
        super().__init__(msg)


_TOKEN = re.compile(r"\s+|->|[(),]|(?:(?!->)[^\s(),])+")
_REJECTED = {"STRATEGY", "THEORY", "CONDITIONTYPE"}


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _lex(text: str) -> List[_Tok]:
    toks = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the pattern accepts every character
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        chunk = m.group()
        if not chunk.isspace():
            toks.append(_Tok(chunk, line, pos - line_start + 1))
        else:
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return toks


class _Reader:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def skip_block(self):
        depth = 1
        while depth:
            tok = self.next()
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1


def _blocks(reader: _Reader) -> Iterator[Tuple[str, _Tok]]:
    while reader.peek() is not None:
        reader.expect("(")
        head = reader.next()
        if head.text in _REJECTED:
            raise ParseError(f"{head.text} declarations are not supported", head.line, head.col)
        yield head.text, head


def _ident(tok: _Tok) -> str:
    if tok.text in ("(", ")", ",", "->"):
        raise ParseError(f"expected identifier, found {tok.text!r}", tok.line, tok.col)
    return tok.text


def parse_trs(text: str) -> Trs:
    """Parse a TPDB plain-format term rewrite system."""
    reader = _Reader(text)
    var_names: set = set()
    raw_rules: list = []
    for head, tok in _blocks(reader):
        if head == "VAR":
            while reader.peek() is not None and reader.peek().text != ")":
                var_names.add(_ident(reader.next()))
            reader.expect(")")
        elif head == "RULES":
            while reader.peek() is not None and reader.peek().text != ")":
                lhs = _raw_term(reader)
                reader.expect("->")
                rhs = _raw_term(reader)
                raw_rules.append((lhs, rhs))
                if reader.peek() is not None and reader.peek().text == ",":
                    reader.next()
            reader.expect(")")
        else:
            reader.skip_block()

    arities: Dict[str, Tuple[int, _Tok]] = {}

    def check(raw):
        name_tok, args = raw
        if name_tok.text in var_names:
            if args is not None:
                raise ParseError(f"variable {name_tok.text} applied to arguments",
                                 name_tok.line, name_tok.col)
            return
        n = len(args) if args else 0
        seen = arities.setdefault(name_tok.text, (n, name_tok))
        if seen[0] != n:
            raise ArityError(
                f"{name_tok.line}:{name_tok.col}: symbol {name_tok.text} used with "
                f"{seen[0]} and {n} arguments",
                name_tok.text,
            )
        for a in args or ():
            check(a)

    for lhs, rhs in raw_rules:
        check(lhs)
        check(rhs)
    sig = {name: Symbol(name, n) for name, (n, _) in arities.items()}

    def build(raw) -> Term:
        name_tok, args = raw
        if name_tok.text in var_names:
            return Var(name_tok.text)
        return Fun(sig[name_tok.text], tuple(build(a) for a in args or ()))

    return Trs.from_rules([Rule(build(l), build(r)) for l, r in raw_rules], "trs")


def _raw_term(reader: _Reader):
    name = reader.next()
    _ident(name)
    nxt = reader.peek()
    if nxt is None or nxt.text != "(":
        return (name, None)
    reader.next()
    args = []
    if reader.peek() is not None and reader.peek().text == ")":
        reader.next()
        return (name, args)
    while True:
        args.append(_raw_term(reader))
        tok = reader.next()
        if tok.text == ")":
            return (name, args)
        if tok.text != ",":
            raise ParseError(f"expected ',' or ')', found {tok.text!r}", tok.line, tok.col)


SRS_VAR = Var("x")


def parse_srs(text: str) -> Trs:
    """Parse a TPDB plain-format string rewrite system into a unary TRS.

    The leftmost letter of a string becomes the outermost symbol.
    """
    reader = _Reader(text)
    rules = []
    for head, _ in _blocks(reader):
        if head != "RULES":
            reader.skip_block()
            continue
        while True:
            lhs, arrow = _word(reader, ("->",))
            if arrow is None:
                break
            if arrow.text != "->":
                raise ParseError(f"expected '->', found {arrow.text!r}", arrow.line, arrow.col)
            rhs, end = _word(reader, (",", ")"))
            if not lhs:
                raise ParseError("empty left-hand side", arrow.line, arrow.col)
            if not rhs:
                raise ParseError("empty right-hand side", arrow.line, arrow.col)
            rules.append((lhs, rhs))
            if end.text == ")":
                break
    sig = {name: Symbol(name, 1) for l, r in rules for name in (*l, *r)}

    def build(word) -> Term:
        t: Term = SRS_VAR
        for letter in reversed(word):
            t = Fun(sig[letter], (t,))
        return t

    return Trs.from_rules([Rule(build(l), build(r)) for l, r in rules], "srs")


def _word(reader: _Reader, stops):
    letters = []
    while True:
        tok = reader.next()
        if tok.text in stops:
            return letters, tok
        if tok.text == ")" and not letters:
            return letters, None
        if tok.text in ("(", ")", ",", "->"):
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)
        letters.append(tok.text)


def load(path) -> Trs:
    """Read a ``.trs`` or ``.srs`` file (format chosen by extension)."""
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_srs(text) if path.endswith(".srs") else parse_trs(text)


def render_trs(trs: Trs) -> str:
    if trs.kind == "srs":
        words = []
        for rule in trs.rules:
            words.append(f"{_letters(rule.lhs)} -> {_letters(rule.rhs)}")
        return "(RULES\n  " + ",\n  ".join(words) + "\n)\n"
    names: Dict[str, None] = {}
    for rule in trs.rules:
        for side in (rule.lhs, rule.rhs):
            for v in variables(side):
                names.setdefault(v.name)
    body = "".join(f"  {rule}\n" for rule in trs.rules)
    return f"(VAR {' '.join(names)})\n(RULES\n{body})\n"


def _letters(t: Term) -> str:
    out = []
    while isinstance(t, Fun):
        out.append(t.symbol.name)
        t = t.args[0]
    return " ".join(out)
