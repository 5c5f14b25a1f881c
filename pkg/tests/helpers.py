"""Shared fixtures: random rewrite systems and small parsing shortcuts."""

import random
from pathlib import Path

from kbosat.terms import Fun, Rule, Symbol, Trs, Var, parse_srs, parse_trs

CORPUS = Path(__file__).resolve().parent.parent / "src" / "kbosat" / "corpus"

VARS = (Var("x"), Var("y"))


def random_term(rng, sig, depth, allowed_vars=VARS):
    leaves = [f for f in sig if f.arity == 0]
    if depth <= 1 or rng.random() < 0.3:
        if allowed_vars and (not leaves or rng.random() < 0.6):
            return rng.choice(allowed_vars)
        if leaves:
            return Fun(rng.choice(leaves), ())
    inner = [f for f in sig if f.arity > 0]
    if not inner:
        return Fun(rng.choice(leaves), ()) if leaves else rng.choice(allowed_vars)
    f = rng.choice(inner)
    return Fun(f, tuple(random_term(rng, sig, depth - 1, allowed_vars) for _ in range(f.arity)))


def random_trs(seed, max_symbols=3, max_arity=2, max_depth=3, max_rules=3):
    """Small random TRS; right-hand sides mostly reuse left-hand variables."""
    rng = random.Random(seed)
    n = rng.randint(1, max_symbols)
    sig = [Symbol("fgh"[i], rng.randint(0, max_arity)) for i in range(n)]
    if all(f.arity == 0 for f in sig):
        sig[0] = Symbol(sig[0].name, 1)
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        lhs = random_term(rng, sig, max_depth)
        if isinstance(lhs, Var):
            inner = [f for f in sig if f.arity > 0]
            f = rng.choice(inner)
            lhs = Fun(f, tuple(random_term(rng, sig, max_depth - 1) for _ in range(f.arity)))
        lvars = tuple(sorted({v for v in _vars(lhs)}, key=lambda v: v.name))
        pool = lvars if rng.random() < 0.9 else VARS
        rhs = random_term(rng, sig, max_depth, pool)
        rules.append(Rule(lhs, rhs))
    return Trs.from_rules(rules)


def _vars(t):
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from _vars(a)


def trs(text):
    return parse_trs(text)


def srs(text):
    return parse_srs(text)


# --- formulas ----------------------------------------------------------------

from kbosat.logic import FALSE, TRUE, And, Atom, Const, Iff, Implies, Not, Or, Xor  # noqa: E402


def random_formula(rng, nvars, size):
    """Random formula built with the raw node classes, so nothing is folded away."""
    if size <= 1:
        r = rng.random()
        if r < 0.05:
            return TRUE if rng.random() < 0.5 else FALSE
        return Atom(rng.randint(1, nvars))
    kind = rng.choice("aonixe")
    if kind == "n":
        return Not(random_formula(rng, nvars, size - 1))
    if kind in "ao":
        k = rng.randint(2, 3)
        parts = _split(rng, size - 1, k)
        args = tuple(random_formula(rng, nvars, p) for p in parts)
        return And(args) if kind == "a" else Or(args)
    left, right = _split(rng, size - 1, 2)
    cls = {"i": Implies, "x": Xor, "e": Iff}[kind]
    return cls(random_formula(rng, nvars, left), random_formula(rng, nvars, right))


def _split(rng, total, k):
    total = max(total, k)
    cuts = sorted(rng.sample(range(1, total), k - 1)) if total > k else list(range(1, k))
    return [b - a for a, b in zip([0] + cuts, cuts + [total])]


def truth_table(f, nvars):
    """Bit ``i`` of the result is the value of ``f`` under assignment ``i``.

    Variable ``v`` is true in assignment ``i`` iff bit ``v - 1`` of ``i`` is set.
    """
    size = 1 << nvars
    full = (1 << size) - 1
    cols = {}
    for v in range(1, nvars + 1):
        col = 0
        for i in range(size):
            if i >> (v - 1) & 1:
                col |= 1 << i
        cols[v] = col
    memo = {}

    def ev(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Const):
            out = full if node.value else 0
        elif isinstance(node, Atom):
            out = cols[node.id]
        elif isinstance(node, Not):
            out = full & ~ev(node.arg)
        elif isinstance(node, And):
            out = full
            for c in node.args:
                out &= ev(c)
        elif isinstance(node, Or):
            out = 0
            for c in node.args:
                out |= ev(c)
        elif isinstance(node, Implies):
            out = (full & ~ev(node.a)) | ev(node.b)
        elif isinstance(node, Iff):
            out = full & ~(ev(node.a) ^ ev(node.b))
        else:
            out = ev(node.a) ^ ev(node.b)
        memo[key] = out
        return out

    return ev(f)
