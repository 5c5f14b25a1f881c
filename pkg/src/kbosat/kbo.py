"""Direct Knuth-Bendix order for explicit weights and precedence.

This module is the ground truth the encodings are checked against: it never
looks at formulas or solver models, only at concrete parameters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .terms import Rule, Symbol, Term, Trs, Var, is_unary_tower, subterms, variables

GREATER, EQUAL, LESS, INCOMPARABLE = ">", "~", "<", "?"

# justification cases
WEIGHT_GT = "weight-gt"
VAR_TOWER = "var-tower"
LEX_ARG = "lex-arg"
PREC_GT = "prec-gt"


class InadmissibleError(ValueError):
    pass


class OrientationError(Exception):
    def __init__(self, rule: Rule):
        self.rule = rule
        super().__init__(f"rule not oriented: {rule}")


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class WeightFunction:
    w: Mapping[str, int]
    w0: int

    def __getitem__(self, name: str) -> int:
        return self.w[name]


@dataclass(frozen=True)
class Precedence:
    """Total quasi-order given by ranks; a larger rank is a greater symbol.

    Symbols without a rank are incomparable to everything but themselves.
    """

    ranks: Mapping[str, int] = field(default_factory=dict)

    def compare(self, f: str, g: str) -> str:
        if f == g:
            return EQUAL
        rf, rg = self.ranks.get(f), self.ranks.get(g)
        if rf is None or rg is None:
            return INCOMPARABLE
        if rf > rg:
            return GREATER
        if rf < rg:
            return LESS
        return EQUAL

    def classes(self) -> List[List[str]]:
        """Equivalence classes, greatest first, names sorted inside a class."""
        by_rank: Dict[int, List[str]] = {}
        for name, r in self.ranks.items():
            by_rank.setdefault(r, []).append(name)
        return [sorted(by_rank[r]) for r in sorted(by_rank, reverse=True)]

    @classmethod
    def from_chains(cls, *chains: str) -> "Precedence":
        """Build ranks from chains like ``"3 > 1 > 2"`` or ``"f ~ g > h"``.

        The chains are completed to a total quasi-order by a longest-path
        layering, so independent elements may end up equivalent.
        """
        gt: Dict[str, set] = {}
        eq_pairs = []
        for chain in chains:
            parts = chain.replace("~", " ~ ").replace(">", " > ").split()
            names, ops = parts[0::2], parts[1::2]
            for name in names:
                gt.setdefault(name, set())
            for a, op, b in zip(names, ops, names[1:]):
                if op == ">":
                    gt[a].add(b)
                else:
                    eq_pairs.append((a, b))
        # merge equivalences
        rep = {n: n for n in gt}

        def find(n):
            while rep[n] != n:
                n = rep[n]
            return n

        for a, b in eq_pairs:
            rep[find(a)] = find(b)
        height: Dict[str, int] = {}

        def h(n, seen=()):
            c = find(n)
            if c in height:
                return height[c]
            if c in seen:
                raise ValueError("cyclic precedence")
            below = [m for k in gt if find(k) == c for m in gt[k]]
            height[c] = 1 + max((h(m, seen + (c,)) for m in below), default=-1)
            return height[c]

        return cls({n: h(n) for n in gt})


@dataclass(frozen=True)
class KboProof:
    weights: WeightFunction
    precedence: Precedence
    per_rule: Tuple[Tuple[Rule, str], ...]


def term_weight(wf: WeightFunction, t: Term) -> int:
    total = 0
    for u in subterms(t):
        if isinstance(u, Var):
            total += wf.w0
        else:
            try:
                total += wf.w[u.symbol.name]
            except KeyError:
                raise KeyError(f"no weight for symbol {u.symbol.name}") from None
    return total


def is_admissible(wf: WeightFunction, prec: Precedence, sig: Sequence[Symbol]) -> bool:
    if wf.w0 <= 0:
        return False
    for f in sig:
        wt = wf.w.get(f.name)
        if wt is None or wt < 0:
            return False
        if f.arity == 0 and wt < wf.w0:
            return False
        if f.arity == 1 and wt == 0:
            for g in sig:
                if g.name != f.name and prec.compare(f.name, g.name) not in (GREATER, EQUAL):
                    return False
    return True


def kbo_compare(s: Term, t: Term, wf: WeightFunction, prec: Precedence,
                used: Optional[list] = None) -> Optional[str]:
    """Return the justification case if ``s >kbo t``, otherwise None.

    When ``used`` is a list, the precedence facts a successful comparison
    relies on are appended to it as ``(f, op, g)`` triples.
    """
    if isinstance(s, Var) or s == t:
        return None
    vs, vt = variables(s), variables(t)
    if any(vs[x] < n for x, n in vt.items()):
        return None
    ws, wt = term_weight(wf, s), term_weight(wf, t)
    if ws > wt:
        return WEIGHT_GT
    if ws < wt:
        return None
    if isinstance(t, Var):
        return VAR_TOWER if is_unary_tower(s, t) else None
    f, g = s.symbol.name, t.symbol.name
    rel = prec.compare(f, g)
    if rel == GREATER:
        if used is not None:
            used.append((f, GREATER, g))
        return PREC_GT
    if rel != EQUAL:
        return None
    for si, ti in zip(s.args, t.args):
        if si != ti:
            inner: Optional[list] = [] if used is not None else None
            if kbo_compare(si, ti, wf, prec, inner) is None:
                return None
            if used is not None:
                if f != g:
                    used.append((f, EQUAL, g))
                used.extend(inner)
            return LEX_ARG
    # equivalent roots with equal common arguments: no strict difference exists
    return None


def kbo_gt(s: Term, t: Term, wf: WeightFunction, prec: Precedence) -> bool:
    return kbo_compare(s, t, wf, prec) is not None


def find_violation(trs: Trs, wf: WeightFunction, prec: Precedence) -> Optional[Rule]:
    for rule in trs.rules:
        if kbo_compare(rule.lhs, rule.rhs, wf, prec) is None:
            return rule
    return None


def orients(trs: Trs, wf: WeightFunction, prec: Precedence) -> KboProof:
    """Check every rule of ``trs`` and return the per-rule justifications.

    Raises ``InadmissibleError`` for inadmissible parameters and
    ``OrientationError`` naming the first rule that is not decreasing.
    """
    if not is_admissible(wf, prec, trs.signature):
        raise InadmissibleError("weight function is not admissible for the precedence")
    cases = []
    for rule in trs.rules:
        case = kbo_compare(rule.lhs, rule.rhs, wf, prec)
        if case is None:
            raise OrientationError(rule)
        cases.append((rule, case))
    return KboProof(wf, prec, tuple(cases))


# --- exhaustive parameter search ------------------------------------------

def ordered_partitions(items: Sequence[str]) -> Iterator[List[List[str]]]:
    """All ordered set partitions of ``items`` (total quasi-orders)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in ordered_partitions(rest):
        # join an existing block
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        # or become a new block in any gap
        for i in range(len(part) + 1):
            yield part[:i] + [[first]] + part[i:]


def _precedences(names: Sequence[str], mode: str) -> Iterator[Precedence]:
    if mode == "strict":
        for perm in itertools.permutations(names):
            yield Precedence({n: len(perm) - i for i, n in enumerate(perm)})
    else:
        for blocks in ordered_partitions(names):
            yield Precedence({n: len(blocks) - i for i, b in enumerate(blocks) for n in b})


def _count_orders(n: int, mode: str) -> int:
    if mode == "strict":
        out = 1
        for i in range(2, n + 1):
            out *= i
        return out
    # ordered Bell (Fubini) numbers
    fub = [1]
    for m in range(1, n + 1):
        fub.append(sum(_binom(m, i) * fub[m - i] for i in range(1, m + 1)))
    return fub[n]


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def brute_force(trs: Trs, max_weight: int, mode: str = "quasi",
                limit: int = 20_000_000) -> Optional[Tuple[WeightFunction, Precedence]]:
    """Exhaustively search weights in ``0..max_weight`` and all total precedences.

    Returns the first admissible pair that orients every rule, or None.
    """
    if mode not in ("strict", "quasi"):
        raise ValueError(f"unknown mode {mode!r}")
    names = [f.name for f in trs.signature]
    n = len(names)
    space = (max_weight + 1) ** n * max_weight * _count_orders(n, mode)
    if space > limit:
        raise SearchSpaceTooLarge(f"{space} candidate parameter sets exceed the limit {limit}")
    # the variable condition does not depend on the parameters
    for rule in trs.rules:
        if isinstance(rule.lhs, Var) or rule.lhs == rule.rhs:
            return None
        vl, vr = variables(rule.lhs), variables(rule.rhs)
        if any(vl[x] < c for x, c in vr.items()):
            return None
    rules = list(trs.rules)
    for prec in _precedences(names, mode):
        for w0 in range(1, max_weight + 1):
            for combo in itertools.product(range(max_weight + 1), repeat=n):
                wf = WeightFunction(dict(zip(names, combo)), w0)
                if not is_admissible(wf, prec, trs.signature):
                    continue
                for i, rule in enumerate(rules):
                    if kbo_compare(rule.lhs, rule.rhs, wf, prec) is None:
                        # move the failing rule to the front: it tends to fail again
                        if i:
                            rules.insert(0, rules.pop(i))
                        break
                else:
                    return wf, prec
    return None
