"""Propositional encoding of KBO orientability."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .logic import (
    FALSE, TRUE, Formula, VarPool, WeightedBits, bv_add, bv_eq, bv_geq, bv_gt,
    conj, const_bits, disj, fresh_bits, iff, implies, neg, zero_extend,
)
from .proof import DecodeTables
from .terms import Fun, Term, Trs, Var, cancel_common, embeds, is_unary_tower, tokens, variables

__all__ = ["WeightVars", "PrecVars", "SatEncoder", "SatEncoding", "kbo_sat", "code_width"]

W0 = "<w0>"  # weight atom shared by all variables


def code_width(n: int) -> int:
    """Bits needed to give ``n`` symbols distinct codes."""
    return math.ceil(math.log2(n)) if n > 1 else 0


@dataclass
class WeightVars:
    wsym: Dict[str, Tuple[Formula, ...]]
    w0: Tuple[Formula, ...]


@dataclass
class PrecVars:
    X: Dict[Tuple[str, str], Formula]
    Y: Dict[Tuple[str, str], Formula]
    code: Dict[str, Tuple[Formula, ...]]
    strict: bool = False


@dataclass
class SatEncoding:
    formula: Formula
    tables: DecodeTables
    pool: VarPool
    stats: Dict[str, int] = field(default_factory=dict)


def allocate(trs: Trs, k: int, mode: str, pool: VarPool):
    """Weight bits, w0 bits, precedence codes, then X and Y variables."""
    names = [f.name for f in trs.signature]
    wsym = {f: fresh_bits(pool, k, f"w[{f}]") for f in names}
    w0 = fresh_bits(pool, k, "w0")
    l = code_width(len(names))
    code = {f: fresh_bits(pool, l, f"i[{f}]") for f in names}
    X, Y = {}, {}
    for f in names:
        for g in names:
            if f != g:
                X[f, g] = pool.fresh(f"X[{f},{g}]")
    for f in names:
        for g in names:
            if f != g:
                Y[f, g] = pool.fresh(f"Y[{f},{g}]")
    tables = DecodeTables(
        engine="sat", k=k, l=l, mode=mode,
        weight_bits={f: [b.id for b in bits] for f, bits in wsym.items()},
        w0_bits=[b.id for b in w0],
        code_bits={f: [b.id for b in bits] for f, bits in code.items()},
        arities={f.name: f.arity for f in trs.signature},
    )
    return WeightVars(wsym, w0), PrecVars(X, Y, code, mode == "strict"), tables


class SatEncoder:
    """Builds the formula for one rewrite system.

    ``cancel`` removes tokens shared by both sides before comparing weights,
    ``cache`` reuses sums of equal weight multisets, ``embed`` skips pairs
    related by embedding.  ``widen`` sizes every sum so it cannot overflow;
    with ``widen=False`` all sums keep ``k`` bits and overflowing is
    forbidden, which loses solutions whose term weights reach ``2**k``.
    """

    def __init__(self, trs: Trs, k: int, mode: str = "quasi", *, cancel: bool = True,
                 cache: bool = True, embed: bool = True, widen: bool = True,
                 pool: Optional[VarPool] = None):
        if k < 1:
            raise ValueError("k must be at least 1")
        if mode not in ("strict", "quasi"):
            raise ValueError(f"unknown precedence mode {mode!r}")
        self.trs, self.k, self.mode = trs, k, mode
        self.cancel, self.use_cache, self.embed, self.widen = cancel, cache, embed, widen
        self.pool = pool or VarPool()
        self.wv, self.pv, self.tables = allocate(trs, k, mode, self.pool)
        self.cache: Dict[tuple, WeightedBits] = {}
        self.additions = 0
        self._gt_memo: Dict[Tuple[Term, Term], Formula] = {}
        self.unit_max = (1 << k) - 1

    # --- admissibility and precedence --------------------------------------

    def adm_sat(self) -> Formula:
        wv, pv, k = self.wv, self.pv, self.k
        zero = const_bits(0, k)
        parts = [bv_gt(wv.w0, zero)]
        for f in self.trs.signature:
            if f.arity == 0:
                parts.append(bv_geq(wv.wsym[f.name], wv.w0))
        for f in self.trs.signature:
            if f.arity == 1:
                maximal = conj(*(disj(pv.X[f.name, g.name], pv.Y[f.name, g.name])
                                 for g in self.trs.signature if g.name != f.name))
                parts.append(implies(bv_eq(wv.wsym[f.name], zero), maximal))
        return conj(*parts)

    def prec_defs(self) -> Formula:
        pv = self.pv
        parts = []
        for (f, g), x in pv.X.items():
            parts.append(iff(x, bv_gt(pv.code[f], pv.code[g])))
        for (f, g), y in pv.Y.items():
            parts.append(iff(y, bv_eq(pv.code[f], pv.code[g])))
        if pv.strict:
            parts.extend(neg(y) for y in pv.Y.values())
        return conj(*parts)

    # --- weights -------------------------------------------------------------

    def _atom_bits(self, atom: str) -> Tuple[Formula, ...]:
        return self.wv.w0 if atom == W0 else self.wv.wsym[atom]

    def _width(self, units: int) -> int:
        if not self.widen:
            return self.k
        return max(self.k, (units * self.unit_max).bit_length())

    def encode_weight(self, counts: Counter) -> Tuple[WeightedBits, int]:
        """Weight of a token multiset as ``(WeightedBits, number of atoms)``.

        Atoms are added in sorted order so equal prefixes hit the cache.
        """
        atoms: List[str] = []
        for tok, n in counts.items():
            name = W0 if isinstance(tok, Var) else tok.name
            atoms.extend([name] * n)
        atoms.sort()
        if not atoms:
            return WeightedBits(const_bits(0, self.k)), 0
        acc = WeightedBits(self._atom_bits(atoms[0]))
        for j in range(1, len(atoms)):
            key = (tuple(atoms[: j + 1]), self._width(j + 1))
            hit = self.cache.get(key) if self.use_cache else None
            if hit is None:
                width = key[1]
                a = WeightedBits(zero_extend(acc.bits, width), acc.side)
                b = WeightedBits(zero_extend(self._atom_bits(atoms[j]), width))
                hit = bv_add(a, b, self.pool)
                self.additions += 1
                if self.use_cache:
                    self.cache[key] = hit
            acc = hit
        return acc, len(atoms)

    def term_weight(self, t: Term) -> WeightedBits:
        return self.encode_weight(tokens(t))[0]

    # --- orientation ---------------------------------------------------------

    def encode_kbo_gt(self, s: Term, t: Term) -> Formula:
        key = (s, t)
        out = self._gt_memo.get(key)
        if out is None:
            out = self._encode_gt(s, t)
            self._gt_memo[key] = out
        return out

    def _encode_gt(self, s: Term, t: Term) -> Formula:
        if isinstance(s, Var) or s == t:
            return FALSE
        vs = variables(s)
        if any(vs[x] < n for x, n in variables(t).items()):
            return FALSE
        if self.embed and embeds(s, t):
            return TRUE
        if self.cancel:
            ls, rs = cancel_common(s, t)
        else:
            ls, rs = tokens(s), tokens(t)
        ws, ns = self.encode_weight(ls)
        wt, nt = self.encode_weight(rs)
        width = max(ws.width, wt.width)
        a, b = zero_extend(ws.bits, width), zero_extend(wt.bits, width)
        prime = self._encode_prime(s, t)
        compare = disj(bv_gt(a, b), conj(bv_eq(a, b), prime))
        # the side constraints occur in both disjuncts, so they factor out
        return conj(compare, ws.side, wt.side)

    def _encode_prime(self, s: Fun, t: Term) -> Formula:
        if isinstance(t, Var):
            return TRUE if is_unary_tower(s, t) else FALSE
        rec = FALSE
        for si, ti in zip(s.args, t.args):
            if si != ti:
                rec = self.encode_kbo_gt(si, ti)
                break
        if s.symbol == t.symbol:
            return rec
        f, g = s.symbol.name, t.symbol.name
        return disj(self.pv.X[f, g], conj(self.pv.Y[f, g], rec))

    def encode(self) -> SatEncoding:
        parts = [self.adm_sat()]
        for rule in self.trs.rules:
            parts.append(self.encode_kbo_gt(rule.lhs, rule.rhs))
        parts.append(self.prec_defs())
        formula = conj(*parts)
        stats = {"variables": self.pool.count, "additions": self.additions}
        return SatEncoding(formula, self.tables, self.pool, stats)


def kbo_sat(trs: Trs, k: int, mode: str = "quasi", **options) -> SatEncoding:
    """Encode ``trs`` at ``k`` weight bits; see :class:`SatEncoder` for options."""
    return SatEncoder(trs, k, mode, **options).encode()
