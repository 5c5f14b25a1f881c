"""Decoding solver models into KBO parameters, verification and rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .kbo import (
    EQUAL, GREATER, InadmissibleError, KboProof, OrientationError, Precedence,
    WeightFunction, kbo_compare, orients,
)
from .terms import Trs

__all__ = ["DecodeTables", "SoundnessError", "decode", "verify", "render", "proof_json",
           "used_relations", "encode_parameters"]


@dataclass
class DecodeTables:
    """Where the weight and precedence bits of one encoding live.

    Bit lists hold variable ids, most significant bit first.
    """

    engine: str
    k: int
    l: int
    mode: str
    weight_bits: Dict[str, List[int]] = field(default_factory=dict)
    w0_bits: List[int] = field(default_factory=list)
    code_bits: Dict[str, List[int]] = field(default_factory=dict)
    arities: Dict[str, int] = field(default_factory=dict)

    def variables(self) -> List[int]:
        out = list(self.w0_bits)
        for bits in self.weight_bits.values():
            out.extend(bits)
        for bits in self.code_bits.values():
            out.extend(bits)
        return out


class SoundnessError(RuntimeError):
    """A decoded model does not yield a KBO proof; this is an internal bug."""

    def __init__(self, msg, rule=None, weights=None, precedence=None):
        super().__init__(msg)
        self.rule = rule
        self.weights = weights
        self.precedence = precedence


def _value(bits: Sequence[int], model: Mapping[int, bool]) -> int:
    out = 0
    for v in bits:
        out = 2 * out + (1 if model[v] else 0)
    return out


def decode(model: Mapping[int, bool], tables: DecodeTables) -> Tuple[WeightFunction, Precedence]:
    weights = {f: _value(bits, model) for f, bits in tables.weight_bits.items()}
    w0 = _value(tables.w0_bits, model)
    codes = {f: _value(tables.code_bits.get(f, ()), model) for f in tables.weight_bits}
    if tables.mode == "strict":
        # equal codes are unconstrained there; split ties by name
        order = sorted(codes, key=lambda f: (codes[f], f))
        ranks = {f: i for i, f in enumerate(order)}
    else:
        # A constant equivalent to another symbol never helps a lexicographic
        # step (it has no arguments) but breaks the subterm property, so each
        # constant sits just below the other members of its class.
        ranks = {f: 2 * c + (0 if tables.arities.get(f, 1) == 0 else 1) for f, c in codes.items()}
    return WeightFunction(weights, w0), Precedence(ranks)


def encode_parameters(wf: WeightFunction, prec: Precedence, tables: DecodeTables) -> Dict[int, bool]:
    """Partial model writing known parameters into the table bits (inverse of decode)."""
    out: Dict[int, bool] = {}

    def put(bits, value):
        if value >= 1 << len(bits):
            raise ValueError(f"{value} does not fit in {len(bits)} bits")
        for i, v in enumerate(reversed(bits)):
            out[v] = bool(value >> i & 1)

    for f, bits in tables.weight_bits.items():
        put(bits, wf.w[f])
    put(tables.w0_bits, wf.w0)
    for f, bits in tables.code_bits.items():
        put(bits, prec.ranks[f])
    return out


def verify(trs: Trs, wf: WeightFunction, prec: Precedence) -> KboProof:
    try:
        return orients(trs, wf, prec)
    except OrientationError as exc:
        raise SoundnessError(f"decoded parameters do not orient {exc.rule}",
                             exc.rule, wf, prec) from None
    except InadmissibleError as exc:
        raise SoundnessError(f"decoded parameters are inadmissible: {exc}", None, wf, prec) from None


def used_relations(proof: KboProof, trs: Optional[Trs] = None) -> List[Tuple[str, str, str]]:
    """Precedence facts the proof actually relies on, as ``(f, op, g)``."""
    facts: List[Tuple[str, str, str]] = []
    wf, prec = proof.weights, proof.precedence
    for rule, _ in proof.per_rule:
        used: list = []
        kbo_compare(rule.lhs, rule.rhs, wf, prec, used)
        facts.extend(used)
    if trs is not None:
        for f in trs.signature:
            if f.arity == 1 and wf.w[f.name] == 0:
                for g in trs.signature:
                    if g.name != f.name:
                        facts.append((f.name, prec.compare(f.name, g.name), g.name))
    out, seen = [], set()
    for f, op, g in facts:
        if op == EQUAL and f > g:
            f, g = g, f
        if (f, op, g) not in seen:
            seen.add((f, op, g))
            out.append((f, op, g))
    return out


def _chains(prec: Precedence, facts: Optional[List[Tuple[str, str, str]]]) -> List[str]:
    if facts is None:
        classes = prec.classes()
        if len(classes) <= 1 and sum(map(len, classes)) <= 1:
            return []
        return [" > ".join(" ~ ".join(c) for c in classes)]
    if not facts:
        return []
    # classes of the used equivalences
    rep: Dict[str, str] = {}

    def find(a):
        rep.setdefault(a, a)
        while rep[a] != a:
            a = rep[a]
        return a

    for f, op, g in facts:
        find(f), find(g)
        if op == EQUAL:
            a, b = sorted((find(f), find(g)))
            rep[b] = a
    members: Dict[str, List[str]] = {}
    for a in sorted(rep):
        members.setdefault(find(a), []).append(a)
    label = {c: " ~ ".join(ms) for c, ms in members.items()}
    edges = {(find(f), find(g)) for f, op, g in facts if op == GREATER}
    succ: Dict[str, set] = {c: set() for c in members}
    for a, b in edges:
        succ[a].add(b)
    # transitive reduction: drop a>c when a>b>...>c
    reach: Dict[str, set] = {}

    def below(c):
        if c not in reach:
            reach[c] = set()
            for d in succ[c]:
                reach[c] |= {d} | below(d)
        return reach[c]

    red = {c: {d for d in succ[c] if not any(d in below(e) for e in succ[c] if e != d)} for c in succ}
    has_pred = {d for c in red for d in red[c]}
    out: List[str] = []

    def walk(c, path):
        if not red[c]:
            out.append(" > ".join(label[x] for x in path))
            return
        for d in sorted(red[c], key=lambda x: (-prec.ranks.get(x, 0), x)):
            walk(d, path + [d])

    roots = sorted((c for c in members if c not in has_pred),
                   key=lambda x: (-prec.ranks.get(x, 0), x))
    for c in roots:
        if red[c] or len(members[c]) > 1:
            walk(c, [c])
    return out


def render(proof: KboProof, trs: Optional[Trs] = None, minimal: bool = False) -> str:
    """Plain-text proof: w0, weights by name, precedence chains, per-rule case.

    With ``minimal`` only the precedence facts used by the proof are shown.
    """
    wf = proof.weights
    lines = [f"w0 = {wf.w0}"]
    for name in sorted(wf.w):
        lines.append(f"w({name}) = {wf.w[name]}")
    facts = used_relations(proof, trs) if minimal else None
    chains = _chains(proof.precedence, facts)
    if chains:
        lines.append("precedence:")
        lines.extend(f"  {c}" for c in chains)
    else:
        lines.append("precedence: (empty)")
    lines.append("rules:")
    for rule, case in proof.per_rule:
        lines.append(f"  {rule}   [{case}]")
    return "\n".join(lines) + "\n"


def proof_json(proof: KboProof) -> dict:
    return {
        "w0": proof.weights.w0,
        "weights": dict(sorted(proof.weights.w.items())),
        "ranks": dict(sorted(proof.precedence.ranks.items())),
        "rules": [{"rule": str(rule), "case": case} for rule, case in proof.per_rule],
    }


def dumps(proof: KboProof) -> str:
    return json.dumps(proof_json(proof), indent=2, sort_keys=True)
