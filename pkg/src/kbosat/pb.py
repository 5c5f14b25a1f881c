"""Pseudo-boolean encoding of KBO orientability, OPB export and solving."""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .logic import Cnf, VarPool
from .proof import DecodeTables
from .satenc import code_width
from .solver import ResourceLimit, Solver
from .terms import Fun, Term, Trs, Var, cancel_common, is_unary_tower, variables

__all__ = [
    "PBConstraint", "PbProblem", "PbEncoder", "kbo_pbc", "objectives",
    "to_opb", "parse_opb", "normalize", "pb_to_cnf", "solve_pb", "minimize",
    "MinimizeResult",
]

GE, EQ, LE = ">=", "=", "<="


@dataclass(frozen=True)
class PBConstraint:
    """``sum(coef * x) relation bound`` over 0/1 variables."""

    terms: Tuple[Tuple[int, int], ...]
    relation: str
    bound: int

    @classmethod
    def make(cls, terms: Iterable[Tuple[int, int]], relation: str, bound: int) -> "PBConstraint":
        if relation not in (GE, EQ, LE):
            raise ValueError(f"unknown relation {relation!r}")
        coef: Dict[int, int] = {}
        for a, x in terms:
            coef[x] = coef.get(x, 0) + a
        return cls(tuple((a, x) for x, a in coef.items() if a), relation, bound)

    def lhs(self, model: Mapping[int, bool]) -> int:
        return sum(a for a, x in self.terms if model[x])

    def satisfied(self, model: Mapping[int, bool]) -> bool:
        v = self.lhs(model)
        if self.relation == GE:
            return v >= self.bound
        if self.relation == LE:
            return v <= self.bound
        return v == self.bound

    def __str__(self):
        body = " ".join(f"{a:+d} x{x}" for a, x in self.terms)
        return f"{body} {self.relation} {self.bound}"


@dataclass
class PbProblem:
    constraints: List[PBConstraint]
    objective: Optional[List[Tuple[int, int]]] = None
    tables: Optional[DecodeTables] = None
    num_vars: int = 0
    X: Dict[Tuple[str, str], int] = field(default_factory=dict)
    Y: Dict[Tuple[str, str], int] = field(default_factory=dict)
    Z: Dict[Tuple[str, str], int] = field(default_factory=dict)
    kbo: Dict[Tuple[Term, Term], int] = field(default_factory=dict)
    kbo_prime: Dict[Tuple[Term, Term], int] = field(default_factory=dict)

    def max_var(self) -> int:
        top = self.num_vars
        for c in self.constraints:
            for _, x in c.terms:
                top = max(top, x)
        for _, x in self.objective or ():
            top = max(top, x)
        return top


def _bits_value_terms(bits: Sequence[int], scale: int = 1) -> List[Tuple[int, int]]:
    """``scale * value(bits)`` as PB terms; ``bits`` are MSB first."""
    n = len(bits)
    return [(scale << (n - 1 - i), v) for i, v in enumerate(bits)]


class PbEncoder:
    def __init__(self, trs: Trs, k: int, mode: str = "quasi", pool: Optional[VarPool] = None):
        if k < 1:
            raise ValueError("k must be at least 1")
        if mode not in ("strict", "quasi"):
            raise ValueError(f"unknown precedence mode {mode!r}")
        self.trs, self.k, self.mode = trs, k, mode
        self.pool = pool or VarPool()
        names = [f.name for f in trs.signature]
        self.names = names
        fresh = lambda label: self.pool.fresh(label).id
        self.wbits = {f: [fresh(f"w[{f}]_{j}") for j in range(k, 0, -1)] for f in names}
        self.w0bits = [fresh(f"w0_{j}") for j in range(k, 0, -1)]
        self.l = code_width(len(names))
        self.code = {f: [fresh(f"i[{f}]_{j}") for j in range(self.l, 0, -1)] for f in names}
        pairs = [(f, g) for f in names for g in names if f != g]
        self.X = {p: fresh(f"X[{p[0]},{p[1]}]") for p in pairs}
        self.Y = {p: fresh(f"Y[{p[0]},{p[1]}]") for p in pairs}
        self.Z = {p: fresh(f"Z[{p[0]},{p[1]}]") for p in pairs}
        self.kbo: Dict[Tuple[Term, Term], int] = {}
        self.kbo_prime: Dict[Tuple[Term, Term], int] = {}
        self.constraints: List[PBConstraint] = []

    def emit(self, terms, relation, bound):
        self.constraints.append(PBConstraint.make(terms, relation, bound))

    def weight_terms(self, f: str, scale: int = 1):
        return _bits_value_terms(self.wbits[f], scale)

    # --- admissibility --------------------------------------------------

    def adm_pbc(self) -> List[PBConstraint]:
        start = len(self.constraints)
        n = len(self.names)
        self.emit(_bits_value_terms(self.w0bits), GE, 1)
        for f in self.trs.signature:
            if f.arity == 0:
                self.emit(self.weight_terms(f.name) + _bits_value_terms(self.w0bits, -1), GE, 0)
        for f in self.trs.signature:
            if f.arity == 1:
                terms = self.weight_terms(f.name, n - 1)
                for g in self.names:
                    if g != f.name:
                        terms += [(1, self.X[f.name, g]), (1, self.Y[f.name, g])]
                self.emit(terms, GE, n - 1)
        return self.constraints[start:]

    # --- precedence ------------------------------------------------------

    def prec_pbc(self) -> List[PBConstraint]:
        start = len(self.constraints)
        top = 1 << self.l
        for (f, g), x in self.X.items():
            y, yr, z = self.Y[f, g], self.Y[g, f], self.Z[f, g]
            diff = _bits_value_terms(self.code[f]) + _bits_value_terms(self.code[g], -1)
            self.emit([(2, x), (1, y), (1, yr), (2, z)], EQ, 2)
            self.emit([(-1, x), (top, y), (top, z)] + diff, GE, 0)
            self.emit([(top, x), (1, y), (top, z)] + diff, GE, 1)
        if self.mode == "strict":
            for y in self.Y.values():
                self.emit([(1, y)], EQ, 0)
        return self.constraints[start:]

    # --- orientation -----------------------------------------------------

    def encode_kbo_gt(self, s: Term, t: Term) -> int:
        """Variable ``KBO[s,t]``; emits the defining constraints once per pair."""
        key = (s, t)
        v = self.kbo.get(key)
        if v is not None:
            return v
        v = self.pool.fresh(f"KBO[{s},{t}]").id
        self.kbo[key] = v
        if isinstance(s, Var) or s == t:
            self.emit([(1, v)], EQ, 0)
            return v
        vs = variables(s)
        if any(vs[x] < n for x, n in variables(t).items()):
            self.emit([(1, v)], EQ, 0)
            return v
        p = self.pool.fresh(f"KBO'[{s},{t}]").id
        self.kbo_prime[key] = p
        ls, rs = cancel_common(s, t)
        unit = 1 << self.k
        m = sum(unit * n for n in rs.values())
        terms = [(-(m + 1), v), (1, p)]
        for side, sign in ((ls, 1), (rs, -1)):
            for tok, n in side.items():
                bits = self.w0bits if isinstance(tok, Var) else self.wbits[tok.name]
                terms += _bits_value_terms(bits, sign * n)
        self.emit(terms, GE, -m)
        self._encode_prime(s, t, p)
        return v

    def _encode_prime(self, s: Fun, t: Term, p: int):
        if isinstance(t, Var):
            if not is_unary_tower(s, t):
                self.emit([(1, p)], EQ, 0)
            return
        i = next((j for j, (a, b) in enumerate(zip(s.args, t.args)) if a != b), None)
        f, g = s.symbol.name, t.symbol.name
        if i is None:
            # no argument can decide; only f > g remains (impossible for f = g)
            if s.symbol == t.symbol:
                self.emit([(1, p)], EQ, 0)
            else:
                self.emit([(-1, p), (1, self.X[f, g])], GE, 0)
            return
        rec = self.encode_kbo_gt(s.args[i], t.args[i])
        if s.symbol == t.symbol:
            self.emit([(-1, p), (1, rec)], GE, 0)
        else:
            self.emit([(-2, p), (2, self.X[f, g]), (1, self.Y[f, g]), (1, rec)], GE, 0)

    def encode(self) -> PbProblem:
        self.adm_pbc()
        self.prec_pbc()
        for rule in self.trs.rules:
            v = self.encode_kbo_gt(rule.lhs, rule.rhs)
            self.emit([(1, v)], EQ, 1)
        tables = DecodeTables(
            engine="pbc", k=self.k, l=self.l, mode=self.mode,
            weight_bits=dict(self.wbits), w0_bits=list(self.w0bits), code_bits=dict(self.code),
            arities={f.name: f.arity for f in self.trs.signature},
        )
        return PbProblem(list(self.constraints), None, tables, self.pool.count,
                         dict(self.X), dict(self.Y), dict(self.Z), dict(self.kbo), dict(self.kbo_prime))


def kbo_pbc(trs: Trs, k: int, mode: str = "quasi") -> PbProblem:
    return PbEncoder(trs, k, mode).encode()


def objectives(p: PbProblem, kind: str) -> List[Tuple[int, int]]:
    """Objective terms: total weight (including w0) or number of precedence facts."""
    t = p.tables
    if kind == "weights":
        if t is None or not t.weight_bits:
            return []
        out: List[Tuple[int, int]] = []
        for bits in t.weight_bits.values():
            out += _bits_value_terms(bits)
        out += _bits_value_terms(t.w0_bits)
        return out
    if kind == "precedence":
        return [(1, x) for x in p.X.values()] + [(1, y) for y in p.Y.values()]
    raise ValueError(f"unknown objective {kind!r}")


# --- OPB ----------------------------------------------------------------

def _opb_terms(terms) -> str:
    return " ".join(f"{a:+d} x{x}" for a, x in terms)


def to_opb(p: PbProblem) -> str:
    lines = [f"* #variable= {p.max_var()} #constraint= {len(p.constraints)}"]
    if p.objective:
        lines.append(f"min: {_opb_terms(p.objective)} ;")
    for c in p.constraints:
        terms, rel, bound = c.terms, c.relation, c.bound
        if rel == LE:
            terms, rel, bound = tuple((-a, x) for a, x in terms), GE, -bound
        lines.append(f"{_opb_terms(terms)} {rel} {bound} ;".lstrip())
    return "\n".join(lines) + "\n"


_OPB_TERM = re.compile(r"([+-]?\d+)\s+(~?)x(\d+)")


def parse_opb(text: str) -> PbProblem:
    """Parse linear OPB; negated literals ``~xi`` are rewritten as ``1 - xi``."""
    constraints = []
    objective = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        if not line.endswith(";"):
            raise ValueError(f"missing ';' in line: {raw}")
        line = line[:-1]
        if line.startswith("min:"):
            terms, const = _parse_terms(line[4:])
            objective = terms
            continue
        m = re.search(r"(>=|<=|=)\s*([+-]?\d+)\s*$", line)
        if m is None:
            raise ValueError(f"no relation in line: {raw}")
        terms, const = _parse_terms(line[: m.start()])
        constraints.append(PBConstraint.make(terms, m.group(1), int(m.group(2)) - const))
    p = PbProblem(constraints, objective)
    p.num_vars = p.max_var()
    return p


def _parse_terms(text: str):
    terms, const = [], 0
    pos = 0
    text = text.strip()
    for m in _OPB_TERM.finditer(text):
        if text[pos:m.start()].strip():
            raise ValueError(f"cannot parse {text[pos:m.start()]!r}")
        a, negated, x = int(m.group(1)), m.group(2), int(m.group(3))
        if negated:
            const += a
            terms.append((-a, x))
        else:
            terms.append((a, x))
        pos = m.end()
    if text[pos:].strip():
        raise ValueError(f"cannot parse {text[pos:]!r}")
    return terms, const


# --- translation to CNF ----------------------------------------------------

def normalize(c: PBConstraint) -> Tuple[List[Tuple[int, int]], str, int]:
    """Rewrite to positive coefficients over literals with relation ``>=`` or ``=``.

    Returns ``(terms, relation, bound)`` where each term is ``(coef, literal)``
    and a negative literal ``-x`` stands for ``1 - x``.
    """
    terms, rel, bound = list(c.terms), c.relation, c.bound
    if rel == LE:
        terms, rel, bound = [(-a, x) for a, x in terms], GE, -bound
    out = []
    for a, x in terms:
        if a < 0:
            # a*x = a + |a|*(1-x)
            bound -= a
            out.append((-a, -x))
        else:
            out.append((a, x))
    return out, rel, bound


# A bit is either a DIMACS literal or a Python bool constant.
Bit = object


class _Adder:
    """Clause-level full and half adders with constant folding."""

    def __init__(self, pool: VarPool, cnf: Cnf):
        self.pool, self.cnf = pool, cnf

    def fresh(self) -> int:
        return self.pool.fresh().id

    def add(self, a: Bit, b: Bit, c: Bit = False) -> Tuple[Bit, Bit]:
        """``(sum, carry)`` of up to three input bits."""
        ones = sum(1 for x in (a, b, c) if x is True)
        lits = [x for x in (a, b, c) if x is not True and x is not False]
        if not lits:
            return ones % 2 == 1, ones >= 2
        if len(lits) == 1:
            x = lits[0]
            return (x, False) if ones == 0 else (-x, x) if ones == 1 else (x, True)
        if len(lits) == 2:
            x, y = lits
            s, cy = self._xor(x, y), (self._and(x, y) if ones == 0 else self._or(x, y))
            return (s if ones == 0 else -s), cy
        return self._full(*lits)

    def _xor(self, x, y):
        v = self.fresh()
        add = self.cnf.add
        add([-v, x, y]), add([-v, -x, -y]), add([v, -x, y]), add([v, x, -y])
        return v

    def _and(self, x, y):
        v = self.fresh()
        self.cnf.add([-v, x]), self.cnf.add([-v, y]), self.cnf.add([v, -x, -y])
        return v

    def _or(self, x, y):
        v = self.fresh()
        self.cnf.add([v, -x]), self.cnf.add([v, -y]), self.cnf.add([-v, x, y])
        return v

    def _full(self, x, y, z):
        s, c = self.fresh(), self.fresh()
        add = self.cnf.add
        for a in (x, -x):
            for b in (y, -y):
                for d in (z, -z):
                    odd = (a == x) + (b == y) + (d == z)
                    add([-a, -b, -d, s if odd % 2 else -s])
        for a, b in ((x, y), (x, z), (y, z)):
            add([-a, -b, c])
            add([a, b, -c])
        return s, c


def weighted_total(terms: Sequence[Tuple[int, int]], adder: _Adder) -> List[Bit]:
    """Binary total (least significant bit first) of ``sum(coef * literal)``.

    Coefficients are split into powers of two; each column is reduced with
    full and half adders until one bit remains, carries moving left.
    """
    columns: List[List[Bit]] = []
    for a, x in terms:
        j = 0
        while a:
            if a & 1:
                while len(columns) <= j:
                    columns.append([])
                columns[j].append(x)
            a >>= 1
            j += 1
    out: List[Bit] = []
    j = 0
    while j < len(columns):
        col = columns[j]
        while len(col) > 1:
            if len(col) >= 3:
                s, c = adder.add(col.pop(0), col.pop(0), col.pop(0))
            else:
                s, c = adder.add(col.pop(0), col.pop(0))
            col.append(s)
            if c is not False:
                if j + 1 == len(columns):
                    columns.append([])
                columns[j + 1].append(c)
        out.append(col[0] if col else False)
        j += 1
    return out


def _ge_clauses(bits: Sequence[Bit], bound: int) -> List[List[int]]:
    """Clauses stating ``value(bits) >= bound``; ``bits`` least significant first."""
    if bound <= 0:
        return []
    if bound >= 1 << len(bits):
        return [[]]
    clauses: List[List[int]] = []  # clauses of the suffix below the current bit
    for i in range(len(bits)):
        t = bits[i]
        if bound >> i & 1:
            # this bit must be set once the higher bits are equal
            if t is False:
                clauses = [[]]
            elif t is not True:
                clauses = clauses + [[t]]
        else:
            # a set bit here decides the comparison
            if t is True:
                clauses = []
            elif t is not False:
                clauses = [c + [t] for c in clauses]
    return clauses


def _le_clauses(bits: Sequence[Bit], bound: int) -> List[List[int]]:
    """Clauses stating ``value(bits) <= bound`` via the bitwise complement."""
    n = len(bits)
    if bound >= (1 << n) - 1:
        return []
    if bound < 0:
        return [[]]
    flipped = [(not b) if isinstance(b, bool) else -b for b in bits]
    return _ge_clauses(flipped, ((1 << n) - 1) ^ bound)


def pb_to_cnf(constraints: Sequence[PBConstraint], pool: VarPool, cnf: Optional[Cnf] = None) -> Cnf:
    """Translate constraints to CNF through adder totals compared with the bound."""
    cnf = cnf if cnf is not None else Cnf()
    adder = _Adder(pool, cnf)
    for c in constraints:
        terms, rel, bound = normalize(c)
        total = sum(a for a, _ in terms)
        if rel == GE and bound <= 0:
            continue
        if bound > total or (rel == EQ and bound < 0):
            cnf.clauses.append([])
            continue
        if rel == EQ and bound == 0:
            for _, x in terms:
                cnf.add([-x])
            continue
        if rel == EQ and bound == total:
            for _, x in terms:
                cnf.add([x])
            continue
        if rel == GE and all(a >= bound for a, _ in terms):
            cnf.add([x for _, x in terms])  # clause-shaped
            continue
        bits = weighted_total(terms, adder)
        for clause in _ge_clauses(bits, bound):
            cnf.add(clause)
        if rel == EQ:
            for clause in _le_clauses(bits, bound):
                cnf.add(clause)
    cnf.num_vars = max(cnf.num_vars, pool.count)
    return cnf


def _fresh_pool(p: PbProblem) -> VarPool:
    return VarPool(p.max_var() + 1)


def _check(p: PbProblem, model: Mapping[int, bool]):
    for c in p.constraints:
        if not c.satisfied(model):
            raise AssertionError(f"model violates {c}")


def solve_pb(p: PbProblem, conflict_limit: Optional[int] = None,
             timeout: Optional[float] = None) -> Optional[Dict[int, bool]]:
    """Satisfying assignment of the PB constraints, or None if unsatisfiable."""
    pool = _fresh_pool(p)
    cnf = pb_to_cnf(p.constraints, pool)
    solver = Solver(max(cnf.num_vars, p.max_var()))
    for clause in cnf.clauses:
        if not solver.add_clause(clause):
            return None
    deadline = time.monotonic() + timeout if timeout is not None else None
    model = solver.solve(conflict_limit, deadline)
    if model is not None:
        _check(p, model)
    return model


@dataclass
class MinimizeResult:
    model: Optional[Dict[int, bool]]
    value: Optional[int]
    optimal: bool
    trace: List[int] = field(default_factory=list)


def minimize(p: PbProblem, objective: Optional[Sequence[Tuple[int, int]]] = None,
             conflict_limit: Optional[int] = None, timeout: Optional[float] = None) -> MinimizeResult:
    """Linear descent: solve, then demand ``objective <= v - 1`` until unsatisfiable.

    If the budget runs out after a first model, the best model so far is
    returned with ``optimal=False``.
    """
    objective = list(objective if objective is not None else p.objective or [])
    pool = _fresh_pool(p)
    cnf = pb_to_cnf(p.constraints, pool)
    solver = Solver(max(cnf.num_vars, p.max_var()))
    ok = all(solver.add_clause(c) for c in cnf.clauses)
    if not ok:
        return MinimizeResult(None, None, True)
    deadline = time.monotonic() + timeout if timeout is not None else None
    # objective = (sum over literals) - offset
    terms, _, offset = normalize(PBConstraint.make(objective, GE, 0))
    side = Cnf()
    total = weighted_total(terms, _Adder(pool, side)) if terms else None
    for c in side.clauses:
        solver.add_clause(c)
    best, best_value, trace = None, None, []
    while True:
        try:
            model = solver.solve(conflict_limit, deadline)
        except ResourceLimit:
            if best is None:
                raise
            return MinimizeResult(best, best_value, False, trace)
        if model is None:
            return MinimizeResult(best, best_value, True, trace)
        _check(p, model)
        value = sum(a for a, x in objective if model[x])
        best, best_value = {v: model[v] for v in range(1, p.max_var() + 1)}, value
        trace.append(value)
        if total is None:
            return MinimizeResult(best, best_value, True, trace)
        # require the literal sum, value + offset, to drop by at least one
        target = value + offset
        if target == 0:
            return MinimizeResult(best, best_value, True, trace)
        for c in _le_clauses(total, target - 1):
            solver.add_clause(c)
