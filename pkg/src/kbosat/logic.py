"""Propositional formulas, binary arithmetic circuits, Tseitin CNF and DIMACS."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

__all__ = [
    "Formula", "Const", "Atom", "Not", "And", "Or", "Implies", "Iff", "Xor",
    "TRUE", "FALSE", "neg", "conj", "disj", "implies", "iff", "xor",
    "VarPool", "WeightedBits", "Cnf", "WidthMismatch",
    "const_bits", "fresh_bits", "zero_extend", "bits_value",
    "bv_gt", "bv_eq", "bv_geq", "bv_add",
    "simplify", "evaluate", "node_count", "atoms", "tseitin",
    "to_dimacs", "parse_dimacs",
]


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


class Atom(Formula):
    __slots__ = ("id",)

    def __init__(self, id: int):
        if id <= 0:
            raise ValueError("variable ids are positive")
        self.id = id

    def __eq__(self, other):
        return isinstance(other, Atom) and other.id == self.id

    def __hash__(self):
        return self.id

    def __repr__(self):
        return f"v{self.id}"


class Not(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg

    def __repr__(self):
        return f"~{self.arg!r}"


class And(Formula):
    __slots__ = ("args",)

    def __init__(self, args: Tuple[Formula, ...]):
        self.args = args

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.args)) + ")"


class Or(Formula):
    __slots__ = ("args",)

    def __init__(self, args: Tuple[Formula, ...]):
        self.args = args

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.args)) + ")"


class _Binary(Formula):
    __slots__ = ("a", "b")
    op = "?"

    def __init__(self, a: Formula, b: Formula):
        self.a, self.b = a, b

    def __repr__(self):
        return f"({self.a!r} {self.op} {self.b!r})"


class Implies(_Binary):
    __slots__ = ()
    op = "->"


class Iff(_Binary):
    __slots__ = ()
    op = "<->"


class Xor(_Binary):
    __slots__ = ()
    op = "^"


# --- constant-folding constructors ----------------------------------------

def neg(a: Formula) -> Formula:
    if a is TRUE:
        return FALSE
    if a is FALSE:
        return TRUE
    if isinstance(a, Not):
        return a.arg
    return Not(a)


def conj(*args: Formula) -> Formula:
    kept = []
    for a in args:
        if a is FALSE:
            return FALSE
        if a is not TRUE:
            kept.append(a)
    if not kept:
        return TRUE
    if len(kept) == 1:
        return kept[0]
    return And(tuple(kept))


def disj(*args: Formula) -> Formula:
    kept = []
    for a in args:
        if a is TRUE:
            return TRUE
        if a is not FALSE:
            kept.append(a)
    if not kept:
        return FALSE
    if len(kept) == 1:
        return kept[0]
    return Or(tuple(kept))


def implies(a: Formula, b: Formula) -> Formula:
    if a is FALSE or b is TRUE:
        return TRUE
    if a is TRUE:
        return b
    if b is FALSE:
        return neg(a)
    return Implies(a, b)


def _same(a: Formula, b: Formula) -> bool:
    return a is b or (isinstance(a, Atom) and a == b)


def _complementary(a: Formula, b: Formula) -> bool:
    return (isinstance(a, Not) and _same(a.arg, b)) or (isinstance(b, Not) and _same(b.arg, a))


def iff(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Const):
        return b if a.value else neg(b)
    if isinstance(b, Const):
        return a if b.value else neg(a)
    if _same(a, b):
        return TRUE
    if _complementary(a, b):
        return FALSE
    return Iff(a, b)


def xor(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Const):
        return neg(b) if a.value else b
    if isinstance(b, Const):
        return neg(a) if b.value else a
    if _same(a, b):
        return FALSE
    if _complementary(a, b):
        return TRUE
    return Xor(a, b)


# --- variables and bit vectors --------------------------------------------

class VarPool:
    """Issues fresh, strictly increasing variable ids."""

    def __init__(self, start: int = 1):
        self._next = start
        self.names: Dict[int, str] = {}

    @property
    def count(self) -> int:
        return self._next - 1

    def fresh(self, name: Optional[str] = None) -> Atom:
        v = self._next
        self._next += 1
        if name is not None:
            self.names[v] = name
        return Atom(v)


BitVector = Tuple[Formula, ...]  # most significant bit first


class WidthMismatch(ValueError):
    pass


def const_bits(value: int, width: int) -> BitVector:
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return tuple(TRUE if value >> i & 1 else FALSE for i in range(width - 1, -1, -1))


def fresh_bits(pool: VarPool, width: int, name: Optional[str] = None) -> BitVector:
    return tuple(pool.fresh(f"{name}_{i}" if name else None) for i in range(width, 0, -1))


def zero_extend(bits: BitVector, width: int) -> BitVector:
    if len(bits) > width:
        raise WidthMismatch(f"cannot shrink {len(bits)} bits to {width}")
    return (FALSE,) * (width - len(bits)) + tuple(bits)


def bits_value(bits: Sequence[Formula], assignment: Mapping[int, bool]) -> int:
    out = 0
    for b in bits:
        out = 2 * out + evaluate(b, assignment)
    return out


def _check_widths(f, g):
    if len(f) != len(g):
        raise WidthMismatch(f"widths differ: {len(f)} vs {len(g)}")
    if not f:
        raise WidthMismatch("empty bit vector")


def _gt(f: BitVector, g: BitVector, eqs: Sequence[Formula]) -> Formula:
    # f >_1 g, then fold towards the most significant bit
    k = len(f)
    out = conj(f[k - 1], neg(g[k - 1]))
    for j in range(k - 2, -1, -1):
        out = disj(conj(f[j], neg(g[j])), conj(eqs[j], out))
    return out


def bv_gt(f: BitVector, g: BitVector) -> Formula:
    _check_widths(f, g)
    return _gt(f, g, [iff(a, b) for a, b in zip(f, g)])


def bv_eq(f: BitVector, g: BitVector) -> Formula:
    _check_widths(f, g)
    return conj(*(iff(a, b) for a, b in zip(f, g)))


def bv_geq(f: BitVector, g: BitVector) -> Formula:
    _check_widths(f, g)
    eqs = [iff(a, b) for a, b in zip(f, g)]
    return disj(_gt(f, g, eqs), conj(*eqs))


@dataclass(frozen=True)
class WeightedBits:
    """A bit vector together with the side constraint defining its bits."""

    bits: BitVector
    side: Formula = TRUE

    @property
    def width(self) -> int:
        return len(self.bits)


def bv_add(a: WeightedBits, b: WeightedBits, pool: VarPool) -> WeightedBits:
    """Ripple-carry sum with fresh carry and sum variables; overflow is forbidden."""
    f, g = a.bits, b.bits
    _check_widths(f, g)
    k = len(f)
    carry = [pool.fresh() for _ in range(k + 1)]  # carry[i] is c_i
    sums = [pool.fresh() for _ in range(k)]  # sums[i] is s_{i+1}
    parts = [neg(carry[k]), neg(carry[0])]
    for i in range(1, k + 1):
        fi, gi, cp = f[k - i], g[k - i], carry[i - 1]
        parts.append(iff(carry[i], disj(conj(fi, gi), conj(fi, cp), conj(gi, cp))))
    for i in range(1, k + 1):
        fi, gi, cp = f[k - i], g[k - i], carry[i - 1]
        parts.append(iff(sums[i - 1], xor(xor(fi, gi), cp)))
    side = conj(a.side, b.side, *parts)
    return WeightedBits(tuple(reversed(sums)), side)


# --- traversal ------------------------------------------------------------

def _children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, _Binary):
        return (f.a, f.b)
    if isinstance(f, Not):
        return (f.arg,)
    return ()


def _postorder(root: Formula, done: Optional[Mapping[int, object]] = None):
    """Distinct nodes of the DAG below ``root``, children before parents.

    Nodes whose id is a key of ``done`` are neither visited nor descended into.
    """
    seen = set(done) if done else set()
    if id(root) in seen:
        return []
    order = []
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(_children(node)):
            if id(c) not in seen:
                stack.append((c, False))
    return order


def node_count(f: Formula) -> int:
    return len(_postorder(f))


def atoms(f: Formula) -> List[int]:
    return sorted({n.id for n in _postorder(f) if isinstance(n, Atom)})


def _rebuild(node: Formula, kids: List[Formula]) -> Formula:
    if isinstance(node, And):
        return conj(*kids)
    if isinstance(node, Or):
        return disj(*kids)
    if isinstance(node, Not):
        return neg(kids[0])
    if isinstance(node, Implies):
        return implies(*kids)
    if isinstance(node, Iff):
        return iff(*kids)
    if isinstance(node, Xor):
        return xor(*kids)
    return node


def simplify(f: Formula) -> Formula:
    """Propagate constants bottom-up; the result is logically equivalent."""
    memo: Dict[int, Formula] = {}
    for node in _postorder(f):
        kids = [memo[id(c)] for c in _children(node)]
        memo[id(node)] = _rebuild(node, kids)
    return memo[id(f)]


def evaluate(f: Formula, assignment: Mapping[int, bool]) -> bool:
    memo: Dict[int, bool] = {}
    for node in _postorder(f):
        if isinstance(node, Const):
            v = node.value
        elif isinstance(node, Atom):
            v = bool(assignment[node.id])
        elif isinstance(node, Not):
            v = not memo[id(node.arg)]
        elif isinstance(node, And):
            v = all(memo[id(c)] for c in node.args)
        elif isinstance(node, Or):
            v = any(memo[id(c)] for c in node.args)
        elif isinstance(node, Implies):
            v = (not memo[id(node.a)]) or memo[id(node.b)]
        elif isinstance(node, Iff):
            v = memo[id(node.a)] == memo[id(node.b)]
        elif isinstance(node, Xor):
            v = memo[id(node.a)] != memo[id(node.b)]
        else:  # pragma: no cover
            raise TypeError(node)
        memo[id(node)] = v
    return memo[id(f)]


# --- CNF ------------------------------------------------------------------

@dataclass
class Cnf:
    clauses: List[List[int]] = field(default_factory=list)
    num_vars: int = 0

    def add(self, clause: Iterable[int]):
        clause = list(clause)
        for lit in clause:
            if abs(lit) > self.num_vars:
                self.num_vars = abs(lit)
        self.clauses.append(clause)

    def extend(self, other: "Cnf"):
        self.clauses.extend(other.clauses)
        self.num_vars = max(self.num_vars, other.num_vars)


def tseitin(f: Formula, pool: VarPool, cnf: Optional[Cnf] = None) -> Cnf:
    """Equisatisfiable CNF of ``f`` with one definition variable per compound node.

    Definitions are full biconditionals.  Top-level conjunctions and
    disjunctions are asserted directly.  Shared subformula objects are
    defined once.  Pass ``cnf`` to append to an existing clause set.
    """
    out = cnf if cnf is not None else Cnf()
    lit: Dict[int, int] = {}
    keep = []  # keeps nodes alive so their ids stay unique

    def define(node: Formula) -> int:
        for n in _postorder(node, lit):
            keep.append(n)
            if isinstance(n, Atom):
                lit[id(n)] = n.id
                continue
            if isinstance(n, Const):
                v = pool.fresh().id
                out.add([v] if n.value else [-v])
                lit[id(n)] = v
                continue
            if isinstance(n, Not):
                lit[id(n)] = -lit[id(n.arg)]
                continue
            v = pool.fresh().id
            lit[id(n)] = v
            if isinstance(n, And):
                ks = [lit[id(c)] for c in n.args]
                for c in ks:
                    out.add([-v, c])
                out.add([v] + [-c for c in ks])
            elif isinstance(n, Or):
                ks = [lit[id(c)] for c in n.args]
                for c in ks:
                    out.add([v, -c])
                out.add([-v] + ks)
            elif isinstance(n, Implies):
                a, b = lit[id(n.a)], lit[id(n.b)]
                out.add([v, a])
                out.add([v, -b])
                out.add([-v, -a, b])
            elif isinstance(n, Iff):
                a, b = lit[id(n.a)], lit[id(n.b)]
                out.add([-v, -a, b])
                out.add([-v, a, -b])
                out.add([v, a, b])
                out.add([v, -a, -b])
            elif isinstance(n, Xor):
                a, b = lit[id(n.a)], lit[id(n.b)]
                out.add([-v, a, b])
                out.add([-v, -a, -b])
                out.add([v, -a, b])
                out.add([v, a, -b])
            else:  # pragma: no cover
                raise TypeError(n)
        return lit[id(node)]

    stack = [f]
    asserted = set()
    while stack:
        node = stack.pop()
        if id(node) in asserted:
            continue
        asserted.add(id(node))
        keep.append(node)
        if node is TRUE:
            continue
        if node is FALSE:
            out.clauses.append([])
        elif isinstance(node, And):
            stack.extend(reversed(node.args))
        elif isinstance(node, Or):
            out.add([define(c) for c in node.args])
        elif isinstance(node, Not) and isinstance(node.arg, Or):
            stack.extend(neg(c) for c in reversed(node.arg.args))
        else:
            out.add([define(node)])
    out.num_vars = max(out.num_vars, pool.count)
    return out


def to_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines.extend(" ".join(map(str, c + [0])) for c in cnf.clauses)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> Cnf:
    cnf = Cnf()
    declared = 0
    current: List[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"invalid problem line: {line}")
            declared = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                cnf.add(current)
                current = []
            else:
                current.append(lit)
    if current:
        cnf.add(current)
    cnf.num_vars = max(cnf.num_vars, declared)
    return cnf
