import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from kbosat.kbo import brute_force
from kbosat.logic import VarPool
from kbosat.pb import (
    EQ, GE, LE, PBConstraint, PbEncoder, PbProblem, kbo_pbc, minimize, normalize,
    objectives, parse_opb, pb_to_cnf, solve_pb, to_opb,
)
from kbosat.proof import decode, verify
from kbosat.solver import Solver
from kbosat.terms import Fun, load, parse_trs

from helpers import CORPUS, random_trs


def enumerate_pb(constraints, n, objective=None):
    """All satisfying assignments (as dicts) and the optimum, by brute force."""
    best = None
    count = 0
    for bits in itertools.product((False, True), repeat=n):
        m = {v + 1: bits[v] for v in range(n)}
        if all(c.satisfied(m) for c in constraints):
            count += 1
            if objective is not None:
                val = sum(a for a, x in objective if m[x])
                best = val if best is None else min(best, val)
    return count, best


def test_constraint_coalesces_and_drops_zeros():
    c = PBConstraint.make([(2, 1), (3, 2), (-2, 1), (1, 3)], GE, 1)
    assert c.terms == ((3, 2), (1, 3))
    with pytest.raises(ValueError):
        PBConstraint.make([(1, 1)], ">", 0)


def test_opb_format():
    p = PbProblem([PBConstraint.make([(2, 1), (1, 2)], GE, 2)])
    assert to_opb(p) == "* #variable= 2 #constraint= 1\n+2 x1 +1 x2 >= 2 ;\n"
    p.objective = [(1, 3), (2, 4)]
    assert "min: +1 x3 +2 x4 ;" in to_opb(p).splitlines()
    le = PbProblem([PBConstraint.make([(1, 1), (-3, 2)], LE, 1)])
    assert to_opb(le).splitlines()[1] == "-1 x1 +3 x2 >= -1 ;"
    eq = PbProblem([PBConstraint.make([(1, 1)], EQ, 0)])
    assert to_opb(eq).splitlines()[1] == "+1 x1 = 0 ;"


def test_opb_round_trip_z113():
    p = kbo_pbc(load(CORPUS / "z113.srs"), 6)
    p.objective = objectives(p, "weights")
    q = parse_opb(to_opb(p))
    assert q.constraints == p.constraints
    assert q.objective == p.objective


def test_parse_opb_negated_literals():
    p = parse_opb("+2 ~x1 +1 x2 >= 2 ;\n")
    # 2(1 - x1) + x2 >= 2  is  -2 x1 + x2 >= 0
    assert p.constraints[0] == PBConstraint.make([(-2, 1), (1, 2)], GE, 0)
    with pytest.raises(ValueError):
        parse_opb("+1 x1 >= 1\n")


def test_solve_examples():
    m = solve_pb(PbProblem([PBConstraint.make([(1, 1), (1, 2)], GE, 2)]))
    assert m[1] and m[2]
    p = PbProblem([PBConstraint.make([(2, 1), (1, 2)], GE, 2), PBConstraint.make([(1, 1)], EQ, 0)])
    assert solve_pb(p) is None


def random_constraints(rng, n):
    out = []
    for _ in range(rng.randint(1, 4)):
        k = rng.randint(1, n)
        terms = [(rng.choice([-1, 1]) * rng.randint(1, 8), v) for v in rng.sample(range(1, n + 1), k)]
        rel = rng.choice([GE, GE, LE, EQ])
        bound = rng.randint(-8, 12)
        c = PBConstraint.make(terms, rel, bound)
        if c.terms:
            out.append(c)
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 10))
def test_random_instances_against_enumeration(seed, n):
    rng = random.Random(seed)
    cons = random_constraints(rng, n)
    objective = [(rng.randint(-5, 8), v) for v in range(1, n + 1)]
    objective = [(a, v) for a, v in objective if a]
    p = PbProblem(cons, objective, num_vars=n)
    count, best = enumerate_pb(cons, n, objective)
    model = solve_pb(p)
    assert (model is not None) == (count > 0)
    result = minimize(p)
    if count == 0:
        assert result.model is None
    else:
        assert result.optimal and result.value == best
        assert all(c.satisfied(result.model) for c in cons)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_normalization_preserves_models(seed):
    rng = random.Random(seed)
    n = 6
    for c in random_constraints(rng, n):
        terms, rel, bound = normalize(c)
        assert rel in (GE, EQ) and all(a > 0 for a, _ in terms)
        m = {v: rng.random() < 0.5 for v in range(1, n + 1)}
        lhs = sum(a for a, x in terms if (m[x] if x > 0 else not m[-x]))
        ok = lhs >= bound if rel == GE else lhs == bound
        assert ok == c.satisfied(m)


def test_translation_is_exact_for_one_constraint():
    # every assignment of the original variables extends to a CNF model iff it satisfies c
    c = PBConstraint.make([(3, 1), (-2, 2), (5, 3), (1, 4)], GE, 3)
    cnf = pb_to_cnf([c], VarPool(5))
    for bits in itertools.product((False, True), repeat=4):
        s = Solver(cnf.num_vars)
        for cl in cnf.clauses:
            s.add_clause(cl)
        for v, b in enumerate(bits, 1):
            s.add_clause([v if b else -v])
        m = {v: b for v, b in enumerate(bits, 1)}
        assert (s.solve() is not None) == c.satisfied(m)


def test_example_constraints_for_the_hidden_case_rule():
    trs = load(CORPUS / "hidden_case.trs")
    k = 2
    enc = PbEncoder(trs, k)
    rule = trs.rules[0]
    s, t = rule.lhs, rule.rhs
    start = len(enc.constraints)
    top = enc.encode_kbo_gt(s, t)
    emitted = enc.constraints[start:]
    s1, t1 = s.args[0], t.args[0]
    x, gx = s1.args[0], t1.args[0]
    kbo, kp = enc.kbo, enc.kbo_prime
    g = enc.weight_terms("g")
    neg_g = enc.weight_terms("g", -1)
    expected = [
        PBConstraint.make([(-1, top), (1, kp[s, t])] + g, GE, 0),                                # (1)
        PBConstraint.make([(-1, kp[s, t]), (1, kbo[s1, t1])], GE, 0),                          # (2)
        PBConstraint.make([(-(2 ** k + 1), kbo[s1, t1]), (1, kp[s1, t1])] + neg_g, GE, -2 ** k),  # (3)
        PBConstraint.make([(-1, kp[s1, t1]), (1, kbo[x, gx])], GE, 0),                         # (4)
        PBConstraint.make([(1, kbo[x, gx])], EQ, 0),                                            # (5)
    ]
    assert sorted(map(str, emitted)) == sorted(map(str, expected))


def test_duplicating_rule_is_false():
    trs = parse_trs("(VAR x)(RULES f(x) -> g(x,x))")
    enc = PbEncoder(trs, 2)
    r = trs.rules[0]
    v = enc.encode_kbo_gt(r.lhs, r.rhs)
    assert enc.constraints[-1] == PBConstraint.make([(1, v)], EQ, 0)
    assert solve_pb(kbo_pbc(trs, 2)) is None


def test_adm_pbc_single_unary_symbol_is_trivial():
    trs = parse_trs("(VAR x)(RULES f(f(x)) -> f(x))")
    enc = PbEncoder(trs, 2)
    cons = enc.adm_pbc()
    third = cons[-1]
    # (n - 1) w(f) >= n - 1 with n = 1 has no terms left and bound 0
    assert third.terms == () and third.bound == 0


def test_adm_pbc_zero_weight_unary_is_maximal():
    trs = parse_trs("(VAR x y)(RULES f(g(x,y)) -> g(f(x),f(y)))")
    p = kbo_pbc(trs, 2)
    m = solve_pb(p)
    wf, prec = decode(m, p.tables)
    assert wf.w["f"] == 0
    assert m[p.X["f", "g"]] or m[p.Y["f", "g"]]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32), st.sampled_from(["strict", "quasi"]))
def test_prec_pbc_semantics(n, seed, mode):
    names = "abcdef"[:n]
    rules = " ".join(f"{c}(x) -> x" for c in names)
    trs = parse_trs(f"(VAR x)(RULES {rules})")
    enc = PbEncoder(trs, 1, mode)
    cons = enc.prec_pbc()
    rng = random.Random(seed)
    # a random extra requirement steers the solver to different models
    f, g = rng.sample(names, 2) if n > 1 else (names[0], names[0])
    if f != g:
        cons = cons + [PBConstraint.make([(1, enc.X[f, g])], EQ, rng.randint(0, 1))]
    m = solve_pb(PbProblem(cons))
    if m is None:
        return
    code = {h: sum(1 << (len(bits) - 1 - i) for i, b in enumerate(bits) if m[b]) for h, bits in enc.code.items()}
    for (f, g), x in enc.X.items():
        X, Y, Yr, Z = m[x], m[enc.Y[f, g]], m[enc.Y[g, f]], m[enc.Z[f, g]]
        assert 2 * X + Y + Yr + 2 * Z == 2
        if X:
            assert code[f] > code[g]
        if Y and Yr:
            assert code[f] == code[g]
        if mode == "strict":
            assert not Y


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["strict", "quasi"]), st.integers(1, 3))
def test_models_decode_to_proofs(seed, mode, k):
    trs = random_trs(seed)
    p = kbo_pbc(trs, k, mode)
    m = solve_pb(p)
    if m is not None:
        verify(trs, *decode(m, p.tables))


def weight_value(term, wf):
    if not isinstance(term, Fun):
        return wf.w0
    return wf.w[term.symbol.name] + sum(weight_value(a, wf) for a in term.args)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["strict", "quasi"]))
def test_hidden_case_distinction(seed, mode):
    trs = random_trs(seed)
    p = kbo_pbc(trs, 2, mode)
    m = solve_pb(p)
    if m is None:
        return
    wf, _ = decode(m, p.tables)
    for (s, t), v in p.kbo.items():
        if m[v]:
            diff = weight_value(s, wf) - weight_value(t, wf)
            assert diff >= 1 or (diff == 0 and m[p.kbo_prime[s, t]])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["strict", "quasi"]))
def test_agrees_with_brute_force(seed, mode):
    trs = random_trs(seed)
    assert (solve_pb(kbo_pbc(trs, 2, mode)) is not None) == (brute_force(trs, 3, mode) is not None)


def test_bit_thresholds():
    for name, no, yes in (("unbounded_bits_4.trs", 2, 3), ("unbounded_bits_8.trs", 3, 4)):
        trs = load(CORPUS / name)
        assert solve_pb(kbo_pbc(trs, no)) is None
        p = kbo_pbc(trs, yes)
        verify(trs, *decode(solve_pb(p), p.tables))


def test_flatten_rev():
    trs = load(CORPUS / "flatten_rev.trs")
    p = kbo_pbc(trs, 2)
    verify(trs, *decode(solve_pb(p), p.tables))
    assert solve_pb(kbo_pbc(trs, 2, "strict")) is None


def test_z113_weights_minimum():
    trs = load(CORPUS / "z113.srs")
    p = kbo_pbc(trs, 6)
    res = minimize(p, objectives(p, "weights"))
    assert res.optimal
    wf, prec = decode(res.model, p.tables)
    verify(trs, wf, prec)
    assert sum(wf.w.values()) + wf.w0 == res.value
    assert sum(wf.w.values()) <= 222
    # the certificate: demanding one less is infeasible
    p.constraints.append(PBConstraint.make(objectives(p, "weights"), LE, res.value - 1))
    assert solve_pb(p) is None


def test_precedence_objective_zero_means_empty_precedence():
    trs = load(CORPUS / "fa_b_fa_c.trs")
    p = kbo_pbc(trs, 2)
    res = minimize(p, objectives(p, "precedence"))
    assert res.value == 0 and res.optimal
    assert not any(res.model[x] for x in list(p.X.values()) + list(p.Y.values()))
    verify(trs, *decode(res.model, p.tables))
    # plus needs plus > s, so one comparison is the least it can use
    q = kbo_pbc(load(CORPUS / "plus.trs"), 2)
    assert minimize(q, objectives(q, "precedence")).value == 1


def test_objectives_of_empty_signature():
    p = PbProblem([])
    assert objectives(p, "weights") == []
    with pytest.raises(ValueError):
        objectives(p, "size")
