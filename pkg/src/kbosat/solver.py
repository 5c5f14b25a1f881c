"""Conflict-driven clause learning SAT solver.

Two watched literals, first-UIP learning with local minimization, VSIDS
branching with phase saving, Luby restarts and LBD-based clause deletion.
Everything is deterministic: ties in activity go to the lowest variable id.
"""

from __future__ import annotations

import heapq
import time
from typing import Dict, Iterable, List, Optional

from .logic import Cnf

__all__ = ["Solver", "ResourceLimit", "solve", "luby"]


class ResourceLimit(Exception):
    """Conflict budget or deadline exhausted; the answer is unknown."""


def luby(i: int) -> int:
    """The i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


def _lit(x: int) -> int:
    return 2 * x if x > 0 else -2 * x + 1


class Solver:
    """Incremental CDCL solver over DIMACS-style integer literals.

    Clauses may be added between calls to :meth:`solve`; learned clauses are
    kept since they remain implied.
    """

    restart_base = 100
    var_decay = 0.95

    def __init__(self, num_vars: int = 0):
        self.n = 0
        self.val: List[int] = [0, 0]  # per internal literal: 1 true, -1 false, 0 open
        self.level: List[int] = [0]
        self.reason: List[Optional[list]] = [None]
        self.activity: List[float] = [0.0]
        self.phase: List[bool] = [False]
        self.watches: List[List[list]] = [[], []]
        self.heap: list = []
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.clauses: List[list] = []
        self.learnts: List[list] = []
        self.lbd: Dict[int, int] = {}
        self.original: List[List[int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.max_learnts = 2000.0
        self.ensure_vars(num_vars)

    # --- setup ------------------------------------------------------------

    def ensure_vars(self, n: int):
        while self.n < n:
            self.n += 1
            self.val.extend((0, 0))
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(False)
            self.watches.extend(([], []))
            heapq.heappush(self.heap, (-0.0, self.n))

    def add_clause(self, clause: Iterable[int]) -> bool:
        """Add a clause at decision level 0; returns False once unsatisfiable."""
        clause = list(clause)
        self.original.append(clause)
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        self.ensure_vars(max((abs(x) for x in clause), default=0))
        val = self.val
        lits = []
        seen = set()
        for x in clause:
            p = _lit(x)
            if p in seen:
                continue
            if p ^ 1 in seen or val[p] == 1:
                return True  # tautology or already satisfied
            if val[p] == -1:
                continue
            seen.add(p)
            lits.append(p)
        if not lits:
            self.ok = False
            return False
        if len(lits) == 1:
            self._enqueue(lits[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(lits)
        self.watches[lits[0]].append(lits)
        self.watches[lits[1]].append(lits)
        return True

    # --- core -------------------------------------------------------------

    def _enqueue(self, p: int, reason):
        self.val[p] = 1
        self.val[p ^ 1] = -1
        v = p >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(p)

    def _propagate(self):
        val = self.val
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        lvl = len(self.trail_lim)
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    q = c[k]
                    if val[q] != -1:
                        c[1] = q
                        c[k] = false_lit
                        watches[q].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return c
                    val[first] = 1
                    val[first ^ 1] = -1
                    v = first >> 1
                    level[v] = lvl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
        return None

    def _cancel_until(self, lvl: int):
        if len(self.trail_lim) <= lvl:
            return
        val, phase, heap, act = self.val, self.phase, self.heap, self.activity
        start = self.trail_lim[lvl]
        for p in reversed(self.trail[start:]):
            v = p >> 1
            val[p] = 0
            val[p ^ 1] = 0
            self.reason[v] = None
            phase[v] = not (p & 1)
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _bump(self, v: int):
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(1, self.n + 1):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[i], i) for i in range(1, self.n + 1) if self.val[2 * i] == 0]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _analyze(self, confl):
        level, reason = self.level, self.reason
        seen = bytearray(self.n + 1)
        learnt = [0]
        cur = len(self.trail_lim)
        counter = 0
        p = -1
        idx = len(self.trail) - 1
        while True:
            start = 0 if p == -1 else 1
            for k in range(start, len(confl)):
                q = confl[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = 0
            counter -= 1
            if counter == 0:
                break
            # the reason clause has p at position 0
            if confl[0] != p:
                k = confl.index(p)
                confl[0], confl[k] = confl[k], confl[0]
        learnt[0] = p ^ 1
        # local minimization: drop literals implied by other learnt literals
        for q in learnt[1:]:
            seen[q >> 1] = 1
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or any(not seen[x >> 1] and level[x >> 1] > 0 for x in r if x != q ^ 1):
                out.append(q)
        if len(out) == 1:
            back = 0
        else:
            best = 1
            for k in range(2, len(out)):
                if level[out[k] >> 1] > level[out[best] >> 1]:
                    best = k
            out[1], out[best] = out[best], out[1]
            back = level[out[1] >> 1]
        return out, back

    def _pick(self) -> int:
        heap, val, act = self.heap, self.val, self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -a == act[v]:
                return v
        return 0

    def _reduce_db(self):
        locked = set()
        for p in self.trail:
            r = self.reason[p >> 1]
            if r is not None:
                locked.add(id(r))
        ranked = sorted(self.learnts, key=lambda c: (self.lbd[id(c)], len(c)))
        keep_n = len(ranked) // 2
        keep, drop = [], set()
        for i, c in enumerate(ranked):
            if i < keep_n or id(c) in locked or self.lbd[id(c)] <= 2:
                keep.append(c)
            else:
                drop.add(id(c))
        if not drop:
            return
        for ws in self.watches:
            if ws:
                ws[:] = [c for c in ws if id(c) not in drop]
        for c in self.learnts:
            if id(c) in drop:
                del self.lbd[id(c)]
        self.learnts = keep

    # --- search -----------------------------------------------------------

    def solve(self, conflict_limit: Optional[int] = None,
              deadline: Optional[float] = None) -> Optional[Dict[int, bool]]:
        """Return a total model, or None if unsatisfiable.

        ``deadline`` is a ``time.monotonic()`` value.  Raises
        :class:`ResourceLimit` when the budget runs out.
        """
        if not self.ok:
            return None
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return None
        budget_start = self.conflicts
        restarts = 0
        while True:
            restarts += 1
            limit = luby(restarts) * self.restart_base
            status = self._search(limit, conflict_limit, budget_start, deadline)
            if status is True:
                model = {v: self.val[2 * v] == 1 for v in range(1, self.n + 1)}
                self._cancel_until(0)
                self._check(model)
                return model
            if status is False:
                self.ok = False
                return None
            self._cancel_until(0)

    def _search(self, nof_conflicts, conflict_limit, budget_start, deadline):
        local = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                local += 1
                if not self.trail_lim:
                    return False
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    levels = {self.level[q >> 1] for q in learnt}
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = len(levels)
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.var_decay
                if conflict_limit is not None and self.conflicts - budget_start >= conflict_limit:
                    self._cancel_until(0)
                    raise ResourceLimit(f"conflict budget {conflict_limit} exhausted")
                if deadline is not None and self.conflicts % 64 == 0 and time.monotonic() > deadline:
                    self._cancel_until(0)
                    raise ResourceLimit("deadline reached")
                continue
            if local >= nof_conflicts:
                return None
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts *= 1.1
            v = self._pick()
            if v == 0:
                return True
            self.decisions += 1
            if deadline is not None and self.decisions % 2048 == 0 and time.monotonic() > deadline:
                self._cancel_until(0)
                raise ResourceLimit("deadline reached")
            self.trail_lim.append(len(self.trail))
            self._enqueue(2 * v + (0 if self.phase[v] else 1), None)

    def _check(self, model: Dict[int, bool]):
        for clause in self.original:
            if not any(model.get(abs(x), False) == (x > 0) for x in clause):
                raise AssertionError(f"model violates clause {clause}")


def solve(cnf: Cnf, conflict_limit: Optional[int] = None,
          timeout: Optional[float] = None) -> Optional[Dict[int, bool]]:
    """Solve ``cnf``; returns a model over ``1..num_vars`` or None when unsatisfiable."""
    s = Solver(cnf.num_vars)
    for clause in cnf.clauses:
        if not s.add_clause(clause):
            return None
    deadline = time.monotonic() + timeout if timeout is not None else None
    return s.solve(conflict_limit, deadline)
