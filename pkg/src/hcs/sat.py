"""Propositional satisfiability.

Two engines share one propagation core: CDCL (two watched literals, first-UIP
learning, no restarts) and plain DPLL with chronological backtracking. Both
branch on the lowest unassigned variable, positive phase first, so runs are
reproducible. ``brute_force`` enumerates all assignments with bit-parallel
truth tables and serves as the test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .grounding import Cnf, CnfBuilder, HcsInstance, GroundingError
from .logic import And, Atom, Formula, Iff, Implies, Not, Or

ENGINES = ("cdcl", "dpll")
BRUTE_FORCE_CAP = 24

# number of solve() calls; tests use it to check that a path never reaches SAT
calls = 0


@dataclass(frozen=True)
class SatResult:
    sat: bool
    model: dict[int, bool] | None = None

    def __bool__(self):
        return self.sat


UNSAT = SatResult(False)


def check_model(clauses: Iterable[Sequence[int]], model: Mapping[int, bool]) -> bool:
    return all(any(model[abs(l)] == (l > 0) for l in c) for c in clauses)


class _Solver:
    # literal code: 2*v for v, 2*v+1 for -v; value[code] is 1 true, -1 false, 0 free

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]], learn: bool):
        self.n = num_vars
        self.learn = learn
        size = 2 * num_vars + 2
        self.value = [0] * size
        self.level = [0] * (num_vars + 1)
        self.reason: list[int] = [-1] * (num_vars + 1)
        self.watches: list[list[int]] = [[] for _ in range(size)]
        self.clauses: list[list[int]] = []
        self.trail: list[int] = []
        self.limits: list[int] = []  # trail length at each decision
        self.qhead = 0
        self.next_var = 1
        self.empty = False
        self.units: list[int] = []
        for c in clauses:
            lits = []
            seen = set()
            taut = False
            for l in c:
                code = 2 * l if l > 0 else -2 * l + 1
                if code ^ 1 in seen:
                    taut = True
                    break
                if code not in seen:
                    seen.add(code)
                    lits.append(code)
            if taut:
                continue
            if not lits:
                self.empty = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                ci = len(self.clauses)
                self.clauses.append(lits)
                self.watches[lits[0]].append(ci)
                self.watches[lits[1]].append(ci)

    def assign(self, code: int, reason: int) -> None:
        self.value[code] = 1
        self.value[code ^ 1] = -1
        v = code >> 1
        self.level[v] = len(self.limits)
        self.reason[v] = reason
        self.trail.append(code)

    def propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        value = self.value
        watches = self.watches
        clauses = self.clauses
        trail = self.trail
        level = self.level
        reason = self.reason
        depth = len(self.limits)
        while self.qhead < len(trail):
            false_lit = trail[self.qhead] ^ 1
            self.qhead += 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if value[first] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if value[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if value[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return ci
                    value[first] = 1
                    value[first ^ 1] = -1
                    v = first >> 1
                    level[v] = depth
                    reason[v] = ci
                    trail.append(first)
            del ws[j:]
        return -1

    def backtrack(self, lvl: int) -> None:
        if len(self.limits) <= lvl:
            return
        stop = self.limits[lvl]
        value = self.value
        lowest = self.next_var
        for code in self.trail[stop:]:
            value[code] = 0
            value[code ^ 1] = 0
            v = code >> 1
            if v < lowest:
                lowest = v
        del self.trail[stop:]
        del self.limits[lvl:]
        self.qhead = stop
        self.next_var = lowest

    def decide(self) -> bool:
        value = self.value
        v = self.next_var
        while v <= self.n and value[2 * v] != 0:
            v += 1
        self.next_var = v
        if v > self.n:
            return False
        self.limits.append(len(self.trail))
        self.assign(2 * v, -1)
        return True

    def analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP learned clause (asserting literal first) and backjump level."""
        seen = set()
        learnt = [0]
        level = self.level
        depth = len(self.limits)
        pending = 0
        idx = len(self.trail) - 1
        p = -1
        while True:
            for q in self.clauses[confl]:
                if q == p:
                    continue
                v = q >> 1
                if v in seen or level[v] == 0:
                    continue
                seen.add(v)
                if level[v] == depth:
                    pending += 1
                else:
                    learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            pending -= 1
            if pending == 0:
                break
            confl = self.reason[p >> 1]
            seen.discard(p >> 1)
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def solve(self) -> bool:
        if self.empty:
            return False
        for code in self.units:
            if self.value[code] == -1:
                return False
            if self.value[code] == 0:
                self.assign(code, -1)
        if self.propagate() != -1:
            return False
        flipped: list[bool] = []  # dpll: per decision level, already tried both phases
        while True:
            if not self.decide():
                return True
            flipped.append(False)
            while True:
                confl = self.propagate()
                if confl == -1:
                    break
                if not self.limits:
                    return False
                if self.learn:
                    learnt, lvl = self.analyze(confl)
                    self.backtrack(lvl)
                    del flipped[lvl:]
                    if len(learnt) == 1:
                        self.assign(learnt[0], -1)
                    else:
                        ci = len(self.clauses)
                        self.clauses.append(learnt)
                        self.watches[learnt[0]].append(ci)
                        self.watches[learnt[1]].append(ci)
                        self.assign(learnt[0], ci)
                else:
                    while flipped and flipped[-1]:
                        flipped.pop()
                        self.backtrack(len(self.limits) - 1)
                    if not flipped:
                        return False
                    lvl = len(self.limits) - 1
                    decision = self.trail[self.limits[lvl]]
                    self.backtrack(lvl)
                    self.limits.append(len(self.trail))
                    self.assign(decision ^ 1, -1)
                    flipped[-1] = True

    def model(self) -> dict[int, bool]:
        return {v: self.value[2 * v] == 1 for v in range(1, self.n + 1)}


def solve(cnf: Cnf, engine: str = "cdcl") -> SatResult:
    """Decide satisfiability; a returned model is checked against every clause."""
    global calls
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    calls += 1
    s = _Solver(cnf.num_vars, cnf.clauses, learn=engine == "cdcl")
    if not s.solve():
        return UNSAT
    model = s.model()
    if not check_model(cnf.clauses, model):
        raise AssertionError("solver returned a model that violates a clause")
    return SatResult(True, model)


# ---------------------------------------------------------------------------
# Exhaustive oracles

def _var_masks(n: int) -> tuple[int, list[int]]:
    """Truth tables over 2**n assignments, variable 1 most significant."""
    size = 1 << n
    full = (1 << size) - 1
    masks = [0]
    for v in range(1, n + 1):
        half = 1 << (n - v)
        period = 2 * half
        block = ((1 << half) - 1) << half
        reps = size // period
        masks.append(block * (((1 << (period * reps)) - 1) // ((1 << period) - 1)))
    return full, masks


def _first_model(sat_mask: int, n: int) -> dict[int, bool]:
    i = (sat_mask & -sat_mask).bit_length() - 1
    return {v: bool((i >> (n - v)) & 1) for v in range(1, n + 1)}


def brute_force(cnf: Cnf) -> SatResult:
    """First satisfying assignment in lexicographic order (False < True)."""
    n = cnf.num_vars
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force is capped at {BRUTE_FORCE_CAP} variables, got {n}")
    full, masks = _var_masks(n)
    sat_mask = full
    for c in cnf.clauses:
        m = 0
        for l in c:
            m |= masks[l] if l > 0 else full ^ masks[-l]
        sat_mask &= m
        if not sat_mask:
            return UNSAT
    if not sat_mask:
        return UNSAT
    return SatResult(True, _first_model(sat_mask, n))


def truth_table(inst: HcsInstance, cap: int = 20) -> dict | None:
    """Exhaustive search over the atom table: first satisfying assignment or None."""
    n = len(inst.atoms)
    if n > cap:
        raise ValueError(f"truth table is capped at {cap} atoms, got {n}")
    full, masks = _var_masks(n)
    index = inst.index

    def table(f: Formula) -> int:
        t = type(f)
        if t is Atom:
            return masks[index[f] + 1]
        if t is Not:
            return full ^ table(f.arg)
        if t is And:
            m = full
            for a in f.args:
                m &= table(a)
            return m
        if t is Or:
            m = 0
            for a in f.args:
                m |= table(a)
            return m
        a, b = table(f.left), table(f.right)
        if t is Implies:
            return (full ^ a) | b
        if t is Iff:
            return full ^ (a ^ b)
        raise TypeError(f)

    m = full
    for c in inst.conjuncts:
        m &= table(c)
        if not m:
            return None
    model = _first_model(m, n)
    return {a: model[i + 1] for i, a in enumerate(inst.atoms)}


# ---------------------------------------------------------------------------
# Entailment

Literal = tuple  # (Atom, bool)


def entails(premises: HcsInstance, target: Iterable[Literal | Formula],
            engine: str = "cdcl") -> bool:
    """True iff every target literal follows propositionally from the premises.

    Targets are ``(atom, polarity)`` pairs or literal formulas (``Atom`` or
    ``Not(Atom)``); atoms outside the premises' table are allowed.
    """
    lits = []
    for t in target:
        if isinstance(t, Atom):
            lits.append((t, True))
        elif isinstance(t, Not) and isinstance(t.arg, Atom):
            lits.append((t.arg, False))
        elif isinstance(t, tuple) and len(t) == 2:
            lits.append((t[0], bool(t[1])))
        else:
            raise GroundingError(f"not a literal: {t!r}")
    extra = []
    known = set(premises.atoms)
    for a, _ in lits:
        if a not in known:
            known.add(a)
            extra.append(a)
    b = CnfBuilder(premises.atoms + tuple(extra))
    for c in premises.conjuncts:
        b.add(c)
    # negated conjunction of the targets: one clause
    b.add_clause(-b.index[a] if pos else b.index[a] for a, pos in lits)
    return not solve(b.cnf(), engine).sat
