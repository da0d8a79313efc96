"""Reductions between Herbrand consistency search problems.

* universal consequences: if Phi proves the universal Psi, witnessed by
  terms making a Herbrand disjunction a tautology, instances of Psi are
  solved with one query to an HCS(Phi) solver;
* constant introduction: instances of Phi & forall y (alpha(y) -> alpha(c))
  are solved with one query to HCS(Phi) plus an assignment repair;
* existential consequences: the composition of the two.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .grounding import Assignment, CnfBuilder, HcsInstance, build_instance, eval_instance
from .logic import (
    And, App, Atom, Implies, LogicError, PrenexSentence, Signature, Term, Var,
    atoms as formula_atoms, bind, evaluate, herbrand_terms, substitute, universal,
)
from . import sat
from .solvers import solve_instance

log = logging.getLogger(__name__)


class WitnessError(LogicError):
    pass


@dataclass(frozen=True)
class HerbrandWitness:
    """Terms for Phi's variables, one row per disjunct, over Phi's language
    plus the constants standing for Psi's variables."""
    rows: tuple[tuple[Term, ...], ...]
    constants: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        object.__setattr__(self, "constants", tuple(self.constants))


class Oracle:
    """An HCS solver that counts and logs its queries."""

    def __init__(self, solve: Callable[[HcsInstance], Assignment] | None = None,
                 name: str = "HCS(Phi)", engine: str = "cdcl"):
        self._solve = solve or (lambda inst: solve_instance(inst, engine))
        self.name = name
        self.calls = 0

    def __call__(self, inst: HcsInstance) -> Assignment:
        self.calls += 1
        log.info("oracle query %d to %s: %d rows, %d atoms",
                 self.calls, self.name, len(inst.rows), len(inst.atoms))
        return self._solve(inst)


def fresh_constants(count: int, *avoid: Signature, prefix: str = "c") -> tuple[str, ...]:
    sig = Signature()
    for s in avoid:
        sig = sig.merge(s)
    return tuple(itertools.islice(sig.fresh(prefix), count))


def _signature(*sentences: PrenexSentence) -> Signature:
    return Signature.of(*(s.matrix for s in sentences))


def _require_universal(*sentences: PrenexSentence) -> None:
    for s in sentences:
        if not s.is_universal:
            raise LogicError(f"sentence is not universal: {s}")


def _constants_map(names: Sequence[str], terms: Sequence[Term]) -> dict[Term, Term]:
    return {App(c): t for c, t in zip(names, terms)}


# ---------------------------------------------------------------------------
# Universal consequences

def verify_herbrand_implication(phi: PrenexSentence, psi: PrenexSentence,
                                witness: HerbrandWitness, engine: str = "cdcl") -> bool:
    """Is OR_i (phi(tau_i) -> psi(c)) a propositional tautology?"""
    _require_universal(phi, psi)
    k, l = len(phi.variables), len(psi.variables)
    if len(witness.constants) != l:
        raise WitnessError(f"witness names {len(witness.constants)} constants, psi has {l} variables")
    for row in witness.rows:
        if len(row) != k:
            raise WitnessError(f"witness row has {len(row)} terms, phi has {k} variables")
    premises = build_instance(phi.matrix, phi.variables, witness.rows)
    goal = substitute(psi.matrix, bind(psi.variables, [App(c) for c in witness.constants]))
    extra = [a for a in dict.fromkeys(formula_atoms(goal)) if a not in premises.index]
    b = CnfBuilder(premises.atoms + tuple(extra))
    for c in premises.conjuncts:
        b.add(c)
    b.add(goal, positive=False)
    return not sat.solve(b.cnf(), engine).sat


def rename_foreign(t: Term, sig: Signature) -> Term:
    """Replace maximal subterms whose head symbol is not in ``sig`` by variables."""
    if isinstance(t, Var):
        return t
    if sig.functions.get(t.fn) != len(t.args):
        return Var(f"v_{t}")
    if not t.args:
        return t
    args = tuple(rename_foreign(a, sig) for a in t.args)
    return t if all(a is b for a, b in zip(args, t.args)) else App(t.fn, args)


def _rename_atom(a: Atom, sig: Signature) -> Atom:
    return Atom(a.pred, tuple(rename_foreign(t, sig) for t in a.args))


@dataclass(frozen=True, eq=False)
class UniversalReduction:
    phi_instance: HcsInstance
    psi_instance: HcsInstance
    signature: Signature

    def pullback(self, a: Assignment) -> Assignment:
        """Psi-instance values read off the renamed phi-instance atoms."""
        out = {}
        for atom in self.psi_instance.atoms:
            out[atom] = a.get(_rename_atom(atom, self.signature), False)
        if not eval_instance(self.psi_instance, out):
            raise AssertionError("pulled-back assignment does not satisfy the psi instance")
        return out


def reduce_universal(phi: PrenexSentence, psi: PrenexSentence, witness: HerbrandWitness,
                     psi_rows: Iterable[Sequence[Term]], sig: Signature | None = None,
                     engine: str = "cdcl") -> tuple[HcsInstance, Callable[[Assignment], Assignment]]:
    """The phi-instance whose solutions pull back to solutions of the psi-instance."""
    red = universal_reduction(phi, psi, witness, psi_rows, sig, engine)
    return red.phi_instance, red.pullback


def universal_reduction(phi, psi, witness, psi_rows, sig=None, engine="cdcl") -> UniversalReduction:
    if not verify_herbrand_implication(phi, psi, witness, engine):
        raise WitnessError("witness not a tautology: the Herbrand disjunction is falsifiable")
    sig = _signature(phi) if sig is None else sig
    psi_rows = [tuple(r) for r in psi_rows]
    rows = []
    for sigma in psi_rows:
        mapping = _constants_map(witness.constants, sigma)
        for tau in witness.rows:
            rows.append(tuple(rename_foreign(substitute(t, mapping), sig) for t in tau))
    phi_instance = build_instance(phi.matrix, phi.variables, rows)
    psi_instance = build_instance(psi.matrix, psi.variables, psi_rows)
    return UniversalReduction(phi_instance, psi_instance, sig)


def solve_universal(phi, psi, witness, psi_rows, oracle: Oracle | None = None,
                    sig=None, engine="cdcl") -> tuple[HcsInstance, Assignment]:
    """Solve the psi-instance with exactly one oracle query."""
    oracle = oracle or Oracle(engine=engine)
    red = universal_reduction(phi, psi, witness, psi_rows, sig, engine)
    return red.psi_instance, red.pullback(oracle(red.phi_instance))


def search_witness(phi: PrenexSentence, psi: PrenexSentence, depth: int,
                   max_disjuncts: int = 2, engine: str = "cdcl") -> HerbrandWitness | None:
    """Iterative deepening over Herbrand terms; None if nothing up to ``depth``."""
    _require_universal(phi, psi)
    constants = fresh_constants(len(psi.variables), _signature(phi, psi))
    sig = _signature(phi).extend(functions={c: 0 for c in constants})
    k = len(phi.variables)
    for d in range(depth + 1):
        terms = herbrand_terms(sig, d)
        tuples = list(itertools.product(terms, repeat=k))
        for n in range(1, max_disjuncts + 1):
            for rows in itertools.combinations(tuples, n):
                w = HerbrandWitness(rows, constants)
                if verify_herbrand_implication(phi, psi, w, engine):
                    return w
    return None


# ---------------------------------------------------------------------------
# Constant introduction

def _apart(alpha: PrenexSentence, taken: Iterable[str]) -> PrenexSentence:
    taken = set(taken)
    mapping = {}
    names = []
    for v in alpha.variables:
        new = v
        while new in taken:
            new += "'"
        taken.add(new)
        names.append(new)
        if new != v:
            mapping[Var(v)] = Var(new)
    return universal(names, substitute(alpha.matrix, mapping))


def constant_intro_sentence(phi: PrenexSentence, alpha: PrenexSentence,
                            constants: Sequence[str]) -> PrenexSentence:
    """forall x y . phi(x) & (alpha(y) -> alpha(c))."""
    alpha = _apart(alpha, phi.variables)
    at_c = substitute(alpha.matrix, bind(alpha.variables, [App(c) for c in constants]))
    matrix = And((phi.matrix, Implies(alpha.matrix, at_c)))
    return universal(list(phi.variables) + list(alpha.variables), matrix)


@dataclass(frozen=True, eq=False)
class ConstantIntro:
    instance: HcsInstance
    assignment: Assignment
    case: int


def reduce_constant_intro(phi: PrenexSentence, alpha: PrenexSentence, constants: Sequence[str],
                          tau_rows: Sequence[Sequence[Term]], sigma_rows: Sequence[Sequence[Term]],
                          oracle: Oracle | Callable[[HcsInstance], Assignment]) -> ConstantIntro:
    """Solve the instance AND_i (phi(tau_i) & (alpha(sigma_i) -> alpha(c))) with one query.

    The oracle sees F & AND_i F_i, where F is the conjunction of phi(tau_i)
    with the constants c read as variables and F_i substitutes sigma_i for
    them. If the oracle's values (unknown atoms false) fail some implication,
    some alpha(sigma_i) is true, and every atom beta(c) takes the value of
    beta(sigma_i) for the least such i.
    """
    _require_universal(phi, alpha)
    constants = tuple(constants)
    if len(constants) != len(alpha.variables):
        raise LogicError(f"need {len(alpha.variables)} constants, got {len(constants)}")
    used = _signature(phi, alpha).functions
    clash = [c for c in constants if c in used]
    if clash:
        raise LogicError(f"constant {clash[0]} occurs in phi or alpha")
    tau_rows = [tuple(r) for r in tau_rows]
    sigma_rows = [tuple(r) for r in sigma_rows]
    if len(tau_rows) != len(sigma_rows):
        raise LogicError("tau and sigma rows must pair up")

    full = constant_intro_sentence(phi, alpha, constants)
    target = build_instance(full.matrix, full.variables,
                            [t + s for t, s in zip(tau_rows, sigma_rows)])

    as_vars = {App(c): Var(f"%{c}") for c in constants}
    back = {v: c for c, v in as_vars.items()}
    query_rows = [tuple(substitute(t, as_vars) for t in tau) for tau in tau_rows]
    for sigma in sigma_rows:
        m = _constants_map(constants, sigma)
        query_rows += [tuple(substitute(t, m) for t in tau) for tau in tau_rows]
    query = build_instance(phi.matrix, phi.variables, query_rows)
    answer = oracle(query)
    if not eval_instance(query, answer):
        raise AssertionError("oracle answer does not satisfy the query")

    extended = {substitute(a, back): v for a, v in answer.items()}
    for a in target.atoms:
        extended.setdefault(a, False)
    first = {a: extended[a] for a in target.atoms}
    if eval_instance(target, first):
        return ConstantIntro(target, first, 1)

    alpha_apart = _apart(alpha, phi.variables)
    for sigma in sigma_rows:
        if evaluate(substitute(alpha_apart.matrix, bind(alpha_apart.variables, sigma)),
                    lambda a: extended.get(a, False)):
            break
    else:
        raise AssertionError("no alpha(sigma_i) is true, yet the extended assignment fails")
    m = _constants_map(constants, sigma)
    repaired = {a: extended.get(substitute(a, m), False) for a in target.atoms}
    if not eval_instance(target, repaired):
        raise AssertionError("repaired assignment does not satisfy the instance")
    return ConstantIntro(target, repaired, 2)


# ---------------------------------------------------------------------------
# Existential consequences

def verify_existential_witness(phi: PrenexSentence, alpha: PrenexSentence,
                               rows: Sequence[Sequence[Term]], engine: str = "cdcl") -> bool:
    """Is OR_i (phi(tau_i) -> alpha(rho_i)) a tautology? Rows are tau_i + rho_i."""
    alpha = _apart(alpha, phi.variables)
    k, m = len(phi.variables), len(alpha.variables)
    rows = [tuple(r) for r in rows]
    for r in rows:
        if len(r) != k + m:
            raise WitnessError(f"witness row has {len(r)} terms, expected {k + m}")
    premises = build_instance(phi.matrix, phi.variables, [r[:k] for r in rows])
    goals = [substitute(alpha.matrix, bind(alpha.variables, r[k:])) for r in rows]
    extra = [a for g in goals for a in dict.fromkeys(formula_atoms(g)) if a not in premises.index]
    b = CnfBuilder(premises.atoms + tuple(dict.fromkeys(extra)))
    for c in premises.conjuncts:
        b.add(c)
    for g in goals:
        b.add(g, positive=False)
    return not sat.solve(b.cnf(), engine).sat


@dataclass(frozen=True, eq=False)
class ExistentialReduction:
    sentence: PrenexSentence          # forall x . phi(x) & alpha(c)
    instance: HcsInstance
    assignment: Assignment
    constants: tuple[str, ...]
    queries: int


def reduce_existential(phi: PrenexSentence, alpha: PrenexSentence,
                       witness_rows: Sequence[Sequence[Term]],
                       psi_rows: Iterable[Sequence[Term]],
                       oracle: Oracle | None = None, engine: str = "cdcl",
                       constants: Sequence[str] | None = None) -> ExistentialReduction:
    """Solve instances of forall x (phi(x) & alpha(c)) given Phi |- exists y alpha(y).

    ``witness_rows`` are terms (tau_i, rho_i) for (x, y) such that
    OR_i (phi(tau_i) -> alpha(rho_i)) is a tautology. Two oracle queries are
    made: one to HCS(Phi & forall y (alpha(y) -> alpha(c))), answered by
    constant introduction, which in turn queries HCS(Phi) once.
    """
    _require_universal(phi, alpha)
    oracle = oracle or Oracle(engine=engine)
    before = getattr(oracle, "calls", 0)
    base = _signature(phi, alpha)
    if constants is None:
        constants = fresh_constants(len(alpha.variables), base)
    constants = tuple(constants)
    witness_rows = [tuple(r) for r in witness_rows]
    if not verify_existential_witness(phi, alpha, witness_rows, engine):
        raise WitnessError("witness not a tautology: phi does not yield alpha at these terms")

    phi_c = constant_intro_sentence(phi, alpha, constants)
    at_c = substitute(_apart(alpha, phi.variables).matrix,
                      bind(_apart(alpha, phi.variables).variables, [App(c) for c in constants]))
    psi = universal(phi.variables, And((phi.matrix, at_c)))

    k = len(phi.variables)
    herb = fresh_constants(k, base.extend(functions={c: 0 for c in constants}), prefix="d")
    d_terms = tuple(App(d) for d in herb)
    some_y = witness_rows[0][k:] if witness_rows else tuple(App(c) for c in constants)
    rows = [d_terms + tuple(some_y)] + witness_rows
    composed = HerbrandWitness(rows, herb)

    sig = _signature(phi_c)
    red = universal_reduction(phi_c, psi, composed, psi_rows, sig, engine)

    def via_constant_intro(inst: HcsInstance) -> Assignment:
        taus = [r[:k] for r in inst.rows]
        sigmas = [r[k:] for r in inst.rows]
        return reduce_constant_intro(phi, alpha, constants, taus, sigmas, oracle).assignment

    outer = Oracle(via_constant_intro, name="HCS(Phi & alpha(y) -> alpha(c))")
    answer = outer(red.phi_instance)
    queries = outer.calls + getattr(oracle, "calls", before + 1) - before
    log.info("existential reduction used %d oracle queries", queries)
    return ExistentialReduction(psi, red.psi_instance, red.pullback(answer), constants, queries)
