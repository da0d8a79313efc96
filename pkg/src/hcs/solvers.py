"""Herbrand consistency search: the generic SAT route, the dense-linear-order
solver, and executable checks of the two derivability lemmas for numerals and
binary words."""

from __future__ import annotations

import bisect
import itertools
import random
from fractions import Fraction
from typing import Iterable, Sequence

from . import axioms, sat
from .grounding import Assignment, HcsInstance, build_instance, eval_instance, to_cnf
from .logic import (
    And, App, Atom, LogicError, PrenexSentence, Term, Var,
    parse_sentence, skolemize, subterms,
)


class HerbrandRefutation(Exception):
    """The grounded conjunction is unsatisfiable, so the sentence is inconsistent."""

    def __init__(self, instance: HcsInstance):
        self.instance = instance
        super().__init__("Herbrand refutation: input sentence is inconsistent")


def solve_instance(inst: HcsInstance, engine: str = "cdcl") -> Assignment:
    result = sat.solve(to_cnf(inst), engine)
    if not result.sat:
        raise HerbrandRefutation(inst)
    a = {atom: result.model[i + 1] for i, atom in enumerate(inst.atoms)}
    assert eval_instance(inst, a)
    return a


def hcs_solve(phi: PrenexSentence, rows: Iterable[Sequence[Term]],
              engine: str = "cdcl") -> Assignment:
    """Satisfying assignment for the instances of a universal sentence at ``rows``."""
    if not phi.is_universal:
        raise LogicError("sentence is not universal; skolemize it first")
    return solve_instance(build_instance(phi.matrix, phi.variables, rows), engine)


# ---------------------------------------------------------------------------
# Dense linear orders

DLO_AXIOMS = """\
lt(0, 1)
forall x . forall y . forall z . ~lt(x, x)
forall x . forall y . forall z . lt(x, y) | x = y | lt(y, x)
forall x . forall y . forall z . lt(x, y) & lt(y, z) -> lt(x, z)
forall x . forall y . forall z . {density}
forall x . forall y . forall z . x = x
forall x . forall y . forall z . x = y -> y = x
forall x . forall y . forall z . x = y & y = z -> x = z
forall x . forall y . forall z . x = y -> (lt(x, z) <-> lt(y, z))
forall x . forall y . forall z . x = y -> (lt(z, x) <-> lt(z, y))
"""

GUARDED_DENSITY = "lt(x, y) -> lt(x, f(x, y)) & lt(f(x, y), y)"
UNGUARDED_DENSITY = "lt(x, f(x, y)) & lt(f(x, y), y)"


def dlo_theory_text(guarded: bool = True) -> str:
    return DLO_AXIOMS.format(density=GUARDED_DENSITY if guarded else UNGUARDED_DENSITY)


def dlo_theory(guarded: bool = True) -> PrenexSentence:
    """The dense-order axioms with a Skolem function f, as one universal sentence."""
    phi, _ = skolemize(parse_sentence(dlo_theory_text(guarded)))
    return phi


class DloError(LogicError):
    pass


def _check_dlo_term(t: Term) -> None:
    for s in subterms(t):
        if isinstance(s, App) and s.args and (s.fn != "f" or len(s.args) != 2):
            raise DloError(f"term {s} is outside the signature {{0, 1, f/2}}")


def dlo_interpretation(terms: Iterable[Term]) -> dict[Term, Fraction]:
    """Place every term on the rationals.

    ``0`` and ``1`` get 0 and 1; other leaves get 2, 3, ... by first
    occurrence. ``f(a, b)`` with v(a) < v(b) goes halfway between v(a) and
    the next value already used above v(a), so it is strictly between a and
    b and distinct from every other term; otherwise it goes above everything.
    """
    order: dict[Term, None] = {}
    for t in terms:
        _check_dlo_term(t)
        for s in subterms(t):
            order.setdefault(s)
    v: dict[Term, Fraction] = {App("0"): Fraction(0), App("1"): Fraction(1)}
    used = [Fraction(0), Fraction(1)]
    leaves = [t for t in order if isinstance(t, Var) or not t.args]
    for t in leaves:
        if t not in v:
            v[t] = used[-1] + 1 if used[-1] >= 2 else Fraction(2)
            bisect.insort(used, v[t])
    for t in order:
        if t in v:
            continue
        a, b = v[t.args[0]], v[t.args[1]]
        if a < b:
            above = used[bisect.bisect_right(used, a)]
            value = (a + above) / 2
        else:
            value = used[-1] + 1
        v[t] = value
        bisect.insort(used, value)
    return v


def dlo_model(rows: Iterable[Sequence[Term]], guarded: bool = True):
    """(instance, interpretation, assignment) for the dense-order theory at ``rows``."""
    rows = [tuple(r) for r in rows]
    for r in rows:
        if len(r) != 3:
            raise DloError(f"expected term triples, got {len(r)} terms")
        for t in r:
            _check_dlo_term(t)
    phi = dlo_theory(guarded)
    inst = build_instance(phi.matrix, phi.variables, rows)
    interp = dlo_interpretation(t for a in inst.atoms for t in a.args)
    a: Assignment = {}
    for atom in inst.atoms:
        left, right = (interp[t] for t in atom.args)
        if atom.pred == "eq":
            a[atom] = left == right
        elif atom.pred == "lt":
            a[atom] = left < right
        else:
            raise DloError(f"unexpected predicate {atom.pred}")
    return inst, interp, a


def dlo_solve(rows: Iterable[Sequence[Term]]) -> Assignment:
    """Satisfying assignment for the guarded dense-order theory, without SAT."""
    inst, _, a = dlo_model(rows)
    if not eval_instance(inst, a):
        raise AssertionError("interpretation does not satisfy the dense-order instance")
    return a


def random_dlo_term(rng: random.Random, depth: int,
                    leaves: Sequence[str] = ("0", "1", "x", "y", "z")) -> Term:
    if depth == 0 or rng.random() < 0.35:
        name = rng.choice(leaves)
        return App(name) if name in ("0", "1") else Var(name)
    return App("f", (random_dlo_term(rng, depth - 1, leaves),
                     random_dlo_term(rng, depth - 1, leaves)))


def random_dlo_rows(rng: random.Random, max_rows: int = 50, max_depth: int = 4,
                    leaves: Sequence[str] = ("0", "1", "x", "y", "z")) -> list[tuple[Term, ...]]:
    n = rng.randint(1, max_rows)
    return [tuple(random_dlo_term(rng, max_depth, leaves) for _ in range(3)) for _ in range(n)]


def unguarded_refutation_rows(tau: Term = Var("x")) -> list[tuple[Term, ...]]:
    """tau < f(tau,tau) < tau, transitivity through f(tau,tau), and ~tau < tau."""
    mid = App("f", (tau, tau))
    return [(tau, tau, tau), (tau, mid, tau)]


# ---------------------------------------------------------------------------
# Derivability of numeral inequalities and word encodings

def lemma_a_instance(n: int) -> HcsInstance:
    """Axioms 1-2 (without the length bridges) at all triples of S^k(0), k <= n."""
    matrix = And(tuple(axioms.identity_axioms(bridging=False) + axioms.successor_axioms()))
    nums = axioms.numerals(n)
    return build_instance(matrix, ("r", "s", "t"), itertools.product(nums, repeat=3))


def lemma_a_targets(n: int) -> list[tuple[Atom, bool]]:
    nums = axioms.numerals(n)
    return [(axioms.eq(nums[i], nums[j]), False)
            for i in range(n + 1) for j in range(n + 1) if i != j]


def lemma_a_check(n: int, engine: str = "cdcl") -> bool:
    """S^i(0) != S^j(0) for i != j <= n follow from the instances over numerals <= n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return sat.entails(lemma_a_instance(n), lemma_a_targets(n), engine)


def lemma_b_instance(w: str) -> HcsInstance:
    groups = axioms.word_axioms()
    matrix = And(tuple(f for g in range(1, 6) for f in groups[g]))
    rows = itertools.product(axioms.prefix_terms(w), *[axioms.numerals(len(w))] * 3)
    return build_instance(matrix, axioms.VARIABLES, rows)


def lemma_b_targets(w: str) -> list[tuple[Atom, bool]]:
    n = len(w)
    tau = axioms.word_term(w)
    nums = axioms.numerals(n)
    out = [(axioms.P(tau, nums[i]), w[i] == "1") for i in range(n)]
    out += [(axioms.eq(axioms.ell(tau), nums[i]), False) for i in range(n)]
    out.append((axioms.eq(axioms.ell(tau), nums[n]), True))
    return out


def lemma_b_check(w: str, engine: str = "cdcl") -> bool:
    """The bits and the length of word_term(w) follow from axioms 1-5 at its prefixes."""
    if not w or set(w) - {"0", "1"}:
        raise ValueError("w must be a non-empty bit string")
    return sat.entails(lemma_b_instance(w), lemma_b_targets(w), engine)
