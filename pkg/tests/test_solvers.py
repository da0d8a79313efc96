import itertools
import random
from fractions import Fraction

import pytest

from hcs import axioms, sat
from hcs.grounding import build_instance, eval_instance, to_cnf
from hcs.logic import And, App, Atom, Var, LogicError, parse_sentence, parse_term
from hcs.solvers import (
    DloError, HerbrandRefutation, dlo_interpretation, dlo_model, dlo_solve, dlo_theory,
    hcs_solve, lemma_a_check, lemma_b_check, lemma_b_instance, random_dlo_rows,
    unguarded_refutation_rows,
)

zero, one = App("0"), App("1")
lt = lambda a, b: Atom("lt", (a, b))
eq = lambda a, b: Atom("eq", (a, b))


def test_hcs_solve_simple():
    phi = parse_sentence("forall x . P(x)")
    a = hcs_solve(phi, [[zero], [App("S", (zero,))]])
    assert a == {Atom("P", (zero,)): True, Atom("P", (App("S", (zero,)),)): True}


def test_hcs_solve_requires_universal():
    with pytest.raises(LogicError):
        hcs_solve(parse_sentence("exists x . P(x)"), [[]])


def test_refutation_carries_instance():
    phi = parse_sentence("forall x . P(x) & ~P(x)")
    with pytest.raises(HerbrandRefutation, match="input sentence is inconsistent") as info:
        hcs_solve(phi, [[zero]])
    assert info.value.instance.atoms == (Atom("P", (zero,)),)


@pytest.mark.parametrize("tau", [Var("x"), zero, parse_term("f(0, 1)")])
def test_unguarded_density_is_refuted(tau):
    rows = unguarded_refutation_rows(tau)
    phi = dlo_theory(guarded=False)
    with pytest.raises(HerbrandRefutation) as info:
        hcs_solve(phi, rows)
    inst = info.value.instance
    assert len(inst.atoms) <= 20
    assert sat.truth_table(inst) is None
    assert not sat.brute_force(to_cnf(inst)).sat


def test_dlo_midpoint_example():
    mid = App("f", (zero, one))
    inst, v, a = dlo_model([[zero, one, mid]])
    assert v[mid] == Fraction(1, 2)
    assert a[lt(zero, mid)] and a[lt(mid, one)] and not a[lt(one, zero)]
    assert eval_instance(inst, a)


def test_dlo_reflexive_row():
    x = Var("x")
    _, v, a = dlo_model([[x, x, x]])
    assert v[x] == 2
    assert a[eq(x, x)] and not a[lt(x, x)]
    assert dlo_solve([[x, x, x]]) == a


def test_dlo_rejects_foreign_terms():
    with pytest.raises(DloError):
        dlo_solve([[zero, one, parse_term("g(0)")]])
    with pytest.raises(DloError):
        dlo_solve([[zero, one]])


def check_interpretation(v):
    if zero in v:
        assert v[zero] == 0
    if one in v:
        assert v[one] == 1
    values = list(v.values())
    assert len(set(values)) == len(values)
    for t, val in v.items():
        assert val.denominator & (val.denominator - 1) == 0  # dyadic
        if isinstance(t, App) and t.fn == "f":
            a, b = v[t.args[0]], v[t.args[1]]
            if a < b:
                assert a < val < b


@pytest.mark.parametrize("seed", range(20))
def test_dlo_random_instances(seed):
    rng = random.Random(seed)
    rows = random_dlo_rows(rng, 50, 4)
    before = sat.calls
    inst, v, a = dlo_model(rows)
    assert sat.calls == before
    assert eval_instance(inst, a)
    check_interpretation(v)
    assert eval_instance(inst, hcs_solve(dlo_theory(), rows))


def test_dlo_interpretation_deep_nesting():
    t = zero
    for _ in range(30):
        t = App("f", (zero, t))
    v = dlo_interpretation([t, App("f", (t, one))])
    check_interpretation(v)


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_lemma_a(n):
    assert lemma_a_check(n)


def test_lemma_a_negative_parameter():
    with pytest.raises(ValueError):
        lemma_a_check(-1)


def test_lemma_a_needs_injectivity():
    matrix = And(tuple(axioms.identity_axioms(bridging=False) + axioms.successor_axioms()[:1]))
    nums = axioms.numerals(2)
    inst = build_instance(matrix, ("r", "s", "t"), itertools.product(nums, repeat=3))
    assert not sat.entails(inst, [(axioms.eq(nums[1], nums[2]), False)])


@pytest.mark.parametrize("w", ["1", "0", "01", "10", "0110", "111000"])
def test_lemma_b(w):
    assert lemma_b_check(w)


def test_lemma_b_single_bits():
    for w, bit in (("1", True), ("0", False)):
        inst = lemma_b_instance(w)
        tau = axioms.word_term(w)
        assert sat.entails(inst, [(axioms.P(tau, zero), bit)])
        assert sat.entails(inst, [(axioms.eq(axioms.ell(tau), axioms.numeral(1)), True)])


def test_lemma_b_without_bridging_fails():
    # the literal axiom list has no substitutivity for P or for ell-terms
    groups = axioms.word_axioms()
    groups[1] = axioms.identity_axioms(bridging=False)
    matrix = And(tuple(f for g in range(1, 6) for f in groups[g]))
    w = "10"
    rows = itertools.product(axioms.prefix_terms(w), *[axioms.numerals(len(w))] * 3)
    inst = build_instance(matrix, axioms.VARIABLES, rows)
    tau = axioms.word_term(w)
    assert not sat.entails(inst, [(axioms.P(tau, zero), True)])


@pytest.mark.parametrize("w", ["", "012"])
def test_lemma_b_bad_words(w):
    with pytest.raises(ValueError):
        lemma_b_check(w)
