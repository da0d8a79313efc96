"""Acceptance criteria 1-7.

Each criterion prints one ``PASS``/``FAIL`` line. Run under pytest
(``pytest tests/test_acceptance.py``) or directly as a script.
"""

import json
import os
import random
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import pytest

from hcs import sat, tfnp
from hcs.grounding import Cnf, eval_instance, to_cnf
from hcs.logic import App, Atom, Signature, herbrand_terms, parse_sentence
from hcs.reductions import (
    HerbrandWitness, Oracle, reduce_constant_intro, reduce_existential, solve_universal,
)
from hcs.solvers import (
    HerbrandRefutation, dlo_model, dlo_theory, hcs_solve, lemma_a_check, lemma_b_check,
    lemma_b_targets, random_dlo_rows, solve_instance, unguarded_refutation_rows,
)

sys.path.insert(0, str(Path(__file__).parent))
from oracles import random_oracle  # noqa: E402


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line, flush=True)
    return ok


def random_cnf(rng):
    n = rng.randint(1, 16)
    clauses = tuple(tuple(rng.choice((1, -1)) * rng.randint(1, n) for _ in range(rng.randint(1, 4)))
                    for _ in range(rng.randint(0, 60)))
    return Cnf(n, clauses)


def criterion_1():
    rng = random.Random(1)
    start = time.perf_counter()
    agree = models_ok = True
    sat_count = 0
    for _ in range(1000):
        f = random_cnf(rng)
        res = sat.solve(f)
        agree &= res.sat == sat.brute_force(f).sat
        if res.sat:
            sat_count += 1
            models_ok &= sat.check_model(f.clauses, res.model)
    elapsed = time.perf_counter() - start
    ok = agree and models_ok and elapsed < 10
    return report(1, ok, f"1000 CNFs ({sat_count} SAT), verdicts agree={agree}, "
                         f"models valid={models_ok}, {elapsed:.2f}s (< 10s)")


def criterion_2():
    worst = 0.0
    results = []
    for n in range(17):
        start = time.perf_counter()
        results.append(lemma_a_check(n))
        worst = max(worst, time.perf_counter() - start)
    ok = all(results) and worst < 1
    return report(2, ok, f"lemma_a_check(n) for n=0..16 all true={all(results)}, "
                         f"slowest {worst:.3f}s (< 1s each)")


def criterion_3():
    rng = random.Random(2024)
    words = ["".join(rng.choice("01") for _ in range(rng.randint(1, 12))) for _ in range(100)]
    polarities = {b for w in words for b in w}
    # every target set has the n bits, n length inequalities and the length equation
    literal_sets = all(len(lemma_b_targets(w)) == 2 * len(w) + 1 for w in words)
    start = time.perf_counter()
    results = [lemma_b_check(w) for w in words]
    elapsed = time.perf_counter() - start
    ok = all(results) and polarities == {"0", "1"} and literal_sets and elapsed < 30
    return report(3, ok, f"lemma_b_check on 100 words (|w| <= {max(map(len, words))}) "
                         f"all true={all(results)}, both polarities={polarities == {'0', '1'}}, "
                         f"{elapsed:.2f}s (< 30s)")


def criterion_4():
    rng = random.Random(4)
    phi = dlo_theory()
    evals = parity = True
    sat_free = True
    for _ in range(100):
        rows = random_dlo_rows(rng, 50, 4)
        before = sat.calls
        inst, _, a = dlo_model(rows)
        sat_free &= sat.calls == before
        evals &= eval_instance(inst, a)
        try:
            parity &= eval_instance(inst, hcs_solve(phi, rows))
        except HerbrandRefutation:
            parity = False
    try:
        hcs_solve(dlo_theory(guarded=False), unguarded_refutation_rows())
        refuted = brute = False
    except HerbrandRefutation as e:
        refuted = True
        core = e.instance
        brute = len(core.atoms) <= 20 and not sat.brute_force(to_cnf(core)).sat \
            and sat.truth_table(core) is None
    ok = evals and sat_free and parity and refuted and brute
    return report(4, ok, f"100 DLO instances eval={evals}, no SAT calls={sat_free}, "
                         f"SAT parity={parity}; unguarded refuted={refuted}, "
                         f"brute force confirms={brute}")


def criterion_5():
    m = tfnp.complement_machine()
    words = [format(i, f"0{n}b") for n in (1, 2, 3) for i in range(2 ** n)]
    failures = []
    slowest3 = 0.0
    for w in words:
        start = time.perf_counter()
        inst = tfnp.build_psi_w(m, w)
        a = solve_instance(inst)
        u = tfnp.decode_solution(m, inst, a, w)
        elapsed = time.perf_counter() - start
        if len(w) == 3:
            slowest3 = max(slowest3, elapsed)
        n = len(w)
        expected = "".join("1" if b == "0" else "0" for b in w)
        grid = tfnp.read_tableau(m, a, w)
        checks = {
            "complement": u == expected,
            "run_tm": tfnp.run_tm(m, w, u),
            "rows": len(inst.rows) == (n + 1) * (m.bound(n) + 1) ** 3,
            "tableau": grid == tfnp.simulate(m, grid[0], m.bound(n)),
            "start": start_row_ok(m, grid[0], w, u),
        }
        failures += [f"{w}:{k}" for k, v in checks.items() if not v]
    ok = not failures and slowest3 < 120
    return report(5, ok, f"{len(words)} words, u = complement(w) with run_tm accept, row counts "
                         f"and tableau equivalence {'hold' if not failures else failures}; "
                         f"slowest |w|=3 {slowest3:.1f}s (< 120s)")


def start_row_ok(m, row, w, u):
    """Time 0 equals the start configuration outside the registers the axioms leave open."""
    want = tfnp.initial_configuration(m, w, u)
    for t, (got, exp) in enumerate(zip(row, want)):
        for k in range(m.d):
            free = (k == 0 and t >= len(w)) or (k == 2 and t >= len(u)) or (k == 3 and t > len(u))
            if got[k] != exp[k] and not free:
                return False
    return True


def criterion_6():
    phi = parse_sentence("forall x . P(x) & (P(x) -> Q(x))")
    psi = parse_sentence("forall y . Q(y)")
    witness = HerbrandWitness([[App("c1")]], ["c1"])
    terms = herbrand_terms(Signature({}, {"0": 0, "S": 1, "g": 1}), 3)
    pullbacks = True
    single_query = True
    for seed in range(50):
        rng = random.Random(seed)
        rows = [[t] for t in rng.sample(terms, rng.randint(1, len(terms)))]
        oracle = Oracle(random_oracle(seed))
        inst, a = solve_universal(phi, psi, witness, rows, oracle)
        pullbacks &= eval_instance(inst, a)
        single_query &= oracle.calls == 1

    forall_p = parse_sentence("forall x . P(x)")
    alpha_p = parse_sentence("forall y . P(y)")
    case2 = reduce_constant_intro(forall_p, alpha_p, ["c1"], [[App("0")]], [[App("0")]], Oracle())
    taut = parse_sentence("forall x . P(x) | ~P(x)")
    alpha_r = parse_sentence("forall y . R(y)")
    case1 = reduce_constant_intro(taut, alpha_r, ["c1"], [[App("0")]], [[App("S", (App("0"),))]],
                                  lambda inst: {x: True for x in inst.atoms})
    cases = case1.case == 1 and case2.case == 2 and eval_instance(case1.instance, case1.assignment) \
        and eval_instance(case2.instance, case2.assignment)

    ex = reduce_existential(phi, psi, [[App("u0"), App("u0")]], [[App("c1")], [App("u0")]])
    existential = ex.queries == 2 and eval_instance(ex.instance, ex.assignment) \
        and ex.assignment[Atom("Q", (App("c1"),))]
    ok = pullbacks and single_query and cases and existential
    return report(6, ok, f"50 random-oracle pullbacks valid={pullbacks} (one query each="
                         f"{single_query}); constant intro cases 1 and 2 verified={cases}; "
                         f"existential composition with 2 queries={existential}")


CLI_RUNS = [
    ["skolemize", "{dir}/s.txt"],
    ["solve", "dlo-guarded", "--seed", "7", "--count", "15"],
    ["solve", "dlo-unguarded", "--seed", "3", "--depth", "1", "--count", "6"],
    ["dlo", "--seed", "11"],
    ["ground", "dlo-guarded", "--seed", "5", "--count", "4"],
    ["tfnp", "complement", "10"],
    ["tfnp", "complement", "1", "--emit-dimacs", "{dir}/psi{i}"],
    ["reduce", "universal", "{dir}/u.json"],
    ["reduce", "existential", "{dir}/e.json"],
    ["check", "lB", "0110"],
]


def criterion_7():
    differing = []
    with tempfile.TemporaryDirectory() as d:
        Path(d, "s.txt").write_text("forall x . exists y . forall z . exists v . R(x, y) & R(v, z)\n")
        Path(d, "u.json").write_text(json.dumps({
            "phi": "forall x . P(x) & (P(x) -> Q(x))", "psi": "forall y . Q(y)",
            "witness": [["c1"]], "constants": ["c1"], "psi_rows": [["0"], ["S(0)"], ["g(0)"]]}))
        Path(d, "e.json").write_text(json.dumps({
            "phi": "forall x . P(x) & (P(x) -> Q(x))", "alpha": "forall y . Q(y)",
            "witness": [["u0", "u0"]], "psi_rows": [["c1"], ["u0"]]}))
        for k, argv in enumerate(CLI_RUNS):
            blobs = []
            for i, hashseed in enumerate(("1", "2")):
                out = Path(d, f"out{k}_{i}")
                args = [a.format(dir=d, i=i) for a in argv]
                env = {**os.environ, "PYTHONHASHSEED": hashseed}
                subprocess.run([sys.executable, "-m", "hcs", *args, "--out", str(out)],
                               env=env, capture_output=True, check=False)
                blob = out.read_bytes() if out.exists() else b""
                for ext in (".cnf", ".map"):
                    side = Path(d, f"psi{i}{ext}")
                    if "--emit-dimacs" in argv and side.exists():
                        blob += side.read_bytes()
                blobs.append(blob)
            if blobs[0] != blobs[1] or not blobs[0]:
                differing.append(argv[0])
    ok = not differing
    return report(7, ok, f"{len(CLI_RUNS)} CLI invocations repeated under different hash seeds, "
                         f"byte-identical outputs={'yes' if ok else differing}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 8)])
def test_acceptance(criterion, capsys):
    with capsys.disabled():
        print()
        assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
