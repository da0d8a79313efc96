import json
import subprocess
import sys

import pytest

from hcs.cli import main
from hcs.grounding import parse_assignment, read_atom_map, read_dimacs


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    def write(name, content):
        path = tmp_path / name
        path.write_text(content if isinstance(content, str) else json.dumps(content))
        return str(path)
    return write


def test_skolemize(capsys, files):
    code, out, _ = run(capsys, "skolemize", files("s.txt", "forall x . exists y . P(x,y)\n"))
    assert code == 0 and out == "forall x . P(x, sk1(x))\n"


def test_skolemize_universal_is_identical(capsys, files):
    code, out, _ = run(capsys, "skolemize", files("s.txt", "forall x . R(x, f(x)) -> P(x)"))
    assert out == "forall x . R(x, f(x)) -> P(x)\n"


@pytest.mark.parametrize("text", ["forall x . P(x", "forall x . P(x) & P(x, x)", ""])
def test_skolemize_malformed(capsys, files, text):
    code, _, err = run(capsys, "skolemize", files("bad.txt", text))
    assert code == 2 and "error" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "skolemize", "/nonexistent/file.txt")
    assert code == 2 and "cannot read" in err


def test_solve_guarded_dlo_random_rows(capsys):
    code, out, _ = run(capsys, "solve", "dlo-guarded", "--seed", "4", "--count", "8")
    assert code == 10
    assert all(v in (True, False) for v in parse_assignment(out).values())


def test_solve_unguarded_refutation(capsys, files):
    rows = files("rows.json", [["x", "x", "x"], ["x", "f(x, x)", "x"]])
    code, out, _ = run(capsys, "solve", "dlo-unguarded", rows)
    assert code == 20 and out.startswith("UNSAT")


@pytest.mark.parametrize("seed", range(4))
def test_engines_give_identical_verdicts(capsys, seed):
    codes = [run(capsys, "--engine", e, "solve", "dlo-unguarded", "--seed", str(seed),
                 "--depth", "1", "--count", "6")[0] for e in ("cdcl", "dpll")]
    assert codes[0] == codes[1]


def test_solve_rows_needed(capsys):
    code, _, err = run(capsys, "solve", "dlo-guarded")
    assert code == 2 and "--seed" in err


def test_solve_bad_row_width(capsys, files):
    code, _, err = run(capsys, "solve", "dlo-guarded", files("rows.json", [["0", "1"]]))
    assert code == 2


def test_ground_emits_dimacs(capsys, files, tmp_path):
    prefix = str(tmp_path / "g")
    code, out, _ = run(capsys, "ground", "dlo-guarded", files("r.json", [["0", "1", "f(0, 1)"]]),
                       "--emit-dimacs", prefix)
    assert code == 0
    cnf = read_dimacs(out)
    assert cnf.clauses == read_dimacs(open(prefix + ".cnf").read()).clauses
    assert len(read_atom_map(open(prefix + ".map").read(), cnf).atoms) > 0


def test_dlo(capsys):
    code, out, _ = run(capsys, "dlo", "--seed", "2")
    assert code == 10 and out


def test_dlo_unguarded(capsys, files):
    rows = files("rows.json", [["x", "x", "x"], ["x", "f(x, x)", "x"]])
    assert run(capsys, "dlo", "--unguarded", rows)[0] == 20


def test_tfnp(capsys):
    code, out, _ = run(capsys, "tfnp", "complement", "10")
    assert code == 0 and out == "01\n"


def test_tfnp_emit_dimacs(capsys, tmp_path):
    prefix = str(tmp_path / "psi")
    code, out, _ = run(capsys, "tfnp", "complement", "1", "--emit-dimacs", prefix)
    assert code == 0 and out == ""
    cnf = read_dimacs(open(prefix + ".cnf").read())
    assert read_atom_map(open(prefix + ".map").read(), cnf).atoms


@pytest.mark.parametrize("word", ["", "12"])
def test_tfnp_bad_word(capsys, word):
    assert run(capsys, "tfnp", "complement", word)[0] == 2


def test_tfnp_refutation(capsys):
    code, out, _ = run(capsys, "tfnp", "always-reject", "1")
    assert code == 20 and "Herbrand refutation" in out


UNIVERSAL = {"phi": "forall x . P(x) & (P(x) -> Q(x))", "psi": "forall y . Q(y)",
             "constants": ["c1"], "witness": [["c1"]], "psi_rows": [["0"], ["S(0)"]]}


def test_reduce_universal(capsys, files):
    code, out, err = run(capsys, "reduce", "universal", files("u.json", UNIVERSAL))
    assert code == 10 and out == "Q(0)\t1\nQ(S(0))\t1\n"
    assert "oracle queries: 1" in err


def test_reduce_universal_search(capsys, files):
    cfg = {k: v for k, v in UNIVERSAL.items() if k != "witness"}
    code, out, _ = run(capsys, "--depth", "1", "reduce", "universal", files("u.json", cfg), "--search")
    assert code == 10


def test_reduce_search_not_found(capsys, files):
    cfg = {"phi": "forall x . P(x)", "psi": "forall y . Q(y)", "psi_rows": [["0"]]}
    code, _, err = run(capsys, "reduce", "universal", files("u.json", cfg), "--search", "--depth", "1")
    assert code == 1 and "not found up to depth 1" in err


def test_reduce_invalid_witness(capsys, files):
    cfg = {**UNIVERSAL, "phi": "forall x . P(x)"}
    code, _, err = run(capsys, "reduce", "universal", files("u.json", cfg))
    assert code == 2 and "witness not a tautology" in err


def test_reduce_existential(capsys, files):
    cfg = {"phi": UNIVERSAL["phi"], "alpha": "forall y . Q(y)", "witness": [["u0", "u0"]],
           "psi_rows": [["c1"], ["u0"]]}
    code, out, err = run(capsys, "-v", "reduce", "existential", files("e.json", cfg))
    assert code == 10 and "Q(c1)\t1" in out
    assert "oracle queries: 2" in err
    assert err.count("oracle query 1 to") == 2


def test_reduce_constant_intro(capsys, files):
    cfg = {"phi": "forall x . P(x)", "alpha": "forall y . P(y)", "constants": ["c1"],
           "tau_rows": [["0"]], "sigma_rows": [["0"]]}
    code, out, err = run(capsys, "reduce", "constant-intro", files("c.json", cfg))
    assert code == 10 and "P(c1)\t1" in out and "case 2" in err


@pytest.mark.parametrize("argv,code,text", [
    (["check", "lA", "8"], 0, "lA 8: pass\n"),
    (["check", "lB", "0110"], 0, "lB 0110: pass\n"),
    (["check", "lA", "-1"], 2, ""),
    (["check", "lA", "x"], 2, ""),
    (["check", "lB", ""], 2, ""),
])
def test_check(capsys, argv, code, text):
    got, out, _ = run(capsys, *argv)
    assert got == code and out == text


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["--engine", "walksat", "check", "lA", "1"])


def test_deterministic_output_files(tmp_path):
    for argv in (["solve", "dlo-guarded", "--seed", "7", "--count", "12"],
                 ["dlo", "--seed", "7"], ["tfnp", "complement", "1"]):
        outputs = []
        for i in range(2):
            path = tmp_path / f"out{i}"
            main(argv + ["--out", str(path)])
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hcs", "check", "lA", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "lA 2: pass\n"
