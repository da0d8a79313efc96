"""Command-line interface.

Exit codes: 0 success, 10 satisfiable / assignment found, 20 unsatisfiable or
Herbrand refutation, 2 usage or validation error, 1 a check that failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from contextlib import contextmanager
from pathlib import Path

from . import reductions, sat, solvers, tfnp
from .grounding import (
    build_instance, eval_instance, format_assignment, to_cnf, write_atom_map, write_dimacs,
)
from .logic import (
    LogicError, PrenexSentence, Signature, herbrand_terms, parse_sentence, parse_term,
    sentences_signature, skolemize,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SAT, EXIT_UNSAT = 0, 1, 2, 10, 20

log = logging.getLogger("hcs")


class UsageError(Exception):
    pass


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _data_file(name: str) -> str:
    """A path, or the name of a bundled fixture (e.g. ``dlo-guarded``)."""
    p = Path(name)
    if not p.exists() and not p.suffix:
        from importlib import resources
        for ext in (".txt", ".json"):
            f = resources.files("hcs") / "data" / (name + ext)
            if f.is_file():
                return f.read_text()
    return _read(name)


def _universal(text: str) -> tuple[PrenexSentence, Signature]:
    parsed = parse_sentence(text)
    if isinstance(parsed, PrenexSentence) and parsed.is_universal:
        return parsed, sentences_signature(parsed)
    return skolemize(parsed)


def _emit(cnf, prefix: str) -> None:
    with open(prefix + ".cnf", "w", newline="\n") as fh:
        write_dimacs(cnf, fh)
    with open(prefix + ".map", "w", newline="\n") as fh:
        write_atom_map(cnf, fh)


def _term_rows(data, sig, width):
    if not isinstance(data, list):
        raise UsageError("rows must be a JSON list of lists of terms")
    rows = []
    for r in data:
        if not isinstance(r, list) or len(r) != width:
            raise UsageError(f"row {r!r} does not have {width} terms")
        rows.append(tuple(parse_term(t, sig, free_ok=True) for t in r))
    return rows


def _load_rows(args, sig, width):
    if args.rows:
        try:
            data = json.loads(_read(args.rows))
        except json.JSONDecodeError as e:
            raise UsageError(f"{args.rows}: invalid JSON: {e}") from None
        return _term_rows(data, sig, width)
    if args.seed is None:
        raise UsageError("give a rows file or --seed for random rows")
    rng = random.Random(args.seed)
    terms = herbrand_terms(sig, args.depth)
    return [tuple(rng.choice(terms) for _ in range(width)) for _ in range(args.count)]


def _report_assignment(args, inst, a) -> int:
    with _output(args.out) as fh:
        fh.write(format_assignment(a, inst.atoms))
    return EXIT_SAT


def _report_refutation(args, err: solvers.HerbrandRefutation) -> int:
    with _output(args.out) as fh:
        fh.write(f"UNSAT\n{err}\n{len(err.instance.rows)} rows, {len(err.instance.atoms)} atoms\n")
    return EXIT_UNSAT


# ---------------------------------------------------------------------------
# Subcommands

def cmd_skolemize(args) -> int:
    phi, _ = skolemize(parse_sentence(_read(args.input)))
    with _output(args.out) as fh:
        fh.write(f"{phi}\n")
    return EXIT_OK


def cmd_ground(args) -> int:
    phi, sig = _universal(_data_file(args.sentence))
    inst = build_instance(phi.matrix, phi.variables, _load_rows(args, sig, len(phi.variables)))
    cnf = to_cnf(inst)
    if args.emit_dimacs:
        _emit(cnf, args.emit_dimacs)
    with _output(args.out) as fh:
        fh.write(f"c {len(inst.rows)} rows, {len(inst.conjuncts)} distinct conjuncts\n")
        write_dimacs(cnf, fh)
    return EXIT_OK


def cmd_solve(args) -> int:
    phi, sig = _universal(_data_file(args.sentence))
    inst = build_instance(phi.matrix, phi.variables, _load_rows(args, sig, len(phi.variables)))
    if args.emit_dimacs:
        _emit(to_cnf(inst), args.emit_dimacs)
        return EXIT_OK
    try:
        a = solvers.solve_instance(inst, args.engine)
    except solvers.HerbrandRefutation as e:
        return _report_refutation(args, e)
    return _report_assignment(args, inst, a)


def cmd_dlo(args) -> int:
    sig = Signature.of(solvers.dlo_theory(True).matrix)
    if args.rows:
        rows = _load_rows(args, sig, 3)
    else:
        seed = 0 if args.seed is None else args.seed
        rows = solvers.random_dlo_rows(random.Random(seed), args.count, args.depth)
    try:
        if args.unguarded:
            phi = solvers.dlo_theory(False)
            inst = build_instance(phi.matrix, phi.variables, rows)
            a = solvers.solve_instance(inst, args.engine)
        else:
            inst, _, a = solvers.dlo_model(rows)
            if not eval_instance(inst, a):
                raise AssertionError("interpretation does not satisfy the dense-order instance")
    except solvers.HerbrandRefutation as e:
        return _report_refutation(args, e)
    return _report_assignment(args, inst, a)


def cmd_tfnp(args) -> int:
    w = args.word
    if not w or set(w) - {"0", "1"}:
        raise UsageError("the word must be a non-empty bit string")
    try:
        m = tfnp.load_machine(args.machine)
    except OSError as e:
        raise UsageError(f"cannot read {args.machine}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{args.machine}: invalid JSON: {e}") from None
    inst = tfnp.build_psi_w(m, w)
    if args.emit_dimacs:
        _emit(to_cnf(inst), args.emit_dimacs)
        return EXIT_OK
    try:
        a = solvers.solve_instance(inst, args.engine)
    except solvers.HerbrandRefutation as e:
        return _report_refutation(args, e)
    u = tfnp.decode_solution(m, inst, a, w)
    with _output(args.out) as fh:
        fh.write(u + "\n")
    return EXIT_OK


def _sentence(cfg, key):
    if key not in cfg:
        raise UsageError(f"reduction config lacks {key!r}")
    s = parse_sentence(cfg[key])
    if not isinstance(s, PrenexSentence):
        raise UsageError(f"{key} must be a single sentence")
    return s


def _rows(cfg, key, width):
    if key not in cfg:
        raise UsageError(f"reduction config lacks {key!r}")
    return _term_rows(cfg[key], None, width)


def cmd_reduce(args) -> int:
    try:
        cfg = json.loads(_read(args.config))
    except json.JSONDecodeError as e:
        raise UsageError(f"{args.config}: invalid JSON: {e}") from None
    if args.witness:
        cfg["witness"] = json.loads(_read(args.witness))
    oracle = reductions.Oracle(engine=args.engine)
    phi = _sentence(cfg, "phi")
    if args.mode == "universal":
        psi = _sentence(cfg, "psi")
        if "witness" in cfg:
            constants = cfg.get("constants") or list(reductions.fresh_constants(
                len(psi.variables), reductions._signature(phi, psi)))
            witness = reductions.HerbrandWitness(
                _rows(cfg, "witness", len(phi.variables)), constants)
        elif args.search:
            witness = reductions.search_witness(phi, psi, args.depth, engine=args.engine)
            if witness is None:
                print(f"witness not found up to depth {args.depth}", file=sys.stderr)
                return EXIT_FAIL
        else:
            raise UsageError("give a witness or --search")
        inst, a = reductions.solve_universal(
            phi, psi, witness, _rows(cfg, "psi_rows", len(psi.variables)), oracle, engine=args.engine)
        queries = oracle.calls
    elif args.mode == "constant-intro":
        alpha = _sentence(cfg, "alpha")
        constants = cfg.get("constants")
        if not constants:
            raise UsageError("reduction config lacks 'constants'")
        res = reductions.reduce_constant_intro(
            phi, alpha, constants, _rows(cfg, "tau_rows", len(phi.variables)),
            _rows(cfg, "sigma_rows", len(alpha.variables)), oracle)
        inst, a, queries = res.instance, res.assignment, oracle.calls
        print(f"case {res.case}", file=sys.stderr)
    else:
        alpha = _sentence(cfg, "alpha")
        res = reductions.reduce_existential(
            phi, alpha, _rows(cfg, "witness", len(phi.variables) + len(alpha.variables)),
            _rows(cfg, "psi_rows", len(phi.variables)), oracle, engine=args.engine,
            constants=cfg.get("constants"))
        inst, a, queries = res.instance, res.assignment, res.queries
    print(f"oracle queries: {queries}", file=sys.stderr)
    return _report_assignment(args, inst, a)


def cmd_check(args) -> int:
    if args.lemma == "lA":
        try:
            n = int(args.parameter)
        except ValueError:
            raise UsageError(f"lA needs an integer, got {args.parameter!r}") from None
        if n < 0:
            raise UsageError("lA needs n >= 0")
        ok = solvers.lemma_a_check(n, args.engine)
    else:
        w = args.parameter
        if not w or set(w) - {"0", "1"}:
            raise UsageError("lB needs a non-empty bit string")
        ok = solvers.lemma_b_check(w, args.engine)
    with _output(args.out) as fh:
        fh.write(f"{args.lemma} {args.parameter}: {'pass' if ok else 'fail'}\n")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    def d(value):
        return argparse.SUPPRESS if suppress else value
    p.add_argument("--engine", choices=sat.ENGINES, default=d("cdcl"), help="SAT engine")
    p.add_argument("--seed", type=int, default=d(None), help="seed for random rows")
    p.add_argument("--depth", type=int, default=d(2),
                   help="term depth for random rows and witness search")
    p.add_argument("--emit-dimacs", metavar="PREFIX", default=d(None),
                   help="write PREFIX.cnf and PREFIX.map instead of solving")
    p.add_argument("--out", default=d(None), help="output file (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcs", description="Herbrand consistency search toolkit")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("skolemize", parents=[common], help="skolemize a sentence file")
    p.add_argument("input")
    p.set_defaults(func=cmd_skolemize)

    for name, func, text in (("ground", cmd_ground, "ground a sentence at term rows"),
                             ("solve", cmd_solve, "solve an HCS instance")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("sentence", help="sentence file or bundled fixture name")
        p.add_argument("rows", nargs="?", help="JSON list of term rows")
        p.add_argument("--count", type=int, default=10, help="number of random rows")
        p.set_defaults(func=func)

    p = sub.add_parser("dlo", parents=[common], help="dense linear order solver")
    p.add_argument("rows", nargs="?", help="JSON list of term triples")
    p.add_argument("--count", type=int, default=50, help="maximum number of random rows")
    p.add_argument("--unguarded", action="store_true",
                   help="use the unguarded density axiom and the SAT route")
    p.set_defaults(func=cmd_dlo)

    p = sub.add_parser("tfnp", parents=[common], help="solve a search problem through HCS")
    p.add_argument("machine", help="machine JSON file or bundled name")
    p.add_argument("word")
    p.set_defaults(func=cmd_tfnp)

    p = sub.add_parser("reduce", parents=[common], help="run a reduction between HCS problems")
    p.add_argument("mode", choices=("universal", "constant-intro", "existential"))
    p.add_argument("config", help="JSON file with sentences and term rows")
    p.add_argument("--witness", help="JSON list of witness term rows")
    p.add_argument("--search", action="store_true", help="search for a witness up to --depth")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("check", parents=[common], help="check a derivability lemma")
    p.add_argument("lemma", choices=("lA", "lB"))
    p.add_argument("parameter")
    p.set_defaults(func=cmd_check)
    return parser


def _configure_logging(verbose: bool) -> None:
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    if args.depth < 0:
        parser.error("--depth must be non-negative")
    try:
        return args.func(args)
    except (UsageError, LogicError, ValueError) as e:
        print(f"hcs {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (tfnp.DecodeError, AssertionError) as e:
        print(f"hcs {args.command}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
