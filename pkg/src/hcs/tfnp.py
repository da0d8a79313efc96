"""Compile a register machine deciding R(x, y) into a universal sentence whose
Herbrand consistency search solves the search problem for R.

A machine is a :class:`TmSpec`: ``d`` one-bit registers per tape square and,
for each register, the formula giving its next value at square 0 (``rho``)
and at an interior square (``psi``). Formulas are written in the sentence
grammar over the reserved atoms ``q<j>@prev[0]``, ``q<j>@prev[1]`` (rho) and
``q<j>@prev[t]``, ``q<j>@prev[t+1]``, ``q<j>@prev[t+2]`` (psi), meaning
register j of the previous step at that square; the square being updated is
``0`` for rho and ``t+1`` for psi.

Register roles: 1-2 hold x and its end mark, 3-4 hold y and its end mark, 5
marks the head, 6 is the reject flag; the rest start at zero.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from . import axioms
from .axioms import ZERO, X, S_, T, ell, numerals, prefix_terms, succ, word_term
from .grounding import HcsInstance, build_instance
from .logic import (
    And, App, Atom, Formula, Iff, LogicError, Not, Signature, Term, atoms as formula_atoms,
    evaluate, parse_formula,
)
from .solvers import solve_instance

_RESERVED = re.compile(r"q(\d+)@prev\[(0|1|t|t\+1|t\+2)\]$")
RHO_POSITIONS = ("0", "1")
PSI_POSITIONS = ("t", "t+1", "t+2")


class MachineError(LogicError):
    pass


class DecodeError(Exception):
    pass


@dataclass(frozen=True)
class TmSpec:
    d: int
    p: tuple[int, ...]
    rho: tuple[Formula, ...]
    psi: tuple[Formula, ...]
    name: str = ""

    def __post_init__(self):
        if self.d < 6:
            raise MachineError("a machine needs at least 6 registers")
        if not self.p or any(c < 0 for c in self.p):
            raise MachineError("the time bound needs non-negative coefficients")
        if len(self.rho) != self.d or len(self.psi) != self.d:
            raise MachineError(f"need exactly {self.d} rho and {self.d} psi formulas")
        for kind, formulas, allowed in (("rho", self.rho, RHO_POSITIONS),
                                        ("psi", self.psi, PSI_POSITIONS)):
            for i, f in enumerate(formulas, 1):
                for a in formula_atoms(f):
                    j, pos = _reserved(a)
                    if j > self.d or pos not in allowed:
                        raise MachineError(f"{kind}_{i}: atom {a} is not allowed here")

    def bound(self, n: int) -> int:
        """The time and space bound p(n)."""
        return sum(c * n ** k for k, c in enumerate(self.p))

    def to_json(self) -> dict:
        return {"name": self.name, "d": self.d, "p": list(self.p),
                "rho": [str(f) for f in self.rho], "psi": [str(f) for f in self.psi]}


def _reserved(a: Atom) -> tuple[int, str]:
    m = _RESERVED.match(a.pred)
    if m is None or a.args:
        raise MachineError(f"atom {a} is not of the form q<j>@prev[...]")
    j = int(m.group(1))
    if j < 1:
        raise MachineError(f"register index in {a} must be positive")
    return j, m.group(2)


def machine_from_json(data: Mapping) -> TmSpec:
    try:
        d = int(data["d"])
        p = tuple(int(c) for c in data["p"])
        rho = tuple(parse_formula(s) for s in data["rho"])
        psi = tuple(parse_formula(s) for s in data["psi"])
    except KeyError as e:
        raise MachineError(f"machine description lacks {e.args[0]!r}") from None
    return TmSpec(d, p, rho, psi, data.get("name", ""))


def load_machine(path: str | Path) -> TmSpec:
    path = Path(path)
    if not path.exists() and not path.suffix:
        builtin = resources.files("hcs") / "data" / f"{path.name}.json"
        if builtin.is_file():
            return machine_from_json(json.loads(builtin.read_text()))
    return machine_from_json(json.loads(path.read_text()))


# ---------------------------------------------------------------------------
# Axioms

def Q(j: int, z: Term, s: Term, t: Term) -> Atom:
    return Atom(f"Q{j}", (z, s, t))


def machine_signature(m: TmSpec) -> Signature:
    return axioms.WORD_SIGNATURE.extend(
        predicates={f"Q{j}": 3 for j in range(1, m.d + 1)}, functions={"F": 1})


def _tableau_formula(f: Formula) -> Formula:
    fx = App("F", (X,))
    where = {"0": ZERO, "1": succ(ZERO), "t": T, "t+1": succ(T), "t+2": succ(succ(T))}
    mapping = {}
    for a in formula_atoms(f):
        j, pos = _reserved(a)
        mapping[a] = Q(j, fx, S_, where[pos])
    return _replace_atoms(f, mapping)


def _replace_atoms(f: Formula, mapping: Mapping[Atom, Formula]) -> Formula:
    if isinstance(f, Atom):
        return mapping.get(f, f)
    if isinstance(f, Not):
        return Not(_replace_atoms(f.arg, mapping))
    if hasattr(f, "args"):
        return type(f)(tuple(_replace_atoms(a, mapping) for a in f.args))
    return type(f)(_replace_atoms(f.left, mapping), _replace_atoms(f.right, mapping))


def axiom_groups(m: TmSpec) -> dict[int, list[Formula]]:
    """The ten axiom groups over the variables x, r, s, t."""
    fx = App("F", (X,))
    groups = axioms.word_axioms()
    groups[6] = [Iff(Q(1, fx, ZERO, T), axioms.P(X, T)),
                 Iff(Q(2, fx, ZERO, T), axioms.eq(ell(X), T))]
    groups[7] = [Q(5, fx, ZERO, ZERO), Not(Q(5, fx, ZERO, succ(T)))]
    groups[8] = [Not(Q(i, fx, ZERO, T)) for i in range(6, m.d + 1)]
    groups[9] = []
    for i in range(1, m.d + 1):
        groups[9].append(Iff(Q(i, fx, succ(S_), ZERO), _tableau_formula(m.rho[i - 1])))
        groups[9].append(Iff(Q(i, fx, succ(S_), succ(T)), _tableau_formula(m.psi[i - 1])))
    groups[10] = [Not(Q(6, fx, S_, T))]
    return groups


def generate_axioms(m: TmSpec) -> tuple[Formula, Signature]:
    groups = axiom_groups(m)
    matrix = And(tuple(f for g in sorted(groups) for f in groups[g]))
    return matrix, machine_signature(m)


def psi_rows(m: TmSpec, w: str) -> list[tuple[Term, ...]]:
    nums = numerals(m.bound(len(w)))
    return list(itertools.product(prefix_terms(w), nums, nums, nums))


def build_psi_w(m: TmSpec, w: str) -> HcsInstance:
    """The axioms at x = every prefix of w (Lambda included) and r, s, t <= p(|w|)."""
    if not w or set(w) - {"0", "1"}:
        raise ValueError("w must be a non-empty bit string")
    matrix, _ = generate_axioms(m)
    return build_instance(matrix, axioms.VARIABLES, psi_rows(m, w))


# ---------------------------------------------------------------------------
# Simulation

Config = list  # per square: tuple of d register bits


def initial_configuration(m: TmSpec, x: str, y: str, y_end: bool = True) -> Config:
    """Time-0 squares 0..p(|x|) as fixed by axioms 6-8, with y in registers 3-4."""
    size = m.bound(len(x)) + 1
    config = []
    for t in range(size):
        regs = [False] * m.d
        regs[0] = t < len(x) and x[t] == "1"
        regs[1] = t == len(x)
        regs[2] = t < len(y) and y[t] == "1"
        regs[3] = y_end and t == len(y)
        regs[4] = t == 0
        config.append(tuple(regs))
    return config


def step(m: TmSpec, config: Config) -> Config:
    """One application of the transition formulas; squares past the end read 0."""
    size = len(config)
    blank = (False,) * m.d

    def cell(t):
        return config[t] if t < size else blank

    def reader(cells):
        def value(a: Atom) -> bool:
            j, pos = _reserved(a)
            return cells[pos][j - 1]
        return value

    out = []
    v0 = reader({"0": cell(0), "1": cell(1)})
    out.append(tuple(evaluate(f, v0) for f in m.rho))
    for t in range(size - 1):
        v = reader({"t": cell(t), "t+1": cell(t + 1), "t+2": cell(t + 2)})
        out.append(tuple(evaluate(f, v) for f in m.psi))
    return out


def simulate(m: TmSpec, config: Config, steps: int) -> list[Config]:
    history = [config]
    for _ in range(steps):
        history.append(step(m, history[-1]))
    return history


def rejects(history: Sequence[Config]) -> bool:
    return any(regs[5] for config in history for regs in config)


def run_tm(m: TmSpec, x: str, y: str, y_end: bool = True) -> bool:
    """Accept (True) iff register 6 stays 0 for p(|x|) steps over squares 0..p(|x|)."""
    config = initial_configuration(m, x, y, y_end)
    return not rejects(simulate(m, config, m.bound(len(x))))


# ---------------------------------------------------------------------------
# Reading solutions

def read_tableau(m: TmSpec, a: Mapping[Atom, bool], w: str) -> list[Config]:
    """Register values Q_k(F(word_term(w)), S^s(0), S^t(0)) for s, t <= p(|w|)."""
    bound = m.bound(len(w))
    z = App("F", (word_term(w),))
    nums = numerals(bound)
    return [[tuple(a.get(Q(k, z, nums[s], nums[t]), False) for k in range(1, m.d + 1))
             for t in range(bound + 1)]
            for s in range(bound + 1)]


def decode_solution(m: TmSpec, inst: HcsInstance, a: Mapping[Atom, bool], w: str,
                    verify: bool = True) -> str:
    """The y encoded at time 0 in registers 3-4 of the tableau for w."""
    bound = m.bound(len(w))
    z = App("F", (word_term(w),))
    nums = numerals(bound)
    end = next((i for i in range(bound + 1) if a.get(Q(4, z, ZERO, nums[i]), False)), None)
    if end is None:
        raise DecodeError(f"no end mark for y within p({len(w)}) = {bound} squares")
    u = "".join("1" if a.get(Q(3, z, ZERO, nums[i]), False) else "0" for i in range(end))
    if verify and not run_tm(m, w, u):
        raise DecodeError(f"verification failed: the machine rejects ({w}, {u})")
    return u


def reduce_and_solve(m: TmSpec, w: str, engine: str = "cdcl") -> str:
    inst = build_psi_w(m, w)
    a = solve_instance(inst, engine)
    return decode_solution(m, inst, a, w)


# ---------------------------------------------------------------------------
# Fixture machines

def _cell(c: str) -> dict[str, str]:
    return {f"q{j}": f"q{j}@prev[{c}]" for j in range(1, 9)}


def _complement_macros(c: str) -> dict[str, str]:
    q = _cell(c)
    active = f"({q['q5']} & ~{q['q7']} & ~{q['q6']})"
    return {
        "move": f"({active} & ~{q['q2']} & ~{q['q4']} & ~({q['q1']} <-> {q['q3']}))",
        "reject": (f"({active} & (~({q['q2']} <-> {q['q4']}) | "
                   f"~{q['q2']} & ~{q['q4']} & ({q['q1']} <-> {q['q3']})))"),
        "accept": f"({active} & {q['q2']} & {q['q4']})",
    }


def complement_machine() -> TmSpec:
    """R(x, y): y is the bitwise complement of x.

    One left-to-right sweep: at each square the head checks that the end
    marks of x and y agree and that the bits differ, then moves right; at
    the common end mark it halts (register 7). The head never moves left,
    so a square's next value reads only itself and its left neighbour.
    """
    rho, psi = [], []
    for side, own, left in (("rho", "0", None), ("psi", "t+1", "t")):
        q = _cell(own)
        mine = _complement_macros(own)
        head = f"{q['q5']} & ~{mine['move']}"
        if left is not None:
            head = f"{head} | {_complement_macros(left)['move']}"
        formulas = [q["q1"], q["q2"], q["q3"], q["q4"], head,
                    f"{q['q6']} | {mine['reject']}", f"{q['q7']} | {mine['accept']}", q["q8"]]
        (rho if side == "rho" else psi).extend(parse_formula(f) for f in formulas)
    return TmSpec(8, (8, 4), tuple(rho), tuple(psi), "complement")


def always_reject_machine() -> TmSpec:
    """Flags a rejection wherever the head is, so no y is ever accepted."""
    rho = [f"q{j}@prev[0]" for j in range(1, 7)]
    psi = [f"q{j}@prev[t+1]" for j in range(1, 7)]
    rho[5] = "q6@prev[0] | q5@prev[0]"
    psi[5] = "q6@prev[t+1] | q5@prev[t+1]"
    return TmSpec(6, (2, 1), tuple(map(parse_formula, rho)), tuple(map(parse_formula, psi)),
                  "always-reject")
