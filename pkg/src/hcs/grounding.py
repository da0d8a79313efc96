"""Ground instances of a matrix and their CNF encoding.

An :class:`HcsInstance` is the conjunction of a matrix instantiated at a list
of term rows. Conjuncts of the matrix that only depend on some of the
variables are grounded once per distinct projection of the rows, so large
row sets (a compiled machine tableau has tens of thousands) stay cheap; the
ground conjuncts are shared between rows.
"""

from __future__ import annotations

import io
from operator import itemgetter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, TextIO

from .logic import (
    And, Atom, conj, Formula, Iff, Implies, LogicError, Not, Or, Signature, Term, Var,
    atoms as formula_atoms, conjuncts as top_conjuncts, free_vars, parse_formula,
    parse_term, substitute,
)

Assignment = dict  # Atom -> bool, in atom-table order


class GroundingError(LogicError):
    pass


@dataclass(frozen=True, eq=False)
class HcsInstance:
    matrix: Formula
    variables: tuple[str, ...]
    rows: tuple[tuple[Term, ...], ...]
    atoms: tuple[Atom, ...]
    conjuncts: tuple[Formula, ...]
    row_conjuncts: tuple[tuple[int, ...], ...] = field(repr=False)
    index: dict = field(repr=False)

    @cached_property
    def grounded(self) -> Formula:
        """The conjunction over rows of the instantiated matrix."""
        return And(tuple(self.row_formula(i) for i in range(len(self.rows))))

    @property
    def distinct_conjuncts(self) -> tuple[Formula, ...]:
        return self.conjuncts

    def row_formula(self, i: int) -> Formula:
        return conj(self.conjuncts[j] for j in self.row_conjuncts[i])

    def __len__(self):
        return len(self.rows)


def build_instance(matrix: Formula, variables: Sequence[str],
                   rows: Iterable[Sequence[Term]]) -> HcsInstance:
    variables = tuple(variables)
    if len(set(variables)) != len(variables):
        raise GroundingError("instance variables must be distinct")
    position = {v: i for i, v in enumerate(variables)}
    missing = [v for v in free_vars(matrix) if v not in position]
    if missing:
        raise GroundingError(f"matrix variable {missing[0]} is not among {list(variables)}")

    # templates sharing the same free variables share one projection cache
    templates = top_conjuncts(matrix)
    group_of: dict[tuple[int, ...], int] = {}
    groups: list[tuple[tuple[int, ...], list[Formula]]] = []
    slots = []
    for t in templates:
        key = tuple(sorted(position[v] for v in free_vars(t)))
        g = group_of.get(key)
        if g is None:
            g = group_of[key] = len(groups)
            groups.append((key, []))
        slots.append((g, len(groups[g][1])))
        groups[g][1].append(t)
    caches: list[dict] = [{} for _ in groups]

    interned: dict[Formula, int] = {}
    conj_list: list[Formula] = []
    scanned: list[bool] = []
    table: dict[Atom, int] = {}
    atom_list: list[Atom] = []
    row_list = []
    row_conj = []
    k = len(variables)

    keys = [itemgetter(*positions) if positions else (lambda r: ()) for positions, _ in groups]
    plan = list(zip(groups, caches, keys))
    for row in rows:
        row = tuple(row)
        if len(row) != k:
            raise GroundingError(f"row {len(row_list)} has {len(row)} entries, expected {k}")
        results = []
        fresh = False
        for (positions, members), cache, key_of in plan:
            key = key_of(row)
            hit = cache.get(key)
            if hit is None:
                fresh = True
                mapping = {Var(variables[p]): row[p] for p in positions}
                hit = []
                for t in members:
                    g = substitute(t, mapping)
                    j = interned.get(g)
                    if j is None:
                        j = interned[g] = len(conj_list)
                        conj_list.append(g)
                        scanned.append(False)
                    hit.append(j)
                hit = cache[key] = tuple(hit)
            results.append(hit)
        ids = tuple([results[g][m] for g, m in slots])
        if fresh:
            # only rows with a new projection can contain unseen conjuncts
            for j in ids:
                if not scanned[j]:
                    scanned[j] = True
                    for a in formula_atoms(conj_list[j]):
                        if a not in table:
                            table[a] = len(atom_list)
                            atom_list.append(a)
        row_list.append(row)
        row_conj.append(ids)

    return HcsInstance(matrix, variables, tuple(row_list), tuple(atom_list),
                       tuple(conj_list), tuple(row_conj), table)


def instance_of(formulas: Iterable[Formula]) -> HcsInstance:
    """A single-row instance whose matrix is the conjunction of ground formulas."""
    return build_instance(And(tuple(formulas)), (), [()])


def eval_instance(inst: HcsInstance, a: Mapping[Atom, bool]) -> bool:
    """Propositional truth of the grounded conjunction under a total assignment."""
    for atom in inst.atoms:
        if atom not in a:
            raise GroundingError(f"partial assignment: no value for {atom}")
    value = a.__getitem__
    from .logic import evaluate
    return all(evaluate(c, value) for c in inst.conjuncts)


def format_atom_table(inst: HcsInstance) -> str:
    return "".join(f"{i + 1} {a}\n" for i, a in enumerate(inst.atoms))


# ---------------------------------------------------------------------------
# CNF

@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        if len(self.atoms) > self.num_vars:
            raise ValueError("more atoms than variables")
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range")

    def atom_var(self, atom: Atom) -> int:
        return self.atoms.index(atom) + 1

    def restrict(self, model: Mapping[int, bool]) -> Assignment:
        """Values of the atom variables of ``model``, in atom-table order."""
        return {a: model[i + 1] for i, a in enumerate(self.atoms)}


class CnfBuilder:
    """Structure-preserving CNF encoding with full-biconditional gates.

    Atom ``atoms[i]`` is variable ``i + 1``; gate variables follow. Identical
    subformulas share one gate.
    """

    def __init__(self, atoms: Sequence[Atom]):
        self.atoms = tuple(atoms)
        self.index = {a: i + 1 for i, a in enumerate(self.atoms)}
        self.num_vars = len(self.atoms)
        self.clauses: list[tuple[int, ...]] = []
        self._gates: dict[Formula, int] = {}
        self._true: int | None = None

    def _new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def _true_var(self) -> int:
        if self._true is None:
            self._true = self._new_var()
            self.clauses.append((self._true,))
        return self._true

    def literal(self, f: Formula) -> int:
        if type(f) is Atom:
            v = self.index.get(f)
            if v is None:
                raise GroundingError(f"atom {f} is not in the table")
            return v
        if type(f) is Not:
            return -self.literal(f.arg)
        g = self._gates.get(f)
        if g is not None:
            return g
        clauses = self.clauses
        if type(f) is And or type(f) is Or:
            if not f.args:
                g = self._true_var() if type(f) is And else -self._true_var()
                self._gates[f] = g
                return g
            lits = [self.literal(a) for a in f.args]
            g = self._new_var()
            if type(f) is And:
                for x in lits:
                    clauses.append((-g, x))
                clauses.append(tuple([g] + [-x for x in lits]))
            else:
                for x in lits:
                    clauses.append((g, -x))
                clauses.append(tuple([-g] + lits))
        elif type(f) is Implies:
            a, b = self.literal(f.left), self.literal(f.right)
            g = self._new_var()
            clauses.append((-g, -a, b))
            clauses.append((g, a))
            clauses.append((g, -b))
        elif type(f) is Iff:
            a, b = self.literal(f.left), self.literal(f.right)
            g = self._new_var()
            clauses.append((-g, -a, b))
            clauses.append((-g, a, -b))
            clauses.append((g, a, b))
            clauses.append((g, -a, -b))
        else:
            raise TypeError(f)
        self._gates[f] = g
        return g

    def _clause_literals(self, f: Formula, positive: bool, out: list[int]) -> None:
        """Literals of ``f`` (or of its negation) read as one disjunction."""
        t = type(f)
        if t is Not:
            self._clause_literals(f.arg, not positive, out)
        elif (t is Or and positive) or (t is And and not positive):
            for a in f.args:
                self._clause_literals(a, positive, out)
        elif t is Implies and positive:
            self._clause_literals(f.left, False, out)
            self._clause_literals(f.right, True, out)
        else:
            x = self.literal(f)
            out.append(x if positive else -x)

    def add(self, f: Formula, positive: bool = True) -> None:
        """Assert ``f`` (or its negation)."""
        t = type(f)
        if t is Not:
            self.add(f.arg, not positive)
        elif (t is And and positive) or (t is Or and not positive):
            for a in f.args:
                self.add(a, positive)
        elif t is Implies and not positive:
            self.add(f.left, True)
            self.add(f.right, False)
        elif t is Iff:
            a, b = self.literal(f.left), self.literal(f.right)
            if positive:
                self.clauses.append((-a, b))
                self.clauses.append((a, -b))
            else:
                self.clauses.append((a, b))
                self.clauses.append((-a, -b))
        else:
            lits: list[int] = []
            self._clause_literals(f, positive, lits)
            self.clauses.append(tuple(lits))

    def add_clause(self, lits: Iterable[int]) -> None:
        self.clauses.append(tuple(lits))

    def cnf(self) -> Cnf:
        return Cnf(self.num_vars, tuple(self.clauses), self.atoms)


def to_cnf(inst: HcsInstance) -> Cnf:
    """Equisatisfiable CNF of the grounded conjunction; atom i is variable i+1."""
    b = CnfBuilder(inst.atoms)
    for c in inst.conjuncts:
        b.add(c)
    return b.cnf()


# ---------------------------------------------------------------------------
# Text formats

def write_dimacs(cnf: Cnf, out: TextIO) -> None:
    out.write(f"p cnf {cnf.num_vars} {len(cnf.clauses)}\n")
    for c in cnf.clauses:
        out.write(" ".join(map(str, c)) + " 0\n")


def dimacs_text(cnf: Cnf) -> str:
    buf = io.StringIO()
    write_dimacs(cnf, buf)
    return buf.getvalue()


def write_atom_map(cnf: Cnf, out: TextIO) -> None:
    for i, a in enumerate(cnf.atoms):
        out.write(f"{i + 1} {a}\n")


def read_dimacs(text: str) -> Cnf:
    num_vars = num_clauses = None
    clauses = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line[0] in "c%":
            continue
        if line[0] == "p":
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ValueError(f"line {lineno}: bad header {line!r}")
            num_vars, num_clauses = int(fields[2]), int(fields[3])
            continue
        if num_vars is None:
            raise ValueError(f"line {lineno}: clause before header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    if num_vars is None:
        raise ValueError("missing 'p cnf' header")
    if len(clauses) != num_clauses:
        raise ValueError(f"header announces {num_clauses} clauses, found {len(clauses)}")
    return Cnf(num_vars, tuple(clauses))


def read_atom_map(text: str, cnf: Cnf, sig: Signature | None = None) -> Cnf:
    found = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        var, atom_text = line.split(" ", 1)
        a = parse_formula(atom_text, sig, free_ok=True)
        if not isinstance(a, Atom):
            raise ValueError(f"not an atom: {atom_text!r}")
        found[int(var)] = a
    if sorted(found) != list(range(1, len(found) + 1)):
        raise ValueError("atom map must number atoms 1..n")
    return Cnf(cnf.num_vars, cnf.clauses, tuple(found[i] for i in range(1, len(found) + 1)))


def format_assignment(a: Mapping[Atom, bool], order: Iterable[Atom] | None = None) -> str:
    order = a.keys() if order is None else order
    return "".join(f"{atom}\t{int(a[atom])}\n" for atom in order)


def parse_assignment(text: str, sig: Signature | None = None) -> Assignment:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        atom_text, value = line.rsplit("\t", 1)
        a = parse_formula(atom_text, sig, free_ok=True)
        if not isinstance(a, Atom) or value.strip() not in ("0", "1"):
            raise ValueError(f"bad assignment line {line!r}")
        out[a] = value.strip() == "1"
    return out


def parse_rows(data, sig: Signature | None, width: int | None = None) -> list[tuple[Term, ...]]:
    """Rows from a JSON-style list of lists of term strings."""
    rows = []
    for r in data:
        row = tuple(parse_term(t, sig) if isinstance(t, str) else t for t in r)
        if width is not None and len(row) != width:
            raise GroundingError(f"row {r!r} has {len(row)} terms, expected {width}")
        rows.append(row)
    return rows
