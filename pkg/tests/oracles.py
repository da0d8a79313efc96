"""Test oracles shared by the reduction tests and the acceptance suite."""

import random

from hcs import sat
from hcs.grounding import Cnf, to_cnf


def random_oracle(seed):
    """An HCS solver returning a random satisfying assignment.

    Atoms are fixed one at a time, in random order, to a random value when
    that keeps the instance satisfiable.
    """
    rng = random.Random(seed)

    def solve(inst):
        cnf = to_cnf(inst)
        units = []
        for i in rng.sample(range(len(inst.atoms)), len(inst.atoms)):
            lit = (i + 1) * rng.choice((1, -1))
            trial = Cnf(cnf.num_vars, cnf.clauses + tuple((u,) for u in units + [lit]))
            units.append(lit if sat.solve(trial).sat else -lit)
        res = sat.solve(Cnf(cnf.num_vars, cnf.clauses + tuple((u,) for u in units)))
        assert res.sat
        return {a: res.model[i + 1] for i, a in enumerate(inst.atoms)}
    return solve
