"""Numerals, binary words and the arithmetic/word axioms (groups 1-5).

Symbols: constants ``0`` and ``Lambda`` (the empty word), unary ``S``
(successor), ``f0``/``f1`` (append a bit), ``ell`` (length) and ``F`` (the
computation tableau); predicates ``eq``, ``P`` (bits of a word) and
``Q1..Qd`` (tableau registers).
"""

from __future__ import annotations

from .logic import And, App, Atom, Formula, Iff, Implies, Not, Signature, Term, Var, eq, neq

ZERO = App("0")
LAMBDA = App("Lambda")

X, R, S_, T = Var("x"), Var("r"), Var("s"), Var("t")
VARIABLES = ("x", "r", "s", "t")


def succ(t: Term) -> Term:
    return App("S", (t,))


def numeral(i: int) -> Term:
    t = ZERO
    for _ in range(i):
        t = succ(t)
    return t


def numerals(n: int) -> list[Term]:
    """S^0(0) .. S^n(0)."""
    out = [ZERO]
    for _ in range(n):
        out.append(succ(out[-1]))
    return out


def ell(t: Term) -> Term:
    return App("ell", (t,))


def append_bit(bit: str, t: Term) -> Term:
    if bit not in "01" or len(bit) != 1:
        raise ValueError(f"not a bit: {bit!r}")
    return App("f" + bit, (t,))


def word_term(w: str) -> Term:
    """``f_{w_{n-1}}(...f_{w_0}(Lambda)...)``; the empty word is ``Lambda``."""
    t = LAMBDA
    for b in w:
        t = append_bit(b, t)
    return t


def prefix_terms(w: str) -> list[Term]:
    """Lambda, f_{w_0}(Lambda), ..., word_term(w)."""
    out = [LAMBDA]
    for b in w:
        out.append(append_bit(b, out[-1]))
    return out


def P(x: Term, t: Term) -> Atom:
    return Atom("P", (x, t))


def identity_axioms(bridging: bool = True) -> list[Formula]:
    """Group 1: identity axioms over r, s, t and congruence of S.

    With ``bridging``, also the instances of these axioms (and of
    substitutivity for the position argument of P) at the length terms
    ``ell(x)``, ``S(ell(x))``, ``ell(f_b(x))``. They are needed to move
    between ``ell(tau)`` and numerals when the rows only supply numerals for
    r, s, t.
    """
    out: list[Formula] = [
        eq(R, R),
        Implies(eq(R, S_), eq(S_, R)),
        Implies(And((eq(R, S_), eq(S_, T))), eq(R, T)),
        Implies(eq(S_, T), eq(succ(S_), succ(T))),
    ]
    if bridging:
        lx = ell(X)
        out.append(Implies(eq(lx, T), eq(succ(lx), succ(T))))
        for b in "01":
            fx = append_bit(b, X)
            out.append(Implies(And((eq(ell(fx), succ(lx)), eq(succ(lx), succ(T)))),
                               eq(ell(fx), succ(T))))
        out.append(Implies(eq(lx, S_), eq(S_, lx)))
        out.append(Implies(And((eq(S_, lx), eq(lx, T))), eq(S_, T)))
        for b in "01":
            fx = append_bit(b, X)
            out.append(Implies(eq(lx, T), Iff(P(fx, lx), P(fx, T))))
    return out


def successor_axioms() -> list[Formula]:
    """Group 2: 0 != S(t) and injectivity."""
    return [
        neq(ZERO, succ(T)),
        Implies(neq(S_, T), neq(succ(S_), succ(T))),
    ]


def length_axioms() -> list[Formula]:
    """Group 3: ell(Lambda) = 0."""
    return [eq(ell(LAMBDA), ZERO)]


def append_axioms(bit: str) -> list[Formula]:
    """Groups 4 (bit 0) and 5 (bit 1)."""
    fx = append_bit(bit, X)
    lx = ell(X)
    new_bit = P(fx, lx) if bit == "1" else Not(P(fx, lx))
    return [
        eq(ell(fx), succ(lx)),
        new_bit,
        Implies(neq(S_, lx), Iff(P(fx, S_), P(X, S_))),
    ]


def word_axioms() -> dict[int, list[Formula]]:
    return {
        1: identity_axioms(),
        2: successor_axioms(),
        3: length_axioms(),
        4: append_axioms("0"),
        5: append_axioms("1"),
    }


WORD_SIGNATURE = Signature(
    {"eq": 2, "P": 2},
    {"0": 0, "Lambda": 0, "S": 1, "f0": 1, "f1": 1, "ell": 1},
)
