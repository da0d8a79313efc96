"""First-order terms, open formulas and prenex sentences.

Everything here is immutable. Terms and formulas cache their hash at
construction, which keeps grounding large instances cheap: the same ground
atom is looked up many thousands of times.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union


class LogicError(Exception):
    pass


class ParseError(LogicError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class SignatureError(LogicError):
    pass


# ---------------------------------------------------------------------------
# Terms

class Term:
    __slots__ = ("_hash",)

    @property
    def ground(self) -> bool:
        raise NotImplementedError

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("var", name))

    @property
    def ground(self) -> bool:
        return False

    __hash__ = Term.__hash__

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    def __str__(self):
        return self.name


class App(Term):
    """Function application; a constant is an application with no arguments."""

    __slots__ = ("fn", "args", "_ground")

    def __init__(self, fn: str, args: Sequence[Term] = ()):
        self.fn = fn
        self.args = tuple(args)
        self._hash = hash((fn, self.args))
        self._ground = all(a.ground for a in self.args)

    @property
    def ground(self) -> bool:
        return self._ground

    __hash__ = Term.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is App and self._hash == other._hash
                and self.fn == other.fn and self.args == other.args)

    def __str__(self):
        if not self.args:
            return self.fn
        return f"{self.fn}({', '.join(map(str, self.args))})"


def const(name: str) -> App:
    return App(name)


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def subterms(t: Term) -> Iterator[Term]:
    """Post-order: arguments before the term itself."""
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)
    yield t


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


# ---------------------------------------------------------------------------
# Formulas

class Formula:
    __slots__ = ("_hash",)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"{type(self).__name__}({format_formula(self)!r})"

    def __str__(self):
        return format_formula(self)


class Atom(Formula):
    __slots__ = ("pred", "args")

    def __init__(self, pred: str, args: Sequence[Term] = ()):
        self.pred = pred
        self.args = tuple(args)
        self._hash = hash(("atom", pred, self.args))

    __hash__ = Term.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Atom and self._hash == other._hash
                and self.pred == other.pred and self.args == other.args)


class Not(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg
        self._hash = hash(("not", arg))

    __hash__ = Term.__hash__

    def __eq__(self, other):
        return self is other or (type(other) is Not and self._hash == other._hash
                                 and self.arg == other.arg)


class _Nary(Formula):
    __slots__ = ("args",)
    tag = ""

    def __init__(self, args: Iterable[Formula]):
        self.args = tuple(args)
        self._hash = hash((self.tag, self.args))

    __hash__ = Term.__hash__

    def __eq__(self, other):
        return self is other or (type(other) is type(self) and self._hash == other._hash
                                 and self.args == other.args)


class And(_Nary):
    __slots__ = ()
    tag = "and"


class Or(_Nary):
    __slots__ = ()
    tag = "or"


class _Binary(Formula):
    __slots__ = ("left", "right")
    tag = ""

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._hash = hash((self.tag, left, right))

    __hash__ = Term.__hash__

    def __eq__(self, other):
        return self is other or (type(other) is type(self) and self._hash == other._hash
                                 and self.left == other.left and self.right == other.right)


class Implies(_Binary):
    __slots__ = ()
    tag = "imp"


class Iff(_Binary):
    __slots__ = ()
    tag = "iff"


TRUE = And(())
FALSE = Or(())


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def eq(a: Term, b: Term) -> Atom:
    return Atom("eq", (a, b))


def neq(a: Term, b: Term) -> Not:
    return Not(eq(a, b))


def conjuncts(f: Formula) -> list[Formula]:
    """Top-level conjuncts with nested conjunctions flattened."""
    if isinstance(f, And):
        out = []
        for a in f.args:
            out.extend(conjuncts(a))
        return out
    return [f]


def atoms(f: Formula) -> Iterator[Atom]:
    """Atom occurrences, left to right."""
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield g
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, _Nary):
            stack.extend(reversed(g.args))
        else:
            stack.append(g.right)
            stack.append(g.left)


def free_vars(f: Formula | Term) -> list[str]:
    """Variable names in order of first occurrence."""
    seen: dict[str, None] = {}
    if isinstance(f, Term):
        for v in term_vars(f):
            seen.setdefault(v)
    else:
        for a in atoms(f):
            for t in a.args:
                for v in term_vars(t):
                    seen.setdefault(v)
    return list(seen)


def formula_terms(f: Formula) -> Iterator[Term]:
    for a in atoms(f):
        yield from a.args


def evaluate(f: Formula, value) -> bool:
    """Propositional value of ``f``; ``value`` maps an Atom to a bool."""
    if isinstance(f, Atom):
        return value(f)
    if isinstance(f, Not):
        return not evaluate(f.arg, value)
    if isinstance(f, And):
        return all(evaluate(a, value) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, value) for a in f.args)
    if isinstance(f, Implies):
        return not evaluate(f.left, value) or evaluate(f.right, value)
    if isinstance(f, Iff):
        return evaluate(f.left, value) == evaluate(f.right, value)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Substitution

Substitutable = Union[Formula, Term]


def substitute(x: Substitutable, mapping: Mapping[Term, Term]) -> Substitutable:
    """Simultaneous substitution of terms for variables or constants.

    Keys are matched structurally, outermost first, and replacements are not
    revisited, so ``{c: g(c)}`` does not loop.
    """
    if not mapping:
        return x
    memo: dict[Term, Term] = {}

    def sub_term(t: Term) -> Term:
        r = memo.get(t)
        if r is not None:
            return r
        r = mapping.get(t)
        if r is None:
            if isinstance(t, App) and t.args:
                args = tuple(sub_term(a) for a in t.args)
                r = t if all(a is b for a, b in zip(args, t.args)) else App(t.fn, args)
            else:
                r = t
        memo[t] = r
        return r

    def sub(f: Formula) -> Formula:
        if isinstance(f, Atom):
            args = tuple(sub_term(a) for a in f.args)
            if all(a is b for a, b in zip(args, f.args)):
                return f
            return Atom(f.pred, args)
        if isinstance(f, Not):
            a = sub(f.arg)
            return f if a is f.arg else Not(a)
        if isinstance(f, _Nary):
            args = tuple(sub(a) for a in f.args)
            if all(a is b for a, b in zip(args, f.args)):
                return f
            return type(f)(args)
        left, right = sub(f.left), sub(f.right)
        if left is f.left and right is f.right:
            return f
        return type(f)(left, right)

    if isinstance(x, Term):
        return sub_term(x)
    return sub(x)


def bind(variables: Sequence[str], values: Sequence[Term]) -> dict[Term, Term]:
    if len(variables) != len(values):
        raise LogicError(f"expected {len(variables)} terms, got {len(values)}")
    return {Var(v): t for v, t in zip(variables, values)}


# ---------------------------------------------------------------------------
# Signatures

@dataclass(frozen=True)
class Signature:
    predicates: Mapping[str, int] = field(default_factory=dict)
    functions: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for kind, table in (("predicate", self.predicates), ("function", self.functions)):
            for name, arity in table.items():
                if arity < 0:
                    raise SignatureError(f"{kind} {name} has negative arity")
        object.__setattr__(self, "predicates", dict(self.predicates))
        object.__setattr__(self, "functions", dict(self.functions))

    @property
    def constants(self) -> list[str]:
        return [f for f, n in self.functions.items() if n == 0]

    def extend(self, predicates: Mapping[str, int] | None = None,
               functions: Mapping[str, int] | None = None) -> "Signature":
        preds = dict(self.predicates)
        funcs = dict(self.functions)
        for table, extra in ((preds, predicates), (funcs, functions)):
            for name, arity in (extra or {}).items():
                if table.get(name, arity) != arity:
                    raise SignatureError(f"conflicting arity for {name}")
                table[name] = arity
        return Signature(preds, funcs)

    def merge(self, other: "Signature") -> "Signature":
        return self.extend(other.predicates, other.functions)

    def fresh(self, prefix: str, start: int = 1) -> Iterator[str]:
        taken = set(self.functions) | set(self.predicates)
        for i in itertools.count(start):
            name = f"{prefix}{i}"
            if name not in taken:
                yield name

    def check_term(self, t: Term) -> None:
        if isinstance(t, Var):
            return
        arity = self.functions.get(t.fn)
        if arity is None:
            raise SignatureError(f"unknown function symbol {t.fn}")
        if arity != len(t.args):
            raise SignatureError(f"{t.fn} expects {arity} arguments, got {len(t.args)}")
        for a in t.args:
            self.check_term(a)

    def check_formula(self, f: Formula) -> None:
        for a in atoms(f):
            arity = self.predicates.get(a.pred)
            if arity is None:
                raise SignatureError(f"unknown predicate {a.pred}")
            if arity != len(a.args):
                raise SignatureError(f"{a.pred} expects {arity} arguments, got {len(a.args)}")
            for t in a.args:
                self.check_term(t)

    @classmethod
    def of(cls, *items: Formula | Term) -> "Signature":
        """Collect the symbols used by formulas and terms (variables excluded)."""
        preds: dict[str, int] = {}
        funcs: dict[str, int] = {}

        def note(table, name, arity):
            if table.setdefault(name, arity) != arity:
                raise SignatureError(f"{name} used with arities {table[name]} and {arity}")

        def walk(t: Term):
            if isinstance(t, App):
                note(funcs, t.fn, len(t.args))
                for a in t.args:
                    walk(a)

        for x in items:
            if isinstance(x, Term):
                walk(x)
                continue
            for a in atoms(x):
                note(preds, a.pred, len(a.args))
                for t in a.args:
                    walk(t)
        return cls(preds, funcs)


# ---------------------------------------------------------------------------
# Prenex sentences

FORALL = "forall"
EXISTS = "exists"


@dataclass(frozen=True)
class PrenexSentence:
    prefix: tuple[tuple[str, str], ...]
    matrix: Formula

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple((q, v) for q, v in self.prefix))
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise LogicError("prefix variables must be distinct")
        for q, _ in self.prefix:
            if q not in (FORALL, EXISTS):
                raise LogicError(f"unknown quantifier {q}")
        unbound = [v for v in free_vars(self.matrix) if v not in names]
        if unbound:
            raise LogicError(f"unbound variable {unbound[0]}")

    @property
    def variables(self) -> list[str]:
        return [v for _, v in self.prefix]

    @property
    def is_universal(self) -> bool:
        return all(q == FORALL for q, _ in self.prefix)

    def __str__(self):
        return format_sentence(self)


def universal(variables: Sequence[str], matrix: Formula) -> PrenexSentence:
    return PrenexSentence(tuple((FORALL, v) for v in variables), matrix)


Sentences = Union[PrenexSentence, list[PrenexSentence]]


# ---------------------------------------------------------------------------
# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(map(str, f.args))})"
    if isinstance(f, Not):
        return "~" + _operand(f.arg, 5)
    if f is TRUE or (isinstance(f, And) and not f.args):
        return "true"
    if isinstance(f, Or) and not f.args:
        return "false"
    prec = _PREC[type(f)]
    if isinstance(f, _Nary):
        op = " & " if isinstance(f, And) else " | "
        return op.join(_operand(a, prec + 1) for a in f.args)
    op = " -> " if isinstance(f, Implies) else " <-> "
    # implication is right associative; iff chains to the left
    if isinstance(f, Implies):
        return _operand(f.left, prec + 1) + op + _operand(f.right, prec)
    return _operand(f.left, prec) + op + _operand(f.right, prec + 1)


def _operand(f: Formula, min_prec: int) -> str:
    text = format_formula(f)
    p = _PREC.get(type(f))
    if p is None or (isinstance(f, _Nary) and not f.args):
        return text
    if isinstance(f, _Nary) and len(f.args) == 1:
        return f"({text})"
    return text if p >= min_prec else f"({text})"


def format_sentence(s: PrenexSentence) -> str:
    head = "".join(f"{q} {v} . " for q, v in s.prefix)
    return head + format_formula(s.matrix)


def format_sentences(s: Sentences) -> str:
    if isinstance(s, PrenexSentence):
        return format_sentence(s)
    return "\n".join(format_sentence(x) for x in s)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op><->|->|;;|[~&|(),.=<])
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*(?:@prev\[[^\]\s]*\])?)
""", re.VERBOSE)

_KEYWORDS = {FORALL, EXISTS, "true", "false"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature | None, variables: Iterable[str] = (),
                 free_ok: bool = False):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.bound = set(variables)
        self.free_ok = free_ok

    # token helpers
    def peek(self, value: str | None = None) -> bool:
        kind, text, _ = self.tokens[self.i]
        if value is None:
            return kind != "eof"
        return text == value and kind != "eof"

    def take(self, value: str | None = None, kind: str | None = None) -> str:
        k, text, pos = self.tokens[self.i]
        if value is not None and text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)
        if kind is not None and k != kind:
            raise ParseError(f"expected {kind}, found {text or 'end of input'!r}", pos)
        self.i += 1
        return text

    @property
    def pos(self) -> int:
        return self.tokens[self.i][2]

    def done(self):
        if self.tokens[self.i][0] != "eof":
            raise ParseError(f"unexpected {self.tokens[self.i][1]!r}", self.pos)

    # grammar
    def sentence(self) -> PrenexSentence:
        prefix = []
        while self.peek(FORALL) or self.peek(EXISTS):
            q = self.take()
            start = self.pos
            v = self.take(kind="ident")
            if v in _KEYWORDS:
                raise ParseError(f"keyword {v!r} used as a variable", start)
            if v in self.bound:
                raise ParseError(f"variable {v} quantified twice", start)
            if self.sig is not None and v in self.sig.functions:
                raise ParseError(f"variable {v} shadows a function symbol", start)
            self.bound.add(v)
            prefix.append((q, v))
            if self.peek("."):
                self.take(".")
        matrix = self.formula()
        self.done()
        return PrenexSentence(tuple(prefix), matrix)

    def formula(self) -> Formula:
        left = self.imp()
        while self.peek("<->"):
            self.take()
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek("->"):
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek("|"):
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(parts)

    def conj(self) -> Formula:
        parts = [self.lit()]
        while self.peek("&"):
            self.take()
            parts.append(self.lit())
        return parts[0] if len(parts) == 1 else And(parts)

    def lit(self) -> Formula:
        if self.peek("~"):
            self.take()
            return Not(self.lit())
        if self.peek("("):
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if self.peek("true"):
            self.take()
            return TRUE
        if self.peek("false"):
            self.take()
            return FALSE
        return self.atom()

    def atom(self) -> Formula:
        start = self.pos
        name, args, bare = self.application()
        if self.peek("=") or self.peek("<"):
            op = self.take()
            left = self.make_term(name, args, bare, start)
            right = self.term()
            pred = "eq" if op == "=" else "lt"
            self.check_pred(pred, 2, start)
            return Atom(pred, (left, right))
        if bare and name in self.bound:
            raise ParseError(f"variable {name} used as a formula", start)
        self.check_pred(name, len(args), start)
        return Atom(name, args)

    def application(self) -> tuple[str, tuple[Term, ...], bool]:
        name = self.take(kind="ident")
        if name in _KEYWORDS:
            raise ParseError(f"unexpected keyword {name!r}", self.tokens[self.i - 1][2])
        if not self.peek("("):
            return name, (), True
        self.take("(")
        args = [self.term()]
        while self.peek(","):
            self.take()
            args.append(self.term())
        self.take(")")
        return name, tuple(args), False

    def term(self) -> Term:
        start = self.pos
        name, args, bare = self.application()
        return self.make_term(name, args, bare, start)

    def make_term(self, name, args, bare, start) -> Term:
        if bare:
            if name in self.bound:
                return Var(name)
            if self.sig is None:
                return App(name)
            if name in self.sig.functions:
                self.check_fn(name, 0, start)
                return App(name)
            if self.free_ok:
                return Var(name)
            raise ParseError(f"unbound variable {name}", start)
        self.check_fn(name, len(args), start)
        return App(name, args)

    def check_fn(self, name, arity, pos):
        if self.sig is None:
            return
        expected = self.sig.functions.get(name)
        if expected is None:
            raise ParseError(f"unknown function symbol {name}", pos)
        if expected != arity:
            raise ParseError(f"arity mismatch: {name} expects {expected} arguments, got {arity}", pos)

    def check_pred(self, name, arity, pos):
        if self.sig is None:
            return
        expected = self.sig.predicates.get(name)
        if expected is None:
            raise ParseError(f"unknown predicate {name}", pos)
        if expected != arity:
            raise ParseError(f"arity mismatch: {name} expects {expected} arguments, got {arity}", pos)


def _split_sentences(text: str) -> list[tuple[int, str]]:
    chunks = []
    offset = 0
    for line in text.splitlines(keepends=True):
        body = line.split("#", 1)[0]
        start = offset
        for part in body.split(";;"):
            if part.strip():
                chunks.append((start, part))
            start += len(part) + 2
        offset += len(line)
    return chunks


def parse_sentence(text: str, sig: Signature | None = None) -> Sentences:
    """Parse one prenex sentence, or a conjunction of them.

    Sentences are separated by newlines or ``;;``; ``#`` starts a comment.
    Without a signature, unbound bare identifiers are read as constants and
    the symbols' arities are inferred (and must be used consistently).
    """
    chunks = _split_sentences(text)
    if not chunks:
        raise ParseError("no sentence found", 0)
    out = []
    for offset, chunk in chunks:
        try:
            out.append(_Parser(chunk, sig).sentence())
        except ParseError as e:
            pos = None if e.position is None else e.position + offset
            raise ParseError(str(e).split(" (at offset")[0], pos) from None
        except LogicError as e:
            raise ParseError(str(e), offset) from None
    if sig is None:
        Signature.of(*(s.matrix for s in out))
    return out[0] if len(out) == 1 else out


def parse_formula(text: str, sig: Signature | None = None, variables: Iterable[str] = (),
                  free_ok: bool = False) -> Formula:
    """Parse an open formula whose variables are ``variables``."""
    p = _Parser(text, sig, variables, free_ok)
    f = p.formula()
    p.done()
    return f


def parse_term(text: str, sig: Signature | None = None, variables: Iterable[str] = (),
               free_ok: bool = True) -> Term:
    """Parse a term; with a signature, unknown bare identifiers become variables."""
    p = _Parser(text, sig, variables, free_ok)
    t = p.term()
    p.done()
    return t


def sentences_signature(s: Sentences) -> Signature:
    items = [s] if isinstance(s, PrenexSentence) else s
    return Signature.of(*(x.matrix for x in items))


# ---------------------------------------------------------------------------
# Skolemization

def skolemize(s: Sentences, sig: Signature | None = None) -> tuple[PrenexSentence, Signature]:
    """Replace existential variables by fresh Skolem functions.

    Each existential variable becomes ``sk<N>`` applied to the universal
    variables before it, with one counter per call. A conjunction is merged
    into a single universal sentence: same-named universal variables are
    shared, which is equivalent because the quantifiers distribute over the
    conjunction.
    """
    items = [s] if isinstance(s, PrenexSentence) else list(s)
    if sig is None:
        sig = Signature.of(*(x.matrix for x in items))
    else:
        for x in items:
            sig.check_formula(x.matrix)
    names = sig.fresh("sk")
    fresh: dict[str, int] = {}
    matrices = []
    variables: dict[str, None] = {}
    for x in items:
        universals: list[Term] = []
        mapping: dict[Term, Term] = {}
        for q, v in x.prefix:
            if q == FORALL:
                universals.append(Var(v))
                variables.setdefault(v)
            else:
                name = next(names)
                fresh[name] = len(universals)
                mapping[Var(v)] = App(name, tuple(universals))
        matrices.append(substitute(x.matrix, mapping))
    matrix = matrices[0] if len(matrices) == 1 else And(matrices)
    return universal(list(variables), matrix), sig.extend(functions=fresh)


# ---------------------------------------------------------------------------
# Herbrand universe

INJECTED_CONSTANT = "u0"


def herbrand_terms(sig: Signature, depth: int) -> list[Term]:
    """Ground terms of nesting depth at most ``depth``, ordered by depth then text."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    constants = sorted(sig.constants)
    if not constants:
        constants = [INJECTED_CONSTANT]
    level = sorted((App(c) for c in constants), key=str)
    result = list(level)
    functions = sorted((f, n) for f, n in sig.functions.items() if n > 0)
    for _ in range(depth):
        # a new term needs at least one argument from the previous level
        previous = set(level)
        new = [App(f, args)
               for f, n in functions
               for args in itertools.product(result, repeat=n)
               if any(a in previous for a in args)]
        new.sort(key=str)
        result.extend(new)
        level = new
        if not new:
            break
    return result
