"""Dimension terms: the interval expressions that parameterize cells.

Terms live in the free De Morgan algebra over a dimension context. Equality is
decided through a canonical minimal-antichain DNF in which a negated variable
is just another letter, so ``j \\/ ~j`` stays distinct from ``1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Mapping, Union

from .errors import CubeSyntaxError, TheoryViolation, UnboundVariable
from .lexer import TokenStream


class Endpoint(IntEnum):
    I0 = 0
    I1 = 1

    def neg(self) -> "Endpoint":
        return Endpoint(1 - self)


class Theory(IntEnum):
    """Contortion vocabularies, ordered by expressiveness."""

    CARTESIAN = 0
    DISJUNCTIVE = 1
    DEDEKIND = 2
    DEMORGAN = 3

    @classmethod
    def parse(cls, name: str) -> "Theory":
        try:
            return cls[name.strip().upper().replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown theory {name!r}") from None


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class DimCtx:
    """An ordered list of distinct variable names, or the inconsistent context."""

    names: tuple[str, ...] | None = ()

    def __post_init__(self):
        if self.names is not None and len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate dimension variable in {self.names}")

    @property
    def is_bot(self) -> bool:
        return self.names is None

    def __contains__(self, name: str) -> bool:
        return self.names is not None and name in self.names

    def __len__(self) -> int:
        return 0 if self.names is None else len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names or ())

    def extend(self, *names: str) -> "DimCtx":
        if self.names is None:
            return self
        return DimCtx(self.names + names)

    def remove(self, name: str) -> "DimCtx":
        if self.names is None:
            return self
        return DimCtx(tuple(n for n in self.names if n != name))

    def __str__(self) -> str:
        return "⊥" if self.names is None else "(" + ",".join(self.names) + ")"


BOT = DimCtx(None)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self):
        return show_dim(self)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "DimTerm"

    def __str__(self):
        return show_dim(self)


@dataclass(frozen=True)
class Join:
    left: "DimTerm"
    right: "DimTerm"

    def __str__(self):
        return show_dim(self)


@dataclass(frozen=True)
class Meet:
    left: "DimTerm"
    right: "DimTerm"

    def __str__(self):
        return show_dim(self)


DimTerm = Union[Const, Var, Neg, Join, Meet]

ZERO = Const(0)
ONE = Const(1)


def const(e: int) -> Const:
    return ONE if e else ZERO


def join_all(terms: Iterable[DimTerm]) -> DimTerm:
    acc = None
    for t in terms:
        acc = t if acc is None else Join(acc, t)
    return ZERO if acc is None else acc


def meet_all(terms: Iterable[DimTerm]) -> DimTerm:
    acc = None
    for t in terms:
        acc = t if acc is None else Meet(acc, t)
    return ONE if acc is None else acc


def is_atomic(t: DimTerm) -> bool:
    return isinstance(t, (Const, Var))


def free_vars(t: DimTerm) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, Neg):
        return free_vars(t.arg)
    return free_vars(t.left) | free_vars(t.right)


def classify(t: DimTerm) -> Theory:
    """Least theory whose grammar generates ``t`` as written."""
    if isinstance(t, (Const, Var)):
        return Theory.CARTESIAN
    if isinstance(t, Neg):
        return Theory.DEMORGAN
    floor = Theory.DISJUNCTIVE if isinstance(t, Join) else Theory.DEDEKIND
    return max(floor, classify(t.left), classify(t.right))


def eval_dim(t: DimTerm, asg: Mapping[str, int]) -> Endpoint:
    if isinstance(t, Const):
        return Endpoint(t.value)
    if isinstance(t, Var):
        try:
            return Endpoint(asg[t.name])
        except KeyError:
            raise UnboundVariable(t.name) from None
    if isinstance(t, Neg):
        return eval_dim(t.arg, asg).neg()
    a, b = eval_dim(t.left, asg), eval_dim(t.right, asg)
    return Endpoint(max(a, b) if isinstance(t, Join) else min(a, b))


# ---------------------------------------------------------------------------
# Contortions


@dataclass(frozen=True)
class Contortion:
    """Assigns a term over ``target`` to each variable of ``source``.

    A contortion into the inconsistent context carries no terms at all.
    """

    source: tuple[str, ...]
    target: DimCtx
    terms: tuple[DimTerm, ...]

    def __post_init__(self):
        if not self.target.is_bot and len(self.source) != len(self.terms):
            raise ValueError("a contortion needs one term per source variable")

    @classmethod
    def of(cls, source, target, terms) -> "Contortion":
        if not isinstance(target, DimCtx):
            target = DimCtx(tuple(target))
        return cls(tuple(source), target, tuple(terms))

    @classmethod
    def identity(cls, names) -> "Contortion":
        names = tuple(names)
        return cls(names, DimCtx(names), tuple(Var(n) for n in names))

    @classmethod
    def to_bot(cls, source) -> "Contortion":
        return cls(tuple(source), BOT, ())

    def as_dict(self) -> dict[str, DimTerm]:
        return dict(zip(self.source, self.terms))

    def is_substitution(self) -> bool:
        return all(is_atomic(t) for t in self.terms)

    def compose(self, after: "Contortion") -> "Contortion":
        """The contortion ``t ↦ subst(subst(t, self), after)``."""
        if self.target.is_bot or after.target.is_bot:
            return Contortion.to_bot(self.source)
        return Contortion(self.source, after.target, tuple(subst_dim(t, after) for t in self.terms))

    def __str__(self):
        if self.target.is_bot:
            return "(⊥)"
        return "(" + ", ".join(f"{v}↦{show_dim(t)}" for v, t in zip(self.source, self.terms)) + ")"


def subst_dim(t: DimTerm, sub: Union[Contortion, Mapping[str, DimTerm]]) -> DimTerm:
    """Simultaneous substitution.

    With a Contortion every free variable must be covered; with a plain
    mapping, unmapped variables are left alone.
    """
    if isinstance(sub, Contortion):
        strict, mapping = True, sub.as_dict()
    else:
        strict, mapping = False, sub
    return _subst(t, mapping, strict)


def _subst(t, mapping, strict):
    if isinstance(t, Var):
        if t.name in mapping:
            return mapping[t.name]
        if strict:
            raise UnboundVariable(t.name)
        return t
    if isinstance(t, Const):
        return t
    if isinstance(t, Neg):
        return Neg(_subst(t.arg, mapping, strict))
    return type(t)(_subst(t.left, mapping, strict), _subst(t.right, mapping, strict))


# ---------------------------------------------------------------------------
# Normal forms

Literal = tuple[str, bool]  # (variable, positive?)


def _lit_key(lit: Literal):
    return (lit[0], not lit[1])


@dataclass(frozen=True)
class MonotoneNF:
    """Minimal antichain of clauses; a clause is a sorted tuple of literals."""

    clauses: tuple[tuple[Literal, ...], ...]

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[Literal]]) -> "MonotoneNF":
        sets = {frozenset(c) for c in clauses}
        minimal = [c for c in sets if not any(o < c for o in sets)]
        ordered = [tuple(sorted(c, key=_lit_key)) for c in minimal]
        ordered.sort(key=lambda c: [_lit_key(lit) for lit in c])
        return cls(tuple(ordered))

    @property
    def is_zero(self) -> bool:
        return not self.clauses

    @property
    def is_one(self) -> bool:
        return self.clauses == ((),)

    def constant(self) -> int | None:
        if self.is_zero:
            return 0
        if self.is_one:
            return 1
        return None

    def has_negation(self) -> bool:
        return any(not pos for c in self.clauses for _, pos in c)

    def evaluate(self, asg: Mapping[str, int]) -> Endpoint:
        for clause in self.clauses:
            ok = True
            for name, pos in clause:
                try:
                    v = asg[name]
                except KeyError:
                    raise UnboundVariable(name) from None
                if v != pos:
                    ok = False
                    break
            if ok:
                return Endpoint.I1
        return Endpoint.I0

    def to_term(self) -> DimTerm:
        return nf_to_term(self)

    def __str__(self):
        return show_dim(self.to_term())


NF_ZERO = MonotoneNF(())
NF_ONE = MonotoneNF(((),))


def _dnf(t: DimTerm, positive: bool) -> frozenset:
    if isinstance(t, Const):
        return frozenset([frozenset()]) if (t.value == 1) == positive else frozenset()
    if isinstance(t, Var):
        return frozenset([frozenset([(t.name, positive)])])
    if isinstance(t, Neg):
        return _dnf(t.arg, not positive)
    left, right = _dnf(t.left, positive), _dnf(t.right, positive)
    if isinstance(t, Join) == positive:
        return _absorb(left | right)
    return _absorb(frozenset(a | b for a in left for b in right))


def _absorb(clauses: frozenset) -> frozenset:
    if len(clauses) < 2:
        return clauses
    return frozenset(c for c in clauses if not any(o < c for o in clauses))


@lru_cache(maxsize=1 << 16)
def _normalize_cached(t: DimTerm) -> MonotoneNF:
    return MonotoneNF.from_clauses(_dnf(t, True))


def normalize_dim(t: DimTerm, theory: Theory = Theory.DEMORGAN) -> MonotoneNF:
    """Canonical normal form; raises TheoryViolation if ``t`` is outside ``theory``."""
    if classify(t) > theory:
        raise TheoryViolation(f"{show_dim(t)} is not a {theory.name.lower()} term")
    return _normalize_cached(t)


@lru_cache(maxsize=1 << 16)
def nf_to_term(nf: MonotoneNF) -> DimTerm:
    if nf.is_zero:
        return ZERO
    parts = []
    for clause in nf.clauses:
        lits = [Var(n) if pos else Neg(Var(n)) for n, pos in clause]
        parts.append(meet_all(lits))
    return join_all(parts)


def canon_dim(t: DimTerm) -> DimTerm:
    """The canonical term with the same normal form."""
    if isinstance(t, (Const, Var)):
        return t
    return nf_to_term(_normalize_cached(t))


def dim_equal(t1: DimTerm, t2: DimTerm, ctx: DimCtx | None = None) -> bool:
    if ctx is not None and ctx.is_bot:
        return True
    return _normalize_cached(t1) == _normalize_cached(t2)


# ---------------------------------------------------------------------------
# Enumeration


@lru_cache(maxsize=None)
def monotone_tables(n: int) -> tuple[int, ...]:
    """All monotone truth tables on ``n`` variables, in increasing numeric order.

    A point is an ``n``-bit integer whose most significant bit is variable 0;
    bit ``x`` of a table is the value at point ``x``.
    """
    if n == 0:
        return (0, 1)
    smaller = monotone_tables(n - 1)
    half = 1 << (n - 1)
    out = [f0 | (f1 << half) for f1 in smaller for f0 in smaller if f0 & ~f1 == 0]
    return tuple(sorted(out))


@lru_cache(maxsize=1 << 18)
def table_to_nf(table: int, letters: tuple[Literal, ...]) -> MonotoneNF:
    n = len(letters)
    size = 1 << n
    trues = [x for x in range(size) if table >> x & 1]
    minimal = [x for x in trues if not any(y != x and y & x == y for y in trues)]
    clauses = []
    for x in minimal:
        clauses.append([letters[v] for v in range(n) if x >> (n - 1 - v) & 1])
    return MonotoneNF.from_clauses(clauses)


def doubled_letters(names: Iterable[str]) -> tuple[Literal, ...]:
    """Letters x0, ~x0, x1, ~x1, ... of the doubled alphabet."""
    out = []
    for n in names:
        out.extend([(n, True), (n, False)])
    return tuple(out)


def enumerate_nfs(names: Iterable[str], theory: Theory) -> Iterator[MonotoneNF]:
    """Every normal form over ``names`` admitted by ``theory``, constant 0 first."""
    names = tuple(names)
    if theory == Theory.CARTESIAN:
        yield NF_ZERO
        yield NF_ONE
        for n in names:
            yield MonotoneNF((((n, True),),))
    elif theory == Theory.DISJUNCTIVE:
        yield NF_ZERO
        for mask in range(1, 1 << len(names)):
            chosen = [names[v] for v in range(len(names)) if mask >> (len(names) - 1 - v) & 1]
            yield MonotoneNF.from_clauses([[(n, True)] for n in chosen])
        yield NF_ONE
    else:
        letters = doubled_letters(names) if theory == Theory.DEMORGAN else tuple((n, True) for n in names)
        for table in monotone_tables(len(letters)):
            yield table_to_nf(table, letters)


def count_contortions(cell_dims: int, goal_dims: int, theory: Theory) -> int:
    if theory == Theory.CARTESIAN:
        per = goal_dims + 2
    elif theory == Theory.DISJUNCTIVE:
        per = (1 << goal_dims) + 1
    else:
        width = 2 * goal_dims if theory == Theory.DEMORGAN else goal_dims
        per = dedekind(width)
    return per**cell_dims


_KNOWN_DEDEKIND = (2, 3, 6, 20, 168, 7581, 7828354, 2414682040998, 56130437228687557907788)


def dedekind(n: int) -> int:
    if n < len(_KNOWN_DEDEKIND):
        return _KNOWN_DEDEKIND[n]
    raise ValueError(f"D({n}) is not tabulated")


def all_assignments(names: tuple[str, ...]) -> Iterator[dict[str, int]]:
    for bits in product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


# ---------------------------------------------------------------------------
# Concrete syntax


def show_dim(t: DimTerm) -> str:
    return _show(t, 0)


def _show(t, prec):
    # prec: 0 = join level, 1 = meet level, 2 = atom level
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Neg):
        return "~" + _show(t.arg, 2)
    if isinstance(t, Join):
        s = f"{_show(t.left, 0)} \\/ {_show(t.right, 1)}"
        return f"({s})" if prec > 0 else s
    s = f"{_show(t.left, 1)} /\\ {_show(t.right, 2)}"
    return f"({s})" if prec > 1 else s


def parse_dim(text: str) -> DimTerm:
    ts = TokenStream.of(text)
    t = parse_dim_tokens(ts)
    ts.expect_eof()
    return t


def parse_dim_tokens(ts: TokenStream) -> DimTerm:
    left = _parse_meet(ts)
    while ts.accept("\\/"):
        left = Join(left, _parse_meet(ts))
    return left


def _parse_meet(ts):
    left = _parse_unary(ts)
    while ts.accept("/\\"):
        left = Meet(left, _parse_unary(ts))
    return left


def _parse_unary(ts):
    if ts.accept("~"):
        return Neg(_parse_unary(ts))
    tok = ts.peek()
    if ts.accept("("):
        t = parse_dim_tokens(ts)
        ts.expect(")")
        return t
    if tok.kind == "num" and tok.text in ("0", "1"):
        ts.next()
        return const(int(tok.text))
    if tok.kind == "ident":
        ts.next()
        return Var(tok.text)
    raise CubeSyntaxError(tok.line, tok.col, "a dimension term", tok.text or "end of input")
