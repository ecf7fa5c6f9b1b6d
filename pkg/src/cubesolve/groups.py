"""Finitely presented groups as cell contexts.

A convenient presentation has an inverse-closed generator set and relations
``(a, b, c)`` meaning ``ab = c``. Generators become loops at a single point,
relations become squares, words become loops built by Kan filling, and
derivations of word equalities become squares between those loops.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .cube import App, Cell, CellContext, Face, Fill, boundary, check, freshen_binders, subst_cell
from .dims import Const, DimCtx, Var, join_all
from .errors import CubeSyntaxError, InvalidDerivation, RelationNotInPresentation

Letter = tuple[str, int]
Word = tuple[Letter, ...]
Relation = tuple[str, str, str]

IDENTITY = "e"
POINT = "star"


def inverse_name(g: str) -> str:
    return g[:-1] if g.endswith("'") else g + "'"


def word(*letters: Union[str, Letter]) -> Word:
    """Build a word from ``"a"`` / ``"a^-1"`` strings or ``(name, exponent)`` pairs."""
    out = []
    for x in letters:
        if isinstance(x, tuple):
            out.append((x[0], int(x[1])))
        elif x.endswith("^-1") or x.endswith("⁻¹"):
            out.append((x.split("^")[0].rstrip("⁻¹"), -1))
        else:
            out.append((x, 1))
    return tuple(out)


def show_word(w: Word) -> str:
    if not w:
        return "1"
    return " ".join(g if e == 1 else f"{g}^-1" for g, e in w)


@dataclass
class Presentation:
    generators: list[str]
    relations: list[Relation] = field(default_factory=list)
    relators: list[Word] = field(default_factory=list)

    def is_convenient(self) -> bool:
        gens = set(self.generators)
        closed = all(inverse_name(g) in gens for g in gens)
        return closed and not self.relators

    def check_alphabet(self, w: Word):
        for g, e in w:
            if g not in self.generators or e not in (1, -1):
                raise InvalidDerivation(f"letter {g}^{e} is not over the generators")


# ---------------------------------------------------------------------------
# Presentation text format


_ITEM = re.compile(r"\s*(generators|relations|relators)\s*:(.*)")


def parse_presentation(text: str) -> Presentation:
    """Parse ``generators: a, b; relators: a b a^-1 b^-1; relations: a b c``.

    Sections are separated by ``;`` or newlines; list entries by commas.
    ``--`` starts a comment.
    """
    gens: list[str] = []
    rels: list[Relation] = []
    words: list[Word] = []
    lines = [ln.split("--")[0] for ln in text.splitlines()]
    chunks = [c for ln in lines for c in ln.split(";")]
    for n, chunk in enumerate(chunks):
        if not chunk.strip():
            continue
        m = _ITEM.match(chunk)
        if not m:
            raise CubeSyntaxError(n + 1, 1, "generators:, relations: or relators:", chunk.strip())
        kind, body = m.group(1), m.group(2)
        entries = [e.split() for e in body.split(",") if e.strip()]
        if kind == "generators":
            for e in entries:
                if len(e) != 1:
                    raise CubeSyntaxError(n + 1, 1, "one generator per entry", " ".join(e))
                gens.append(e[0])
        elif kind == "relations":
            for e in entries:
                if len(e) != 3:
                    raise CubeSyntaxError(n + 1, 1, "three generators per relation", " ".join(e))
                rels.append((e[0], e[1], e[2]))
        else:
            for e in entries:
                words.append(word(*e))
    p = Presentation(gens, rels, words)
    known = set(gens)
    for r in rels:
        for g in r:
            if g not in known:
                raise CubeSyntaxError(0, 0, "a declared generator", g)
    for w in words:
        for g, _ in w:
            if g not in known:
                raise CubeSyntaxError(0, 0, "a declared generator", g)
    return p


def show_presentation(p: Presentation) -> str:
    parts = ["generators: " + ", ".join(p.generators)]
    if p.relations:
        parts.append("relations: " + ", ".join(" ".join(r) for r in p.relations))
    if p.relators:
        parts.append("relators: " + ", ".join(show_word(w) for w in p.relators))
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Convenient form


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    n = 0
    while name in taken or inverse_name(name) in taken:
        n += 1
        name = f"{base}{n}"
    taken.add(name)
    return name


def convenientize(p: Presentation) -> Presentation:
    """An equivalent convenient presentation.

    Every relator ``y0^a0 ... y(L-1)^a(L-1)`` gets generators for its proper
    nonempty prefixes, and each step from one prefix to the next becomes a
    triple. An identity generator stands for the empty prefix and for the
    whole relator. Finally every generator gets a formal inverse.
    """
    gens = list(p.generators)
    rels = list(p.relations)
    taken = set(gens)
    ident = None
    for g in gens:
        if (g, g, g) in rels:
            ident = g
            break

    def identity():
        nonlocal ident
        if ident is None:
            ident = _fresh(IDENTITY, taken)
            gens.append(ident)
            rels.append((ident, ident, ident))
        return ident

    for n, w in enumerate(p.relators):
        if not w:
            continue
        e = identity()
        zs = [e] + [_fresh(f"z{n}_{j}", taken) for j in range(1, len(w))] + [e]
        gens.extend(zs[1:-1])
        for j, (y, a) in enumerate(w):
            if a == 1:
                rels.append((zs[j], y, zs[j + 1]))
            else:
                rels.append((zs[j + 1], y, zs[j]))
    missing = [g for g in gens if inverse_name(g) not in taken and inverse_name(g) not in gens]
    if missing:
        e = identity()
        for g in list(gens):
            if inverse_name(g) in gens:
                continue
            inv = inverse_name(g)
            gens.append(inv)
            taken.add(inv)
            rels.append((g, inv, e))
            rels.append((inv, g, e))
    return Presentation(gens, rels, [])


# ---------------------------------------------------------------------------
# Cells


def _point() -> App:
    return App(POINT, ())


def _loop(a: str, r) -> App:
    return App(a, (Var(r) if isinstance(r, str) else r,))


def square_name(rel: Relation) -> str:
    return "s_" + "_".join(rel)


def encode_context(p: Presentation) -> CellContext:
    """A point, one loop per generator and one square per relation."""
    if not p.is_convenient():
        raise ValueError("encode_context needs a convenient presentation")
    ctx = CellContext()
    star = _point()
    ctx.declare(POINT, [])
    for g in p.generators:
        ctx.declare(g, ["i"], boundary(("i", 0, star), ("i", 1, star)))
    for rel in p.relations:
        a, b, c = rel
        ctx.declare(
            square_name(rel),
            ["j", "k"],
            boundary(
                ("k", 0, _loop(a, "j")),
                ("k", 1, _loop(c, "j")),
                ("j", 0, star),
                ("j", 1, _loop(b, "k")),
            ),
        )
    return ctx


def _fresh_dim(avoid: Iterable[str], stem: str) -> str:
    avoid = set(avoid)
    if stem not in avoid:
        return stem
    n = 0
    while f"{stem}{n}" in avoid:
        n += 1
    return f"{stem}{n}"


def _names_of(t: Cell) -> set[str]:
    from .cube import bound_names, cell_free_vars

    return set(cell_free_vars(t)) | bound_names(t)


def append_square(t: Cell, a: str, e: int, i: str = "i", ell: str = "l") -> Fill:
    """``fill (1-e)->ell j {i=0 -> star ; i=1 -> a(j)} (t)``.

    Its ``ell = 1-e`` face is ``t`` and its ``ell = e`` face is ``t`` followed by ``a``
    (forwards for ``e = 1``, backwards for ``e = 0``).
    """
    j = _fresh_dim(_names_of(t) | {i, ell}, "j")
    walls = (Face(Var(i), 0, _point()), Face(Var(i), 1, _loop(a, j)))
    return Fill(1 - e, Var(ell), j, walls, t)


def append_loop(t: Cell, a: str, e: int, i: str = "i") -> Fill:
    j = _fresh_dim(_names_of(t) | {i}, "j")
    walls = (Face(Var(i), 0, _point()), Face(Var(i), 1, _loop(a, j)))
    return Fill(1 - e, Const(e), j, walls, t)


def append_cell(t: Cell, a: str, e: int, i: str = "i", ell: str = "l") -> tuple[Fill, Fill]:
    """The filler square and the extended loop."""
    return append_square(t, a, e, i, ell), append_loop(t, a, e, i)


def encode_word(w: Word, i: str = "i") -> Cell:
    t: Cell = _point()
    for g, e in w:
        t = append_loop(t, g, 1 if e == 1 else 0, i)
    return t


def cancel_cell(t: Cell, a: str, e: int, i: str = "i", k: str = "k") -> Fill:
    """Square from ``(t . a^e) . a^-e`` at ``k=0`` to ``t`` at ``k=1``."""
    ell = _fresh_dim(_names_of(t) | {i, k}, "l")
    te = append_loop(t, a, e, i)
    walls = (
        Face(Var(i), 0, _point()),
        Face(Var(i), 1, _loop(a, ell)),
        Face(Var(k), 0, append_square(te, a, 1 - e, i, ell)),
        Face(Var(k), 1, append_square(t, a, e, i, ell)),
    )
    return freshen_binders(Fill(e, Const(1 - e), ell, walls, te), {i, k})


def pseudo_or(t: Cell, i: str, j: str = "j", k: str = "k", u: Cell | None = None, ctx: CellContext | None = None,
              connection: bool = False) -> Cell:
    """A square with faces ``j=0 -> t[i:=k]``, ``k=0 -> t[i:=j]`` and ``v`` on the far sides.

    The default uses only Kan filling; ``connection=True`` returns ``t[i := j or k]``
    instead, which needs at least the disjunctive theory.
    """
    if connection:
        return subst_cell(t, {i: join_all([Var(j), Var(k)])})
    if u is None:
        u = subst_cell(t, {i: Const(0)})
        if ctx is not None:
            u = ctx.normalize(u)
    avoid = _names_of(t) | {i, j, k}
    ell = _fresh_dim(avoid, "l")
    m = _fresh_dim(avoid | {ell}, "m")

    def at(r):
        return subst_cell(t, {i: Var(r) if isinstance(r, str) else r})

    def side(r):
        walls = (Face(Var(ell), 0, u), Face(Var(ell), 1, at(m)))
        return Fill(1, Var(r), m, walls, at(ell))

    walls = (
        Face(Var(j), 0, side(k)),
        Face(Var(k), 0, side(j)),
        Face(Var(j), 1, at(ell)),
        Face(Var(k), 1, at(ell)),
    )
    return freshen_binders(Fill(0, Const(1), ell, walls, u), {j, k})


def rewrite_cell(p: Presentation, t: Cell, rel: Relation, i: str = "i", k: str = "k") -> Fill:
    """Square from ``(t . a) . b`` at ``k=0`` to ``t . c`` at ``k=1`` for a relation ``ab = c``."""
    if tuple(rel) not in {tuple(r) for r in p.relations}:
        raise RelationNotInPresentation(f"{' '.join(rel)} is not a relation of the presentation")
    a, b, c = rel
    j = _fresh_dim(_names_of(t) | {i, k}, "j")
    ta = append_loop(t, a, 1, i)
    inner = Fill(
        0,
        Const(1),
        j,
        (
            Face(Var(i), 0, _point()),
            Face(Var(i), 1, App(square_name(rel), (Var(j), Var(k)))),
            Face(Var(k), 0, append_square(t, a, 1, i, j)),
            Face(Var(k), 1, append_square(t, c, 1, i, j)),
        ),
        t,
    )
    corner = pseudo_or(_loop(b, i), i, j, k, u=_point())
    out = Fill(
        0,
        Const(1),
        j,
        (
            Face(Var(i), 0, _point()),
            Face(Var(i), 1, corner),
            Face(Var(k), 0, append_square(ta, b, 1, i, j)),
            Face(Var(k), 1, append_loop(t, c, 1, i)),
        ),
        inner,
    )
    return freshen_binders(out, {i, k})


# ---------------------------------------------------------------------------
# Derivations


@dataclass(frozen=True)
class Rewrite:
    prefix: Word
    relation: Relation


@dataclass(frozen=True)
class Cancel:
    prefix: Word
    letter: str
    forward: bool = True


CancelRight = Cancel


@dataclass(frozen=True)
class Snoc:
    sub: "Derivation"
    letter: str
    exponent: int = 1


@dataclass(frozen=True)
class Refl:
    w: Word


@dataclass(frozen=True)
class Sym:
    sub: "Derivation"


@dataclass(frozen=True)
class Trans:
    first: "Derivation"
    second: "Derivation"


Derivation = Union[Rewrite, Cancel, Snoc, Refl, Sym, Trans]


def conclusion(d: Derivation) -> tuple[Word, Word]:
    """The pair of words a derivation relates, checking it along the way."""
    if isinstance(d, Rewrite):
        a, b, c = d.relation
        return d.prefix + ((a, 1), (b, 1)), d.prefix + ((c, 1),)
    if isinstance(d, Cancel):
        e = 1 if d.forward else -1
        return d.prefix + ((d.letter, e), (d.letter, -e)), d.prefix
    if isinstance(d, Snoc):
        if d.exponent not in (1, -1):
            raise InvalidDerivation("exponent must be 1 or -1")
        v, w = conclusion(d.sub)
        return v + ((d.letter, d.exponent),), w + ((d.letter, d.exponent),)
    if isinstance(d, Refl):
        return d.w, d.w
    if isinstance(d, Sym):
        v, w = conclusion(d.sub)
        return w, v
    if isinstance(d, Trans):
        u, v1 = conclusion(d.first)
        v2, w = conclusion(d.second)
        if v1 != v2:
            raise InvalidDerivation(f"cannot chain {show_word(v1)} with {show_word(v2)}")
        return u, w
    raise InvalidDerivation(f"unknown derivation step {d!r}")


def _check_derivation(p: Presentation, d: Derivation):
    if isinstance(d, Rewrite):
        if tuple(d.relation) not in {tuple(r) for r in p.relations}:
            raise RelationNotInPresentation(" ".join(d.relation))
        p.check_alphabet(d.prefix)
    elif isinstance(d, Cancel):
        p.check_alphabet(d.prefix + ((d.letter, 1),))
    elif isinstance(d, Snoc):
        p.check_alphabet(((d.letter, 1),))
        _check_derivation(p, d.sub)
    elif isinstance(d, Refl):
        p.check_alphabet(d.w)
    elif isinstance(d, Sym):
        _check_derivation(p, d.sub)
    elif isinstance(d, Trans):
        _check_derivation(p, d.first)
        _check_derivation(p, d.second)


def _build(p: Presentation, d: Derivation, i: str, k: str) -> Cell:
    if isinstance(d, Rewrite):
        return rewrite_cell(p, encode_word(d.prefix, i), d.relation, i, k)
    if isinstance(d, Cancel):
        return cancel_cell(encode_word(d.prefix, i), d.letter, 1 if d.forward else 0, i, k)
    if isinstance(d, Snoc):
        return append_loop(_build(p, d.sub, i, k), d.letter, 1 if d.exponent == 1 else 0, i)
    if isinstance(d, Refl):
        return encode_word(d.w, i)
    if isinstance(d, Sym):
        v, _ = conclusion(d.sub)
        t = _build(p, d.sub, i, k)
        j = _fresh_dim(_names_of(t) | {i, k}, "j")
        ev = encode_word(v, i)
        walls = (
            Face(Var(i), 0, _point()),
            Face(Var(i), 1, _point()),
            Face(Var(k), 0, subst_cell(t, {k: Var(j)})),
            Face(Var(k), 1, ev),
        )
        return Fill(0, Const(1), j, walls, ev)
    if isinstance(d, Trans):
        u, _ = conclusion(d.first)
        t1 = _build(p, d.first, i, k)
        t2 = _build(p, d.second, i, k)
        j = _fresh_dim(_names_of(t1) | _names_of(t2) | {i, k}, "j")
        walls = (
            Face(Var(i), 0, _point()),
            Face(Var(i), 1, _point()),
            Face(Var(k), 0, encode_word(u, i)),
            Face(Var(k), 1, subst_cell(t2, {k: Var(j)})),
        )
        return Fill(0, Const(1), j, walls, t1)
    raise InvalidDerivation(f"unknown derivation step {d!r}")


def word_eq_boundary(v: Word, w: Word, i: str = "i", k: str = "k"):
    star = _point()
    return boundary((i, 0, star), (i, 1, star), (k, 0, encode_word(v, i)), (k, 1, encode_word(w, i)))


def word_eq_cell(p: Presentation, v: Word, w: Word, d: Derivation, ctx: CellContext | None = None,
                 i: str = "i", k: str = "k") -> Cell:
    """A square from the loop of ``v`` (at ``k=0``) to the loop of ``w`` (at ``k=1``)."""
    _check_derivation(p, d)
    got = conclusion(d)
    if got != (tuple(v), tuple(w)):
        raise InvalidDerivation(
            f"derivation proves {show_word(got[0])} = {show_word(got[1])}, not {show_word(v)} = {show_word(w)}"
        )
    t = freshen_binders(_build(p, d, i, k), {i, k})
    ctx = ctx or encode_context(p)
    check(ctx, DimCtx([i, k]), t, word_eq_boundary(v, w, i, k))
    return t


# ---------------------------------------------------------------------------
# Random material for tests and problem generation


def random_word(p: Presentation, length: int, rng: random.Random) -> Word:
    return tuple((rng.choice(p.generators), rng.choice((1, -1))) for _ in range(length))


def random_derivation(p: Presentation, rng: random.Random, size: int = 3) -> Derivation:
    """A random derivation tree with roughly ``size`` interesting steps."""

    def leaf():
        pre = random_word(p, rng.randint(0, 2), rng)
        kind = rng.randrange(3) if p.relations else rng.randrange(1, 3)
        if kind == 0:
            return Rewrite(pre, rng.choice(p.relations))
        if kind == 1:
            return Cancel(pre, rng.choice(p.generators), rng.random() < 0.5)
        return Refl(pre)

    def grow(n):
        if n <= 0:
            return leaf()
        choice = rng.randrange(3)
        if choice == 0:
            return Snoc(grow(n - 1), rng.choice(p.generators), rng.choice((1, -1)))
        if choice == 1:
            return Sym(grow(n - 1))
        first = grow(n - 1)
        _, v = conclusion(first)
        second = rng.choice([Refl(v), Sym(first)])
        return Trans(first, second)

    return grow(size)


def random_problems(p: Presentation, count: int = 5, seed: int = 0, size: int = 2):
    """``(name, v, w, derivation)`` for ``count`` random derivations."""
    rng = random.Random(seed)
    out = []
    for n in range(count):
        d = random_derivation(p, rng, size)
        v, w = conclusion(d)
        out.append((f"eq{n}", v, w, d))
    return out


def emit_cube(p: Presentation, problems, timeout: float = 10.0, theory: str = "dedekind", depth: int = 3) -> str:
    """A `.cube` file with the encoded context and one goal per ``(name, v, w, derivation)``.

    When a derivation is given its square becomes the inline solution, so
    ``check`` can verify it whether or not the solver finds one.
    """
    from .cubefile import CubeFile, Goal, print_cube

    ctx = encode_context(p)
    goals = []
    for name, v, w, d in problems:
        t = word_eq_cell(p, v, w, d, ctx) if d is not None else None
        config = {"theory": theory, "depth": depth, "timeout": timeout}
        goals.append(Goal(name, ("i", "k"), word_eq_boundary(v, w), config, t))
    lines = [f"-- {show_presentation(p).strip().replace(chr(10), '; ')}"]
    lines += [f"-- {name}: {show_word(v)} = {show_word(w)}" for name, v, w, _ in problems]
    return "\n".join(lines) + "\n" + print_cube(CubeFile(ctx, goals))
