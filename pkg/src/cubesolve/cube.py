"""Cells, boundaries and the independent checker.

A cell is either a contorted context variable ``a(r1, ..., rn)`` or a Kan
filler ``fill e->r k { faces } (base)``. Face constraints are atomic: a
variable of the ambient context fixed to an endpoint. Equality of cells is
structural after normalization, modulo renaming of filler binders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .dims import (
    BOT,
    Const,
    Contortion,
    DimCtx,
    DimTerm,
    Var,
    canon_dim,
    const,
    free_vars,
    is_atomic,
    parse_dim_tokens,
    show_dim,
    subst_dim,
)
from .errors import (
    BoundaryMismatch,
    CubeError,
    IllFormedFill,
    IllScopedFace,
    IncompatibleFaces,
    ScopeError,
)
from .lexer import TokenStream

NORMALIZE_STEP_CAP = 10_000


@dataclass(frozen=True)
class App:
    name: str
    args: tuple[DimTerm, ...] = ()

    def __str__(self):
        return show_cell(self)


@dataclass(frozen=True)
class Face:
    """Constraint ``r = end`` together with the cell sitting there."""

    r: DimTerm
    end: int
    body: "Cell"

    @property
    def var(self) -> str:
        return self.r.name

    def __str__(self):
        return f"{show_dim(self.r)}={self.end} -> {show_cell(self.body)}"


@dataclass(frozen=True)
class Fill:
    """Filler from endpoint ``src`` to atomic ``tgt`` along the bound variable."""

    src: int
    tgt: DimTerm
    bound: str
    faces: tuple[Face, ...]
    base: "Cell"

    def __str__(self):
        return show_cell(self)


Cell = Union[App, Fill]
Boundary = tuple[Face, ...]


def face(var: str, end: int, body: Cell) -> Face:
    return Face(Var(var), end, body)


def boundary(*triples) -> Boundary:
    """Build a boundary from ``(var, end, body)`` triples."""
    return tuple(face(v, e, b) for v, e, b in triples)


# ---------------------------------------------------------------------------
# Variables and substitution


def cell_free_vars(t: Cell) -> frozenset[str]:
    if isinstance(t, App):
        out = frozenset()
        for a in t.args:
            out |= free_vars(a)
        return out
    out = free_vars(t.tgt) | cell_free_vars(t.base)
    for f in t.faces:
        out |= free_vars(f.r) | (cell_free_vars(f.body) - {t.bound})
    return out


def fresh_name(avoid: Iterable[str], stem: str = "_k") -> str:
    avoid = set(avoid)
    n = 0
    while f"{stem}{n}" in avoid:
        n += 1
    return f"{stem}{n}"


def bound_names(t: Cell) -> set[str]:
    if isinstance(t, App):
        return set()
    out = {t.bound} | bound_names(t.base)
    for f in t.faces:
        out |= bound_names(f.body)
    return out


def subst_cell(t: Cell, sub: Union[Contortion, Mapping[str, DimTerm]]) -> Cell:
    """Capture-avoiding simultaneous substitution into a cell.

    Arbitrary terms may be substituted into contorted cells; the variables
    that a filler uses as its target or in face constraints must stay atomic.
    """
    mapping = sub.as_dict() if isinstance(sub, Contortion) else dict(sub)
    if not mapping:
        return t
    return _subst_cell(t, mapping)


def _subst_cell(t, mapping):
    if isinstance(t, App):
        return App(t.name, tuple(subst_dim(a, mapping) for a in t.args))
    mapping = {k: v for k, v in mapping.items() if k != t.bound}
    tgt = _atomic(subst_dim(t.tgt, mapping), t)
    base = _subst_cell(t.base, mapping)
    bound = t.bound
    range_vars = set()
    for v in mapping.values():
        range_vars |= free_vars(v)
    if bound in range_vars:
        avoid = range_vars | set(mapping) | cell_free_vars(t)
        bound = fresh_name(avoid)
        mapping = {**mapping, t.bound: Var(bound)}
    faces = tuple(
        Face(_atomic(subst_dim(f.r, mapping), t), f.end, _subst_cell(f.body, mapping)) for f in t.faces
    )
    return Fill(t.src, tgt, bound, faces, base)


def _atomic(r, t):
    r = canon_dim(r)
    if not is_atomic(r):
        raise CubeError(f"substitution makes a filler constraint non-atomic: {show_dim(r)} in {show_cell(t)}")
    return r


def apply_subst_cell(t: Cell, psi: Union[Contortion, Mapping[str, DimTerm]]) -> Cell:
    return subst_cell(t, psi)


def restrict(t: Cell, var: str, end: int) -> Cell:
    return subst_cell(t, {var: const(end)})


def rename_bound(t: Cell, names: Iterator[str], avoid: set[str]) -> Cell:
    """Rename every filler binder using the supplied name stream."""
    if isinstance(t, App):
        return t
    base = rename_bound(t.base, names, avoid)
    new = next(names)
    while new in avoid:
        new = next(names)
    faces = []
    for f in t.faces:
        body = subst_cell(f.body, {t.bound: Var(new)}) if new != t.bound else f.body
        faces.append(Face(f.r, f.end, rename_bound(body, names, avoid | {new})))
    return Fill(t.src, t.tgt, new, tuple(faces), base)


def freshen_binders(t: Cell, avoid: Iterable[str]) -> Cell:
    """Rename every filler binder that clashes with ``avoid`` or an enclosing binder."""
    avoid = set(avoid)
    if isinstance(t, App):
        return t
    base = freshen_binders(t.base, avoid)
    bound = t.bound
    faces = t.faces
    if bound in avoid:
        bound = fresh_name(avoid | cell_free_vars(t) | bound_names(t), "k")
        faces = tuple(Face(f.r, f.end, subst_cell(f.body, {t.bound: Var(bound)})) for f in faces)
    inner = avoid | {bound}
    faces = tuple(Face(f.r, f.end, freshen_binders(f.body, inner - {f.var})) for f in faces)
    return Fill(t.src, t.tgt, bound, faces, base)


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class CellDecl:
    name: str
    dims: tuple[str, ...]
    faces: Boundary = ()

    @property
    def dim(self) -> int:
        return len(self.dims)

    def index(self, var: str) -> int:
        return self.dims.index(var)


class CellContext:
    """An ordered list of cell declarations with memoized normalization."""

    def __init__(self, decls: Iterable[CellDecl] = ()):
        self.entries: dict[str, CellDecl] = {}
        self._norm: dict[Cell, Cell] = {}
        self._canon: dict[Cell, Cell] = {}
        self._faces: dict = {}
        self._reach: dict[str, frozenset[str]] = {}
        for d in decls:
            self.declare(d.name, d.dims, d.faces)

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __getitem__(self, name: str) -> CellDecl:
        try:
            return self.entries[name]
        except KeyError:
            raise ScopeError(f"unknown cell {name!r}") from None

    def __iter__(self):
        return iter(self.entries.values())

    def __len__(self):
        return len(self.entries)

    def names(self) -> list[str]:
        return list(self.entries)

    def declare(self, name: str, dims: Sequence[str], faces: Iterable[Face] = ()) -> CellDecl:
        if name in self.entries:
            raise ScopeError(f"cell {name!r} declared twice")
        dims = tuple(dims)
        DimCtx(dims)
        faces = resolve_constant_faces(dims, tuple(faces))
        for f in faces:
            if _contains_fill(f.body):
                raise ScopeError(f"declared boundary of {name} must use contorted cells only")
        wf_boundary(self, DimCtx(dims), faces)
        decl = CellDecl(name, dims, faces)
        self.entries[name] = decl
        return decl

    def reachable(self, name: str) -> frozenset[str]:
        """``name`` plus every cell occurring in its iterated boundary.

        Any face of a contortion of ``name`` normalizes to one of these.
        """
        hit = self._reach.get(name)
        if hit is None:
            out = {name}
            for f in self[name].faces:
                for sub in _app_names(f.body):
                    out |= self.reachable(sub)
            hit = self._reach[name] = frozenset(out)
        return hit

    # -- normalization -----------------------------------------------------

    def normalize(self, t: Cell) -> Cell:
        budget = [NORMALIZE_STEP_CAP]
        return self._normalize(t, budget)

    def _normalize(self, t, budget):
        hit = self._norm.get(t)
        if hit is not None:
            return hit
        budget[0] -= 1
        if budget[0] < 0:
            raise CubeError("normalization step cap exceeded")
        if isinstance(t, App):
            out = self._normalize_app(t, budget)
        else:
            out = self._normalize_fill(t, budget)
        self._norm[t] = out
        return out

    def _normalize_app(self, t, budget):
        decl = self[t.name]
        if len(t.args) != decl.dim:
            raise ScopeError(f"{t.name} expects {decl.dim} arguments, got {len(t.args)}")
        args = tuple(canon_dim(a) for a in t.args)
        for f in decl.faces:
            idx = decl.index(f.var)
            a = args[idx]
            if isinstance(a, Const) and a.value == f.end:
                sub = {d: args[k] for k, d in enumerate(decl.dims) if k != idx}
                return self._normalize(subst_cell(f.body, sub), budget)
        return App(t.name, args)

    def _normalize_fill(self, t, budget):
        tgt = canon_dim(t.tgt)
        if isinstance(tgt, Const) and tgt.value == t.src:
            return self._normalize(t.base, budget)
        faces = []
        for f in t.faces:
            r = canon_dim(f.r)
            if isinstance(r, Const):
                if r.value == f.end:
                    return self._normalize(subst_cell(f.body, {t.bound: tgt}), budget)
                continue
            faces.append(Face(r, f.end, self._normalize(f.body, budget)))
        return Fill(t.src, tgt, t.bound, tuple(faces), self._normalize(t.base, budget))

    def canon(self, t: Cell) -> Cell:
        """Normal form with binders renamed canonically and faces sorted."""
        hit = self._canon.get(t)
        if hit is None:
            hit = _alpha(self.normalize(t), 0)
            self._canon[t] = hit
        return hit

    def equal(self, t1: Cell, t2: Cell) -> bool:
        return t1 == t2 or self.canon(t1) == self.canon(t2)

    def restrict(self, t: Cell, var: str, end: int) -> Cell:
        key = (t, var, end)
        hit = self._faces.get(key)
        if hit is None:
            hit = self.normalize(restrict(t, var, end))
            self._faces[key] = hit
        return hit


def _app_names(t: Cell) -> set[str]:
    if isinstance(t, App):
        return {t.name}
    out = _app_names(t.base)
    for f in t.faces:
        out |= _app_names(f.body)
    return out


def _alpha(t: Cell, depth: int) -> Cell:
    if isinstance(t, App):
        return t
    name = f"#{depth}"
    faces = {}
    for f in t.faces:
        body = _alpha(subst_cell(f.body, {t.bound: Var(name)}), depth + 1)
        key = (f.var, f.end)
        if key not in faces:
            faces[key] = Face(f.r, f.end, body)
    ordered = tuple(faces[k] for k in sorted(faces))
    return Fill(t.src, t.tgt, name, ordered, _alpha(t.base, depth + 1))


def _contains_fill(t: Cell) -> bool:
    return isinstance(t, Fill)


def head(t: Cell) -> str | None:
    return t.name if isinstance(t, App) else None


# ---------------------------------------------------------------------------
# Constrained contexts and boundaries


def constrain_context(psi: DimCtx, r: DimTerm, e: int) -> tuple[DimCtx, Contortion]:
    """Fix atomic ``r`` to ``e``; returns the new context and the substitution."""
    if psi.is_bot:
        return BOT, Contortion.to_bot(tuple(psi))
    if isinstance(r, Var):
        if r.name not in psi:
            raise ScopeError(f"{r.name} is not in {psi}")
        rest = psi.remove(r.name)
        terms = tuple(const(e) if n == r.name else Var(n) for n in psi)
        return rest, Contortion(tuple(psi), rest, terms)
    if not is_atomic(r):
        raise CubeError(f"constraint {show_dim(r)} is not atomic")
    if r.value != e:
        return BOT, Contortion.to_bot(tuple(psi))
    return psi, Contortion.identity(tuple(psi))


def resolve_constant_faces(dims: Sequence[str], faces: Boundary) -> Boundary:
    """Drop faces under false constant constraints; spread true ones over every side."""
    out = []
    for f in faces:
        if isinstance(f.r, Var):
            out.append(f)
        elif f.r.value == f.end:
            for v in dims:
                for e in (0, 1):
                    out.append(face(v, e, restrict(f.body, v, e)))
    return tuple(out)


def _check_scope(ctx: CellContext, names: frozenset[str], t: Cell, path: str):
    if isinstance(t, App):
        decl = ctx[t.name]
        if len(t.args) != decl.dim:
            raise ScopeError(f"{t.name} expects {decl.dim} arguments, got {len(t.args)}")
        extra = cell_free_vars(t) - names
        if extra:
            raise IllScopedFace(f"{show_cell(t)} mentions {sorted(extra)} outside {sorted(names)}")
        return
    if t.bound in names:
        raise IllFormedFill(path, f"binder {t.bound} is not fresh")
    if not is_atomic(t.tgt) or (isinstance(t.tgt, Var) and t.tgt.name not in names):
        raise IllFormedFill(path, f"target {show_dim(t.tgt)} is not an atomic term in scope")
    for n, f in enumerate(t.faces):
        if not isinstance(f.r, Var) or f.var not in names:
            raise IllFormedFill(path, f"constraint {show_dim(f.r)} is not a variable in scope")
        _check_scope(ctx, (names - {f.var}) | {t.bound}, f.body, f"{path}/face{n}")
    _check_scope(ctx, names, t.base, f"{path}/base")


def wf_boundary(ctx: CellContext, psi: DimCtx, phi: Boundary, aux: Sequence[str] = ()) -> None:
    """Raise unless every face is in scope and overlapping faces agree."""
    if psi.is_bot:
        return
    if len(aux) > 1:
        raise CubeError("boundaries vary in at most one auxiliary variable")
    names = frozenset(psi) | frozenset(aux)
    for f in phi:
        if not isinstance(f.r, Var) or f.var not in psi:
            raise IllScopedFace(f"constraint {show_dim(f.r)} is not a variable of {psi}")
        _check_scope(ctx, names - {f.var}, f.body, f"face {f.var}={f.end}")
        _check_fills(ctx, f.body, f"face {f.var}={f.end}")
    _check_compatible(ctx, phi)


def _check_compatible(ctx: CellContext, faces: Sequence[Face], path: str | None = None):
    for a in range(len(faces)):
        for b in range(a + 1, len(faces)):
            f, g = faces[a], faces[b]
            if f.var == g.var:
                if f.end != g.end or ctx.equal(f.body, g.body):
                    continue
                left, right = ctx.normalize(f.body), ctx.normalize(g.body)
            else:
                left = ctx.restrict(f.body, g.var, g.end)
                right = ctx.restrict(g.body, f.var, f.end)
                if ctx.equal(left, right):
                    continue
            detail = f"{show_cell(left)} vs {show_cell(right)}"
            if path is not None:
                raise IllFormedFill(path, f"faces {f.var}={f.end} and {g.var}={g.end} disagree: {detail}")
            raise IncompatibleFaces(f"{f.var}={f.end}", f"{g.var}={g.end}", detail)


def _check_fills(ctx: CellContext, t: Cell, path: str):
    """Recursively verify that every filler's walls and base fit together."""
    if isinstance(t, App):
        return
    _check_fills(ctx, t.base, f"{path}/base")
    for n, f in enumerate(t.faces):
        _check_fills(ctx, f.body, f"{path}/face{n}")
    _check_compatible(ctx, t.faces, path)
    for f in t.faces:
        want = ctx.restrict(f.body, t.bound, t.src)
        got = ctx.restrict(t.base, f.var, f.end)
        if not ctx.equal(want, got):
            raise IllFormedFill(
                path, f"base at {f.var}={f.end} is {show_cell(got)} but the wall starts at {show_cell(want)}"
            )


def wf_cell(ctx: CellContext, psi: DimCtx, t: Cell) -> None:
    _check_scope(ctx, frozenset(psi), t, "")
    _check_fills(ctx, t, "")


def cell_boundary(ctx: CellContext, psi: DimCtx, t: Cell) -> Boundary:
    """Every face of ``t`` over ``psi``, computed by substitution and normalization."""
    out = []
    for v in psi:
        for e in (0, 1):
            out.append(face(v, e, ctx.restrict(t, v, e)))
    return tuple(out)


def check(ctx: CellContext, psi: DimCtx, t: Cell, phi: Boundary) -> None:
    """Raise unless ``t`` is a well-formed cell with every specified face of ``phi``."""
    if psi.is_bot:
        return
    wf_cell(ctx, psi, t)
    for f in phi:
        actual = ctx.restrict(t, f.var, f.end)
        if not ctx.equal(actual, f.body):
            raise BoundaryMismatch(f"{f.var}={f.end}", show_cell(ctx.normalize(f.body)), show_cell(actual))


def checks(ctx: CellContext, psi: DimCtx, t: Cell, phi: Boundary) -> bool:
    try:
        check(ctx, psi, t, phi)
    except CubeError:
        return False
    return True


def face_map(phi: Boundary) -> dict[tuple[str, int], Cell]:
    out = {}
    for f in phi:
        out.setdefault((f.var, f.end), f.body)
    return out


# ---------------------------------------------------------------------------
# Concrete syntax


def show_cell(t: Cell) -> str:
    if isinstance(t, App):
        if not t.args:
            return t.name
        return f"{t.name}(" + ", ".join(show_dim(a) for a in t.args) + ")"
    faces = " ; ".join(str(f) for f in t.faces)
    inner = f"{{ {faces} }}" if faces else "{ }"
    return f"fill {t.src}->{show_dim(t.tgt)} {t.bound} {inner} ({show_cell(t.base)})"


def show_boundary(phi: Boundary) -> str:
    return "{ " + " ; ".join(str(f) for f in phi) + " }" if phi else "{ }"


def parse_cell(text: str) -> Cell:
    ts = TokenStream.of(text)
    t = parse_cell_tokens(ts)
    ts.expect_eof()
    return t


def parse_cell_tokens(ts: TokenStream) -> Cell:
    if ts.accept("("):
        t = parse_cell_tokens(ts)
        ts.expect(")")
        return t
    name = ts.expect_ident().text
    if name == "fill":
        src = _parse_endpoint(ts)
        ts.expect("->")
        tgt = _parse_atomic(ts)
        bound = ts.expect_ident().text
        faces = parse_faces(ts)
        ts.expect("(")
        base = parse_cell_tokens(ts)
        ts.expect(")")
        return Fill(src, tgt, bound, faces, base)
    args = ()
    if ts.accept("("):
        items = []
        if not ts.at(")"):
            items.append(parse_dim_tokens(ts))
            while ts.accept(","):
                items.append(parse_dim_tokens(ts))
        ts.expect(")")
        args = tuple(items)
    return App(name, args)


def parse_faces(ts: TokenStream) -> Boundary:
    ts.expect("{")
    faces = []
    while not ts.at("}"):
        r = _parse_atomic(ts)
        ts.expect("=")
        e = _parse_endpoint(ts)
        ts.expect("->")
        faces.append(Face(r, e, parse_cell_tokens(ts)))
        if not ts.accept(";"):
            break
    ts.expect("}")
    return tuple(faces)


def _parse_endpoint(ts: TokenStream) -> int:
    tok = ts.peek()
    if tok.kind == "num" and tok.text in ("0", "1"):
        ts.next()
        return int(tok.text)
    ts.fail("an endpoint 0 or 1")


def _parse_atomic(ts: TokenStream) -> DimTerm:
    tok = ts.peek()
    if tok.kind == "num" and tok.text in ("0", "1"):
        ts.next()
        return const(int(tok.text))
    if tok.kind == "ident":
        ts.next()
        return Var(tok.text)
    ts.fail("a variable or endpoint")
