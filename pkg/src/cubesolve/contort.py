"""Finding a single contorted cell with a prescribed boundary.

Dedekind and De Morgan contortions are searched through potential poset maps
that get narrowed face by face; cartesian and disjunctive ones are few enough
to list outright. ``brute_force_contort`` scans every contortion and exists
only as a reference for testing.
"""

from __future__ import annotations

import itertools
import logging
import time
from functools import lru_cache
from typing import Iterator, Sequence

from .cube import App, Boundary, Cell, CellContext, CellDecl, Fill, checks
from .dims import Contortion, DimCtx, MonotoneNF, Theory, count_contortions, enumerate_nfs
from .errors import InstanceTooLarge, Timeout, TheoryViolation, Unsolvable
from .posetmaps import (
    PPM,
    PosetMap,
    Counter,
    formula_to_pm,
    letters_for,
    pm_to_nfs,
    restrict_ppm,
    subposet,
    total_ppm,
    unfold_ppm,
    update_many,
)

log = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10**6


class Budget:
    """Wall-clock deadline plus search counters shared across a solve."""

    def __init__(self, timeout: float | None = None):
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self.counter = Counter()
        self.csp_branches = 0
        self.max_depth = 0

    def tick(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise Timeout("time budget exhausted")

    @property
    def unfolded(self) -> int:
        return self.counter.unfolded


def _nf_terms(nfs: Sequence[MonotoneNF]):
    return tuple(nf.to_term() for nf in nfs)


@lru_cache(maxsize=1 << 18)
def _pm_cell(name: str, sigma: PosetMap, names: tuple[str, ...], mode: Theory) -> App:
    return App(name, _nf_terms(pm_to_nfs(sigma, names, mode)))


class PPMDomain:
    """All Dedekind or De Morgan contortions of one cell that survive so far."""

    def __init__(self, decl: CellDecl, names: tuple[str, ...], mode: Theory, ppm: PPM | None = None):
        self.decl = decl
        self.names = names
        self.mode = mode
        width = 2 * len(names) if mode == Theory.DEMORGAN else len(names)
        self.ppm = ppm if ppm is not None else total_ppm(width, decl.dim)

    def _fixed(self, var: str, end: int) -> dict[int, int]:
        i = self.names.index(var)
        if self.mode == Theory.DEMORGAN:
            return {2 * i: end, 2 * i + 1: 1 - end}
        return {i: end}

    def restrict_face(self, ctx: CellContext, var: str, end: int, body: Cell, budget: Budget) -> "PPMDomain":
        points = subposet(self.ppm.m, self._fixed(var, end))
        rest = tuple(n for n in self.names if n != var)
        target = ctx.normalize(body)
        if isinstance(target, Fill):
            raise Unsolvable("a contorted cell is never a filler")
        if target.name not in ctx.reachable(self.decl.name):
            raise Unsolvable(f"{target.name} is not on the boundary of {self.decl.name}")
        restrictions = {}
        if target.name == self.decl.name:
            try:
                pm = formula_to_pm(target.args, rest, self.mode)
            except TheoryViolation:
                raise Unsolvable("face needs operators outside the theory") from None
            for y, x in enumerate(points):
                restrictions[x] = 1 << pm.values[y]
        else:
            keep = [0] * len(points)
            found = False
            for sigma in unfold_ppm(restrict_ppm(self.ppm, points), budget.counter):
                budget.tick()
                cand = _pm_cell(self.decl.name, sigma, rest, self.mode)
                if ctx.equal(cand, target):
                    found = True
                    for y, v in enumerate(sigma.values):
                        keep[y] |= 1 << v
            if not found:
                raise Unsolvable("no contortion matches this face")
            for y, x in enumerate(points):
                restrictions[x] = keep[y]
        return PPMDomain(self.decl, self.names, self.mode, update_many(self.ppm, restrictions))

    def candidates(self, budget: Budget) -> Iterator[App]:
        for sigma in unfold_ppm(self.ppm, budget.counter):
            budget.tick()
            yield _pm_cell(self.decl.name, sigma, self.names, self.mode)

    def size_bound(self) -> int:
        return self.ppm.size_bound()


class ListDomain:
    """Explicit list of cartesian or disjunctive contortions of one cell."""

    def __init__(self, decl: CellDecl, names: tuple[str, ...], theory: Theory, items=None):
        self.decl = decl
        self.names = names
        self.theory = theory
        if items is None:
            per = [nf.to_term() for nf in enumerate_nfs(names, theory)]
            items = [tuple(c) for c in itertools.product(per, repeat=decl.dim)]
        self.items = items

    def restrict_face(self, ctx: CellContext, var: str, end: int, body: Cell, budget: Budget) -> "ListDomain":
        target = ctx.normalize(body)
        if isinstance(target, Fill):
            raise Unsolvable("a contorted cell is never a filler")
        if target.name not in ctx.reachable(self.decl.name):
            raise Unsolvable(f"{target.name} is not on the boundary of {self.decl.name}")
        kept = []
        for args in self.items:
            budget.tick()
            if ctx.equal(ctx.restrict(App(self.decl.name, args), var, end), target):
                kept.append(args)
        if not kept:
            raise Unsolvable("no contortion matches this face")
        return ListDomain(self.decl, self.names, self.theory, kept)

    def candidates(self, budget: Budget) -> Iterator[App]:
        for args in self.items:
            budget.tick()
            yield App(self.decl.name, args)

    def size_bound(self) -> int:
        return len(self.items)


def make_domain(decl: CellDecl, names: Sequence[str], theory: Theory):
    names = tuple(names)
    if theory in (Theory.DEDEKIND, Theory.DEMORGAN):
        return PPMDomain(decl, names, theory)
    return ListDomain(decl, names, theory)


def face_dimension(ctx: CellContext, body: Cell) -> int:
    t = ctx.normalize(body)
    if isinstance(t, App):
        return ctx[t.name].dim
    return 1 << 30


def order_faces(ctx: CellContext, phi: Boundary) -> list:
    """Faces by descending dimension of their contorted cell; ties keep source order."""
    return sorted(phi, key=lambda f: -face_dimension(ctx, f.body))


def contort_candidates(
    ctx: CellContext,
    psi: DimCtx,
    phi: Boundary,
    name: str,
    theory: Theory,
    budget: Budget | None = None,
) -> Iterator[App]:
    """Stream every contortion of ``name`` solving ``phi``, most constrained first."""
    budget = budget or Budget()
    decl = ctx[name]
    if theory == Theory.DEMORGAN and len(psi) >= 3:
        log.warning("De Morgan contortions into %d dimensions are expensive; consider dedekind", len(psi))
    dom = make_domain(decl, tuple(psi), theory)
    try:
        for f in order_faces(ctx, phi):
            dom = dom.restrict_face(ctx, f.var, f.end, f.body, budget)
    except Unsolvable:
        return
    for cand in dom.candidates(budget):
        if checks(ctx, psi, cand, phi):
            yield cand


def contort(
    ctx: CellContext,
    psi: DimCtx,
    phi: Boundary,
    name: str,
    theory: Theory,
    budget: Budget | None = None,
) -> Contortion:
    """A contortion ``c`` with ``name(c)`` having boundary ``phi``, else Unsolvable."""
    for cand in contort_candidates(ctx, psi, phi, name, theory, budget):
        return Contortion(ctx[name].dims, psi, cand.args)
    raise Unsolvable(f"no {theory.name.lower()} contortion of {name} fits")


def first_domain_after(ctx, psi, phi, name, theory, nfaces, budget=None):
    """The search domain after the first ``nfaces`` face restrictions (for inspection)."""
    budget = budget or Budget()
    dom = make_domain(ctx[name], tuple(psi), theory)
    for f in order_faces(ctx, phi)[:nfaces]:
        dom = dom.restrict_face(ctx, f.var, f.end, f.body, budget)
    return dom


def brute_force_contort(
    ctx: CellContext,
    psi: DimCtx,
    phi: Boundary,
    name: str,
    theory: Theory,
    limit: int = BRUTE_FORCE_LIMIT,
) -> Contortion:
    """Exhaustive scan over all contortions in enumeration order."""
    decl = ctx[name]
    total = count_contortions(decl.dim, len(psi), theory)
    if total > limit:
        raise InstanceTooLarge(f"{total} contortions exceed the limit of {limit}")
    per = [nf.to_term() for nf in enumerate_nfs(tuple(psi), theory)]
    for args in itertools.product(per, repeat=decl.dim):
        if checks(ctx, psi, App(name, args), phi):
            return Contortion(decl.dims, psi, args)
    raise Unsolvable(f"no {theory.name.lower()} contortion of {name} fits")


def solve_by_contortion(
    ctx: CellContext, psi: DimCtx, phi: Boundary, theory: Theory, budget: Budget | None = None
) -> App | None:
    """Try every context cell in declaration order."""
    budget = budget or Budget()
    for decl in ctx:
        for cand in contort_candidates(ctx, psi, phi, decl.name, theory, budget):
            return cand
    return None


__all__ = [
    "Budget",
    "PPMDomain",
    "ListDomain",
    "make_domain",
    "contort",
    "contort_candidates",
    "brute_force_contort",
    "solve_by_contortion",
    "first_domain_after",
    "order_faces",
    "letters_for",
]
