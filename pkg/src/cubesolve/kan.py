"""Kan filling: natural fillers, the side-assignment CSP, open boxes, and the
iterative-deepening solver on top of them.

Every search procedure here is a generator, so callers can backtrack into
later solutions lazily. Anything handed back from ``solve`` has been
re-verified with the independent checker.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .contort import Budget, contort_candidates, make_domain
from .cube import (
    App,
    Boundary,
    Cell,
    CellContext,
    Face,
    Fill,
    freshen_binders,
    check,
    face,
    face_map,
)
from .dims import Const, DimCtx, Theory, Var
from .errors import CubeError, DepthExhausted, Timeout, Unsolvable

log = logging.getLogger(__name__)

BACK = (None, 0)
DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_DEPTH = 4
BINDER_NAMES = ("k", "l", "m", "n", "o", "q", "r", "s", "t", "u", "v", "w")


def side_label(side) -> str:
    return "back" if side == BACK else f"{side[0]}={side[1]}"


def fresh_dim(avoid: Sequence[str]) -> str:
    avoid = set(avoid)
    for n in BINDER_NAMES:
        if n not in avoid:
            return n
    i = 0
    while f"k{i}" in avoid:
        i += 1
    return f"k{i}"


def default_theory(psi: DimCtx) -> Theory:
    return Theory.DEDEKIND if len(psi) >= 3 else Theory.DEMORGAN


@dataclass
class SolveResult:
    cell: Cell
    method: str
    depth: int
    unfolded: int
    csp_branches: int
    seconds: float = 0.0
    open_sides: tuple = ()


@dataclass
class BoxSides:
    """Geometry of the open box over ``psi`` with filling direction ``k``."""

    psi: tuple[str, ...]
    k: str
    sides: list = field(init=False)

    def __post_init__(self):
        self.sides = [(v, e) for v in self.psi for e in (0, 1)] + [BACK]

    def names(self, side) -> tuple[str, ...]:
        if side == BACK:
            return self.psi
        return tuple(n for n in self.psi if n != side[0]) + (self.k,)

    def shared(self, s, t):
        """How ``s`` and ``t`` meet, as ``(var_s, end_s, var_t, end_t)``; None if they do not."""
        if s == t:
            return None
        if s == BACK and t == BACK:
            return None
        if s == BACK:
            return (t[0], t[1], self.k, 0)
        if t == BACK:
            return (self.k, 0, s[0], s[1])
        if s[0] == t[0]:
            return None
        return (t[0], t[1], s[0], s[1])

    def sort_key(self, side):
        if side == BACK:
            return (1, 0, 0)
        return (0, self.psi.index(side[0]), side[1])


class KanSearch:
    """One solving session: context, theory, budget and memo tables."""

    def __init__(self, ctx: CellContext, theory: Theory, budget: Budget | None = None, use_contort: bool = True):
        self.ctx = ctx
        self.theory = theory
        self.budget = budget or Budget()
        self.use_contort = use_contort
        self.failed: dict = {}
        self.open_used: dict = {}
        self.solved_at: dict = {}
        self._restrict_cache: dict = {}

    # -- helpers ------------------------------------------------------------

    def _key(self, names, phi):
        faces = tuple(sorted((f.var, f.end, self.ctx.canon(f.body)) for f in phi))
        return (tuple(names), faces)

    def _restrict_dom(self, dom, var, end, body):
        key = None
        if hasattr(dom, "ppm"):
            key = (dom.decl.name, dom.names, dom.ppm, var, end, self.ctx.canon(body))
            hit = self._restrict_cache.get(key)
            if hit is not None:
                if hit is Unsolvable:
                    raise Unsolvable("cached")
                return hit
        try:
            out = dom.restrict_face(self.ctx, var, end, body, self.budget)
        except Unsolvable:
            if key is not None:
                self._restrict_cache[key] = Unsolvable
            raise
        if key is not None:
            self._restrict_cache[key] = out
        return out

    # -- natural fillers ------------------------------------------------------

    def kan_fill(self, psi: DimCtx, phi: Boundary) -> Iterator[Fill]:
        """Fillers ``fill e->j`` read off a goal face ``j=e'`` that is ``fill e->e'``."""
        names = tuple(psi)
        seen = set()
        for f in phi:
            t = self.ctx.normalize(f.body)
            if not isinstance(t, Fill) or not isinstance(t.tgt, Const) or t.tgt.value != f.end:
                continue
            if t.src == f.end:
                continue
            t = freshen_binders(t, names)
            cand = Fill(t.src, Var(f.var), t.bound, t.faces, t.base)
            key = self.ctx.canon(cand)
            if key in seen:
                continue
            seen.add(key)
            self.budget.tick()
            try:
                check(self.ctx, psi, cand, phi)
            except CubeError:
                continue
            yield cand

    # -- the side CSP ----------------------------------------------------------

    def kan_csp(self, psi: DimCtx, phi: Boundary, ope, k: str, fixed=None, depth: int = 0) -> Iterator[dict]:
        """Assignments of contorted cells to every side not in ``ope``.

        Sides in ``fixed`` are pre-assigned cells (natural fillers, say); they
        constrain their neighbours and are returned as part of each solution.
        With ``depth`` positive, every open side must stay solvable at that
        depth given the faces assigned so far.
        """
        box = BoxSides(tuple(psi), k)
        fmap = {key: self.ctx.normalize(b) for key, b in face_map(phi).items()}
        fixed = dict(fixed or {})
        variables = [s for s in box.sides if s not in ope and s not in fixed]
        domains = {}
        for s in variables:
            entries = []
            for decl in self.ctx:
                dom = make_domain(decl, box.names(s), self.theory)
                if s != BACK and s in fmap:
                    try:
                        dom = self._restrict_dom(dom, k, 1, fmap[s])
                    except Unsolvable:
                        continue
                entries.append(dom)
            if not entries:
                return
            domains[s] = entries
        assigned = {}
        for s, cell in fixed.items():
            if not self._consistent(box, fmap, s, cell, assigned):
                return
            domains = self._propagate(box, s, cell, domains, assigned)
            if domains is None:
                return
            assigned[s] = cell
        ope = frozenset(ope)
        if depth > 0:
            for o in ope:
                if not self._open_viable(box, fmap, assigned, o, depth):
                    return
        yield from self._csp_search(box, fmap, variables, assigned, domains, ope, depth)

    def _consistent(self, box, fmap, s, cand, assigned) -> bool:
        ctx = self.ctx
        if s != BACK and s in fmap:
            if not ctx.equal(ctx.restrict(cand, box.k, 1), fmap[s]):
                return False
        for t, other in assigned.items():
            sh = box.shared(s, t)
            if sh is None:
                continue
            var_s, end_s, var_t, end_t = sh
            if not ctx.equal(ctx.restrict(cand, var_s, end_s), ctx.restrict(other, var_t, end_t)):
                return False
        return True

    def _propagate(self, box, s, cand, domains, assigned):
        out = dict(domains)
        for t in domains:
            if t in assigned or t == s:
                continue
            sh = box.shared(s, t)
            if sh is None:
                continue
            var_s, end_s, var_t, end_t = sh
            body = self.ctx.restrict(cand, var_s, end_s)
            kept = []
            for dom in domains[t]:
                try:
                    kept.append(self._restrict_dom(dom, var_t, end_t, body))
                except Unsolvable:
                    pass
            if not kept:
                return None
            out[t] = kept
        return out

    def _open_viable(self, box, fmap, assigned, o, depth) -> bool:
        bdy = self.induced_boundary(box, fmap, assigned, o)
        return self.solvable(DimCtx(box.names(o)), bdy, depth)

    def _open_ok(self, box, fmap, assigned, s, ope, depth) -> bool:
        if depth <= 0:
            return True
        for o in sorted(ope, key=box.sort_key):
            if box.shared(s, o) is not None and not self._open_viable(box, fmap, assigned, o, depth):
                return False
        return True

    def solvable(self, psi: DimCtx, phi: Boundary, d: int) -> bool:
        """Whether the side boundary has some solution within depth ``d`` (memoized)."""
        key = self._key(psi, phi)
        best = self.solved_at.get(key)
        if best is not None and best <= d:
            return True
        for _ in self.kan_solver(psi, phi, d, contort_first=True):
            self.solved_at[key] = d if best is None else min(best, d)
            return True
        return False

    def _csp_search(self, box, fmap, variables, assigned, domains, ope=frozenset(), depth=0) -> Iterator[dict]:
        free = [s for s in variables if s not in assigned]
        if not free:
            yield dict(assigned)
            return
        s = min(free, key=lambda v: (sum(d.size_bound() for d in domains[v]), variables.index(v)))
        seen = set()
        for dom in domains[s]:
            for cand in dom.candidates(self.budget):
                key = self.ctx.canon(cand)
                if key in seen:
                    continue
                seen.add(key)
                self.budget.csp_branches += 1
                if not self._consistent(box, fmap, s, cand, assigned):
                    continue
                nxt = self._propagate(box, s, cand, domains, assigned)
                if nxt is None:
                    continue
                assigned[s] = cand
                if self._open_ok(box, fmap, assigned, s, ope, depth):
                    yield from self._csp_search(box, fmap, variables, assigned, nxt, ope, depth)
                del assigned[s]

    # -- open boxes -------------------------------------------------------------

    def open_sets(self, box: BoxSides, forced, d: int, exclude=frozenset()):
        """Candidate open-side sets: by size, then lexicographic, back side last.

        Sides in ``forced`` are always open. At depth ``d`` at most ``d - 1``
        further sides are opened, so wider boxes are only explored as the
        depth grows.
        """
        if d <= 1:
            if not forced:
                yield frozenset()
            return
        order = [s for s in sorted(box.sides, key=box.sort_key) if s not in forced and s not in exclude]
        for extra in range(min(d - 1, len(order)) + 1):
            for combo in itertools.combinations(order, extra):
                yield forced | frozenset(combo)

    def induced_boundary(self, box: BoxSides, phi_map, assign, s) -> Boundary:
        ctx = self.ctx
        out = []
        if s == BACK:
            for t in box.sides:
                if t != BACK and t in assign:
                    out.append(face(t[0], t[1], ctx.restrict(assign[t], box.k, 0)))
            return tuple(out)
        i, e = s
        for t in sorted(assign, key=box.sort_key):
            if t == BACK:
                continue
            if t[0] != i:
                out.append(face(t[0], t[1], ctx.restrict(assign[t], i, e)))
        if BACK in assign:
            out.append(face(box.k, 0, ctx.restrict(assign[BACK], i, e)))
        if s in phi_map:
            out.append(face(box.k, 1, phi_map[s]))
        return tuple(out)

    def assemble(self, box: BoxSides, assign) -> Fill:
        walls = tuple(
            Face(Var(s[0]), s[1], assign[s]) for s in sorted(assign, key=box.sort_key) if s != BACK
        )
        return Fill(0, Const(1), box.k, walls, assign[BACK])

    def natural_sides(self, box: BoxSides, phi_map, forced) -> dict:
        """Natural fillers for sides whose goal face is itself a filler."""
        out = {}
        for s in sorted(forced, key=box.sort_key):
            side_psi = DimCtx(box.names(s))
            for t in self.kan_fill(side_psi, (face(box.k, 1, phi_map[s]),)):
                out[s] = t
                break
        return out

    def kan_cube(self, psi: DimCtx, phi: Boundary, d: int) -> Iterator[Fill]:
        if d <= 0:
            return
        names = tuple(psi)
        k = fresh_dim(names)
        box = BoxSides(names, k)
        phi_map = {key: self.ctx.normalize(b) for key, b in face_map(phi).items()}
        forced = frozenset(s for s, b in phi_map.items() if isinstance(b, Fill))
        plans = []
        if d >= 2 and forced:
            fixed = self.natural_sides(box, phi_map, forced)
            if fixed:
                # neighbours meeting a natural filler in a filler cannot be contortions
                opened = set(forced - set(fixed))
                for s, cell in fixed.items():
                    for t in box.sides:
                        sh = box.shared(s, t)
                        if t in fixed or sh is None:
                            continue
                        if isinstance(self.ctx.restrict(cell, sh[0], sh[1]), Fill):
                            opened.add(t)
                plans.append((fixed, frozenset(opened)))
        plans.append(({}, forced))
        for fixed, base in plans:
            for ope in self.open_sets(box, base, d, exclude=frozenset(fixed)):
                self.budget.tick()
                pending = sorted(ope, key=box.sort_key)
                for assign in self.kan_csp(psi, phi, ope, k, fixed, depth=d - 1):
                    for cand in self._close_box(psi, phi, box, phi_map, assign, pending, d):
                        self.open_used[self.ctx.canon(cand)] = ope | frozenset(fixed)
                        yield cand

    def _close_box(self, psi, phi, box, phi_map, assign, pending, d):
        if not pending:
            cand = self.assemble(box, assign)
            try:
                check(self.ctx, psi, cand, phi)
            except CubeError:
                return
            yield cand
            return
        # most constrained open side first, ties in side order
        options = [(s, self.induced_boundary(box, phi_map, assign, s)) for s in pending]
        s, sub_bdy = max(options, key=lambda o: (len(o[1]), -pending.index(o[0])))
        rest = [p for p in pending if p != s]
        sub_psi = DimCtx(box.names(s))
        for t in self.kan_solver(sub_psi, sub_bdy, d - 1, contort_first=True):
            assign[s] = t
            yield from self._close_box(psi, phi, box, phi_map, assign, rest, d)
            del assign[s]

    # -- the solver ----------------------------------------------------------------

    def contortions(self, psi: DimCtx, phi: Boundary) -> Iterator[App]:
        for decl in self.ctx:
            yield from contort_candidates(self.ctx, psi, phi, decl.name, self.theory, self.budget)

    def kan_solver(self, psi: DimCtx, phi: Boundary, d: int, contort_first: bool = False) -> Iterator[Cell]:
        """Contortions (optionally), natural fillers, then open boxes of depth ``d``."""
        if d <= 0:
            return
        key = self._key(psi, phi) + (contort_first,)
        if self.failed.get(key, 0) >= d:
            return
        self.budget.max_depth = max(self.budget.max_depth, d)
        seen = set()
        streams = []
        if contort_first and self.use_contort:
            streams.append(self.contortions(psi, phi))
        streams.append(self.kan_fill(psi, phi))
        streams.append(self.kan_cube(psi, phi, d))
        for t in itertools.chain(*streams):
            c = self.ctx.canon(t)
            if c in seen:
                continue
            seen.add(c)
            yield t
        if not seen:
            self.failed[key] = max(self.failed.get(key, 0), d)


def kan_fill(ctx: CellContext, psi: DimCtx, phi: Boundary) -> Fill:
    for t in KanSearch(ctx, default_theory(psi)).kan_fill(psi, phi):
        return t
    raise Unsolvable("no goal face is a filler that extends naturally")


def kan_csp(ctx, psi: DimCtx, phi: Boundary, ope=(), theory: Theory | None = None, k: str | None = None,
            budget: Budget | None = None) -> Iterator[dict]:
    theory = theory if theory is not None else default_theory(psi)
    k = k or fresh_dim(tuple(psi))
    return KanSearch(ctx, theory, budget).kan_csp(psi, phi, frozenset(ope), k)


def kan_cube(ctx, psi: DimCtx, phi: Boundary, d: int, theory: Theory | None = None,
             budget: Budget | None = None) -> Iterator[Fill]:
    theory = theory if theory is not None else default_theory(psi)
    return KanSearch(ctx, theory, budget).kan_cube(psi, phi, d)


def kan_solver(ctx, psi: DimCtx, phi: Boundary, d: int, theory: Theory | None = None,
               budget: Budget | None = None) -> Cell:
    theory = theory if theory is not None else default_theory(psi)
    for t in KanSearch(ctx, theory, budget).kan_solver(psi, phi, d):
        check(ctx, psi, t, phi)
        return t
    raise Unsolvable(f"no Kan solution within depth {d}")


def solve(
    ctx: CellContext,
    psi: DimCtx,
    phi: Boundary,
    theory: Theory | None = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
    timeout: float | None = DEFAULT_TIMEOUT,
    use_contort: bool = True,
) -> SolveResult:
    """Contort some context cell if possible, else deepen Kan filling step by step."""
    import time

    start = time.monotonic()
    theory = theory if theory is not None else default_theory(psi)
    budget = Budget(timeout)
    search = KanSearch(ctx, theory, budget, use_contort=use_contort)

    def done(t, method, depth):
        check(ctx, psi, t, phi)
        box = BoxSides(tuple(psi), "")
        ope = tuple(sorted(search.open_used.get(ctx.canon(t), ()), key=box.sort_key))
        return SolveResult(
            t, method, depth, budget.unfolded, budget.csp_branches, time.monotonic() - start, ope
        )

    if use_contort:
        for t in search.contortions(psi, phi):
            return done(t, "contortion", 0)
    for d in range(1, max_depth + 1):
        log.debug("kan depth %d", d)
        for t in search.kan_solver(psi, phi, d):
            return done(t, "kan", d)
    raise DepthExhausted(f"no solution within depth {max_depth}")


__all__ = [
    "BACK",
    "BoxSides",
    "KanSearch",
    "SolveResult",
    "default_theory",
    "fresh_dim",
    "kan_csp",
    "kan_cube",
    "kan_fill",
    "kan_solver",
    "side_label",
    "solve",
    "Timeout",
]
