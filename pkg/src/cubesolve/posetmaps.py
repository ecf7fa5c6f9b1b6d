"""Monotone maps between powers of the two-element chain, and their lossy sets.

Points of ``2^m`` are ``m``-bit integers; coordinate 0 is the most
significant bit, so ``format(x, "0{m}b")`` spells the coordinates in order.
A potential poset map (PPM) assigns each source point a nonempty set of target
points, stored as a bitmask over the ``2^n`` targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .dims import (
    DimTerm,
    MonotoneNF,
    Theory,
    TheoryViolation,
    classify,
    doubled_letters,
    normalize_dim,
    table_to_nf,
)
from .errors import Unsolvable


def bits(x: int, width: int) -> str:
    return format(x, f"0{width}b") if width else ""


def leq(x: int, y: int) -> bool:
    return x & y == x


@lru_cache(maxsize=None)
def _up_masks(n: int) -> tuple[int, ...]:
    size = 1 << n
    return tuple(sum(1 << u for u in range(size) if u & v == v) for v in range(size))


@lru_cache(maxsize=None)
def _down_masks(n: int) -> tuple[int, ...]:
    size = 1 << n
    return tuple(sum(1 << u for u in range(size) if u & v == u) for v in range(size))


@lru_cache(maxsize=1 << 16)
def above_some(n: int, s: int) -> int:
    """Targets lying above at least one element of ``s``."""
    up = _up_masks(n)
    out = 0
    v = 0
    while s:
        if s & 1:
            out |= up[v]
        s >>= 1
        v += 1
    return out


@lru_cache(maxsize=1 << 16)
def below_some(n: int, s: int) -> int:
    """Targets lying below at least one element of ``s``."""
    down = _down_masks(n)
    out = 0
    v = 0
    while s:
        if s & 1:
            out |= down[v]
        s >>= 1
        v += 1
    return out


def members(s: int) -> list[int]:
    out = []
    v = 0
    while s:
        if s & 1:
            out.append(v)
        s >>= 1
        v += 1
    return out


@lru_cache(maxsize=None)
def lower_covers(m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(x & ~(1 << b) for b in range(m) if x >> b & 1) for x in range(1 << m))


@lru_cache(maxsize=None)
def upper_covers(m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(x | (1 << b) for b in range(m) if not x >> b & 1) for x in range(1 << m))


@dataclass(frozen=True)
class PosetMap:
    m: int
    n: int
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != 1 << self.m:
            raise ValueError("a poset map needs one value per source point")

    def __call__(self, x: int) -> int:
        return self.values[x]

    def is_monotone(self) -> bool:
        for x, covers in enumerate(upper_covers(self.m)):
            for y in covers:
                if not leq(self.values[x], self.values[y]):
                    return False
        return True

    def coordinate_table(self, k: int) -> int:
        """Truth table of output coordinate ``k`` as a bitmask over source points."""
        shift = self.n - 1 - k
        table = 0
        for x, v in enumerate(self.values):
            if v >> shift & 1:
                table |= 1 << x
        return table

    def dump(self) -> str:
        return "\n".join(f"{bits(x, self.m)} -> {bits(v, self.n)}" for x, v in enumerate(self.values))


class PPM:
    """Potential poset map ``2^m -> P(2^n)`` with bitmask value sets."""

    __slots__ = ("m", "n", "sets")

    def __init__(self, m: int, n: int, sets: Sequence[int]):
        self.m = m
        self.n = n
        self.sets = tuple(sets)
        if len(self.sets) != 1 << m:
            raise ValueError("a PPM needs one value set per source point")
        if any(s == 0 for s in self.sets):
            raise Unsolvable("empty value set")

    def __eq__(self, other):
        return isinstance(other, PPM) and (self.m, self.n, self.sets) == (other.m, other.n, other.sets)

    def __hash__(self):
        return hash((self.m, self.n, self.sets))

    def __repr__(self):
        return f"PPM(m={self.m}, n={self.n})"

    def values_at(self, x: int) -> list[int]:
        return members(self.sets[x])

    def is_valid(self) -> bool:
        """Check both PPM conditions along every cover relation."""
        for x, covers in enumerate(upper_covers(self.m)):
            for y in covers:
                if self.sets[y] & ~above_some(self.n, self.sets[x]):
                    return False
                if self.sets[x] & ~below_some(self.n, self.sets[y]):
                    return False
        return all(self.sets)

    def size_bound(self) -> int:
        out = 1
        for s in self.sets:
            out *= bin(s).count("1")
        return out

    def dump(self) -> str:
        lines = []
        for x, s in enumerate(self.sets):
            inner = ",".join(bits(v, self.n) for v in members(s))
            lines.append(f"{bits(x, self.m)} -> {{{inner}}}")
        return "\n".join(lines)


def total_ppm(m: int, n: int) -> PPM:
    full = (1 << (1 << n)) - 1
    return PPM(m, n, [full] * (1 << m))


def ppm_of_maps(maps: Sequence[PosetMap]) -> PPM:
    """Smallest PPM containing the given poset maps pointwise."""
    if not maps:
        raise Unsolvable("no maps")
    m, n = maps[0].m, maps[0].n
    sets = [0] * (1 << m)
    for sigma in maps:
        for x, v in enumerate(sigma.values):
            sets[x] |= 1 << v
    return PPM(m, n, sets)


def propagate(m: int, n: int, sets: list[int], dirty: Sequence[int]) -> list[int]:
    """Shrink value sets along cover edges until both PPM conditions hold."""
    lowers, uppers = lower_covers(m), upper_covers(m)
    work = list(dirty)
    queued = set(work)
    while work:
        x = work.pop()
        queued.discard(x)
        sx = sets[x]
        allow_up = above_some(n, sx)
        for y in uppers[x]:
            new = sets[y] & allow_up
            if new != sets[y]:
                if not new:
                    raise Unsolvable("value set emptied during propagation")
                sets[y] = new
                if y not in queued:
                    queued.add(y)
                    work.append(y)
        allow_down = below_some(n, sx)
        for w in lowers[x]:
            new = sets[w] & allow_down
            if new != sets[w]:
                if not new:
                    raise Unsolvable("value set emptied during propagation")
                sets[w] = new
                if w not in queued:
                    queued.add(w)
                    work.append(w)
    return sets


def update_ppm(sigma: PPM, x: int, vs) -> PPM:
    """Restrict ``sigma`` at ``x`` to ``vs`` (a bitmask or iterable of points) and propagate."""
    if not isinstance(vs, int):
        vs = sum(1 << v for v in set(vs))
    vs &= sigma.sets[x]
    if not vs:
        raise Unsolvable("restriction leaves no value")
    if vs == sigma.sets[x]:
        return sigma
    sets = list(sigma.sets)
    sets[x] = vs
    return PPM(sigma.m, sigma.n, propagate(sigma.m, sigma.n, sets, [x]))


def update_many(sigma: PPM, restrictions: dict[int, int]) -> PPM:
    """Apply several restrictions at once, then propagate to a fixpoint."""
    sets = list(sigma.sets)
    dirty = []
    for x, vs in restrictions.items():
        new = sets[x] & vs
        if not new:
            raise Unsolvable("restriction leaves no value")
        if new != sets[x]:
            sets[x] = new
            dirty.append(x)
    if not dirty:
        return sigma
    return PPM(sigma.m, sigma.n, propagate(sigma.m, sigma.n, sets, dirty))


class Counter:
    """Counts poset maps produced by unfolding."""

    def __init__(self):
        self.unfolded = 0


def unfold_ppm(sigma: PPM, counter: Counter | None = None) -> Iterator[PosetMap]:
    """Every monotone selection from ``sigma``, lazily, in a fixed order.

    Source points are visited in numeric order, which is a linear extension of
    the product order; candidates are checked against the already chosen lower
    covers and must leave every upper cover with some admissible value.
    """
    m, n, sets = sigma.m, sigma.n, sigma.sets
    size = 1 << m
    up = _up_masks(n)
    lowers, uppers = lower_covers(m), upper_covers(m)
    chosen = [0] * size
    cand_lists: list[list[int]] = [[] for _ in range(size)]
    pos = [0] * size

    def candidates(x):
        allowed = sets[x]
        for w in lowers[x]:
            allowed &= up[chosen[w]]
        out = []
        for v in members(allowed):
            uv = up[v]
            if all(sets[y] & uv for y in uppers[x]):
                out.append(v)
        return out

    if size == 0:
        return
    x = 0
    cand_lists[0] = candidates(0)
    pos[0] = 0
    while x >= 0:
        if pos[x] >= len(cand_lists[x]):
            x -= 1
            if x >= 0:
                pos[x] += 1
            continue
        chosen[x] = cand_lists[x][pos[x]]
        if x == size - 1:
            if counter is not None:
                counter.unfolded += 1
            yield PosetMap(m, n, tuple(chosen))
            pos[x] += 1
            continue
        x += 1
        cand_lists[x] = candidates(x)
        pos[x] = 0


# ---------------------------------------------------------------------------
# Subposets


def subposet(m: int, fixed: dict[int, int]) -> list[int]:
    """Points of ``2^m`` whose coordinates in ``fixed`` take the given values.

    The returned list is ordered so that index ``y`` corresponds to the point
    of the smaller cube whose free coordinates spell ``y``.
    """
    free = [c for c in range(m) if c not in fixed]
    out = []
    for y in range(1 << len(free)):
        x = 0
        for c, val in fixed.items():
            if val:
                x |= 1 << (m - 1 - c)
        for k, c in enumerate(free):
            if y >> (len(free) - 1 - k) & 1:
                x |= 1 << (m - 1 - c)
        out.append(x)
    return out


def restrict_ppm(sigma: PPM, points: Sequence[int]) -> PPM:
    return PPM(len(points).bit_length() - 1, sigma.n, [sigma.sets[x] for x in points])


# ---------------------------------------------------------------------------
# Formulas and maps


def letters_for(names: Sequence[str], mode: Theory):
    if mode == Theory.DEMORGAN:
        return doubled_letters(names)
    return tuple((nm, True) for nm in names)


def formula_to_pm(terms: Sequence[DimTerm], names: Sequence[str], mode: Theory = Theory.DEDEKIND) -> PosetMap:
    """The poset map of a contortion given by one term per output coordinate.

    In De Morgan mode the source has two coordinates per variable, read as the
    letters ``x`` and ``~x`` of the doubled alphabet.
    """
    if mode not in (Theory.DEDEKIND, Theory.DEMORGAN):
        raise ValueError("poset maps represent Dedekind or De Morgan contortions")
    letters = letters_for(names, mode)
    index = {lit: k for k, lit in enumerate(letters)}
    width = len(letters)
    nfs = []
    for t in terms:
        if classify(t) > mode:
            raise TheoryViolation(f"{t} is outside {mode.name.lower()}")
        nfs.append(normalize_dim(t, mode))
    return nfs_to_pm(nfs, index, width)


def nfs_to_pm(nfs: Sequence[MonotoneNF], index: dict, width: int) -> PosetMap:
    n = len(nfs)
    clause_masks = []
    for nf in nfs:
        masks = []
        for clause in nf.clauses:
            mask = 0
            for lit in clause:
                try:
                    mask |= 1 << (width - 1 - index[lit])
                except KeyError:
                    raise TheoryViolation(f"literal {lit} is not available") from None
            masks.append(mask)
        clause_masks.append(masks)
    values = []
    for x in range(1 << width):
        v = 0
        for k, masks in enumerate(clause_masks):
            if any(x & c == c for c in masks):
                v |= 1 << (n - 1 - k)
        values.append(v)
    return PosetMap(width, n, tuple(values))


def pm_to_nfs(sigma: PosetMap, names: Sequence[str], mode: Theory = Theory.DEDEKIND) -> list[MonotoneNF]:
    letters = letters_for(names, mode)
    if len(letters) != sigma.m:
        raise ValueError("source width does not match the variable list")
    return [table_to_nf(sigma.coordinate_table(k), letters) for k in range(sigma.n)]


def pm_to_formula(sigma: PosetMap, names: Sequence[str], mode: Theory = Theory.DEDEKIND) -> list[DimTerm]:
    """Join over minimal true points of the meet of their active letters."""
    return [nf.to_term() for nf in pm_to_nfs(sigma, names, mode)]


def consistent_points(m: int) -> list[int]:
    """Points of the doubled cube ``2^(2m)`` where each ``~x`` letter is the flip of ``x``."""
    out = []
    for y in range(1 << m):
        x = 0
        for i in range(m):
            b = y >> (m - 1 - i) & 1
            pair = 0b10 if b else 0b01
            x |= pair << (2 * (m - 1 - i))
        out.append(x)
    return out
