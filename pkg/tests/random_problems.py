"""Random small boundary problems with a known well-formed boundary."""

import random

from cubesolve.cube import App, CellContext, Face, Fill, boundary, cell_boundary, parse_cell
from cubesolve.dims import Const, DimCtx, Join, Meet, Neg, Var

P = parse_cell


def context():
    ctx = CellContext()
    ctx.declare("x", [])
    ctx.declare("p", ["i"], boundary(("i", 0, P("x")), ("i", 1, P("x"))))
    ctx.declare("q", ["i"], boundary(("i", 0, P("x")), ("i", 1, P("x"))))
    ctx.declare("f", ["i"])
    ctx.declare("s", ["i", "j"])
    return ctx


def random_dim(rng, names, depth=2, negation=True):
    if depth == 0 or rng.random() < 0.4:
        if rng.random() < 0.15:
            return Const(rng.randint(0, 1))
        return Var(rng.choice(names))
    op = rng.randrange(3 if negation else 2)
    if op == 2:
        return Neg(random_dim(rng, names, depth - 1, negation))
    left = random_dim(rng, names, depth - 1, negation)
    right = random_dim(rng, names, depth - 1, negation)
    return Join(left, right) if op == 0 else Meet(left, right)


def random_loop_path(rng, var):
    """A composite of two loops at ``x`` along ``var``, or a single loop."""
    a, b = rng.choice("pq"), rng.choice("pq")
    if rng.random() < 0.4:
        return App(a, (Var(var),))
    return Fill(
        0,
        Const(1),
        "k",
        (Face(Var(var), 0, P("x")), Face(Var(var), 1, App(b, (Var("k"),)))),
        App(a, (Var(var),)),
    )


def random_problem(rng, negation=True):
    """``(psi, phi)`` read off a random cell, with some faces dropped."""
    width = rng.randint(1, 2)
    names = ["i", "j"][:width]
    ctx = CTX
    kind = rng.randrange(3)
    if kind == 0:
        cell = App(rng.choice("pqf"), (random_dim(rng, names, negation=negation),))
    elif kind == 1:
        cell = App("s", tuple(random_dim(rng, names, negation=negation) for _ in range(2)))
    else:
        cell = random_loop_path(rng, names[0])
    psi = DimCtx(names)
    faces = cell_boundary(ctx, psi, cell)
    phi = tuple(f for f in faces if rng.random() < 0.8)
    return psi, phi


CTX = context()


def problems(n, seed=0, negation=True):
    rng = random.Random(seed)
    return [random_problem(rng, negation) for _ in range(n)]
