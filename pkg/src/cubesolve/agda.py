"""Cubical Agda rendering of checked cells.

``fill 0->1`` becomes ``hcomp``, ``fill 0->r`` becomes ``hfill ... (inS base) r``.
Fillers that start at 1 are printed with their binder reversed, which is
always expressible because Agda's interval has ``~``.
"""

from __future__ import annotations

import re

from .cube import App, Boundary, Cell, CellContext, Face, Fill, bound_names, cell_free_vars, check, fresh_name, subst_cell
from .dims import Const, DimCtx, DimTerm, Join, Meet, Neg, Var
from .errors import CubeError

# Agda fixities: ~ binds tightest, then ∧, then ∨.
_PREC = {Join: 1, Meet: 2}


def agda_dim(t: DimTerm, prec: int = 0, flipped: frozenset = frozenset()) -> str:
    """``flipped`` names variables printed negated (binders of reversed fillers)."""
    if isinstance(t, Const):
        return "i1" if t.value else "i0"
    if isinstance(t, Var):
        if t.name in flipped:
            return f"(~ {t.name})" if prec > 2 else f"~ {t.name}"
        return t.name
    if isinstance(t, Neg):
        if isinstance(t.arg, Var) and t.arg.name in flipped:
            return t.arg.name
        s = "~ " + agda_dim(t.arg, 3, flipped)
        return f"({s})" if prec > 2 else s
    op = " ∨ " if isinstance(t, Join) else " ∧ "
    mine = _PREC[type(t)]
    s = agda_dim(t.left, mine, flipped) + op + agda_dim(t.right, mine + 1, flipped)
    return f"({s})" if prec > mine else s


def _arg(t: DimTerm, flipped) -> str:
    return agda_dim(t, 3, flipped)


def _atom(t: Cell, flipped) -> str:
    s = agda_cell(t, flipped)
    return s if isinstance(t, App) and not t.args else f"({s})"


def _system(t: Fill, flipped) -> str:
    if not t.faces:
        return f"λ {t.bound} → λ ()"
    inner = flipped | {t.bound} if t.src == 1 else flipped - {t.bound}
    parts = []
    for f in t.faces:
        end = 1 - f.end if f.var in flipped else f.end
        parts.append(f"({f.var} = {'i1' if end else 'i0'}) → {agda_cell(f.body, inner)}")
    return f"λ {t.bound} → λ {{ " + " ; ".join(parts) + " }"


def agda_cell(t: Cell, flipped: frozenset = frozenset()) -> str:
    if isinstance(t, App):
        if not t.args:
            return t.name
        return t.name + " " + " ".join(_arg(a, flipped) for a in t.args)
    if isinstance(t.tgt, Const) and t.tgt.value == t.src:
        return agda_cell(t.base, flipped)
    system = _system(t, flipped)
    base = _atom(t.base, flipped)
    if isinstance(t.tgt, Const):
        return f"hcomp ({system}) {base}"
    tgt = Neg(t.tgt) if t.src == 1 else t.tgt
    return f"hfill ({system}) (inS {base}) {_arg(tgt, flipped)}"


def unshadow(t: Cell, scope: frozenset) -> Cell:
    """Rename binders that clash with any enclosing name, face variables included.

    Internally a face body may reuse its constraint variable as a binder;
    Agda would read that as shadowing.
    """
    if isinstance(t, App):
        return t
    bound, faces = t.bound, t.faces
    if bound in scope:
        bound = fresh_name(scope | cell_free_vars(t) | bound_names(t), t.bound)
        faces = tuple(Face(f.r, f.end, subst_cell(f.body, {t.bound: Var(bound)})) for f in faces)
    inner = scope | {bound}
    faces = tuple(Face(f.r, f.end, unshadow(f.body, inner)) for f in faces)
    return Fill(t.src, t.tgt, bound, faces, unshadow(t.base, scope))


def print_agda(ctx: CellContext, psi: DimCtx, t: Cell, phi: Boundary, name: str | None = None) -> str:
    """Render ``t`` after checking it against ``phi``; unchecked cells are refused."""
    check(ctx, psi, t, phi)
    body = agda_cell(unshadow(t, frozenset(psi)))
    if len(psi):
        body = "λ " + " ".join(psi) + " → " + body
    return f"{name} = {body}" if name else body


# ---------------------------------------------------------------------------
# Syntax check for the printed subset


class AgdaSyntaxError(CubeError):
    """Printed Agda text falls outside the subset the printer emits."""


_TOK = re.compile(r"\s*(λ|→|\(|\)|\{|\}|;|=|~|∧|∨|[A-Za-z_][A-Za-z0-9_']*)")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m:
            raise AgdaSyntaxError(f"unexpected character at {pos}: {text[pos]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Checker:
    def __init__(self, toks, cells):
        self.toks = toks
        self.pos = 0
        self.cells = cells

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def eat(self, tok=None):
        got = self.peek()
        if got is None or (tok is not None and got != tok):
            raise AgdaSyntaxError(f"expected {tok or 'a token'} at token {self.pos}, got {got!r}")
        self.pos += 1
        return got

    def ident(self):
        tok = self.eat()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
            raise AgdaSyntaxError(f"expected an identifier, got {tok!r}")
        return tok

    def top(self):
        if len(self.toks) > 1 and self.toks[1] == "=":
            self.ident()
            self.eat("=")
        scope = set()
        if self.peek() == "λ":
            self.eat("λ")
            while self.peek() != "→":
                scope.add(self.ident())
            self.eat("→")
        self.term(scope)
        if self.peek() is not None:
            raise AgdaSyntaxError(f"trailing input at token {self.pos}")

    def dim(self, scope):
        self.dim_meet(scope)
        while self.peek() == "∨":
            self.eat()
            self.dim_meet(scope)

    def dim_meet(self, scope):
        self.dim_atom(scope)
        while self.peek() == "∧":
            self.eat()
            self.dim_atom(scope)

    def dim_atom(self, scope):
        tok = self.peek()
        if tok == "~":
            self.eat()
            self.dim_atom(scope)
        elif tok == "(":
            self.eat()
            self.dim(scope)
            self.eat(")")
        else:
            name = self.ident()
            if name not in ("i0", "i1") and name not in scope:
                raise AgdaSyntaxError(f"dimension {name} is not bound")

    def atom(self, scope):
        if self.peek() == "(":
            self.eat()
            self.term(scope)
            self.eat(")")
        else:
            name = self.ident()
            if name not in self.cells:
                raise AgdaSyntaxError(f"unknown cell {name}")

    def system(self, scope):
        self.eat("(")
        self.eat("λ")
        k = self.ident()
        if k in scope:
            raise AgdaSyntaxError(f"binder {k} shadows")
        self.eat("→")
        self.eat("λ")
        if self.peek() == "(":
            self.eat("(")
            self.eat(")")
        else:
            self.eat("{")
            while True:
                self.eat("(")
                var = self.ident()
                if var not in scope:
                    raise AgdaSyntaxError(f"face constraint on unbound {var}")
                self.eat("=")
                if self.eat() not in ("i0", "i1"):
                    raise AgdaSyntaxError("face endpoint must be i0 or i1")
                self.eat(")")
                self.eat("→")
                self.term(scope | {k})
                if self.peek() == ";":
                    self.eat()
                    continue
                break
            self.eat("}")
        self.eat(")")

    def term(self, scope):
        tok = self.peek()
        if tok == "hcomp":
            self.eat()
            self.system(scope)
            self.atom(scope)
        elif tok == "hfill":
            self.eat()
            self.system(scope)
            self.eat("(")
            self.eat("inS")
            self.atom(scope)
            self.eat(")")
            self.dim_atom(scope)
        elif tok == "(":
            self.atom(scope)
        else:
            name = self.ident()
            if name not in self.cells:
                raise AgdaSyntaxError(f"unknown cell {name}")
            while self.peek() not in (None, ")", ";", "}"):
                self.dim_atom(scope)


def check_agda_syntax(text: str, cells) -> None:
    """Raise AgdaSyntaxError unless ``text`` is a well-formed printer output.

    Checks balanced brackets, bound dimension names, face constraints over
    bound variables and known cell names.
    """
    _Checker(_tokens(text), set(cells)).top()
