"""The `.cube` problem format: a cell context followed by named goals.

::

    -- comment
    x [] { }
    p [i] { i=0 -> x ; i=1 -> x }
    goal inv [j] theory=demorgan depth=2 { j=0 -> p(1) ; j=1 -> p(0) }
    solution p(~j)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cube import (
    Boundary,
    Cell,
    CellContext,
    check,
    parse_cell_tokens,
    parse_faces,
    resolve_constant_faces,
    show_boundary,
    show_cell,
    wf_boundary,
)
from .dims import DimCtx, Theory
from .errors import CubeSyntaxError, ScopeError
from .lexer import Token, TokenStream

KEYWORDS = {"goal", "solution", "fill"}
CONFIG_KEYS = ("theory", "depth", "timeout", "expect")
EXPECT_VALUES = ("solved", "unsolved")


@dataclass
class Goal:
    name: str
    dims: tuple[str, ...]
    faces: Boundary
    config: dict = field(default_factory=dict)
    solution: Optional[Cell] = None

    @property
    def psi(self) -> DimCtx:
        return DimCtx(self.dims)

    @property
    def theory(self) -> Optional[Theory]:
        name = self.config.get("theory")
        return Theory.parse(name) if name else None

    @property
    def expect(self) -> str:
        return self.config.get("expect", "solved")


@dataclass
class CubeFile:
    context: CellContext
    goals: list[Goal]

    def goal(self, name: str) -> Goal:
        for g in self.goals:
            if g.name == name:
                return g
        raise ScopeError(f"no goal named {name!r}")

    def check_solutions(self) -> dict[str, bool]:
        """Run the checker on every inline solution."""
        out = {}
        for g in self.goals:
            if g.solution is not None:
                check(self.context, g.psi, g.solution, g.faces)
                out[g.name] = True
        return out


def _dims(ts: TokenStream) -> tuple[str, ...]:
    ts.expect("[")
    names = []
    while not ts.at("]"):
        names.append(ts.expect_ident().text)
        ts.accept(",")
    ts.expect("]")
    return tuple(names)


def _config_value(ts: TokenStream, key: Token) -> object:
    tok = ts.next()
    if key.text == "theory":
        if tok.kind != "ident":
            raise CubeSyntaxError(tok.line, tok.col, "a theory name", tok.text)
        try:
            Theory.parse(tok.text)
        except ValueError:
            raise CubeSyntaxError(tok.line, tok.col, "a theory name", tok.text) from None
        return tok.text.lower()
    if key.text == "expect":
        if tok.text not in EXPECT_VALUES:
            raise CubeSyntaxError(tok.line, tok.col, "solved or unsolved", tok.text)
        return tok.text
    if tok.kind != "num":
        raise CubeSyntaxError(tok.line, tok.col, "a number", tok.text)
    if key.text == "depth":
        if "." in tok.text:
            raise CubeSyntaxError(tok.line, tok.col, "an integer", tok.text)
        return int(tok.text)
    return float(tok.text)


def _faces_or_empty(ts: TokenStream) -> Boundary:
    return parse_faces(ts) if ts.at("{") else ()


def parse_cube(text: str) -> CubeFile:
    """Parse and well-formedness check a `.cube` file."""
    ts = TokenStream.of(text)
    ctx = CellContext()
    goals: list[Goal] = []
    seen = set()
    while ts.peek().kind != "eof":
        tok = ts.expect_ident()
        if tok.text == "goal":
            name_tok = ts.expect_ident()
            if name_tok.text in seen:
                raise ScopeError(f"goal {name_tok.text!r} declared twice")
            seen.add(name_tok.text)
            dims = _dims(ts)
            config = {}
            while ts.peek().kind == "ident" and ts.peek(1).text == "=":
                key = ts.next()
                if key.text not in CONFIG_KEYS:
                    raise CubeSyntaxError(key.line, key.col, "one of " + ", ".join(CONFIG_KEYS), key.text)
                ts.expect("=")
                config[key.text] = _config_value(ts, key)
            faces = resolve_constant_faces(dims, _faces_or_empty(ts))
            wf_boundary(ctx, DimCtx(dims), faces)
            solution = None
            if ts.accept("solution"):
                solution = parse_cell_tokens(ts)
            goals.append(Goal(name_tok.text, dims, faces, config, solution))
        elif tok.text in KEYWORDS:
            raise CubeSyntaxError(tok.line, tok.col, "a declaration or goal", tok.text)
        else:
            if goals:
                raise CubeSyntaxError(tok.line, tok.col, "a goal (declarations come first)", tok.text)
            dims = _dims(ts)
            ctx.declare(tok.text, dims, _faces_or_empty(ts))
    return CubeFile(ctx, goals)


def _show_dims(dims) -> str:
    return "[" + ", ".join(dims) + "]"


def print_cube(cf: CubeFile) -> str:
    lines = []
    for d in cf.context:
        lines.append(f"{d.name} {_show_dims(d.dims)} {show_boundary(d.faces)}")
    for g in cf.goals:
        head = [f"goal {g.name} {_show_dims(g.dims)}"]
        for key in CONFIG_KEYS:
            if key in g.config:
                head.append(f"{key}={g.config[key]}")
        lines.append(" ".join(head) + " " + show_boundary(g.faces))
        if g.solution is not None:
            lines.append(f"  solution {show_cell(g.solution)}")
    return "\n".join(lines) + "\n"


def load_cube(path) -> CubeFile:
    with open(path, encoding="utf-8") as fh:
        return parse_cube(fh.read())
