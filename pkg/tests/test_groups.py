import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubesolve.cube import App, boundary, cell_boundary, check, face_map, parse_cell
from cubesolve.cubefile import parse_cube
from cubesolve.dims import DimCtx, Var
from cubesolve.errors import CubeSyntaxError, InvalidDerivation, RelationNotInPresentation
from cubesolve.groups import (
    POINT,
    Cancel,
    CancelRight,
    Presentation,
    Refl,
    Rewrite,
    Snoc,
    Sym,
    Trans,
    append_cell,
    cancel_cell,
    conclusion,
    convenientize,
    emit_cube,
    encode_context,
    encode_word,
    inverse_name,
    parse_presentation,
    pseudo_or,
    random_derivation,
    random_problems,
    random_word,
    rewrite_cell,
    show_presentation,
    word,
    word_eq_boundary,
    word_eq_cell,
)

P = parse_cell
STAR = App(POINT, ())
LOOP = boundary(("i", 0, STAR), ("i", 1, STAR))
ZZ = convenientize(parse_presentation("generators: a, b; relators: a b a^-1 b^-1"))
ZZ_CTX = encode_context(ZZ)


def triples_only(p):
    return all(len(r) == 3 for r in p.relations) and not p.relators


def test_parse_presentation_sections():
    p = parse_presentation("generators: a, b -- two\nrelations: a b a; relators: a b^-1")
    assert p.generators == ["a", "b"]
    assert p.relations == [("a", "b", "a")]
    assert p.relators == [(("a", 1), ("b", -1))]


@pytest.mark.parametrize(
    "text",
    ["generators: a; relations: a b a", "generators: a; relators: c", "generators: a b", "nonsense"],
)
def test_parse_presentation_errors(text):
    with pytest.raises(CubeSyntaxError):
        parse_presentation(text)


def test_presentation_text_roundtrip():
    text = show_presentation(ZZ)
    again = parse_presentation(text)
    assert again.generators == ZZ.generators and again.relations == ZZ.relations


def test_convenientize_square_relator():
    p = convenientize(parse_presentation("generators: a; relators: a a"))
    assert p.is_convenient() and triples_only(p)
    # identity, one prefix generator, then inverses of all three
    assert p.generators == ["a", "e", "z0_1", "a'", "e'", "z0_1'"]
    assert ("e", "a", "z0_1") in p.relations and ("z0_1", "a", "e") in p.relations


def test_convenientize_commutator_has_three_prefix_generators():
    p = convenientize(parse_presentation("generators: a, b; relators: a b a b^-1"))
    prefixes = [g for g in p.generators if g.startswith("z") and not g.endswith("'")]
    assert len(prefixes) == 3
    # one identity triple, four steps, two inverse triples per original generator
    assert len(p.relations) == 1 + 4 + 2 * 6
    assert ("z0_3", "b", "e") not in p.relations and ("e", "b", "z0_3") in p.relations


def test_convenient_input_is_unchanged():
    p = Presentation(["a", "a'", "e", "e'"], [("a", "a'", "e"), ("a'", "a", "e"), ("e", "e", "e"), ("e", "e'", "e"), ("e'", "e", "e")])
    assert p.is_convenient()
    q = convenientize(p)
    assert q.generators == p.generators and q.relations == p.relations


@pytest.mark.parametrize("g,inv", [("a", "a'"), ("a'", "a"), ("z0_1", "z0_1'")])
def test_inverse_name(g, inv):
    assert inverse_name(g) == inv


def test_encode_context_counts():
    p = Presentation(["a", "a'"], [])
    ctx = encode_context(p)
    assert [d.dim for d in ctx] == [0, 1, 1]
    assert len([d for d in ZZ_CTX if d.dim == 2]) == len(ZZ.relations)


def test_relation_square_boundary():
    p = convenientize(parse_presentation("generators: a, b, c; relations: a b c"))
    ctx = encode_context(p)
    faces = face_map(ctx["s_a_b_c"].faces)
    assert faces[("k", 0)] == P("a(j)")
    assert faces[("k", 1)] == P("c(j)")
    assert faces[("j", 0)] == STAR
    assert faces[("j", 1)] == P("b(k)")


def test_encode_context_requires_convenient_form():
    with pytest.raises(ValueError):
        encode_context(parse_presentation("generators: a; relators: a a"))


def test_empty_word_is_the_point():
    assert encode_word(()) == STAR


@pytest.mark.parametrize("e", [0, 1])
def test_append_cell_boundaries(e):
    square, loop = append_cell(encode_word(word("b")), "a", e)
    psi = DimCtx(["i", "l"])
    check(ZZ_CTX, psi, square, boundary(
        ("i", 0, STAR),
        ("i", 1, P("a(l)")),
        ("l", 1 - e, encode_word(word("b"))),
        ("l", e, loop),
    ))
    check(ZZ_CTX, DimCtx(["i"]), loop, LOOP)


def test_append_then_back_is_a_loop():
    t = encode_word(word("a", "a^-1"))
    assert t.base.tgt.value == 1 and t.tgt.value == 0
    check(ZZ_CTX, DimCtx(["i"]), t, LOOP)


@given(st.lists(st.tuples(st.sampled_from(ZZ.generators), st.sampled_from([1, -1])), max_size=8))
def test_every_word_is_a_loop(w):
    check(ZZ_CTX, DimCtx(["i"]), encode_word(tuple(w)), LOOP)


@pytest.mark.parametrize("e", [0, 1])
@pytest.mark.parametrize("prefix", [(), word("b")])
def test_cancel_cell(e, prefix):
    t = encode_word(prefix)
    c = cancel_cell(t, "a", e)
    letters = prefix + (("a", 1 if e else -1), ("a", -1 if e else 1))
    check(ZZ_CTX, DimCtx(["i", "k"]), c, word_eq_boundary(letters, prefix))


def test_pseudo_or_boundary_and_connection_agree():
    t = P("a(i)")
    psi = DimCtx(["j", "k"])
    phi = boundary(("j", 0, P("a(k)")), ("k", 0, P("a(j)")), ("j", 1, STAR), ("k", 1, STAR))
    kan = pseudo_or(t, "i", u=STAR)
    conn = pseudo_or(t, "i", connection=True)
    check(ZZ_CTX, psi, kan, phi)
    check(ZZ_CTX, psi, conn, phi)
    assert cell_boundary(ZZ_CTX, psi, kan) == cell_boundary(ZZ_CTX, psi, conn)


def test_pseudo_or_of_constant_is_constant():
    sq = pseudo_or(STAR, "i", u=STAR)
    assert all(f.body == STAR for f in cell_boundary(ZZ_CTX, DimCtx(["j", "k"]), sq))


@pytest.mark.parametrize("rel", [("e", "a", "z0_1"), ("a", "a'", "e")])
def test_rewrite_cell(rel):
    a, b, c = rel
    t = rewrite_cell(ZZ, encode_word(word("b")), rel)
    check(ZZ_CTX, DimCtx(["i", "k"]), t, word_eq_boundary(word("b", a, b), word("b", c)))
    inner = t.base
    assert face_map(inner.faces)[("i", 1)] == App(f"s_{a}_{b}_{c}", (Var(inner.bound), Var("k")))


def test_rewrite_unknown_relation():
    with pytest.raises(RelationNotInPresentation):
        rewrite_cell(ZZ, STAR, ("a", "b", "a"))


def test_refl_is_degenerate():
    t = word_eq_cell(ZZ, word("a"), word("a"), Refl(word("a")), ZZ_CTX)
    assert t == encode_word(word("a"))


def test_cancel_derivation_pipeline():
    d = CancelRight((), "a", True)
    assert d == Cancel((), "a", True)
    word_eq_cell(ZZ, word("a", "a^-1"), (), d, ZZ_CTX)


def test_trans_and_sym():
    d1 = Cancel((), "a", True)
    d2 = Sym(Cancel((), "b", False))
    d = Trans(d1, d2)
    assert conclusion(d) == (word("a", "a^-1"), word("b^-1", "b"))
    t = word_eq_cell(ZZ, word("a", "a^-1"), word("b^-1", "b"), d, ZZ_CTX)
    assert t.faces[3].body is not None


def test_snoc():
    d = Snoc(Cancel((), "a", True), "b", -1)
    word_eq_cell(ZZ, word("a", "a^-1", "b^-1"), word("b^-1"), d, ZZ_CTX)


@pytest.mark.parametrize(
    "d,v,w",
    [
        (Trans(Refl(word("a")), Refl(word("b"))), word("a"), word("b")),
        (Refl(word("a")), word("a"), word("b")),
        (Refl(word("nope")), word("nope"), word("nope")),
        (Snoc(Refl(()), "a", 2), word("a"), word("a")),
    ],
)
def test_invalid_derivations(d, v, w):
    with pytest.raises(InvalidDerivation):
        word_eq_cell(ZZ, v, w, d, ZZ_CTX)


@pytest.mark.parametrize("seed", range(20))
def test_random_derivations_check(seed):
    rng = random.Random(seed)
    d = random_derivation(ZZ, rng, rng.randint(0, 3))
    v, w = conclusion(d)
    t = word_eq_cell(ZZ, v, w, d, ZZ_CTX)
    faces = cell_boundary(ZZ_CTX, DimCtx(["i", "k"]), t)
    got = face_map(faces)
    assert ZZ_CTX.equal(got[("k", 0)], encode_word(v))
    assert ZZ_CTX.equal(got[("k", 1)], encode_word(w))


def test_random_word_alphabet():
    w = random_word(ZZ, 8, random.Random(0))
    assert len(w) == 8 and all(g in ZZ.generators for g, _ in w)


def test_emit_cube_parses_and_checks():
    text = emit_cube(ZZ, random_problems(ZZ, count=3, seed=5, size=1))
    cf = parse_cube(text)
    assert len(cf.goals) == 3
    assert cf.check_solutions() == {"eq0": True, "eq1": True, "eq2": True}
