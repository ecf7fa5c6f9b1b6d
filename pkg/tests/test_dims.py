from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubesolve.dims import (
    BOT,
    Const,
    DimCtx,
    Join,
    Meet,
    Neg,
    Theory,
    Var,
    all_assignments,
    canon_dim,
    classify,
    count_contortions,
    dim_equal,
    enumerate_nfs,
    eval_dim,
    monotone_tables,
    normalize_dim,
    parse_dim,
    show_dim,
    subst_dim,
)
from cubesolve.errors import TheoryViolation

from strategies import NAMES, dim_terms

i, j, k = Var("i"), Var("j"), Var("k")


def brute_monotone_count(n):
    """Count monotone boolean functions by checking every truth table."""
    points = range(1 << n)
    count = 0
    for table in range(1 << (1 << n)):
        ok = True
        for x in points:
            if table >> x & 1:
                for b in range(n):
                    y = x | (1 << b)
                    if not table >> y & 1:
                        ok = False
                        break
            if not ok:
                break
        count += ok
    return count


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_monotone_tables_match_brute_force(n):
    assert len(monotone_tables(n)) == brute_monotone_count(n)


@pytest.mark.parametrize("n,expected", [(0, 2), (1, 3), (2, 6), (3, 20), (4, 168), (5, 7581)])
def test_dedekind_numbers(n, expected):
    assert len(monotone_tables(n)) == expected


@pytest.mark.parametrize(
    "theory,n,expected",
    [
        (Theory.CARTESIAN, 2, 4),
        (Theory.DISJUNCTIVE, 2, 5),
        (Theory.DEDEKIND, 2, 6),
        (Theory.DEDEKIND, 3, 20),
        (Theory.DEMORGAN, 1, 6),
        (Theory.DEMORGAN, 2, 168),
    ],
)
def test_enumerate_nfs_counts(theory, n, expected):
    names = NAMES[:n]
    nfs = list(enumerate_nfs(names, theory))
    assert len(nfs) == expected
    assert len(set(nfs)) == expected


@pytest.mark.parametrize("theory", list(Theory))
def test_count_contortions_agrees_with_enumeration(theory):
    per = len(list(enumerate_nfs(("i", "j"), theory)))
    assert count_contortions(2, 2, theory) == per**2


def test_total_square_contortions_into_cube():
    assert count_contortions(2, 3, Theory.DEDEKIND) == 400


@pytest.mark.parametrize(
    "text,expected",
    [
        ("i \\/ ~i", "i \\/ ~i"),
        ("~(i /\\ j)", "~i \\/ ~j"),
        ("~~i", "i"),
        ("i /\\ (i \\/ j)", "i"),
        ("i \\/ 1", "1"),
        ("i /\\ 0", "0"),
        ("(i \\/ j) /\\ k", "i /\\ k \\/ j /\\ k"),
    ],
)
def test_canonical_forms(text, expected):
    assert show_dim(canon_dim(parse_dim(text))) == expected


def test_excluded_middle_is_not_one():
    t = Join(i, Neg(i))
    assert not dim_equal(t, Const(1))
    assert all(eval_dim(t, a) == 1 for a in all_assignments(("i",)))


def test_equal_under_bottom_context():
    assert dim_equal(i, Const(0), BOT)


@pytest.mark.parametrize(
    "text,theory",
    [("0", Theory.CARTESIAN), ("i", Theory.CARTESIAN), ("i \\/ j", Theory.DISJUNCTIVE), ("i /\\ j", Theory.DEDEKIND), ("~i", Theory.DEMORGAN)],
)
def test_classify(text, theory):
    assert classify(parse_dim(text)) == theory


def test_normalize_rejects_terms_outside_theory():
    with pytest.raises(TheoryViolation):
        normalize_dim(Neg(i), Theory.DEDEKIND)


@given(dim_terms())
def test_show_parse_roundtrip(t):
    assert dim_equal(parse_dim(show_dim(t)), t)
    assert parse_dim(show_dim(canon_dim(t))) == canon_dim(t)


@given(dim_terms(negation=False))
def test_negation_free_normal_form_matches_truth_table(t):
    canon = canon_dim(t)
    for a in all_assignments(NAMES):
        assert eval_dim(canon, a) == eval_dim(t, a)


@given(dim_terms(negation=False), dim_terms(negation=False))
def test_negation_free_equality_is_truth_table_equality(s, t):
    tables_equal = all(eval_dim(s, a) == eval_dim(t, a) for a in all_assignments(NAMES))
    assert dim_equal(s, t) == tables_equal


@given(dim_terms(), dim_terms())
def test_equality_is_finer_than_truth_tables(s, t):
    if dim_equal(s, t):
        assert all(eval_dim(s, a) == eval_dim(t, a) for a in all_assignments(NAMES))


@given(dim_terms())
def test_canon_is_idempotent(t):
    assert canon_dim(canon_dim(t)) == canon_dim(t)


@given(dim_terms(), dim_terms(), st.sampled_from(NAMES))
def test_substitution_commutes_with_evaluation(t, s, name):
    for a in all_assignments(NAMES):
        inner = dict(a)
        inner[name] = eval_dim(s, a)
        assert eval_dim(subst_dim(t, {name: s}), a) == eval_dim(t, inner)


@given(dim_terms())
def test_de_morgan_laws(t):
    assert dim_equal(Neg(Join(t, i)), Meet(Neg(t), Neg(i)))
    assert dim_equal(Neg(Neg(t)), t)
