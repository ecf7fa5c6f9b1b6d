from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubesolve.dims import Theory, Var, dim_equal, parse_dim
from cubesolve.errors import Unsolvable
from cubesolve.posetmaps import (
    PPM,
    Counter,
    PosetMap,
    consistent_points,
    formula_to_pm,
    leq,
    pm_to_formula,
    ppm_of_maps,
    subposet,
    total_ppm,
    unfold_ppm,
    update_many,
    update_ppm,
)

from strategies import dim_terms


def brute_maps(m, n, sets=None):
    """Every monotone map 2^m -> 2^n choosing values from ``sets``."""
    size = 1 << m
    out = []
    for values in product(range(1 << n), repeat=size):
        if sets is not None and any(not sets[x] >> v & 1 for x, v in enumerate(values)):
            continue
        if all(leq(values[x], values[y]) for x in range(size) for y in range(size) if leq(x, y)):
            out.append(values)
    return out


@pytest.mark.parametrize("m,n", [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1)])
def test_total_ppm_unfolds_every_monotone_map(m, n):
    got = [s.values for s in unfold_ppm(total_ppm(m, n))]
    assert sorted(got) == sorted(brute_maps(m, n))
    assert len(set(got)) == len(got)


def test_total_ppm_three_to_two_has_400_maps():
    counter = Counter()
    assert sum(1 for _ in unfold_ppm(total_ppm(3, 2), counter)) == 400
    assert counter.unfolded == 400


def test_lossy_union_contains_diagonal():
    sigma = PosetMap(1, 2, (0b00, 0b10))
    sigma2 = PosetMap(1, 2, (0b01, 0b11))
    union = ppm_of_maps([sigma, sigma2])
    maps = {s.values for s in unfold_ppm(union)}
    assert (0b00, 0b11) in maps
    assert {sigma.values, sigma2.values} <= maps


@st.composite
def restrictions(draw, m, n):
    size = 1 << m
    full = (1 << (1 << n)) - 1
    keys = draw(st.lists(st.integers(0, size - 1), max_size=size, unique=True))
    return {x: draw(st.integers(1, full)) for x in keys}


@given(restrictions(2, 2))
def test_update_keeps_exactly_the_admissible_maps(res):
    sets = [(1 << 4) - 1] * 4
    for x, vs in res.items():
        sets[x] &= vs
    expected = sorted(brute_maps(2, 2, sets))
    try:
        ppm = update_many(total_ppm(2, 2), res)
    except Unsolvable:
        assert expected == []
        return
    assert ppm.is_valid()
    assert sorted(s.values for s in unfold_ppm(ppm)) == expected


@given(restrictions(3, 1))
def test_update_single_points_agrees_with_batch(res):
    try:
        batch = update_many(total_ppm(3, 1), res)
    except Unsolvable:
        batch = None
    one = total_ppm(3, 1)
    try:
        for x, vs in res.items():
            one = update_ppm(one, x, vs)
    except Unsolvable:
        one = None
    if batch is None or one is None:
        assert batch is None and one is None
    else:
        assert sorted(s.values for s in unfold_ppm(batch)) == sorted(s.values for s in unfold_ppm(one))


def test_empty_value_set_is_rejected():
    with pytest.raises(Unsolvable):
        PPM(1, 1, [0b01, 0])


@given(st.lists(dim_terms(("i", "j", "k"), negation=False), min_size=1, max_size=3))
def test_dedekind_formula_roundtrip(terms):
    names = ("i", "j", "k")
    sigma = formula_to_pm(terms, names)
    assert sigma.is_monotone()
    back = pm_to_formula(sigma, names)
    assert all(dim_equal(a, b) for a, b in zip(back, terms))


@given(st.lists(dim_terms(("i", "j")), min_size=1, max_size=2))
def test_de_morgan_formula_roundtrip(terms):
    names = ("i", "j")
    sigma = formula_to_pm(terms, names, Theory.DEMORGAN)
    assert sigma.m == 4
    assert sigma.is_monotone()
    back = pm_to_formula(sigma, names, Theory.DEMORGAN)
    assert all(dim_equal(a, b) for a, b in zip(back, terms))


def test_de_morgan_map_of_negated_join():
    sigma = formula_to_pm([parse_dim("~j \\/ k")], ("j", "k"), Theory.DEMORGAN)
    # letters in order j, ~j, k, ~k; true exactly where ~j or k is set
    for x in range(16):
        assert sigma(x) == (1 if x & 0b0100 or x & 0b0010 else 0)


def test_consistent_points_one_variable():
    assert consistent_points(1) == [0b01, 0b10]


def test_subposet_fixes_coordinates():
    assert subposet(3, {0: 0}) == [0, 1, 2, 3]
    assert subposet(3, {0: 1}) == [4, 5, 6, 7]
    assert subposet(3, {2: 1}) == [1, 3, 5, 7]


def test_var_formula_is_identity_map():
    sigma = formula_to_pm([Var("i"), Var("j")], ("i", "j"))
    assert sigma.values == (0, 1, 2, 3)
