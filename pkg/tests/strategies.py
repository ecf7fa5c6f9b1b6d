"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from cubesolve.dims import Const, Join, Meet, Neg, Var

NAMES = ("i", "j", "k")


def dim_terms(names=NAMES, negation=True, max_leaves=8):
    leaves = st.one_of(st.sampled_from([Const(0), Const(1)]), st.sampled_from([Var(n) for n in names]))

    def extend(children):
        ops = [
            st.builds(Join, children, children),
            st.builds(Meet, children, children),
        ]
        if negation:
            ops.append(st.builds(Neg, children))
        return st.one_of(*ops)

    return st.recursive(leaves, extend, max_leaves=max_leaves)
