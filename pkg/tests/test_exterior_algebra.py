import itertools

import pytest
from hypothesis import given, strategies as st
from sympy.combinatorics import Permutation

from fanic import corpus
from fanic.exterior_algebra import FreeModule, ModuleError, induce, monomials, wedge
from fanic.lattice_fan import Frame
from oracles import binom


def test_wedge_examples():
    assert wedge((0,), (1,)) == (1, (0, 1))
    assert wedge((1,), (0,)) == (-1, (0, 1))
    assert wedge((0,), (0,)) is None


@given(st.lists(st.integers(0, 6), unique=True, max_size=7), st.integers(0, 7))
def test_wedge_sign_is_permutation_parity(seq, cut):
    u, v = tuple(sorted(seq[:cut])), tuple(sorted(seq[cut:]))
    sign, mono = wedge(u, v)
    order = list(u) + list(v)
    perm = Permutation([sorted(order).index(x) for x in order]) if order else Permutation([])
    assert mono == tuple(sorted(order))
    assert sign == (1 if perm.is_even else -1)


@given(st.sets(st.integers(0, 5), max_size=3), st.sets(st.integers(0, 5), max_size=3),
       st.sets(st.integers(0, 5), max_size=3))
def test_wedge_is_associative(a, b, c):
    a, b, c = tuple(sorted(a)), tuple(sorted(b)), tuple(sorted(c))

    def mul(x, y):
        if x is None or y is None:
            return None
        w = wedge(x[1], y[1])
        return None if w is None else (x[0] * y[0] * w[0], w[1])

    left = mul(mul((1, a), (1, b)), (1, c))
    right = mul((1, a), mul((1, b), (1, c)))
    assert left == right


@pytest.mark.parametrize("r", [0, 1, 2, 3])
def test_free_module_dimensions_and_action(r):
    frame = Frame([tuple(int(i == j) for j in range(r)) for i in range(r)], r)
    m = FreeModule(frame, [("g", (0, 0))])
    m.validate()
    assert m.dims() == {(0, -k): binom(r, k) for k in range(r + 1)}
    assert len(monomials(r)) == 2 ** r


@pytest.mark.parametrize("name", ["P2", "F1", "cube", "random1", "square-boundary"])
def test_induced_dimensions_on_face_pairs(name):
    fan = corpus.get(name)
    for s, t in fan.face_pairs:
        base = FreeModule(fan.cones[s].frame, [("g", (0, 0))])
        ind = induce(base, fan.cones[t].frame)
        ind.validate()
        assert len(ind) == 2 ** (fan.dim(t) - fan.dim(s)) * len(base)


def test_induce_on_equal_cone_is_identity():
    fan = corpus.get("P2")
    base = FreeModule(fan.cones[4].frame, [("g", (1, 0))])
    assert induce(base, fan.cones[4].frame) is base


def test_ray_module_induces_to_free_rank_one():
    fan = corpus.get("P2")
    ray = fan.cones_of_dim(1)[0]
    top = [c for c in fan.cones_of_dim(2) if fan.is_face(ray, c)][0]
    ind = induce(FreeModule(fan.cones[ray].frame, [("g", (0, 0))]), fan.cones[top].frame)
    assert len(ind) == 4 and ind.dims() == {(0, 0): 1, (0, -1): 2, (0, -2): 1}


@pytest.mark.parametrize("name", ["P2", "cube", "random2"])
def test_induction_is_transitive_up_to_dimensions(name):
    fan = corpus.get(name)
    for s, t, u in itertools.product(range(len(fan)), repeat=3):
        if s != t != u and fan.is_face(s, t) and fan.is_face(t, u):
            base = FreeModule(fan.cones[s].frame, [("g", (0, 0))])
            two = induce(induce(base, fan.cones[t].frame), fan.cones[u].frame)
            one = induce(base, fan.cones[u].frame)
            assert two.dims() == one.dims()


def test_induce_requires_sublattice():
    fan = corpus.get("P2")
    r0, r1 = fan.cones_of_dim(1)[:2]
    with pytest.raises(ModuleError):
        induce(FreeModule(fan.cones[r0].frame, [("g", (0, 0))]), fan.cones[r1].frame)


def test_action_is_linear_in_the_vector():
    fan = corpus.get("P2")
    c = fan.cones_of_dim(2)[0]
    m = FreeModule(fan.cones[c].frame, [("g", (0, 0))])
    a, b = fan.cones[c].frame.rows
    both = tuple(x + y for x, y in zip(a, b))
    assert m.act_vec(both) == m.act_vec(a) + m.act_vec(b)
