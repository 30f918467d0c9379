import json

import pytest
from hypothesis import given

from fanic import corpus
from fanic.cohomology import (BettiTable, BigradedComplex, NotAComplex, NotChainMap, betti,
                              check_chain_map, euler_characteristic, euler_oracle_top, gamma,
                              gamma_map, induced_cohomology_map)
from fanic.gem_complex import Perversity, build_ic, build_P, build_SdP, natural_map, psi
from fanic.lattice_fan import fan_from_cones
from fanic.linalg import SparseMap, rank
from oracles import betti_by_sympy, binom, complete_fans_2d, transform_fan, unimodular_2d

NAMES = ["P1", "P2", "F1", "square-boundary", "square-cone", "cube", "random1"]


def test_tsv_and_json_formats():
    t = BettiTable({(1, -1): 2, (0, 0): 1})
    assert t.to_tsv() == "0\t0\t1\n1\t-1\t2\n"
    assert json.loads(t.to_json()) == {"betti": [[0, 0, 1], [1, -1, 2]]}
    assert t.get_dim(5, 5) == 0 and t.slice(-1) == {1: 2}


def test_not_a_complex():
    with pytest.raises(NotAComplex):
        BigradedComplex([(0, 0), (0, 0)], SparseMap(2, [{1: 1}, {}]))
    with pytest.raises(NotAComplex):
        BigradedComplex([(0, 0), (1, 0), (2, 0)], SparseMap(3, [{1: 1}, {2: 1}, {}]))


def test_zero_fan_examples():
    zero = fan_from_cones(0, [], [])
    assert betti(gamma(build_ic(zero, "middle").ic)).to_tsv() == "0\t0\t1\n"
    for r in range(4):
        z = fan_from_cones(r, [], [])
        assert gamma(build_P(z)).dims() == {(0, -k): binom(r, k) for k in range(r + 1)}


@pytest.mark.parametrize("name", ["P1", "P2", "F1", "square-boundary"])
@pytest.mark.parametrize("p", ["bottom", "middle", "top"])
def test_betti_matches_sympy(name, p):
    c = gamma(build_ic(corpus.get(name), p).ic)
    assert betti(c) == betti_by_sympy(c)


@pytest.mark.parametrize("name", NAMES + ["cube-boundary"])
def test_gamma_of_top_ic_dimensions_and_euler_characteristic(name):
    fan = corpus.get(name)
    r = fan.rank
    c = gamma(build_ic(fan, "top").ic)
    want = {}
    for p, f in enumerate(fan.f_vector):
        for k in range(r - p + 1):
            want[(p, -k)] = want.get((p, -k), 0) + f * binom(r - p, k)
    assert c.dims() == want
    table = betti(c)
    for q in range(-r - 2, 2):
        assert euler_characteristic(table, q) == euler_oracle_top(fan, q)


def test_euler_oracle_examples():
    assert euler_oracle_top(corpus.get("P1"), 0) == -1
    assert euler_oracle_top(corpus.get("P2"), -1) == -1
    assert euler_oracle_top(corpus.get("P2"), -3) == 0


def test_jobs_do_not_change_the_table():
    c = gamma(build_ic(corpus.get("cube"), "middle").ic)
    assert betti(c, jobs=2) == betti(c, jobs=1)


def test_identity_induces_identity():
    fan = corpus.get("P2")
    m = Perversity.middle(fan)
    h = natural_map(fan, m, m)
    table = betti(gamma(h.source))
    for (p, q), n in table.items():
        mat = induced_cohomology_map(h, p, q)
        assert mat == [[int(i == j) for j in range(n)] for i in range(n)]


def test_psi_induces_isomorphisms():
    fan = corpus.get("F1")
    h = psi(fan)
    for (p, q), n in betti(gamma(build_SdP(fan))).items():
        mat = induced_cohomology_map(h, p, q)
        assert len(mat) == n
        assert rank(SparseMap.from_dense(mat)) == n


def test_chain_map_check_rejects_non_maps():
    fan = corpus.get("P1")
    src, dst, m = gamma_map(psi(fan))
    check_chain_map(src, dst, m)
    with pytest.raises(NotChainMap):
        check_chain_map(src, dst, SparseMap(len(dst), [{0: 1} for _ in range(len(src))]))


@given(complete_fans_2d(), unimodular_2d())
def test_betti_numbers_are_invariant_under_unimodular_maps(fan, m):
    other = transform_fan(fan, m)
    for p in ("middle", "top"):
        assert betti(gamma(build_ic(fan, p).ic)) == betti(gamma(build_ic(other, p).ic))


@given(complete_fans_2d())
def test_complete_plane_fans_have_palindromic_cohomology(fan):
    n = len(fan.rays)
    table = betti(gamma(build_ic(fan, "middle").ic))
    assert table == {(0, -2): 1, (1, -1): n - 2, (2, 0): 1}
