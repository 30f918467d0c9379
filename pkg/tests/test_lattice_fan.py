import itertools
import json
import math
import random

import pytest
import sympy
from hypothesis import given, strategies as st

from fanic import corpus
from fanic.lattice_fan import (ConeNotInFan, NotAFan, NotCodimOneFace, NotFullDimensional,
                               NotStronglyConvex, ZeroRay, barycentric_subdivision, boundary_cone,
                               complete_above_boundary, cone_fan, cone_from_rays, faces,
                               fan_from_cones, fan_from_json, incidence_sign, minimal_cone,
                               primitive, quotient_fan)
from oracles import brute_force_facets, complete_fans_2d, count_flags

COMPLETE = list(corpus.COMPLETE)
ALL = list(corpus.ALL)


# -- cones ---------------------------------------------------------------------


def test_zero_cone():
    c = cone_from_rays([], 3)
    assert c.dim == 0 and len(faces(c)) == 1


def test_unimodular_cone():
    c = cone_from_rays([(1, 0), (0, 1)])
    assert c.dim == 2 and sorted(c.span_basis) == [(0, 1), (1, 0)]
    assert len(faces(c)) == 4


def test_cone_over_square_facets_match_brute_force():
    c = corpus.square_cone()
    assert c.dim == 3 and len(c.facet_normals) == 4
    got = {frozenset(i for i, v in enumerate(c.rays) if sum(a * b for a, b in zip(n, v)) == 0)
           for n in c.facet_normals}
    assert got == brute_force_facets(list(c.rays), 3)
    assert len(faces(c)) == 10


def test_cube_cone_facets_match_brute_force():
    c = corpus.cube_cone()
    got = {frozenset(i for i, v in enumerate(c.rays) if sum(a * b for a, b in zip(n, v)) == 0)
           for n in c.facet_normals}
    assert got == brute_force_facets(list(c.rays), 4)
    assert len(got) == 6


def test_cone_errors():
    with pytest.raises(NotStronglyConvex):
        cone_from_rays([(1, 0), (-1, 0)])
    with pytest.raises(ZeroRay):
        cone_from_rays([(0, 0)])


def test_span_basis_is_saturated():
    # the lattice points of span{(2,0,1),(0,2,1)} include (1,1,1)
    c = cone_from_rays([(2, 0, 1), (0, 2, 1)])
    m = sympy.Matrix([list(v) for v in c.span_basis])
    minors = [m[:, list(cols)].det() for cols in itertools.combinations(range(3), 2)]
    assert sympy.gcd_list(minors) == 1


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=4).filter(any))
def test_primitive_divides_by_gcd(v):
    p = primitive(v)
    g = math.gcd(*v)
    assert list(p) == [x // g for x in v]
    assert math.gcd(*p) == 1


def test_incidence_examples():
    zero = cone_from_rays([], 2)
    e1 = cone_from_rays([(1, 0)])
    quad = cone_from_rays([(1, 0), (0, 1)])
    assert incidence_sign(zero, e1) == 1
    assert incidence_sign(e1, quad) == -1
    with pytest.raises(NotCodimOneFace):
        incidence_sign(zero, quad)


@pytest.mark.parametrize("name", ALL)
def test_incidence_square_vanishes(name):
    fan = corpus.get(name)
    for s in range(len(fan)):
        for rho in range(len(fan)):
            if fan.dim(rho) - fan.dim(s) == 2 and fan.is_face(s, rho):
                mids = fan.interval(s, rho, "open")
                assert len(mids) == 2
                assert sum(fan.incidence(t, rho) * fan.incidence(s, t) for t in mids) == 0


# -- fans ----------------------------------------------------------------------


def test_fan_examples():
    assert len(corpus.get("P1")) == 3
    assert len(corpus.get("P2")) == 7
    with pytest.raises(NotAFan):
        fan_from_cones(2, [(1, 0), (0, 1), (1, 1), (1, -1)], [[0, 1], [2, 3]])


@pytest.mark.parametrize("name", ALL)
def test_face_closure_and_single_zero_cone(name):
    fan = corpus.get(name)
    assert fan.cones_of_dim(0) == [0]
    for i in range(len(fan)):
        for j in fan.faces_of(i):
            assert set(fan.faces_of(j)) <= set(fan.faces_of(i))


@pytest.mark.parametrize("name", ALL)
def test_completeness_by_facet_pairing_and_sampling(name):
    fan = corpus.get(name)
    r = fan.rank
    top = fan.cones_of_dim(r)
    pairing = all(sum(1 for t in top if fan.is_face(w, t)) == 2 for w in fan.cones_of_dim(r - 1))
    rnd = random.Random(0)
    covered = True
    for _ in range(200):
        x = [rnd.randint(-9, 9) for _ in range(r)]
        if not any(fan.cones[t].contains(x) for t in top):
            covered = False
            break
    assert fan.is_complete == (pairing and covered and bool(top))


def test_star_and_interval_examples():
    fan = corpus.get("P2")
    assert sorted(fan.star(0)) == list(range(len(fan)))
    ray = fan.cones_of_dim(1)[0]
    assert len(fan.star(ray)) == 3
    top = fan.cones_of_dim(2)[0]
    assert sorted(fan.interval(0, top, "half")) == sorted(set(fan.faces_of(top)) - {top})
    with pytest.raises(ConeNotInFan):
        fan.interval(top, 0)


def test_json_round_trip_and_canonical_order():
    fan = corpus.get("F1")
    doc = json.loads(json.dumps(fan.to_json()))
    again = fan_from_json(doc)
    assert again.to_json() == fan.to_json()
    shuffled = dict(doc)
    order = [2, 0, 3, 1]
    shuffled["rays"] = [doc["rays"][k] for k in order]
    pos = {k: i for i, k in enumerate(order)}
    shuffled["cones"] = [[pos[i] for i in c] for c in reversed(doc["cones"])]
    assert fan_from_json(shuffled).to_json() == fan.to_json()


# -- subdivisions ----------------------------------------------------------------


def test_barycentric_examples():
    zero = fan_from_cones(2, [], [])
    assert len(barycentric_subdivision(zero).source) == 1
    p1 = corpus.get("P1")
    assert barycentric_subdivision(p1).source.to_json()["cones"] == p1.to_json()["cones"]
    quad = cone_fan(cone_from_rays([(1, 0), (0, 1)]))
    assert len(barycentric_subdivision(quad).source.maximal) == 2
    assert len(barycentric_subdivision(corpus.get("cube")).source.maximal) == 48


@pytest.mark.parametrize("name", ALL)
def test_barycentric_subdivision_is_simplicial_refinement(name):
    fan = corpus.get(name)
    f = barycentric_subdivision(fan)
    sigma = f.source
    assert sigma.is_simplicial and sigma.is_complete == fan.is_complete
    nonzero = [i for i in range(1, len(fan))]
    # cones of Σ of dimension k ↔ flags of length k in Δ∖{0}
    if len(fan) < 20:
        flags = count_flags(fan, nonzero)
        assert {k: v for k, v in flags.items() if k} == {
            d: len(sigma.cones_of_dim(d)) for d in range(1, sigma.rank + 1) if sigma.cones_of_dim(d)}
    for s, t in enumerate(f.cone_map):
        c = fan.cones[t]
        assert c.contains(sigma.cones[s].barycenter(), relint=True) if s else t == 0
        for v in sigma.cones[s].rays:
            assert c.contains(v)
    # f preserves the face order
    for s, u in sigma.face_pairs:
        assert fan.is_face(f.cone_map[s], f.cone_map[u])
    # every maximal cone of Δ is covered: its barycenter lies in a cone of Σ
    for m in fan.maximal:
        minimal_cone(sigma, fan.cones[m].barycenter())


def test_quotient_fan_examples():
    fan = corpus.get("P2")
    q0 = quotient_fan(fan, 0)
    assert q0.fan.f_vector == fan.f_vector
    ray = fan.cones_of_dim(1)[0]
    q = quotient_fan(fan, ray)
    assert q.fan.rank == 1 and q.fan.is_complete and len(q.fan.rays) == 2


@pytest.mark.parametrize("name", COMPLETE)
def test_quotients_of_complete_fans_are_complete(name):
    fan = corpus.get(name)
    for eta in range(len(fan)):
        q = quotient_fan(fan, eta)
        assert q.fan.is_complete
        for s in q.star:
            assert q.fan.dim(q.to_quotient[s]) == fan.dim(s) - fan.dim(eta)


def test_complete_above_boundary_examples():
    full, delta, g = complete_above_boundary(cone_from_rays([(1,)]))
    assert full.is_complete and full.f_vector == (1, 2)
    full, delta, g = complete_above_boundary(cone_from_rays([(1, 0), (0, 1)]))
    assert full.is_complete and len(full.maximal) == 3
    assert len(delta) == len(full) - 1
    full, delta, g = complete_above_boundary(corpus.square_cone())
    assert full.is_complete and len(full.maximal) == 5
    assert full.rays[next(iter(full.ray_sets[g]))] == (0, 0, -1)
    with pytest.raises(NotFullDimensional):
        complete_above_boundary(cone_from_rays([(1, 0, 0), (0, 1, 0)]))


def test_boundary_cone_recognition():
    assert boundary_cone(corpus.get("square-boundary")).dim == 3
    assert boundary_cone(corpus.get("cube-boundary")).dim == 4


@given(complete_fans_2d())
def test_random_plane_fans_are_complete_and_simplicial(fan):
    assert fan.is_complete and fan.is_simplicial
    n = len(fan.rays)
    assert fan.f_vector == (1, n, n)
