"""Named test fans and seeded random simplicial complete fans."""

from __future__ import annotations

import itertools
import random
from typing import Callable

from .lattice_fan import Cone, Fan, cone_fan, fan_from_cones, primitive


def p1() -> Fan:
    return Fan(1, [(1,), (-1,)], [[0], [1]], name="P1")


def p2() -> Fan:
    return Fan(2, [(1, 0), (0, 1), (-1, -1)], [[0, 1], [1, 2], [2, 0]], name="P2")


def hirzebruch(a: int = 1) -> Fan:
    return Fan(2, [(1, 0), (0, 1), (-1, a), (0, -1)], [[0, 1], [1, 2], [2, 3], [3, 0]], name=f"F{a}")


def cube_faces() -> Fan:
    """Face fan of the cube [−1,1]³: eight rays, six square cones."""
    rays = list(itertools.product((-1, 1), repeat=3))
    cones = []
    for axis in range(3):
        for s in (-1, 1):
            cones.append([k for k, v in enumerate(rays) if v[axis] == s])
    return Fan(3, rays, cones, name="cube")


def square_cone() -> Cone:
    return Cone([(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)], 3)


def cube_cone() -> Cone:
    return Cone([v + (1,) for v in itertools.product((-1, 1), repeat=3)], 4)


def quadrant() -> Cone:
    return Cone([(1, 0), (0, 1)], 2)


def square_boundary() -> Fan:
    f = cone_fan(square_cone(), boundary=True)
    f.name = "square-boundary"
    return f


def square_cone_fan() -> Fan:
    """F(π) for the cone over the square: the smallest non-simplicial fan here."""
    f = cone_fan(square_cone())
    f.name = "square-cone"
    return f


def cube_boundary() -> Fan:
    f = cone_fan(cube_cone(), boundary=True)
    f.name = "cube-boundary"
    return f


def _det3(a, b, c) -> int:
    return (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _hull_facets(pts: list[tuple[int, ...]]) -> list[tuple[int, int, int]] | None:
    """Triangular facets of the hull of ``pts``; None unless every point is a vertex
    and no four points are coplanar on a facet."""
    facets = []
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        a, b, c = pts[i], pts[j], pts[k]
        u = [b[t] - a[t] for t in range(3)]
        v = [c[t] - a[t] for t in range(3)]
        signs = set()
        for m, q in enumerate(pts):
            if m in (i, j, k):
                continue
            w = [q[t] - a[t] for t in range(3)]
            s = _det3(u, v, w)
            signs.add((s > 0) - (s < 0))
        if 0 in signs and len(signs - {0}) <= 1:
            return None
        if len(signs) == 1:
            facets.append((i, j, k))
    if {x for f in facets for x in f} != set(range(len(pts))):
        return None
    return facets


def random_simplicial(seed: int, n: int = 7, box: int = 3) -> Fan:
    """Face fan of a random simplicial lattice polytope containing 0 in its interior."""
    rng = random.Random(seed)
    while True:
        pts: list[tuple[int, ...]] = []
        while len(pts) < n:
            v = tuple(rng.randint(-box, box) for _ in range(3))
            if any(v):
                v = primitive(v)
                if v not in pts:
                    pts.append(v)
        facets = _hull_facets(pts)
        if facets is None:
            continue
        # the origin must lie strictly inside: no facet plane passes through it
        if any(_det3(*(pts[x] for x in f)) == 0 for f in facets):
            continue
        try:
            fan = Fan(3, pts, [list(f) for f in facets], name=f"random{seed}")
        except ValueError:
            continue
        if fan.is_complete and fan.is_simplicial:
            return fan


RANDOM_SEEDS = (1, 2, 3, 4, 5)

COMPLETE: dict[str, Callable[[], Fan]] = {
    "P1": p1,
    "P2": p2,
    "F1": hirzebruch,
    "cube": cube_faces,
    **{f"random{s}": (lambda s=s: random_simplicial(s)) for s in RANDOM_SEEDS},
}

BOUNDARY: dict[str, Callable[[], Fan]] = {
    "square-boundary": square_boundary,
    "cube-boundary": cube_boundary,
}

# the fans named by the acceptance criteria
ACCEPTANCE: dict[str, Callable[[], Fan]] = {**COMPLETE, **BOUNDARY}

ALL: dict[str, Callable[[], Fan]] = {**ACCEPTANCE, "square-cone": square_cone_fan}

_cache: dict[str, Fan] = {}


def canonical(fan: Fan) -> Fan:
    return fan_from_cones(fan.rank, fan.rays, fan.max_cone_sets(), validate=False, name=fan.name)


def get(name: str) -> Fan:
    """The named corpus fan in canonical ray order (as the CLI would load it)."""
    if name not in _cache:
        _cache[name] = canonical(ALL[name]())
    return _cache[name]


def names() -> list[str]:
    return list(ALL)
