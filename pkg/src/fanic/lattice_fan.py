"""Rational polyhedral cones and fans in N = Z^r.

Cones are stored by their primitive ray generators.  Everything is exact:
lattice data goes through integer Hermite normal forms, and dual cones are
computed with the double description method on rational data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

from . import linalg

IntVec = tuple[int, ...]


class FanError(ValueError):
    """Base class for geometric input errors."""


class ZeroRay(FanError):
    pass


class NotStronglyConvex(FanError):
    pass


class NotAFan(FanError):
    pass


class ConeNotInFan(FanError):
    pass


class NotCodimOneFace(FanError):
    pass


class NotFullDimensional(FanError):
    pass


class NotABoundaryFan(FanError):
    pass


# ---------------------------------------------------------------------------
# integer lattice helpers


def primitive(v: Sequence) -> IntVec:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(int(x.numerator), int(x.denominator)) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ZeroRay("zero vector has no primitive generator")
    return tuple(x // g for x in ints)


def hnf(rows: Iterable[Sequence[int]]) -> list[IntVec]:
    """Row Hermite normal form; zero rows dropped.

    Pivots are positive, move strictly right going down, and entries above a
    pivot are reduced into [0, pivot).
    """
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    out: list[list[int]] = []
    for c in range(ncols):
        live = [r for r in a if r[c] != 0]
        if not live:
            continue
        rest = [r for r in a if r[c] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[c]))
            p = live[0]
            nxt = [p]
            for r in live[1:]:
                q = r[c] // p[c]
                r = [x - q * y for x, y in zip(r, p)]
                if r[c] != 0:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            live = nxt
        p = live[0]
        if p[c] < 0:
            p = [-x for x in p]
        out.append(p)
        a = rest
    for i, row in enumerate(out):
        c = next(k for k, x in enumerate(row) if x)
        for j in range(i):
            q = out[j][c] // row[c]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], row)]
    return [tuple(r) for r in out]


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[IntVec]:
    """Z-basis (in HNF) of {x in Z^ncols : rows @ x = 0}."""
    m = [list(r) for r in rows]
    # column operations on [m ; I] keep the bottom block unimodular
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    cols_m = [[row[j] for row in m] for j in range(ncols)]
    cols_u = [[u[i][j] for i in range(ncols)] for j in range(ncols)]
    piv = 0
    for i in range(len(m)):
        while True:
            nz = [j for j in range(piv, ncols) if cols_m[j][i] != 0]
            if len(nz) <= 1:
                break
            j0 = min(nz, key=lambda j: abs(cols_m[j][i]))
            for j in nz:
                if j == j0:
                    continue
                q = cols_m[j][i] // cols_m[j0][i]
                cols_m[j] = [x - q * y for x, y in zip(cols_m[j], cols_m[j0])]
                cols_u[j] = [x - q * y for x, y in zip(cols_u[j], cols_u[j0])]
        nz = [j for j in range(piv, ncols) if cols_m[j][i] != 0]
        if nz:
            j = nz[0]
            cols_m[piv], cols_m[j] = cols_m[j], cols_m[piv]
            cols_u[piv], cols_u[j] = cols_u[j], cols_u[piv]
            piv += 1
    return hnf(cols_u[piv:])


def saturation(vectors: Sequence[Sequence], r: int) -> list[IntVec]:
    """HNF basis of N ∩ span_Q(vectors)."""
    vecs = [list(v) for v in vectors if any(v)]
    if not vecs:
        return []
    perp = linalg.nullspace(vecs, r)
    if not perp:
        return [tuple(int(i == j) for j in range(r)) for i in range(r)]
    perp_int = [primitive(p) for p in perp]
    return integer_kernel(perp_int, r)


class Frame:
    """An ordered Q-linearly independent family of integer vectors with a
    fixed left inverse, used for coordinates inside its span."""

    _cache: dict = {}

    def __new__(cls, rows: Sequence[Sequence[int]], r: int):
        key = (tuple(tuple(x) for x in rows), r)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        self.rows = key[0]
        self.r = r
        self._setup()
        cls._cache[key] = self
        return self

    def _setup(self):
        s = len(self.rows)
        self.dim = s
        # pick s pivot columns where the frame matrix is invertible
        cols: list[int] = []
        e = linalg.Echelon()
        for j in range(self.r):
            v = {i: self.rows[i][j] for i in range(s) if self.rows[i][j]}
            if v and e.add(v):
                cols.append(j)
            if len(cols) == s:
                break
        if len(cols) != s:
            raise ValueError("frame vectors are linearly dependent")
        self.pivot_cols = tuple(cols)
        sq = [[Fraction(self.rows[i][c]) for i in range(s)] for c in cols]  # sq @ coords = v[cols]
        inv = []
        for k in range(s):
            x = linalg.dense_solve(sq, [int(k == i) for i in range(s)])
            inv.append(x)
        # inv[k] solves sq x = e_k, so coords = sum_k v[cols[k]] * inv[k]
        self._inv = inv
        self._coord_cache: dict = {}

    def coords(self, v: Sequence) -> tuple[Fraction, ...] | None:
        """Coordinates of v in this frame, or None if v is outside the span."""
        key = tuple(v)
        if key in self._coord_cache:
            return self._coord_cache[key]
        s = self.dim
        c = [Fraction(0)] * s
        for k, col in enumerate(self.pivot_cols):
            if v[col]:
                for i in range(s):
                    c[i] += v[col] * self._inv[k][i]
        back = [sum(c[i] * self.rows[i][j] for i in range(s)) for j in range(self.r)]
        out = tuple(c) if all(b == x for b, x in zip(back, v)) else None
        self._coord_cache[key] = out
        return out

    def contains(self, v: Sequence) -> bool:
        return self.coords(v) is not None

    def __repr__(self):
        return f"Frame({list(self.rows)})"


def orientation_sign(frame: Frame, vectors: Sequence[Sequence]) -> int:
    """Sign of v_1∧…∧v_s relative to the frame's wedge (0 if degenerate)."""
    if len(vectors) != frame.dim:
        raise ValueError("need exactly dim vectors")
    if frame.dim == 0:
        return 1
    m = []
    for v in vectors:
        c = frame.coords(v)
        if c is None:
            raise ValueError(f"{v} not in span of frame")
        m.append(list(c))
    d = linalg.det(m)
    return (d > 0) - (d < 0)


# ---------------------------------------------------------------------------
# double description


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cone_generators(ineqs: Sequence[Sequence], k: int) -> list[IntVec]:
    """Extreme rays of the pointed cone {y in Q^k : a·y ≥ 0 for a in ineqs}.

    Requires the inequalities to have rank k (so the cone is pointed).
    """
    if k == 0:
        return []
    A = [list(a) for a in ineqs if any(a)]
    # initial simplicial cone from k independent rows
    basis: list[int] = []
    e = linalg.Echelon()
    for i, a in enumerate(A):
        if e.add({j: x for j, x in enumerate(a) if x}):
            basis.append(i)
        if len(basis) == k:
            break
    if len(basis) < k:
        raise ValueError("inequality system is not of full rank")
    B = [A[i] for i in basis]
    rays = []
    for col in range(k):
        x = linalg.dense_solve(B, [int(i == col) for i in range(k)])
        rays.append(primitive(x))
    done = list(basis)
    for i, a in enumerate(A):
        if i in basis:
            continue
        vals = [_dot(a, y) for y in rays]
        pos = [y for y, v in zip(rays, vals) if v > 0]
        neg = [(y, v) for y, v in zip(rays, vals) if v < 0]
        zer = [y for y, v in zip(rays, vals) if v == 0]
        new = pos + zer
        if neg:
            posv = [(y, v) for y, v in zip(rays, vals) if v > 0]
            for (p, vp), (n, vn) in itertools.product(posv, neg):
                tight = [A[j] for j in done if _dot(A[j], p) == 0 and _dot(A[j], n) == 0]
                if k > 2 and (not tight or linalg.dense_rank(tight) < k - 2):
                    continue
                w = [vp * y - vn * x for x, y in zip(p, n)]
                new.append(primitive(w))
        rays = sorted(set(new))
        done.append(i)
    return rays


# ---------------------------------------------------------------------------
# cones


class Cone:
    """A strongly convex rational polyhedral cone given by primitive rays.

    Rays are the extremal ones, sorted lexicographically, so two Cone objects
    compare equal exactly when they are the same subset of N_R.
    """

    def __init__(self, rays: Iterable[Sequence[int]], r: int | None = None):
        rays = list(rays)
        if r is None:
            if not rays:
                raise ValueError("ambient rank needed for the zero cone")
            r = len(rays[0])
        prim = []
        for v in rays:
            if len(v) != r:
                raise ValueError(f"ray {tuple(v)} has wrong length for rank {r}")
            if not any(v):
                raise ZeroRay("zero vector given as a ray")
            prim.append(primitive(v))
        self.r = r
        gens = sorted(set(prim))
        self.span_basis: tuple[IntVec, ...] = tuple(saturation(gens, r))
        self.dim = len(self.span_basis)
        self.frame = Frame(self.span_basis, r)
        local = [self.frame.coords(g) for g in gens]
        self._facet_normals = cone_generators(local, self.dim) if self.dim else []
        if self.dim and (not self._facet_normals or linalg.dense_rank(self._facet_normals) != self.dim):
            raise NotStronglyConvex(f"cone over {gens} contains a line")
        # keep only extremal generators
        zero_sets = [frozenset(i for i, g in enumerate(local) if _dot(u, g) == 0) for u in self._facet_normals]
        ext = []
        for i in range(len(gens)):
            # a generator is extremal iff the facets through it cut out just its ray
            through = [z for z in zero_sets if i in z]
            common = frozenset(range(len(gens)))
            for z in through:
                common &= z
            if self.dim == 1 or linalg.dense_rank([list(local[j]) for j in common]) == 1:
                ext.append(i)
        self.rays: tuple[IntVec, ...] = tuple(gens[i] for i in ext)
        self._local = [local[i] for i in ext]

    @property
    def facet_normals(self) -> list[IntVec]:
        """Inward facet normals in coordinates of ``span_basis``."""
        return list(self._facet_normals)

    @cached_property
    def det_orientation(self) -> tuple[IntVec, ...]:
        """The canonical generator of det(σ): wedge of span_basis in order."""
        return self.span_basis

    @cached_property
    def face_ray_sets(self) -> list[frozenset[int]]:
        """Faces as subsets of ray positions, sorted by (size, members)."""
        n = len(self.rays)
        if self.dim == n:  # simplicial: every subset is a face
            sets = [frozenset(c) for k in range(n + 1) for c in itertools.combinations(range(n), k)]
        else:
            facets = {frozenset(i for i, g in enumerate(self._local) if _dot(u, g) == 0) for u in self._facet_normals}
            sets = {frozenset(range(n))}
            frontier = set(sets)
            while frontier:
                nxt = set()
                for s in frontier:
                    for f in facets:
                        t = s & f
                        if t not in sets:
                            nxt.add(t)
                sets |= nxt
                frontier = nxt
            sets = list(sets)
        return sorted(sets, key=lambda s: (len(s), sorted(s)))

    def faces(self) -> list["Cone"]:
        return [Cone([self.rays[i] for i in sorted(s)], self.r) for s in self.face_ray_sets]

    @property
    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def contains(self, x: Sequence, relint: bool = False) -> bool:
        c = self.frame.coords(x)
        if c is None:
            return False
        vals = [_dot(u, c) for u in self._facet_normals]
        if relint:
            return all(v > 0 for v in vals)
        return all(v >= 0 for v in vals)

    def barycenter(self) -> IntVec:
        """Sum of the primitive ray generators (an interior lattice point)."""
        return tuple(sum(col) for col in zip(*self.rays)) if self.rays else (0,) * self.r

    def inequalities(self) -> tuple[list[list[Fraction]], list[IntVec]]:
        """Ambient H-description: (inequalities g·x ≥ 0, equations h·x = 0)."""
        s = self.dim
        inv = self.frame._inv
        cols = self.frame.pivot_cols
        ineqs = []
        for u in self._facet_normals:
            g = [Fraction(0)] * self.r
            for k, col in enumerate(cols):
                g[col] = sum(u[i] * inv[k][i] for i in range(s))
            ineqs.append(g)
        eqs = [primitive(p) for p in linalg.nullspace([list(b) for b in self.span_basis], self.r)] if s else [
            tuple(int(i == j) for j in range(self.r)) for i in range(self.r)]
        return ineqs, eqs

    def __eq__(self, other):
        return isinstance(other, Cone) and self.r == other.r and self.rays == other.rays

    def __hash__(self):
        return hash((self.r, self.rays))

    def __repr__(self):
        return f"Cone({[list(v) for v in self.rays]})"


def cone_from_rays(rays: Iterable[Sequence[int]], r: int | None = None) -> Cone:
    return Cone(rays, r)


def faces(c: Cone) -> list[Cone]:
    return c.faces()


def incidence_sign(sigma: Cone, tau: Cone) -> int:
    """ε with q'(det σ) = ε det τ, where q'(w) = a∧w for a ∈ τ∖σ."""
    if tau.dim - sigma.dim != 1 or not all(tau.contains(v) for v in sigma.rays) \
            or sigma not in tau.faces():
        raise NotCodimOneFace(f"{sigma} is not a facet of {tau}")
    a = next(v for v in tau.rays if v not in sigma.rays)
    return orientation_sign(tau.frame, [a, *sigma.span_basis])


def intersect(c1: Cone, c2: Cone) -> list[IntVec]:
    """Extreme rays of c1 ∩ c2."""
    r = c1.r
    g1, e1 = c1.inequalities()
    g2, e2 = c2.inequalities()
    eqs = [list(e) for e in e1 + e2]
    if eqs:
        K = linalg.nullspace(eqs, r)
    else:
        K = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    k = len(K)
    if k == 0:
        return []
    A = [[_dot(g, kv) for kv in K] for g in g1 + g2]
    ys = cone_generators(A, k)
    return [primitive([sum(y[t] * K[t][j] for t in range(k)) for j in range(r)]) for y in ys]


# ---------------------------------------------------------------------------
# fans


class Fan:
    """A finite fan: cones closed under faces, indexed with the zero cone at 0.

    Cones are sorted by (dimension, sorted ray indices).  ``ray_sets[i]`` is
    the set of global ray indices of cone i.
    """

    def __init__(self, rank: int, rays: Sequence[Sequence[int]], max_cones: Iterable[Iterable[int]],
                 validate: bool = True, name: str | None = None):
        self.rank = rank
        self.name = name
        self.input_ray_index = list(range(len(rays)))
        self.rays: list[IntVec] = []
        for v in rays:
            if len(v) != rank:
                raise FanError(f"ray {list(v)} has length {len(v)}, expected {rank}")
            self.rays.append(primitive(v))
        if len(set(self.rays)) != len(self.rays):
            raise FanError("duplicate rays")
        ray_index = {v: i for i, v in enumerate(self.rays)}
        found: dict[frozenset[int], Cone] = {frozenset(): Cone([], rank)}
        maxima = []
        for idx in max_cones:
            idx = frozenset(idx)
            for i in idx:
                if not 0 <= i < len(self.rays):
                    raise FanError(f"ray index {i} out of range")
            c = Cone([self.rays[i] for i in sorted(idx)], rank)
            if len(c.rays) != len(idx):
                raise NotAFan(f"cone {sorted(idx)} lists a non-extremal ray")
            maxima.append((idx, c))
            for s in c.face_ray_sets:
                key = frozenset(ray_index[c.rays[i]] for i in s)
                if key not in found:
                    found[key] = c if len(key) == len(idx) else Cone([self.rays[i] for i in sorted(key)], rank)
        if validate:
            self._validate(maxima)
        keys = sorted(found, key=lambda s: (found[s].dim, sorted(s)))
        self.ray_sets: list[frozenset[int]] = keys
        self.cones: list[Cone] = [found[k] for k in keys]
        self.index: dict[frozenset[int], int] = {k: i for i, k in enumerate(keys)}
        for i, v in enumerate(self.rays):
            if frozenset([i]) not in self.index:
                raise FanError(f"ray {i} is not a cone of the fan")
        self._faces = []
        for k, c in zip(keys, self.cones):
            local = [ray_index[v] for v in c.rays]
            self._faces.append(tuple(sorted(self.index[frozenset(local[i] for i in s)] for s in c.face_ray_sets)))

    def _validate(self, maxima):
        for (i1, c1), (i2, c2) in itertools.combinations(maxima, 2):
            common = i1 & i2
            g = Cone([self.rays[i] for i in sorted(common)], self.rank)
            f1 = {frozenset(c1.rays[i] for i in s) for s in c1.face_ray_sets}
            f2 = {frozenset(c2.rays[i] for i in s) for s in c2.face_ray_sets}
            key = frozenset(g.rays)
            if key not in f1 or key not in f2:
                raise NotAFan(f"cones {sorted(i1)} and {sorted(i2)} meet in a non-face")
            for x in intersect(c1, c2):
                if not g.contains(x):
                    raise NotAFan(f"cones {sorted(i1)} and {sorted(i2)} overlap beyond a common face")

    # -- basic structure ----------------------------------------------------

    def __len__(self):
        return len(self.cones)

    def dim(self, i: int) -> int:
        return self.cones[i].dim

    def faces_of(self, i: int) -> tuple[int, ...]:
        """Indices of all faces of cone i, including i itself."""
        return self._faces[i]

    def is_face(self, i: int, j: int) -> bool:
        return self.ray_sets[i] <= self.ray_sets[j] and i in self._faces[j]

    @cached_property
    def cofaces(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in self.cones]
        for j, fs in enumerate(self._faces):
            for i in fs:
                out[i].append(j)
        return [tuple(sorted(x)) for x in out]

    @cached_property
    def face_pairs(self) -> list[tuple[int, int]]:
        """All (σ, τ) with σ ≺ τ, σ ≠ τ."""
        return [(i, j) for j in range(len(self)) for i in self._faces[j] if i != j]

    def index_of(self, c: Cone) -> int:
        ids = []
        pos = {v: i for i, v in enumerate(self.rays)}
        for v in c.rays:
            if v not in pos:
                raise ConeNotInFan(repr(c))
            ids.append(pos[v])
        k = frozenset(ids)
        if k not in self.index:
            raise ConeNotInFan(repr(c))
        return self.index[k]

    @cached_property
    def f_vector(self) -> tuple[int, ...]:
        top = max((c.dim for c in self.cones), default=0)
        f = [0] * (top + 1)
        for c in self.cones:
            f[c.dim] += 1
        return tuple(f)

    def cones_of_dim(self, d: int) -> list[int]:
        return [i for i, c in enumerate(self.cones) if c.dim == d]

    @cached_property
    def maximal(self) -> list[int]:
        return [i for i in range(len(self)) if self.cofaces[i] == (i,)]

    def max_cone_sets(self) -> list[list[int]]:
        return [sorted(self.ray_sets[i]) for i in self.maximal]

    @property
    def is_simplicial(self) -> bool:
        return all(c.is_simplicial for c in self.cones)

    @property
    def is_complete(self) -> bool:
        r = self.rank
        if any(self.cones[i].dim != r for i in self.maximal):
            return False
        if r == 0:
            return True
        for i in self.cones_of_dim(r - 1):
            if sum(1 for j in self.cofaces[i] if self.cones[j].dim == r) != 2:
                return False
        return True

    def codim_one(self, i: int) -> list[int]:
        """Facets of cone i."""
        d = self.cones[i].dim
        return [j for j in self._faces[i] if self.cones[j].dim == d - 1]

    def incidence(self, i: int, j: int) -> int:
        cache = self.__dict__.setdefault("_inc", {})
        if (i, j) not in cache:
            if i not in self._faces[j] or self.cones[j].dim - self.cones[i].dim != 1:
                raise NotCodimOneFace(f"{i} is not a facet of {j}")
            a = next(self.rays[k] for k in self.ray_sets[j] - self.ray_sets[i])
            cache[(i, j)] = orientation_sign(self.cones[j].frame, [a, *self.cones[i].span_basis])
        return cache[(i, j)]

    # -- subsets --------------------------------------------------------------

    def star(self, eta: int) -> list[int]:
        """Δ(η≺): all cones having η as a face."""
        return list(self.cofaces[eta])

    def interval(self, eta: int, pi: int, kind: str = "closed") -> list[int]:
        """F[η,π] (closed), F(η,π) (open), or F[η,π) (half)."""
        if eta not in self._faces[pi]:
            raise ConeNotInFan(f"{eta} is not a face of {pi}")
        out = [k for k in self._faces[pi] if eta in self._faces[k]]
        if kind == "closed":
            return out
        if kind == "open":
            return [k for k in out if k not in (eta, pi)]
        if kind == "half":
            return [k for k in out if k != pi]
        raise ValueError(f"unknown interval kind {kind!r}")

    def subfan(self, keep: Iterable[int]) -> tuple["Fan", list[int]]:
        """Fan on a face-closed subset; also returns new-index → old-index."""
        keep = set(keep)
        for i in keep:
            if not set(self._faces[i]) <= keep:
                raise NotAFan("subset is not closed under faces")
        used = sorted({k for i in keep for k in self.ray_sets[i]})
        remap = {old: new for new, old in enumerate(used)}
        maxi = [i for i in keep if not any(j in keep for j in self.cofaces[i] if j != i)]
        sub = Fan(self.rank, [self.rays[k] for k in used],
                  [[remap[k] for k in self.ray_sets[i]] for i in maxi], validate=False)
        back = [self.index[frozenset(used[k] for k in s)] for s in sub.ray_sets]
        return sub, back

    def flags(self, cones: Iterable[int]) -> list[tuple[int, ...]]:
        """Sd(Φ): strictly increasing chains in a cone set, sorted by (length, indices)."""
        cs = sorted(set(cones), key=lambda i: (self.cones[i].dim, i))
        out: list[tuple[int, ...]] = []

        def grow(chain):
            out.append(chain)
            last = chain[-1] if chain else None
            for c in cs:
                if last is None or (c != last and last in self._faces[c]):
                    grow(chain + (c,))

        grow(())
        return sorted(out, key=lambda a: (len(a), a))

    def __repr__(self):
        nm = f" {self.name}" if self.name else ""
        return f"<Fan{nm} rank {self.rank}, f = {self.f_vector}>"

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        doc = {"format": "fanic/1", "rank": self.rank, "rays": [list(v) for v in self.rays],
               "cones": self.max_cone_sets()}
        if self.name:
            doc["name"] = self.name
        return doc


def fan_from_cones(rank: int, rays: Sequence[Sequence[int]], max_cones: Iterable[Iterable[int]],
                   validate: bool = True, name: str | None = None) -> Fan:
    """A fan in canonical form: rays sorted, so cone indices do not depend on input order.

    ``fan.input_ray_index[k]`` is the canonical index of input ray k.
    """
    prim = [primitive(v) if any(v) else tuple(v) for v in rays]
    order = sorted(range(len(prim)), key=lambda k: prim[k])
    pos = {k: i for i, k in enumerate(order)}
    cones = [[pos[i] if 0 <= i < len(prim) else i for i in c] for c in max_cones]
    fan = Fan(rank, [prim[k] for k in order], cones, validate=validate, name=name)
    fan.input_ray_index = [pos[k] for k in range(len(prim))]
    return fan


def fan_from_json(doc: dict, validate: bool = True) -> Fan:
    fmt = doc.get("format", "fanic/1")
    if fmt != "fanic/1":
        raise FanError(f"unsupported format {fmt!r}")
    try:
        rank = int(doc["rank"])
        rays = [[int(x) for x in v] for v in doc["rays"]]
        cones = [[int(i) for i in c] for c in doc["cones"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FanError(f"malformed fan document: {exc}") from exc
    return fan_from_cones(rank, rays, cones, validate=validate, name=doc.get("name"))


def cone_fan(pi: Cone, boundary: bool = False) -> Fan:
    """F(π), or its boundary F(π)∖{π} when ``boundary`` is set."""
    rays = list(pi.rays)
    if boundary:
        n = len(rays)
        facets = [s for s in pi.face_ray_sets if len(s) < n and pi.dim - 1 == linalg.dense_rank(
            [list(rays[i]) for i in s] or [[0] * pi.r])]
        if pi.dim == 1:
            facets = [frozenset()]
        return Fan(pi.r, rays, [sorted(s) for s in facets], validate=False)
    return Fan(pi.r, rays, [list(range(len(rays)))], validate=False)


def boundary_cone(fan: Fan) -> Cone:
    """The full cone π when ``fan`` is F(π)∖{π}; raises NotABoundaryFan otherwise."""
    if not fan.rays:
        raise NotABoundaryFan("fan has no rays")
    try:
        pi = Cone(fan.rays, fan.rank)
    except NotStronglyConvex as exc:
        raise NotABoundaryFan(str(exc)) from exc
    if pi.dim != fan.rank or len(pi.rays) != len(fan.rays):
        raise NotABoundaryFan("rays do not span a full-dimensional cone with these extremal rays")
    pos = {v: i for i, v in enumerate(fan.rays)}
    proper = {frozenset(pos[pi.rays[i]] for i in s) for s in pi.face_ray_sets if len(s) < len(pi.rays)}
    if proper != set(fan.ray_sets):
        raise NotABoundaryFan("cones are not the proper faces of the cone over all rays")
    return pi


# ---------------------------------------------------------------------------
# subdivisions, quotients, completions


@dataclass
class Subdivision:
    """A subdivision f: Δ′ → Δ with ``cone_map[σ]`` the minimal cone of Δ containing σ.

    For barycentric subdivisions ``flag_of[σ]`` records the flag α with σ = c(α).
    """

    source: Fan
    target: Fan
    cone_map: list[int]
    flag_of: list[tuple[int, ...]] | None = None
    barycenters: dict[int, IntVec] = field(default_factory=dict)

    def fiber(self, rho: int) -> list[int]:
        return [s for s, t in enumerate(self.cone_map) if t == rho]


def minimal_cone(fan: Fan, x: Sequence) -> int:
    """Index of the cone whose relative interior contains x."""
    for i, c in enumerate(fan.cones):
        if c.contains(x, relint=True) if c.dim else not any(x):
            return i
    raise ConeNotInFan(f"point {tuple(x)} is outside the support")


def subdivision(source: Fan, target: Fan) -> Subdivision:
    cmap = [minimal_cone(target, c.barycenter()) for c in source.cones]
    return Subdivision(source, target, cmap)


def barycentric_subdivision(fan: Fan) -> Subdivision:
    """Σ = {c(α)}, with a(ρ) the sum of primitive generators of ρ."""
    nonzero = [i for i in range(len(fan)) if fan.cones[i].dim > 0]
    bary = {i: fan.cones[i].barycenter() for i in nonzero}
    sig_rays = [primitive(bary[i]) for i in nonzero]
    ray_of = {c: k for k, c in enumerate(nonzero)}
    flags = fan.flags(nonzero)
    covered = set()
    for b in flags:
        for k in range(len(b)):
            covered.add(b[:k] + b[k + 1:])
    maximal = [a for a in flags if a and a not in covered]
    sigma = Fan(fan.rank, sig_rays, [[ray_of[c] for c in a] for a in maximal], validate=False,
                name=f"Sd({fan.name})" if fan.name else None)
    flag_of = []
    cmap = []
    for s in sigma.ray_sets:
        a = tuple(sorted((nonzero[k] for k in s), key=lambda c: fan.cones[c].dim))
        flag_of.append(a)
        cmap.append(a[-1] if a else 0)
    return Subdivision(sigma, fan, cmap, flag_of, bary)


@dataclass
class QuotientFan:
    """Δ[η] inside N/N(η) ≅ Z^{r−r_η}; ``proj`` rows give the projection."""

    fan: Fan
    eta: int
    proj: list[IntVec]
    star: list[int]
    to_quotient: dict[int, int]

    def project(self, v: Sequence) -> IntVec:
        return tuple(_dot(p, v) for p in self.proj)


def quotient_fan(fan: Fan, eta: int) -> QuotientFan:
    r = fan.rank
    basis = fan.cones[eta].span_basis
    proj = integer_kernel([list(b) for b in basis], r) if basis else [
        tuple(int(i == j) for j in range(r)) for i in range(r)]
    star = fan.star(eta)
    qrays: list[IntVec] = []
    qpos: dict[IntVec, int] = {}
    ray_sets = []
    for s in star:
        image = [tuple(_dot(p, fan.rays[k]) for p in proj) for k in fan.ray_sets[s]]
        ids = set()
        for v in Cone([v for v in image if any(v)], r - len(basis)).rays:
            if v not in qpos:
                qpos[v] = len(qrays)
                qrays.append(v)
            ids.add(qpos[v])
        ray_sets.append(frozenset(ids))
    maxi = [ray_sets[k] for k, s in enumerate(star) if not any(j in star and j != s for j in fan.cofaces[s])]
    q = Fan(r - len(basis), qrays, [sorted(m) for m in maxi], validate=False)
    to_q = {s: q.index[ray_sets[k]] for k, s in enumerate(star)}
    return QuotientFan(q, eta, proj, star, to_q)


def complete_above_boundary(pi: Cone) -> tuple[Fan, Fan, int]:
    """Δ̃ = F(π) ∪ {γ+σ}, Δ = Δ̃∖{π}, and the index of γ in Δ̃.

    γ is the ray through −a(π).
    """
    if pi.dim != pi.r:
        raise NotFullDimensional(f"{pi} is not full-dimensional")
    gamma = primitive([-x for x in pi.barycenter()])
    rays = list(pi.rays) + [gamma]
    g = len(rays) - 1
    n = len(pi.rays)
    facets = [s for s in pi.face_ray_sets if len(s) < n and
              (pi.dim == 1 or linalg.dense_rank([list(pi.rays[i]) for i in s]) == pi.dim - 1)]
    if pi.dim == 1:
        facets = [frozenset()]
    maxi = [list(range(n))] + [sorted(s) + [g] for s in facets]
    full = Fan(pi.r, rays, maxi)
    drop = full.index[frozenset(range(n))]
    delta, _ = full.subfan(i for i in range(len(full)) if i != drop)
    return full, delta, full.index[frozenset([g])]
